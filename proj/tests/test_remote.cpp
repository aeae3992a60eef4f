#include "doctest.h"

#include <cmath>

#include "httplib.h"
#include "json.hpp"

#include "epgf/engine.hpp"
#include "epgf/ngram.hpp"
#include "epgf/remote.hpp"

using namespace epgf;
using nlohmann::json;

namespace {

NgramModel loopback_model() {
    Alphabet alphabet;
    std::vector<TaggedSequence> corpus;
    const char* texts[] = {"MKTAYIAKQRQISFVKSHFSRQLEERLGLIEV", "ADKELKFLVVDDFSTMRRIVRNLLKELGFNNV",
                           "SITVSQLHAELDQLRAELAEGRVDALELAHRV"};
    for (const char* t : texts)
        corpus.push_back({validate_sequence(t, alphabet), std::optional<std::string>("T1")});
    return NgramModel::train(corpus, 3, 0.1);
}

}  // namespace

TEST_CASE("info handshake exposes the alphabet") {
    auto model = loopback_model();
    ModelServer server(model);
    server.start("127.0.0.1", 0);

    httplib::Client cli("127.0.0.1", server.port());
    auto res = cli.Get("/v1/info");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto info = json::parse(res->body);
    CHECK(info["alphabet_hash"] == model.alphabet().hash());
    CHECK(info["order"] == 3);
    CHECK(info["conditions"] == std::vector<std::string>{"T1"});
    server.stop();
}

TEST_CASE("server validates bodies and the hash handshake") {
    auto model = loopback_model();
    ModelServer server(model);
    server.start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", server.port());

    auto bad = cli.Post("/v1/logits", "not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    json wrong_hash = {{"context", json::array()}, {"alphabet_hash", "deadbeef"}};
    auto mismatch = cli.Post("/v1/logits", wrong_hash.dump(), "application/json");
    REQUIRE(mismatch);
    CHECK(mismatch->status == 409);

    json big_token = {{"context", {9999}}, {"alphabet_hash", model.alphabet().hash()}};
    auto invalid = cli.Post("/v1/logits", big_token.dump(), "application/json");
    REQUIRE(invalid);
    CHECK(invalid->status == 400);
    server.stop();
}

TEST_CASE("loopback distributions match in-process bit for bit") {
    auto model = loopback_model();
    ModelServer server(model);
    server.start("127.0.0.1", 0);
    auto remote = RemoteModel::connect("http://127.0.0.1:" + std::to_string(server.port()));
    CHECK(remote.model_id() == model.model_id());
    CHECK(remote.alphabet().hash() == model.alphabet().hash());
    CHECK(remote.order() == 3);

    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TokenId> ctx;
        auto len = rng.next_below(5);
        for (std::uint64_t i = 0; i < len; ++i)
            ctx.push_back(static_cast<TokenId>(rng.next_below(kNumResidues)));
        auto local_lp = model.next_logprobs(ctx);
        auto remote_lp = remote.next_logprobs(ctx);
        REQUIRE(local_lp.size() == remote_lp.size());
        // JSON round-trips doubles exactly; the wire must be lossless.
        CHECK(local_lp == remote_lp);

        auto local_dist = model.next_distribution(ctx);
        auto remote_dist = distribution_from_logprobs(remote_lp);
        for (std::size_t i = 0; i < local_dist.probs.size(); ++i)
            CHECK(std::fabs(local_dist.probs[i] - remote_dist.probs[i]) <= 1e-9);
    }
    server.stop();
}

TEST_CASE("batch endpoint matches single queries") {
    auto model = loopback_model();
    ModelServer server(model);
    server.start("127.0.0.1", 0);
    auto remote = RemoteModel::connect("http://127.0.0.1:" + std::to_string(server.port()));

    std::vector<std::vector<TokenId>> contexts = {{}, {0}, {0, 1}, {12, 7, 3}};
    auto rows = remote.batch_logprobs(contexts);
    REQUIRE(rows.size() == contexts.size());
    for (std::size_t i = 0; i < contexts.size(); ++i)
        CHECK(rows[i] == model.next_logprobs(contexts[i]));
    server.stop();
}

TEST_CASE("unreachable endpoints raise after retries") {
    CHECK_THROWS_AS(RemoteModel::connect("http://127.0.0.1:1", 0), UnreachableError);
}

TEST_CASE("generation is bitwise transport independent") {
    auto model = loopback_model();
    ModelServer server(model);
    server.start("127.0.0.1", 0);
    auto remote = RemoteModel::connect("http://127.0.0.1:" + std::to_string(server.port()));

    auto scorer = ScorerConfig::defaults();
    GenerationConfig cfg;
    cfg.seed = 7;
    cfg.max_residues = 60;
    cfg.tau_final = 0.2;
    cfg.gamma = 0.5;

    auto local = generate(model, scorer, cfg, std::optional<std::string>("T1"));
    auto wire = generate(remote, scorer, cfg, std::optional<std::string>("T1"));
    CHECK(local.trace.final_sequence == wire.trace.final_sequence);
    REQUIRE(local.trace.rounds.size() == wire.trace.rounds.size());
    for (std::size_t i = 0; i < local.trace.rounds.size(); ++i) {
        CHECK(local.trace.rounds[i].selected_id == wire.trace.rounds[i].selected_id);
        CHECK(local.trace.rounds[i].selection_u == wire.trace.rounds[i].selection_u);
        for (std::size_t j = 0; j < local.trace.rounds[i].candidates.size(); ++j) {
            CHECK(local.trace.rounds[i].candidates[j].logprob ==
                  wire.trace.rounds[i].candidates[j].logprob);
            CHECK(local.trace.rounds[i].candidates[j].segment.tokens ==
                  wire.trace.rounds[i].candidates[j].segment.tokens);
        }
    }
    // Serialized traces are byte-identical.
    CHECK(trace_to_jsonl(local.trace, model.alphabet(), "x") ==
          trace_to_jsonl(wire.trace, remote.alphabet(), "x"));

    auto base_local = baseline_generate(model, cfg, std::optional<std::string>("T1"));
    auto base_wire = baseline_generate(remote, cfg, std::optional<std::string>("T1"));
    CHECK(detokenize(base_local, model.alphabet()) == detokenize(base_wire, remote.alphabet()));
    server.stop();
}
