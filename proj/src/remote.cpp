#include "epgf/remote.hpp"

#include <chrono>
#include <cmath>

#include "httplib.h"
#include "json.hpp"

namespace epgf {

using nlohmann::json;

namespace {

// Validates a context array and returns the token ids, or throws.
std::vector<TokenId> parse_context(const json& arr, const Alphabet& alphabet) {
    if (!arr.is_array()) throw DataError("context must be an array of token ids");
    std::vector<TokenId> context;
    context.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number_integer()) throw DataError("context entries must be integers");
        auto id = v.get<TokenId>();
        if (!alphabet.is_valid(id))
            throw DataError("token id " + std::to_string(id) + " outside the alphabet");
        context.push_back(id);
    }
    return context;
}

json logprobs_json(const SequenceModel& model, const std::vector<TokenId>& context) {
    return json(model.next_logprobs(context));
}

}  // namespace

ModelServer::ModelServer(const SequenceModel& model)
    : model_(model), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

ModelServer::~ModelServer() { stop(); }

void ModelServer::install_routes() {
    auto& srv = *server_;

    srv.Get("/v1/info", [this](const httplib::Request&, httplib::Response& res) {
        json info = {
            {"alphabet_hash", model_.alphabet().hash()},
            {"model_id", model_.model_id()},
            {"order", model_.order()},
            {"vocab_size", model_.alphabet().vocab_size()},
            {"conditions", model_.alphabet().condition_labels()},
        };
        res.set_content(info.dump(), "application/json");
    });

    auto handle = [this](const httplib::Request& req, httplib::Response& res, bool batch) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("alphabet_hash")) {
            res.status = 400;
            res.set_content(json{{"error", "malformed request body"}}.dump(), "application/json");
            return;
        }
        if (body["alphabet_hash"] != model_.alphabet().hash()) {
            res.status = 409;
            res.set_content(json{{"error", "alphabet hash mismatch"}}.dump(), "application/json");
            return;
        }
        try {
            json out;
            if (batch) {
                if (!body.contains("contexts")) throw DataError("missing contexts");
                json rows = json::array();
                for (const auto& ctx : body["contexts"])
                    rows.push_back(logprobs_json(model_, parse_context(ctx, model_.alphabet())));
                out = {{"logprobs", rows}, {"model_id", model_.model_id()}};
            } else {
                if (!body.contains("context")) throw DataError("missing context");
                out = {{"logprobs", logprobs_json(model_, parse_context(body["context"],
                                                                        model_.alphabet()))},
                       {"model_id", model_.model_id()}};
            }
            res.set_content(out.dump(), "application/json");
        } catch (const Error& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
    };

    srv.Post("/v1/logits", [handle](const httplib::Request& req, httplib::Response& res) {
        handle(req, res, false);
    });
    srv.Post("/v1/logits_batch", [handle](const httplib::Request& req, httplib::Response& res) {
        handle(req, res, true);
    });
}

void ModelServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = server_->bind_to_any_port(host);
        if (bound < 0) throw BindFailureError(host + ":0");
    } else if (!server_->bind_to_port(host, port)) {
        throw BindFailureError(host + ":" + std::to_string(port));
    }
    port_ = bound;
    thread_ = std::thread([this]() { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void ModelServer::run(const std::string& host, int port) {
    if (!server_->bind_to_port(host, port))
        throw BindFailureError(host + ":" + std::to_string(port));
    port_ = port;
    server_->listen_after_bind();
}

void ModelServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

RemoteModel::RemoteModel(std::string endpoint, int max_retries)
    : endpoint_(std::move(endpoint)), max_retries_(max_retries) {}

RemoteModel RemoteModel::connect(const std::string& endpoint, int max_retries) {
    RemoteModel model(endpoint, max_retries);
    std::string body;
    for (int attempt = 0;; ++attempt) {
        httplib::Client cli(model.endpoint_);
        auto res = cli.Get("/v1/info");
        if (res && res->status == 200) {
            body = res->body;
            break;
        }
        if (attempt >= max_retries) throw UnreachableError(endpoint);
        std::this_thread::sleep_for(std::chrono::milliseconds(50 * (attempt + 1)));
    }
    json info = json::parse(body, nullptr, false);
    if (info.is_discarded() || !info.contains("alphabet_hash") || !info.contains("conditions"))
        throw ProtocolMismatchError("endpoint does not speak the /v1/info schema");
    model.alphabet_ = Alphabet(info["conditions"].get<std::vector<std::string>>());
    if (model.alphabet_.hash() != info["alphabet_hash"].get<std::string>())
        throw ProtocolMismatchError("alphabet hash does not match advertised condition labels");
    model.model_id_ = info.value("model_id", std::string("unknown"));
    model.order_ = info.value("order", 0);
    return model;
}

std::string RemoteModel::post_json(const std::string& path, const std::string& body) const {
    for (int attempt = 0;; ++attempt) {
        httplib::Client cli(endpoint_);
        auto res = cli.Post(path, body, "application/json");
        if (res) {
            if (res->status == 409) throw ProtocolMismatchError("server rejected alphabet hash");
            if (res->status != 200)
                throw ModelError("model server returned status " + std::to_string(res->status) +
                                 " for " + path);
            return res->body;
        }
        if (attempt >= max_retries_) throw UnreachableError(endpoint_);
        std::this_thread::sleep_for(std::chrono::milliseconds(50 * (attempt + 1)));
    }
}

namespace {

std::vector<double> parse_logprob_row(const json& row, std::size_t vocab_size) {
    if (!row.is_array() || row.size() != vocab_size)
        throw ProtocolMismatchError("logprobs length does not match vocabulary size");
    auto logprobs = row.get<std::vector<double>>();
    double mass = 0.0;
    for (double lp : logprobs) mass += std::exp(lp);
    if (std::abs(mass - 1.0) > 1e-4) throw NonNormalizedResponseError(mass);
    return logprobs;
}

}  // namespace

std::vector<double> RemoteModel::next_logprobs(std::span<const TokenId> context) const {
    json req = {{"context", std::vector<TokenId>(context.begin(), context.end())},
                {"alphabet_hash", alphabet_.hash()}};
    json res = json::parse(post_json("/v1/logits", req.dump()), nullptr, false);
    if (res.is_discarded() || !res.contains("logprobs"))
        throw ProtocolMismatchError("response lacks logprobs");
    return parse_logprob_row(res["logprobs"], alphabet_.vocab_size());
}

std::vector<std::vector<double>> RemoteModel::batch_logprobs(
    const std::vector<std::vector<TokenId>>& contexts) const {
    json req = {{"contexts", contexts}, {"alphabet_hash", alphabet_.hash()}};
    json res = json::parse(post_json("/v1/logits_batch", req.dump()), nullptr, false);
    if (res.is_discarded() || !res.contains("logprobs") || !res["logprobs"].is_array() ||
        res["logprobs"].size() != contexts.size())
        throw ProtocolMismatchError("batch response shape mismatch");
    std::vector<std::vector<double>> rows;
    rows.reserve(contexts.size());
    for (const auto& row : res["logprobs"]) rows.push_back(parse_logprob_row(row, alphabet_.vocab_size()));
    return rows;
}

}  // namespace epgf
