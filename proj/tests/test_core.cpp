#include "doctest.h"

#include <set>

#include "epgf/alphabet.hpp"
#include "epgf/error.hpp"
#include "epgf/gen_config.hpp"
#include "epgf/rng.hpp"
#include "epgf/sequence.hpp"

using namespace epgf;

TEST_CASE("alphabet ids are dense and injective") {
    Alphabet alphabet({"SAM-MT", "TPHD"});
    std::set<TokenId> ids;
    for (TokenId id = 0; id < static_cast<TokenId>(alphabet.vocab_size()); ++id) {
        CHECK(alphabet.is_valid(id));
        ids.insert(id);
    }
    CHECK(ids.size() == alphabet.vocab_size());
    CHECK(alphabet.vocab_size() == 20 + 3 + 2);
    CHECK(alphabet.residue_id('A') == 0);
    CHECK(alphabet.residue_id('Y') == 19);
    CHECK(alphabet.condition_id("SAM-MT").has_value());
    CHECK(alphabet.condition_id("SAM-MT") != alphabet.condition_id("TPHD"));
    CHECK_FALSE(alphabet.condition_id("Trx").has_value());
    // Re-adding an existing label keeps its id.
    CHECK(alphabet.add_condition("SAM-MT") == *alphabet.condition_id("SAM-MT"));
}

TEST_CASE("alphabet hash changes with condition registry") {
    CHECK(Alphabet().hash() == Alphabet().hash());
    CHECK(Alphabet().hash() != Alphabet({"SAM-MT"}).hash());
    CHECK(Alphabet({"SAM-MT"}).hash() != Alphabet({"TPHD"}).hash());
}

TEST_CASE("validate_sequence accepts the residue alphabet") {
    Alphabet alphabet;
    auto seq = validate_sequence("ACDEFGHIKLMNPQRSTVWY", alphabet);
    CHECK(seq.residue_len == 20);
    CHECK(seq.tokens.size() == 20);
}

TEST_CASE("validate_sequence rejects nonstandard characters with position") {
    Alphabet alphabet;
    try {
        validate_sequence("ACXDE", alphabet);
        FAIL("expected InvalidResidueError");
    } catch (const InvalidResidueError& e) {
        CHECK(e.position == 2);
        CHECK(e.character == 'X');
    }
    for (const char* bad : {"acde", "AC DE", "AC-DE", "ACB", "ACZ", "ACU", "ACO"})
        CHECK_THROWS_AS(validate_sequence(bad, alphabet), InvalidResidueError);
}

TEST_CASE("validate_sequence accepts the empty string") {
    Alphabet alphabet;
    auto seq = validate_sequence("", alphabet);
    CHECK(seq.residue_len == 0);
    CHECK(seq.tokens.empty());
}

TEST_CASE("detokenize strips control and condition tokens") {
    Alphabet alphabet({"SAM-MT"});
    Sequence s;
    s.tokens = {alphabet.bos(), *alphabet.residue_id('A'), *alphabet.residue_id('C'),
                alphabet.eos()};
    s.residue_len = 2;
    CHECK(detokenize(s, alphabet) == "AC");

    Sequence empty;
    empty.tokens = {alphabet.bos(), alphabet.eos()};
    CHECK(detokenize(empty, alphabet).empty());

    Sequence tagged;
    tagged.tokens = {*alphabet.condition_id("SAM-MT"), *alphabet.residue_id('M'),
                     *alphabet.residue_id('K')};
    tagged.residue_len = 2;
    CHECK(detokenize(tagged, alphabet) == "MK");
}

TEST_CASE("validate o detokenize is the identity on residue content") {
    Alphabet alphabet({"T1"});
    Rng rng(123);
    for (int trial = 0; trial < 500; ++trial) {
        Sequence s;
        s.tokens.push_back(alphabet.bos());
        if (rng.next_unit() < 0.3) s.tokens.push_back(*alphabet.condition_id("T1"));
        auto len = rng.next_below(60);
        for (std::uint64_t i = 0; i < len; ++i) {
            s.tokens.push_back(static_cast<TokenId>(rng.next_below(kNumResidues)));
            ++s.residue_len;
        }
        if (rng.next_unit() < 0.5) s.tokens.push_back(alphabet.eos());

        auto round = validate_sequence(detokenize(s, alphabet), alphabet);
        std::vector<TokenId> original_residues;
        for (TokenId id : s.tokens)
            if (alphabet.is_residue(id)) original_residues.push_back(id);
        CHECK(round.tokens == original_residues);
    }
}

TEST_CASE("check_sequence enforces BOS/EOS placement") {
    Alphabet alphabet;
    Sequence s;
    s.tokens = {*alphabet.residue_id('A'), alphabet.bos()};
    s.residue_len = 1;
    CHECK_THROWS_AS(check_sequence(s, alphabet), DataError);
    s.tokens = {alphabet.eos(), *alphabet.residue_id('A')};
    CHECK_THROWS_AS(check_sequence(s, alphabet), DataError);
    s.tokens = {alphabet.bos(), *alphabet.residue_id('A'), alphabet.eos()};
    CHECK_NOTHROW(check_sequence(s, alphabet));
}

TEST_CASE("make_segment checks length and EOS placement") {
    Alphabet alphabet;
    CHECK_THROWS_AS(make_segment({}, alphabet, 20), DataError);
    CHECK_THROWS_AS(make_segment(std::vector<TokenId>(21, 0), alphabet, 20), DataError);
    CHECK_THROWS_AS(make_segment({alphabet.eos(), 0}, alphabet, 20), DataError);
    auto seg = make_segment({0, 1, alphabet.eos()}, alphabet, 20);
    CHECK(seg.terminal);
    CHECK_FALSE(make_segment({0, 1}, alphabet, 20).terminal);
}

TEST_CASE("generation config rejects invalid fields without clamping") {
    GenerationConfig ok;
    CHECK_NOTHROW(ok.validate());

    auto expect_reject = [](auto mutate) {
        GenerationConfig cfg;
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    };
    expect_reject([](auto& c) { c.num_candidates = 1; });
    expect_reject([](auto& c) { c.segment_len = 0; });
    expect_reject([](auto& c) { c.tau0 = 0.0; });
    expect_reject([](auto& c) { c.tau_final = 0.0; });
    expect_reject([](auto& c) { c.tau_final = 2.0; });  // above tau0
    expect_reject([](auto& c) { c.gamma = 0.0; });
    expect_reject([](auto& c) { c.gamma = 1.5; });
    expect_reject([](auto& c) { c.score_floor = -0.1; });
    expect_reject([](auto& c) { c.score_floor = 1.1; });
    expect_reject([](auto& c) { c.max_residues = 0; });
    expect_reject([](auto& c) { c.fallback_rounds = -1; });
}

TEST_CASE("rng sub-streams are reproducible and name-separated") {
    Rng a(derive_seed(42, "candidates"));
    Rng b(derive_seed(42, "candidates"));
    Rng c(derive_seed(42, "selection"));
    bool diverged = false;
    for (int i = 0; i < 100; ++i) {
        double ua = a.next_unit();
        CHECK(ua == b.next_unit());
        if (ua != c.next_unit()) diverged = true;
        CHECK(ua >= 0.0);
        CHECK(ua < 1.0);
    }
    CHECK(diverged);
    CHECK(derive_seed(42, std::uint64_t{0}) != derive_seed(42, std::uint64_t{1}));
}
