#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epgf/model.hpp"
#include "epgf/sequence.hpp"

namespace epgf {

// One training example: a validated sequence plus an optional condition
// tag that is placed right after BOS in the token stream.
struct TaggedSequence {
    Sequence seq;
    std::optional<std::string> tag;
};

// Add-alpha-smoothed n-gram model over residues + EOS. Emittable tokens
// are the 20 residues and EOS; BOS and condition tokens appear in contexts
// only, so their probability is 0 everywhere. Immutable once trained,
// safe for concurrent queries.
class NgramModel : public SequenceModel {
public:
    static constexpr int kMaxOrder = 8;

    // Counts over BOS-padded, EOS-terminated token streams. Deterministic
    // given corpus order. Throws EmptyCorpus / OrderTooLarge.
    static NgramModel train(const std::vector<TaggedSequence>& corpus, int order, double alpha);

    // An untrained model: every context yields the uniform smoothed
    // distribution over residues + EOS.
    static NgramModel uniform(int order, double alpha, Alphabet alphabet = Alphabet());

    // Smoothed next-token distribution given the last order-1 context
    // tokens. Sums to 1 by construction for every context.
    TokenDistribution next_distribution(std::span<const TokenId> context) const;

    // Sum of log p over residue emissions and the final EOS step.
    // Appends the EOS step internally when the sequence lacks one.
    double sequence_logprob(const Sequence& seq) const;

    // exp(mean negative log-likelihood per prediction step) over the corpus.
    double perplexity(const std::vector<TaggedSequence>& corpus) const;

    // SequenceModel contract.
    const Alphabet& alphabet() const override { return alphabet_; }
    std::string model_id() const override;
    std::vector<double> next_logprobs(std::span<const TokenId> context) const override;
    int order() const noexcept override { return order_; }
    double alpha() const noexcept { return alpha_; }
    std::size_t context_count() const noexcept { return counts_.size(); }

    // Plain-text count dump: header (format version, order, alpha,
    // alphabet hash, condition labels) then one context record per line.
    void save(const std::string& path) const;
    static NgramModel load(const std::string& path);

private:
    NgramModel(int order, double alpha, Alphabet alphabet);

    std::vector<TokenId> context_key(std::span<const TokenId> context) const;
    void observe(std::span<const TokenId> stream);

    int order_;
    double alpha_;
    Alphabet alphabet_;
    std::vector<TokenId> emittable_;  // residues + EOS, in token-id order
    std::map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>> counts_;
};

}  // namespace epgf
