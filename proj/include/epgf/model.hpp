#pragma once

#include <span>
#include <string>
#include <vector>

#include "epgf/alphabet.hpp"

namespace epgf {

// Log-probability assigned to tokens the model can never emit. exp() of
// it underflows to exactly 0, so distributions rebuilt from logprobs keep
// zero mass where it belongs. Finite so it survives JSON.
inline constexpr double kLogProbFloor = -1e30;

// Probability vector over the full token-id space of an Alphabet.
struct TokenDistribution {
    std::vector<double> probs;

    double mass() const {
        double sum = 0.0;
        for (double p : probs) sum += p;
        return sum;
    }
};

// Builds the distribution as exp(logprob) per token. Both the in-process
// adapter and the remote client go through this one transform, so engine
// behavior is bitwise independent of the transport.
TokenDistribution distribution_from_logprobs(std::span<const double> logprobs);

// The autoregressive model contract the engine drives: given a context
// (token ids, possibly empty), return log p(token | context) over the full
// vocabulary. Implementations must be safe for concurrent const calls.
class SequenceModel {
public:
    virtual ~SequenceModel() = default;
    virtual const Alphabet& alphabet() const = 0;
    virtual std::string model_id() const = 0;
    virtual std::vector<double> next_logprobs(std::span<const TokenId> context) const = 0;
    // Context length hint, 0 when not meaningful.
    virtual int order() const noexcept { return 0; }
};

}  // namespace epgf
