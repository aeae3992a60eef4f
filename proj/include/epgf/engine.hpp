#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epgf/bioscore.hpp"
#include "epgf/error.hpp"
#include "epgf/gen_config.hpp"
#include "epgf/model.hpp"
#include "epgf/rng.hpp"
#include "epgf/sequence.hpp"

namespace epgf {

class DegenerateModelError : public ModelError {
public:
    DegenerateModelError()
        : ModelError("20 consecutive fallback rounds; model cannot reach the score floor") {}
};

// One sampled candidate segment. logprob is the sum of log p(c_i | c_<i)
// accumulated during sampling; bioscore is set only for retained
// candidates.
struct Candidate {
    Segment segment;
    double logprob = 0.0;
    std::optional<double> bioscore;
    bool selected = false;
};

struct RoundTrace {
    double tau_used = 0.0;
    std::vector<Candidate> candidates;      // final batch of the round
    std::vector<std::size_t> retained_ids;  // logprob-descending, ties by index
    std::size_t selected_id = 0;
    bool fallback_used = false;             // no candidate reached the floor
    int resample_count = 0;                 // fresh batches drawn beyond the first
    double selection_u = -1.0;              // unit draw behind the softmax pick, -1 when forced
};

enum class StopReason { EOS, MaxLength };
std::string to_string(StopReason reason);

struct GenerationTrace {
    std::vector<RoundTrace> rounds;
    std::string final_sequence;  // residue text
    StopReason stop_reason = StopReason::EOS;
    std::uint64_t seed = 0;
    std::optional<std::string> tag;
};

struct GenerationResult {
    Sequence sequence;
    GenerationTrace trace;
};

// Draws num candidate segments by ancestral sampling from the model,
// each truncated at EOS or segment_len tokens. Candidates are drawn
// sequentially from rng, so the stream order pins the batch.
std::vector<Candidate> sample_candidates(const SequenceModel& model, const Sequence& prefix,
                                         int segment_len, int num, Rng& rng);

// Indices of the K = ceil(num/2) candidates with the highest logprob,
// ties broken by lower original index. With length_normalized set the
// ranking key is logprob per segment token.
std::vector<std::size_t> probabilistic_filter(const std::vector<Candidate>& candidates, int num,
                                              bool length_normalized = false);

// Softmax over scores at temperature tau: P_j = exp(B_j/tau) / sum_k exp(B_k/tau).
std::vector<double> selection_probabilities(std::span<const double> scores, double tau);

// Inverse-CDF pick from a probability vector given a unit draw.
std::size_t sample_index(std::span<const double> probs, double u);

// tau <- max(tau_final, tau * gamma), applied once per accepted segment.
double update_tau(double tau, double gamma, double tau_final);

// Biophysical score of a candidate under the configured scope. A scoped
// sequence with no residues yet (e.g. a lone EOS on an empty prefix)
// scores the neutral 1.0.
double score_candidate(const Candidate& candidate, const Sequence& prefix,
                       const std::optional<std::string>& tag, const ScorerConfig& scorer,
                       ScoreScope scope);

struct SelectionOutcome {
    std::size_t index = 0;     // into the candidates vector
    bool no_survivor = false;  // every retained candidate fell below the floor
    double u = -1.0;
};

// Softmax-samples among retained candidates whose bioscore meets the
// floor. When none survive, returns the highest-scoring retained
// candidate with no_survivor set and consumes no randomness; the caller
// decides whether to resample or accept the forced pick.
SelectionOutcome biophysical_select(const std::vector<Candidate>& candidates,
                                    const std::vector<std::size_t>& retained, double floor,
                                    double tau, Rng& rng);

// The full loop: sample -> filter -> score -> select -> append -> decay,
// until a selected segment carries EOS or max_residues is reached. The
// trace records every round and suffices to replay each selection.
GenerationResult generate(const SequenceModel& model, const ScorerConfig& scorer,
                          const GenerationConfig& cfg, const std::optional<std::string>& tag);

// Plain ancestral sampling with no filtering, scoring, or annealing; the
// ablation control arm.
Sequence baseline_generate(const SequenceModel& model, const GenerationConfig& cfg,
                           const std::optional<std::string>& tag);

// One JSON object per generation, with every round's candidates, scores,
// retained ids, selection draw, and flags.
std::string trace_to_jsonl(const GenerationTrace& trace, const Alphabet& alphabet,
                           const std::string& id);

// FASTA description line for a generated sequence.
std::string generation_description(const std::optional<std::string>& tag, double overall,
                                   StopReason stop, std::uint64_t seed);

}  // namespace epgf
