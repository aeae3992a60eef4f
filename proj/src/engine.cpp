#include "epgf/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epgf/error.hpp"

namespace epgf {

std::string to_string(StopReason reason) {
    return reason == StopReason::EOS ? "EOS" : "MaxLength";
}

std::size_t sample_index(std::span<const double> probs, double u) {
    double cum = 0.0;
    std::size_t last_positive = 0;
    bool any = false;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        cum += probs[i];
        last_positive = i;
        any = true;
        if (u < cum) return i;
    }
    if (!any) throw ModelError("cannot sample from an all-zero distribution");
    return last_positive;  // guards the cum < 1 rounding sliver
}

std::vector<Candidate> sample_candidates(const SequenceModel& model, const Sequence& prefix,
                                         int segment_len, int num, Rng& rng) {
    if (num < 2) throw ConfigError("candidate count must be >= 2");
    if (segment_len < 1) throw ConfigError("segment length must be >= 1");
    const Alphabet& alphabet = model.alphabet();

    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(num));
    for (int j = 0; j < num; ++j) {
        std::vector<TokenId> context = prefix.tokens;
        Candidate cand;
        for (int t = 0; t < segment_len; ++t) {
            auto logprobs = model.next_logprobs(context);
            auto dist = distribution_from_logprobs(logprobs);
            TokenId tok = static_cast<TokenId>(sample_index(dist.probs, rng.next_unit()));
            cand.logprob += logprobs[static_cast<std::size_t>(tok)];
            cand.segment.tokens.push_back(tok);
            context.push_back(tok);
            if (tok == alphabet.eos()) {
                cand.segment.terminal = true;
                break;
            }
        }
        candidates.push_back(std::move(cand));
    }
    return candidates;
}

std::vector<std::size_t> probabilistic_filter(const std::vector<Candidate>& candidates, int num,
                                               bool length_normalized) {
    if (candidates.size() != static_cast<std::size_t>(num))
        throw ModelError("probabilistic_filter expects exactly " + std::to_string(num) +
                         " candidates, got " + std::to_string(candidates.size()));
    auto key = [&](std::size_t i) {
        if (!length_normalized) return candidates[i].logprob;
        return candidates[i].logprob / static_cast<double>(candidates[i].segment.tokens.size());
    };
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
    std::size_t k = (static_cast<std::size_t>(num) + 1) / 2;  // ceil(N/2)
    order.resize(k);
    return order;
}

std::vector<double> selection_probabilities(std::span<const double> scores, double tau) {
    if (scores.empty()) throw ModelError("selection over an empty candidate set");
    if (!(tau > 0.0)) throw ConfigError("selection temperature must be positive");
    double max_score = *std::max_element(scores.begin(), scores.end());
    std::vector<double> probs(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        probs[i] = std::exp((scores[i] - max_score) / tau);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

double update_tau(double tau, double gamma, double tau_final) {
    return std::max(tau_final, tau * gamma);
}

double score_candidate(const Candidate& candidate, const Sequence& prefix,
                       const std::optional<std::string>& tag, const ScorerConfig& scorer,
                       ScoreScope scope) {
    Alphabet alphabet;  // residue/EOS ids are fixed; conditions don't matter for scoring
    auto assemble = [&](bool include_prefix) {
        Sequence scoped;
        if (include_prefix) scoped = prefix;
        for (TokenId id : candidate.segment.tokens) {
            if (id != alphabet.eos()) scoped.tokens.push_back(id);
        }
        scoped.residue_len = 0;
        for (TokenId id : scoped.tokens) {
            if (alphabet.is_residue(id)) ++scoped.residue_len;
        }
        return scoped;
    };
    Sequence scoped = assemble(scope == ScoreScope::PrefixPlusSegment);
    // A segment with no residues (a lone EOS) proposes "end here": judge
    // the sequence it would finalize instead of handing out a free score.
    if (scoped.residue_len == 0) scoped = assemble(true);
    if (scoped.residue_len == 0) return 1.0;
    return bioscore(scoped, tag, scorer).overall;
}

SelectionOutcome biophysical_select(const std::vector<Candidate>& candidates,
                                    const std::vector<std::size_t>& retained, double floor,
                                    double tau, Rng& rng) {
    if (retained.empty()) throw ModelError("selection requires at least one retained candidate");
    std::vector<std::size_t> survivors;
    for (std::size_t id : retained) {
        if (!candidates[id].bioscore)
            throw ModelError("retained candidate " + std::to_string(id) + " is unscored");
        if (*candidates[id].bioscore >= floor) survivors.push_back(id);
    }
    SelectionOutcome outcome;
    if (survivors.empty()) {
        outcome.no_survivor = true;
        outcome.index = *std::max_element(
            retained.begin(), retained.end(), [&](std::size_t a, std::size_t b) {
                return *candidates[a].bioscore < *candidates[b].bioscore;
            });
        return outcome;
    }
    std::vector<double> scores;
    scores.reserve(survivors.size());
    for (std::size_t id : survivors) scores.push_back(*candidates[id].bioscore);
    auto probs = selection_probabilities(scores, tau);
    outcome.u = rng.next_unit();
    outcome.index = survivors[sample_index(probs, outcome.u)];
    return outcome;
}

namespace {

Sequence start_sequence(const Alphabet& alphabet, const std::optional<std::string>& tag) {
    Sequence s;
    s.tokens.push_back(alphabet.bos());
    if (tag) {
        auto cond = alphabet.condition_id(*tag);
        if (!cond) throw ConfigError("tag '" + *tag + "' is not registered in the model alphabet");
        s.tokens.push_back(*cond);
    }
    return s;
}

}  // namespace

GenerationResult generate(const SequenceModel& model, const ScorerConfig& scorer,
                          const GenerationConfig& cfg, const std::optional<std::string>& tag) {
    cfg.validate();
    scorer.validate();
    const Alphabet& alphabet = model.alphabet();

    GenerationResult result;
    result.trace.seed = cfg.seed;
    result.trace.tag = tag;
    Sequence& s = result.sequence;
    s = start_sequence(alphabet, tag);

    Rng sample_rng(derive_seed(cfg.seed, "candidates"));
    Rng select_rng(derive_seed(cfg.seed, "selection"));

    double tau = cfg.tau0;
    int consecutive_fallbacks = 0;
    while (true) {
        std::vector<Candidate> candidates;
        std::vector<std::size_t> retained;
        SelectionOutcome outcome;
        int resamples = 0;
        while (true) {
            candidates = sample_candidates(model, s, cfg.segment_len, cfg.num_candidates,
                                           sample_rng);
            retained = probabilistic_filter(candidates, cfg.num_candidates,
                                            cfg.length_normalized_filter);
            for (std::size_t id : retained) {
                candidates[id].bioscore =
                    score_candidate(candidates[id], s, tag, scorer, cfg.score_scope);
            }
            outcome = biophysical_select(candidates, retained, cfg.score_floor, tau, select_rng);
            if (!outcome.no_survivor || resamples >= cfg.fallback_rounds) break;
            ++resamples;
        }
        candidates[outcome.index].selected = true;
        const Candidate& chosen = candidates[outcome.index];

        RoundTrace round;
        round.tau_used = tau;
        round.retained_ids = retained;
        round.selected_id = outcome.index;
        round.fallback_used = outcome.no_survivor;
        round.resample_count = resamples;
        round.selection_u = outcome.u;
        round.candidates = candidates;
        result.trace.rounds.push_back(std::move(round));

        append_segment(s, chosen.segment, alphabet);

        if (outcome.no_survivor) {
            if (++consecutive_fallbacks >= 20) throw DegenerateModelError();
        } else {
            consecutive_fallbacks = 0;
        }

        if (chosen.segment.terminal) {
            result.trace.stop_reason = StopReason::EOS;
            break;
        }
        if (s.residue_len >= static_cast<std::size_t>(cfg.max_residues)) {
            result.trace.stop_reason = StopReason::MaxLength;
            break;
        }
        tau = update_tau(tau, cfg.gamma, cfg.tau_final);
    }
    result.trace.final_sequence = detokenize(s, alphabet);
    return result;
}

Sequence baseline_generate(const SequenceModel& model, const GenerationConfig& cfg,
                           const std::optional<std::string>& tag) {
    cfg.validate();
    const Alphabet& alphabet = model.alphabet();
    Sequence s = start_sequence(alphabet, tag);
    Rng rng(derive_seed(cfg.seed, "baseline"));
    while (s.residue_len < static_cast<std::size_t>(cfg.max_residues)) {
        auto logprobs = model.next_logprobs(s.tokens);
        auto dist = distribution_from_logprobs(logprobs);
        TokenId tok = static_cast<TokenId>(sample_index(dist.probs, rng.next_unit()));
        s.tokens.push_back(tok);
        if (alphabet.is_residue(tok)) ++s.residue_len;
        if (tok == alphabet.eos()) break;
    }
    return s;
}

}  // namespace epgf
