#pragma once

#include <cstdint>
#include <string>

namespace epgf {

// Whether candidate segments are scored in isolation or appended to the
// growing sequence first. Biophysical quantities (net charge, entropy,
// mean hydropathy) are global, so PrefixPlusSegment is the default;
// SegmentOnly matches the literal per-segment reading.
enum class ScoreScope { SegmentOnly, PrefixPlusSegment };

ScoreScope parse_score_scope(const std::string& name);
std::string to_string(ScoreScope scope);

struct GenerationConfig {
    int num_candidates = 8;          // N
    int segment_len = 20;            // L, tokens per candidate segment
    double tau0 = 1.0;               // initial selection temperature
    double tau_final = 1.0;          // temperature floor
    double gamma = 0.1;              // decay rate, tau <- max(tau_final, tau*gamma)
    double score_floor = 0.55;       // e, minimum acceptable biophysical score
    int max_residues = 256;          // generation stops once reached
    std::uint64_t seed = 42;
    int fallback_rounds = 3;         // R, fresh-batch resamples before forced pick
    ScoreScope score_scope = ScoreScope::PrefixPlusSegment;
    // Study option: rank candidates by logprob per token instead of the
    // plain sum. The plain sum favors EOS-truncated segments.
    bool length_normalized_filter = false;

    // Throws ConfigError naming the offending field; never clamps.
    void validate() const;
};

}  // namespace epgf
