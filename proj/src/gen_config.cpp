#include "epgf/gen_config.hpp"

#include "epgf/error.hpp"

namespace epgf {

ScoreScope parse_score_scope(const std::string& name) {
    if (name == "segment") return ScoreScope::SegmentOnly;
    if (name == "prefix") return ScoreScope::PrefixPlusSegment;
    throw ConfigError("score scope must be 'segment' or 'prefix', got '" + name + "'");
}

std::string to_string(ScoreScope scope) {
    return scope == ScoreScope::SegmentOnly ? "segment" : "prefix";
}

void GenerationConfig::validate() const {
    if (num_candidates < 2) throw ConfigError("num_candidates must be >= 2");
    if (segment_len < 1) throw ConfigError("segment_len must be >= 1");
    if (!(tau0 > 0.0)) throw ConfigError("tau0 must be positive");
    if (!(tau_final > 0.0)) throw ConfigError("tau_final must be positive");
    if (tau_final > tau0) throw ConfigError("tau_final must be <= tau0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
    if (!(score_floor >= 0.0 && score_floor <= 1.0))
        throw ConfigError("score_floor must be in [0, 1]");
    if (max_residues < 1) throw ConfigError("max_residues must be >= 1");
    if (fallback_rounds < 0) throw ConfigError("fallback_rounds must be >= 0");
}

}  // namespace epgf
