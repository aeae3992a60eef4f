#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epgf/sequence.hpp"

namespace epgf {

// One regex pattern over residue text, registered under a condition tag.
struct MotifPattern {
    std::string name;
    std::string pattern;  // ECMAScript regex, matched with regex_search
};

// Configuration for the biophysical scorer. All reference tables are
// data, not hard-coded truth: defaults() ships Kyte-Doolittle hydropathy,
// Swiss-Prot background composition, and Chou-Fasman propensities, and
// every table can be replaced from a 20-row TSV file.
struct ScorerConfig {
    std::array<double, kNumResidues> background_freqs{};   // sums to 1
    std::array<double, kNumResidues> hydropathy_table{};
    std::array<double, kNumResidues> helix_propensity{};   // 1.0 = neutral
    std::array<double, kNumResidues> sheet_propensity{};   // 1.0 = neutral
    std::array<double, kNumResidues> charge_map{};         // K,R:+1 D,E:-1 H:+0.1
    double gravy_lo = -2.0;                                // acceptable GRAVY window
    double gravy_hi = 1.0;
    double rare_cap_c = 0.04;                              // max fraction of C
    double rare_cap_w = 0.03;                              // max fraction of W
    double charge_norm = 0.25;                             // net charge per residue cap
    int complexity_window = 12;                            // w, >= 4
    std::map<std::string, std::vector<MotifPattern>> motif_registry;
    std::map<std::string, double> weights;                 // per-metric, default 1

    static ScorerConfig defaults();

    // Key-value config file; table-valued keys name TSV files resolved
    // relative to the config file. Unknown keys are rejected.
    static ScorerConfig load(const std::string& path);

    void validate() const;
    double weight_of(const std::string& metric) const;
};

// Sub-score names, in report order.
const std::vector<std::string>& metric_names();

struct MetricReport {
    std::map<std::string, double> sub_scores;  // each in [0, 1]
    double overall = 0.0;                      // weights-normalized mean
    int n_metrics = 0;
};

// Metric families. Each returns named sub-scores in [0, 1] and throws
// EmptySequenceError when the sequence has no residues.
std::map<std::string, double> composition_metrics(const Sequence& seq, const ScorerConfig& cfg);
std::map<std::string, double> physchem_metrics(const Sequence& seq, const ScorerConfig& cfg);
std::map<std::string, double> complexity_metrics(const Sequence& seq, const ScorerConfig& cfg);
std::map<std::string, double> functional_metrics(const Sequence& seq,
                                                 const std::optional<std::string>& tag,
                                                 const ScorerConfig& cfg);

// Runs all four families and aggregates: overall = sum(w_i * m_i) / sum(w_i).
// Pure function of (seq, tag, cfg).
MetricReport bioscore(const Sequence& seq, const std::optional<std::string>& tag,
                      const ScorerConfig& cfg);

// Mean hydropathy over the sequence (GRAVY).
double gravy(const Sequence& seq, const ScorerConfig& cfg);

// Loads a 20-row "residue<TAB>value" table; every residue exactly once.
std::array<double, kNumResidues> load_residue_table(const std::string& path);

// Loads "tag<TAB>regex" lines into a motif registry.
std::map<std::string, std::vector<MotifPattern>> load_motif_registry(const std::string& path);

}  // namespace epgf
