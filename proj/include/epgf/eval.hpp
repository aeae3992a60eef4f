#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epgf/bioscore.hpp"
#include "epgf/sequence.hpp"

namespace epgf {

// Global-alignment identity with match=1, mismatch=0, gap=0 scoring
// (longest-common-subsequence form), normalized by max(len_a, len_b) so
// padding cannot inflate it. Symmetric; 1.0 iff the residue texts are
// equal. Throws EmptySequenceError when either side has no residues.
double nw_identity(const Sequence& a, const Sequence& b);
double nw_identity(std::string_view a, std::string_view b, const Alphabet& alphabet);

struct ScoreSummary {
    double mean = 0.0;
    double sd = 0.0;  // population standard deviation
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;
};

struct ScoreSetResult {
    std::vector<MetricReport> reports;
    ScoreSummary summary;                        // over overall scores
    std::map<std::string, double> metric_means;  // per sub-score
};

// Scores every sequence and summarizes; deterministic, order-independent
// summary. Throws DataError on an empty set.
ScoreSetResult score_set(const std::vector<Sequence>& sequences, const ScorerConfig& scorer,
                         const std::optional<std::string>& tag);

struct AblationReport {
    std::string arm_a;
    std::string arm_b;
    ScoreSummary summary_a;
    ScoreSummary summary_b;
    std::map<std::string, double> metric_means_a;
    std::map<std::string, double> metric_means_b;
    double relative_delta = 0.0;  // (mean_a - mean_b) / mean_b
    std::optional<ScoreSummary> identity_to_reference_a;
    std::optional<ScoreSummary> identity_to_reference_b;
};

// Compares two generation arms; when a reference set is given, each
// sequence also gets its best identity against the references.
AblationReport ablation_report(const std::vector<Sequence>& arm_a,
                               const std::vector<Sequence>& arm_b, const ScorerConfig& scorer,
                               const std::optional<std::string>& tag,
                               const std::vector<Sequence>& reference = {},
                               const std::string& label_a = "with-selection",
                               const std::string& label_b = "baseline");

std::string ablation_table(const AblationReport& report);
std::string ablation_json(const AblationReport& report);
std::string report_to_jsonl(const MetricReport& report, const std::string& id);

}  // namespace epgf
