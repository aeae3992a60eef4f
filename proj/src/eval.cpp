#include "epgf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "epgf/error.hpp"

namespace epgf {

namespace {

std::vector<TokenId> residues_of(const Sequence& seq, const Alphabet& alphabet) {
    std::vector<TokenId> out;
    out.reserve(seq.residue_len);
    for (TokenId id : seq.tokens) {
        if (alphabet.is_residue(id)) out.push_back(id);
    }
    return out;
}

// LCS length via two rolling rows.
std::size_t lcs_length(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

ScoreSummary summarize(const std::vector<double>& values) {
    ScoreSummary s;
    s.n = values.size();
    if (values.empty()) return s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

ScoreSummary reference_identity(const std::vector<Sequence>& arm,
                                const std::vector<Sequence>& reference) {
    std::vector<double> best;
    best.reserve(arm.size());
    for (const auto& seq : arm) {
        double top = 0.0;
        for (const auto& ref : reference) top = std::max(top, nw_identity(seq, ref));
        best.push_back(top);
    }
    return summarize(best);
}

nlohmann::json summary_json(const ScoreSummary& s) {
    return {{"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}, {"n", s.n}};
}

}  // namespace

double nw_identity(const Sequence& a, const Sequence& b) {
    Alphabet alphabet;
    if (a.residue_len == 0 || b.residue_len == 0) throw EmptySequenceError();
    auto ra = residues_of(a, alphabet);
    auto rb = residues_of(b, alphabet);
    std::size_t matches = lcs_length(ra, rb);
    return static_cast<double>(matches) / static_cast<double>(std::max(ra.size(), rb.size()));
}

double nw_identity(std::string_view a, std::string_view b, const Alphabet& alphabet) {
    return nw_identity(validate_sequence(a, alphabet), validate_sequence(b, alphabet));
}

ScoreSetResult score_set(const std::vector<Sequence>& sequences, const ScorerConfig& scorer,
                         const std::optional<std::string>& tag) {
    if (sequences.empty()) throw DataError("cannot score an empty sequence set");
    ScoreSetResult result;
    std::vector<double> overalls;
    overalls.reserve(sequences.size());
    for (const auto& seq : sequences) {
        result.reports.push_back(bioscore(seq, tag, scorer));
        overalls.push_back(result.reports.back().overall);
        for (const auto& [name, value] : result.reports.back().sub_scores)
            result.metric_means[name] += value;
    }
    for (auto& [name, total] : result.metric_means)
        total /= static_cast<double>(sequences.size());
    result.summary = summarize(overalls);
    return result;
}

AblationReport ablation_report(const std::vector<Sequence>& arm_a,
                               const std::vector<Sequence>& arm_b, const ScorerConfig& scorer,
                               const std::optional<std::string>& tag,
                               const std::vector<Sequence>& reference, const std::string& label_a,
                               const std::string& label_b) {
    AblationReport report;
    report.arm_a = label_a;
    report.arm_b = label_b;
    auto a = score_set(arm_a, scorer, tag);
    auto b = score_set(arm_b, scorer, tag);
    report.summary_a = a.summary;
    report.summary_b = b.summary;
    report.metric_means_a = a.metric_means;
    report.metric_means_b = b.metric_means;
    report.relative_delta =
        report.summary_b.mean > 0.0
            ? (report.summary_a.mean - report.summary_b.mean) / report.summary_b.mean
            : 0.0;
    if (!reference.empty()) {
        report.identity_to_reference_a = reference_identity(arm_a, reference);
        report.identity_to_reference_b = reference_identity(arm_b, reference);
    }
    return report;
}

std::string ablation_table(const AblationReport& report) {
    std::ostringstream out;
    char line[160];
    out << "arm                    mean      sd       min      max      n\n";
    std::snprintf(line, sizeof(line), "%-20s %8.4f %8.4f %8.4f %8.4f %6zu\n",
                  report.arm_a.c_str(), report.summary_a.mean, report.summary_a.sd,
                  report.summary_a.min, report.summary_a.max, report.summary_a.n);
    out << line;
    std::snprintf(line, sizeof(line), "%-20s %8.4f %8.4f %8.4f %8.4f %6zu\n",
                  report.arm_b.c_str(), report.summary_b.mean, report.summary_b.sd,
                  report.summary_b.min, report.summary_b.max, report.summary_b.n);
    out << line;
    std::snprintf(line, sizeof(line), "relative delta: %+.2f%%\n", report.relative_delta * 100.0);
    out << line;
    out << "\nper-metric means (" << report.arm_a << " vs " << report.arm_b << ")\n";
    for (const auto& [name, mean_a] : report.metric_means_a) {
        std::snprintf(line, sizeof(line), "  %-18s %8.4f %8.4f\n", name.c_str(), mean_a,
                      report.metric_means_b.at(name));
        out << line;
    }
    if (report.identity_to_reference_a) {
        std::snprintf(line, sizeof(line), "identity to reference: %.4f vs %.4f (mean)\n",
                      report.identity_to_reference_a->mean, report.identity_to_reference_b->mean);
        out << line;
    }
    return out.str();
}

std::string ablation_json(const AblationReport& report) {
    nlohmann::json j = {
        {"arm_a", report.arm_a},
        {"arm_b", report.arm_b},
        {"summary_a", summary_json(report.summary_a)},
        {"summary_b", summary_json(report.summary_b)},
        {"metric_means_a", report.metric_means_a},
        {"metric_means_b", report.metric_means_b},
        {"relative_delta", report.relative_delta},
    };
    if (report.identity_to_reference_a) {
        j["identity_to_reference_a"] = summary_json(*report.identity_to_reference_a);
        j["identity_to_reference_b"] = summary_json(*report.identity_to_reference_b);
    }
    return j.dump(2);
}

std::string report_to_jsonl(const MetricReport& report, const std::string& id) {
    nlohmann::json j = {{"id", id},
                        {"overall", report.overall},
                        {"n_metrics", report.n_metrics},
                        {"sub_scores", report.sub_scores}};
    return j.dump();
}

}  // namespace epgf
