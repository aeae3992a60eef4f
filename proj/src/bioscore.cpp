#include "epgf/bioscore.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "epgf/error.hpp"

namespace epgf {
namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

std::array<int, kNumResidues> residue_counts(const Sequence& seq) {
    std::array<int, kNumResidues> counts{};
    for (TokenId id : seq.tokens) {
        if (id >= 0 && id < static_cast<TokenId>(kNumResidues)) ++counts[id];
    }
    return counts;
}

void require_residues(const Sequence& seq) {
    if (seq.residue_len == 0) throw EmptySequenceError();
}

// Shannon entropy (natural log) of a count vector.
double entropy(const std::array<int, kNumResidues>& counts, int total) {
    double h = 0.0;
    for (int c : counts) {
        if (c > 0) {
            double p = static_cast<double>(c) / total;
            h -= p * std::log(p);
        }
    }
    return h;
}

std::vector<TokenId> residue_tokens(const Sequence& seq) {
    std::vector<TokenId> out;
    out.reserve(seq.residue_len);
    for (TokenId id : seq.tokens) {
        if (id >= 0 && id < static_cast<TokenId>(kNumResidues)) out.push_back(id);
    }
    return out;
}

std::string strip_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {
        "aa_distribution", "aa_diversity", "rare_aa",
        "hydropathy", "charge_balance", "stability_proxy",
        "global_entropy", "local_complexity", "repeat_penalty",
        "ss_balance", "motif"};
    return names;
}

ScorerConfig ScorerConfig::defaults() {
    ScorerConfig cfg;
    // Kyte-Doolittle hydropathy, order ACDEFGHIKLMNPQRSTVWY.
    cfg.hydropathy_table = {1.8, 2.5, -3.5, -3.5, 2.8, -0.4, -3.2, 4.5, -3.9, 3.8,
                            1.9, -3.5, -1.6, -3.5, -4.5, -0.8, -0.7, 4.2, -0.9, -1.3};
    // UniProtKB/Swiss-Prot composition (percent), normalized below.
    cfg.background_freqs = {8.25, 1.38, 5.46, 6.72, 3.86, 7.07, 2.27, 5.91, 5.80, 9.65,
                            2.41, 4.06, 4.74, 3.93, 5.53, 6.65, 5.36, 6.86, 1.10, 2.92};
    double sum = 0.0;
    for (double f : cfg.background_freqs) sum += f;
    for (double& f : cfg.background_freqs) f /= sum;
    // Chou-Fasman propensities; 1.0 is the neutral value.
    cfg.helix_propensity = {1.42, 0.70, 1.01, 1.51, 1.13, 0.57, 1.00, 1.08, 1.16, 1.21,
                            1.45, 0.67, 0.57, 1.11, 0.98, 0.77, 0.83, 1.06, 1.08, 0.69};
    cfg.sheet_propensity = {0.83, 1.19, 0.54, 0.37, 1.38, 0.75, 0.87, 1.60, 0.74, 1.30,
                            1.05, 0.89, 0.55, 1.10, 0.93, 0.75, 1.19, 1.70, 1.37, 1.47};
    cfg.charge_map = {};
    cfg.charge_map[*Alphabet().residue_id('K')] = 1.0;
    cfg.charge_map[*Alphabet().residue_id('R')] = 1.0;
    cfg.charge_map[*Alphabet().residue_id('D')] = -1.0;
    cfg.charge_map[*Alphabet().residue_id('E')] = -1.0;
    cfg.charge_map[*Alphabet().residue_id('H')] = 0.1;
    return cfg;
}

void ScorerConfig::validate() const {
    double sum = 0.0;
    for (double f : background_freqs) {
        if (f < 0.0) throw ConfigError("background frequency entries must be >= 0");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("background frequencies must sum to 1 (got " + std::to_string(sum) + ")");
    if (!(gravy_lo < gravy_hi)) throw ConfigError("gravy window requires gravy_lo < gravy_hi");
    if (complexity_window < 4) throw ConfigError("complexity_window must be >= 4");
    if (!(rare_cap_c > 0.0) || !(rare_cap_w > 0.0))
        throw ConfigError("rare amino acid caps must be positive");
    if (!(charge_norm > 0.0)) throw ConfigError("charge_norm must be positive");
    double wsum = 0.0;
    for (const auto& [name, w] : weights) {
        if (w < 0.0) throw ConfigError("weight for " + name + " must be >= 0");
        if (std::find(metric_names().begin(), metric_names().end(), name) == metric_names().end())
            throw ConfigError("unknown metric in weights: " + name);
    }
    for (const auto& name : metric_names()) wsum += weight_of(name);
    if (!(wsum > 0.0)) throw ConfigError("metric weights must not all be zero");
}

double ScorerConfig::weight_of(const std::string& metric) const {
    auto it = weights.find(metric);
    return it == weights.end() ? 1.0 : it->second;
}

std::map<std::string, double> composition_metrics(const Sequence& seq, const ScorerConfig& cfg) {
    require_residues(seq);
    auto counts = residue_counts(seq);
    int n = static_cast<int>(seq.residue_len);

    double l1 = 0.0;
    int distinct = 0;
    for (std::size_t r = 0; r < kNumResidues; ++r) {
        double emp = static_cast<double>(counts[r]) / n;
        l1 += std::abs(emp - cfg.background_freqs[r]);
        if (counts[r] > 0) ++distinct;
    }
    double aa_distribution = clamp01(1.0 - 0.5 * l1);

    double denom = static_cast<double>(std::min<std::size_t>(seq.residue_len, kNumResidues));
    double aa_diversity = clamp01(distinct / denom);

    auto rare_score = [&](char letter, double cap) {
        int idx = static_cast<int>(kResidueLetters.find(letter));
        double frac = static_cast<double>(counts[idx]) / n;
        if (frac <= cap) return 1.0;
        return clamp01((3.0 * cap - frac) / (2.0 * cap));
    };
    double rare_aa = std::min(rare_score('C', cfg.rare_cap_c), rare_score('W', cfg.rare_cap_w));

    return {{"aa_distribution", aa_distribution},
            {"aa_diversity", aa_diversity},
            {"rare_aa", rare_aa}};
}

double gravy(const Sequence& seq, const ScorerConfig& cfg) {
    require_residues(seq);
    double total = 0.0;
    for (TokenId id : seq.tokens) {
        if (id >= 0 && id < static_cast<TokenId>(kNumResidues)) total += cfg.hydropathy_table[id];
    }
    return total / static_cast<double>(seq.residue_len);
}

std::map<std::string, double> physchem_metrics(const Sequence& seq, const ScorerConfig& cfg) {
    require_residues(seq);
    int n = static_cast<int>(seq.residue_len);

    double g = gravy(seq, cfg);
    double hydropathy = 1.0;
    if (g < cfg.gravy_lo || g > cfg.gravy_hi) {
        double dist = g < cfg.gravy_lo ? cfg.gravy_lo - g : g - cfg.gravy_hi;
        hydropathy = clamp01(1.0 - dist / 2.0);
    }

    double net = 0.0;
    for (TokenId id : seq.tokens) {
        if (id >= 0 && id < static_cast<TokenId>(kNumResidues)) net += cfg.charge_map[id];
    }
    double charge_balance = 1.0 - std::min(1.0, std::abs(net) / n / cfg.charge_norm);

    // Residues inside runs of >= 4 identical charged residues.
    auto tokens = residue_tokens(seq);
    int clustered = 0;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t j = i;
        while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
        std::size_t run = j - i;
        if (run >= 4 && cfg.charge_map[tokens[i]] != 0.0) clustered += static_cast<int>(run);
        i = j;
    }
    double stability_proxy = 1.0 - std::min(1.0, static_cast<double>(clustered) / n);

    return {{"hydropathy", hydropathy},
            {"charge_balance", charge_balance},
            {"stability_proxy", stability_proxy}};
}

std::map<std::string, double> complexity_metrics(const Sequence& seq, const ScorerConfig& cfg) {
    require_residues(seq);
    auto tokens = residue_tokens(seq);
    int n = static_cast<int>(tokens.size());

    auto counts = residue_counts(seq);
    double global_entropy = clamp01(entropy(counts, n) / std::log(20.0));

    int w = cfg.complexity_window;
    double local_complexity = global_entropy;
    if (n >= w) {
        double log_wmax = std::log(static_cast<double>(std::min<int>(w, 20)));
        std::array<int, kNumResidues> win{};
        for (int k = 0; k < w; ++k) ++win[tokens[k]];
        double min_h = entropy(win, w);
        for (int k = w; k < n; ++k) {
            --win[tokens[k - w]];
            ++win[tokens[k]];
            min_h = std::min(min_h, entropy(win, w));
        }
        local_complexity = clamp01(min_h / log_wmax);
    }

    int longest = 1;
    int run = 1;
    for (int k = 1; k < n; ++k) {
        run = tokens[k] == tokens[k - 1] ? run + 1 : 1;
        longest = std::max(longest, run);
    }
    double repeat_penalty = 1.0 - std::min(1.0, (longest - 1) / 9.0);

    return {{"global_entropy", global_entropy},
            {"local_complexity", local_complexity},
            {"repeat_penalty", repeat_penalty}};
}

std::map<std::string, double> functional_metrics(const Sequence& seq,
                                                 const std::optional<std::string>& tag,
                                                 const ScorerConfig& cfg) {
    require_residues(seq);
    int n = static_cast<int>(seq.residue_len);

    double helix = 0.0;
    double sheet = 0.0;
    for (TokenId id : seq.tokens) {
        if (id >= 0 && id < static_cast<TokenId>(kNumResidues)) {
            helix += cfg.helix_propensity[id];
            sheet += cfg.sheet_propensity[id];
        }
    }
    double helix_score = clamp01(1.0 - std::abs(helix / n - 1.0));
    double sheet_score = clamp01(1.0 - std::abs(sheet / n - 1.0));
    double ss_balance = 0.5 * (helix_score + sheet_score);

    double motif = 1.0;
    if (tag) {
        auto it = cfg.motif_registry.find(*tag);
        if (it != cfg.motif_registry.end() && !it->second.empty()) {
            Alphabet alphabet;
            std::string text = detokenize(seq, alphabet);
            int matched = 0;
            for (const auto& pat : it->second) {
                std::regex re(pat.pattern);
                if (std::regex_search(text, re)) ++matched;
            }
            motif = static_cast<double>(matched) / static_cast<double>(it->second.size());
        }
    }

    return {{"ss_balance", ss_balance}, {"motif", motif}};
}

MetricReport bioscore(const Sequence& seq, const std::optional<std::string>& tag,
                      const ScorerConfig& cfg) {
    MetricReport report;
    for (auto&& [name, value] : composition_metrics(seq, cfg)) report.sub_scores[name] = value;
    for (auto&& [name, value] : physchem_metrics(seq, cfg)) report.sub_scores[name] = value;
    for (auto&& [name, value] : complexity_metrics(seq, cfg)) report.sub_scores[name] = value;
    for (auto&& [name, value] : functional_metrics(seq, tag, cfg)) report.sub_scores[name] = value;

    double num = 0.0;
    double den = 0.0;
    for (const auto& [name, value] : report.sub_scores) {
        double w = cfg.weight_of(name);
        num += w * value;
        den += w;
    }
    report.overall = num / den;
    report.n_metrics = static_cast<int>(report.sub_scores.size());
    return report;
}

std::array<double, kNumResidues> load_residue_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open table file: " + path);
    std::array<double, kNumResidues> table{};
    std::array<bool, kNumResidues> seen{};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_line(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string residue;
        double value;
        if (!(row >> residue >> value) || residue.size() != 1)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 'residue<TAB>value'");
        auto pos = kResidueLetters.find(residue[0]);
        if (pos == std::string_view::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": unknown residue " + residue);
        if (seen[pos])
            throw DataError(path + ":" + std::to_string(lineno) + ": duplicate residue " + residue);
        seen[pos] = true;
        table[pos] = value;
    }
    for (std::size_t r = 0; r < kNumResidues; ++r) {
        if (!seen[r])
            throw DataError(path + ": missing residue " + std::string(1, kResidueLetters[r]));
    }
    return table;
}

std::map<std::string, std::vector<MotifPattern>> load_motif_registry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open motif file: " + path);
    std::map<std::string, std::vector<MotifPattern>> registry;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_line(line);
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 'tag<TAB>regex'");
        std::string tag = line.substr(0, tab);
        std::string pattern = line.substr(tab + 1);
        if (tag.empty() || pattern.empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": empty tag or pattern");
        try {
            std::regex probe(pattern);
        } catch (const std::regex_error& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad regex: " + e.what());
        }
        registry[tag].push_back({tag + "#" + std::to_string(registry[tag].size()), pattern});
    }
    return registry;
}

ScorerConfig ScorerConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scorer config: " + path);
    ScorerConfig cfg = defaults();
    auto dir = std::filesystem::path(path).parent_path();
    auto resolve = [&dir](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (dir / fp).string();
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_line(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "gravy_lo") cfg.gravy_lo = std::stod(value);
            else if (key == "gravy_hi") cfg.gravy_hi = std::stod(value);
            else if (key == "rare_cap_c") cfg.rare_cap_c = std::stod(value);
            else if (key == "rare_cap_w") cfg.rare_cap_w = std::stod(value);
            else if (key == "charge_norm") cfg.charge_norm = std::stod(value);
            else if (key == "complexity_window") cfg.complexity_window = std::stoi(value);
            else if (key == "hydropathy_table") cfg.hydropathy_table = load_residue_table(resolve(value));
            else if (key == "background_freqs") {
                cfg.background_freqs = load_residue_table(resolve(value));
                double sum = 0.0;
                for (double f : cfg.background_freqs) sum += f;
                if (!(sum > 0.0)) throw ConfigError("background frequencies sum to zero");
                for (double& f : cfg.background_freqs) f /= sum;
            } else if (key == "helix_propensity") cfg.helix_propensity = load_residue_table(resolve(value));
            else if (key == "sheet_propensity") cfg.sheet_propensity = load_residue_table(resolve(value));
            else if (key == "motif_registry") cfg.motif_registry = load_motif_registry(resolve(value));
            else if (key.rfind("weight.", 0) == 0) cfg.weights[key.substr(7)] = std::stod(value);
            else if (key.rfind("charge.", 0) == 0) {
                std::string letter = key.substr(7);
                if (letter.size() != 1 || kResidueLetters.find(letter[0]) == std::string_view::npos)
                    throw ConfigError("unknown residue in charge override: " + letter);
                cfg.charge_map[kResidueLetters.find(letter[0])] = std::stod(value);
            } else throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace epgf
