#include "epgf/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace epgf {

namespace {

std::string strip_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    }
    return out;
}

}  // namespace

std::optional<FastaRecord> FastaReader::next() {
    if (done_ && !pending_header_) return std::nullopt;

    std::string header;
    if (pending_header_) {
        header = *pending_header_;
        pending_header_.reset();
    } else {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line[0] != '>') throw MalformedHeaderError(lineno_);
            header = line;
            break;
        }
        if (header.empty()) {
            done_ = true;
            return std::nullopt;
        }
    }

    FastaRecord record;
    auto ws = header.find_first_of(" \t", 1);
    if (ws == std::string::npos) {
        record.id = header.substr(1);
    } else {
        record.id = header.substr(1, ws - 1);
        record.description = header.substr(ws + 1);
    }
    if (record.id.empty()) throw DataError("FASTA line " + std::to_string(lineno_) + ": empty id");

    std::string line;
    while (std::getline(in_, line)) {
        ++lineno_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '>') {
            pending_header_ = line;
            break;
        }
        record.residues += strip_whitespace(line);
    }
    if (!pending_header_ && in_.eof()) done_ = true;
    if (record.residues.empty()) throw EmptyRecordError(record.id);
    return record;
}

std::vector<FastaRecord> read_fasta_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open FASTA file: " + path);
    std::vector<FastaRecord> records;
    FastaReader reader(in);
    while (auto record = reader.next()) records.push_back(std::move(*record));
    return records;
}

void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records) {
    for (const auto& record : records) {
        out << '>' << record.id;
        if (!record.description.empty()) out << ' ' << record.description;
        out << '\n' << record.residues << '\n';
    }
}

std::string affix_pretraining(const std::string& residues) {
    return std::string(kSeqPrefix) + residues + std::string(kSeqSuffix);
}

std::string strip_affixes(const std::string& line) {
    if (line.size() < kSeqPrefix.size() + kSeqSuffix.size() ||
        line.compare(0, kSeqPrefix.size(), kSeqPrefix) != 0 || line.back() != '>')
        throw DataError("line does not carry the Seq=<...> affixes: " + line);
    return line.substr(kSeqPrefix.size(), line.size() - kSeqPrefix.size() - kSeqSuffix.size());
}

bool passes_pretraining_filter(const FastaRecord& record, std::size_t max_len,
                               FilterStats& stats) {
    ++stats.total;
    if (!is_standard_residue_text(record.residues)) {
        ++stats.nonstandard;
        return false;
    }
    if (record.residues.size() >= max_len) {
        ++stats.too_long;
        return false;
    }
    ++stats.kept;
    return true;
}

FilterStats filter_pretraining(std::istream& in, std::size_t max_len,
                               const std::function<void(const FastaRecord&)>& sink) {
    FilterStats stats;
    FastaReader reader(in);
    while (auto record = reader.next()) {
        if (passes_pretraining_filter(*record, max_len, stats)) sink(*record);
    }
    return stats;
}

std::vector<InstructionRecord> build_instruction_records(
    const std::vector<AnnotatedProtein>& annotated, std::size_t max_len,
    InstructionStats& stats) {
    std::vector<InstructionRecord> records;
    for (const auto& entry : annotated) {
        ++stats.pairs_in;
        if (entry.tag.empty()) {
            ++stats.rejected_empty_tag;
            continue;
        }
        if (!is_standard_residue_text(entry.residues) || entry.residues.empty()) {
            ++stats.rejected_nonstandard;
            continue;
        }
        if (entry.residues.size() >= max_len) {
            ++stats.rejected_too_long;
            continue;
        }
        ++stats.pairs_kept;
        std::string affixed = affix_pretraining(entry.residues);
        records.push_back({std::string(kGenerationInstruction), entry.tag, affixed});
        records.push_back({std::string(kDeterminationInstruction), affixed, entry.tag});
        stats.records_out += 2;
    }
    return records;
}

std::vector<AnnotatedProtein> load_annotations(const std::string& tsv_path,
                                               const std::optional<std::string>& fasta_path) {
    std::map<std::string, std::string> by_id;
    if (fasta_path) {
        for (auto& record : read_fasta_file(*fasta_path)) by_id[record.id] = record.residues;
    }
    std::ifstream in(tsv_path);
    if (!in) throw DataError("cannot open annotations file: " + tsv_path);
    std::vector<AnnotatedProtein> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(tsv_path + ":" + std::to_string(lineno) +
                            ": expected 'residues_or_id<TAB>tag'");
        std::string key = line.substr(0, tab);
        std::string tag = line.substr(tab + 1);
        auto it = by_id.find(key);
        out.push_back({it != by_id.end() ? it->second : key, tag});
    }
    return out;
}

std::string instruction_to_jsonl(const InstructionRecord& record) {
    nlohmann::json j = {
        {"instruction", record.instruction}, {"input", record.input}, {"output", record.output}};
    return j.dump();
}

}  // namespace epgf
