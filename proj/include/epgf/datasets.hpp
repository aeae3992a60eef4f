#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epgf/error.hpp"
#include "epgf/rng.hpp"
#include "epgf/sequence.hpp"

namespace epgf {

struct FastaRecord {
    std::string id;
    std::string description;
    std::string residues;
};

class MalformedHeaderError : public DataError {
public:
    explicit MalformedHeaderError(int line)
        : DataError("FASTA line " + std::to_string(line) + ": sequence data before any header") {}
};

class EmptyRecordError : public DataError {
public:
    explicit EmptyRecordError(const std::string& id)
        : DataError("FASTA record '" + id + "' has no sequence data") {}
};

// Streaming FASTA reader: one record in memory at a time, multi-line
// sequences joined, header split into id/description at the first
// whitespace, all whitespace stripped from sequence lines.
class FastaReader {
public:
    explicit FastaReader(std::istream& in) : in_(in) {}
    std::optional<FastaRecord> next();

private:
    std::istream& in_;
    std::optional<std::string> pending_header_;
    int lineno_ = 0;
    bool done_ = false;
};

std::vector<FastaRecord> read_fasta_file(const std::string& path);
void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records);

// Pretraining-corpus affixes. Applied at the text-serialization layer
// only; Sequence tokens never contain them.
inline constexpr std::string_view kSeqPrefix = "Seq=<";
inline constexpr std::string_view kSeqSuffix = ">";

std::string affix_pretraining(const std::string& residues);
// Inverse of affix_pretraining; throws DataError when the affixes are absent.
std::string strip_affixes(const std::string& line);

struct FilterStats {
    std::uint64_t total = 0;
    std::uint64_t kept = 0;
    std::uint64_t nonstandard = 0;
    std::uint64_t too_long = 0;
};

// Keeps records made only of the 20 standard residues with length
// strictly below max_len. Rejections are counted, not raised.
bool passes_pretraining_filter(const FastaRecord& record, std::size_t max_len, FilterStats& stats);

// Streaming filter over a FASTA stream; calls sink for each kept record.
FilterStats filter_pretraining(std::istream& in, std::size_t max_len,
                               const std::function<void(const FastaRecord&)>& sink);

struct InstructionRecord {
    std::string instruction;
    std::string input;
    std::string output;
};

// The two task templates, registered in one place.
inline constexpr std::string_view kGenerationInstruction =
    "Generate a protein sequence for the given superfamily.";
inline constexpr std::string_view kDeterminationInstruction =
    "Determine the superfamily of the given protein sequence.";

struct AnnotatedProtein {
    std::string residues;
    std::string tag;
};

struct InstructionStats {
    std::uint64_t pairs_in = 0;
    std::uint64_t pairs_kept = 0;
    std::uint64_t records_out = 0;
    std::uint64_t rejected_nonstandard = 0;
    std::uint64_t rejected_too_long = 0;
    std::uint64_t rejected_empty_tag = 0;
};

// Emits exactly two records per kept (protein, tag) pair: the generation
// task (input = tag, output = affixed sequence) and the determination
// task (input = affixed sequence, output = tag). Keeps proteins with
// length strictly below max_len.
std::vector<InstructionRecord> build_instruction_records(
    const std::vector<AnnotatedProtein>& annotated, std::size_t max_len, InstructionStats& stats);

// Two-column TSV: residues_or_id <TAB> tag. When a cross-reference FASTA
// is supplied, first-column values matching a record id resolve to that
// record's residues; anything else is taken as literal residues.
std::vector<AnnotatedProtein> load_annotations(const std::string& tsv_path,
                                               const std::optional<std::string>& fasta_path);

std::string instruction_to_jsonl(const InstructionRecord& record);

// Deterministic seeded shuffle (Fisher-Yates on our own rng) followed by
// a floor(fraction * n) split. Disjoint and exhaustive.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_train_test(std::vector<T> records,
                                                           double train_fraction,
                                                           std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train fraction must be in (0, 1)");
    Rng rng(derive_seed(seed, "split"));
    for (std::size_t i = records.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(records[i - 1], records[j]);
    }
    auto n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(records.size())));
    std::vector<T> train(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<T> test(records.begin() + static_cast<std::ptrdiff_t>(n_train), records.end());
    return {std::move(train), std::move(test)};
}

}  // namespace epgf
