#include "doctest.h"

#include <sys/resource.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <streambuf>

#include "json.hpp"

#include "epgf/datasets.hpp"
#include "epgf/error.hpp"

using namespace epgf;

TEST_CASE("fasta parsing joins lines and splits headers") {
    std::istringstream in(">a first record\nACD\nEFG\n>b\nMK\n");
    FastaReader reader(in);
    auto a = reader.next();
    REQUIRE(a);
    CHECK(a->id == "a");
    CHECK(a->description == "first record");
    CHECK(a->residues == "ACDEFG");
    auto b = reader.next();
    REQUIRE(b);
    CHECK(b->id == "b");
    CHECK(b->residues == "MK");
    CHECK_FALSE(reader.next().has_value());
}

TEST_CASE("fasta parsing strips whitespace and CRLF") {
    std::istringstream in(">a\r\nAC D\r\nEF\r\n");
    FastaReader reader(in);
    auto a = reader.next();
    REQUIRE(a);
    CHECK(a->residues == "ACDEF");
}

TEST_CASE("fasta errors: empty record and missing header") {
    std::istringstream empty_rec(">a\n>b\nAC\n");
    FastaReader r1(empty_rec);
    CHECK_THROWS_AS(r1.next(), EmptyRecordError);

    std::istringstream no_header("ACDE\n");
    FastaReader r2(no_header);
    CHECK_THROWS_AS(r2.next(), MalformedHeaderError);

    std::istringstream trailing(">a\nAC\n>b\n");
    FastaReader r3(trailing);
    CHECK(r3.next().has_value());
    CHECK_THROWS_AS(r3.next(), EmptyRecordError);
}

TEST_CASE("fasta keeps file order") {
    std::istringstream in(">r1\nAA\n>r2\nCC\n>r3\nDD\n");
    FastaReader reader(in);
    std::vector<std::string> ids;
    while (auto rec = reader.next()) ids.push_back(rec->id);
    CHECK(ids == std::vector<std::string>{"r1", "r2", "r3"});
}

TEST_CASE("pretraining filter keeps standard residues under the length cutoff") {
    auto fasta = [](const std::string& residues) {
        return FastaRecord{"x", "", residues};
    };
    FilterStats stats;
    CHECK(passes_pretraining_filter(fasta(std::string(511, 'A')), 512, stats));
    CHECK_FALSE(passes_pretraining_filter(fasta(std::string(512, 'A')), 512, stats));
    CHECK_FALSE(passes_pretraining_filter(fasta("ACXD"), 512, stats));
    CHECK_FALSE(passes_pretraining_filter(fasta("ACBD"), 512, stats));
    CHECK_FALSE(passes_pretraining_filter(fasta("ACUD"), 512, stats));
    CHECK(stats.total == 5);
    CHECK(stats.kept == 1);
    CHECK(stats.too_long == 1);
    CHECK(stats.nonstandard == 3);
}

TEST_CASE("streaming filter is idempotent") {
    std::string fasta = ">a\nACDE\n>b\nACXDE\n>c\n" + std::string(600, 'M') + "\n>d\nMKV\n";
    std::istringstream first(fasta);
    std::ostringstream kept_fasta;
    auto stats1 = filter_pretraining(first, 512, [&](const FastaRecord& rec) {
        kept_fasta << '>' << rec.id << '\n' << rec.residues << '\n';
    });
    CHECK(stats1.kept == 2);

    std::istringstream second(kept_fasta.str());
    std::size_t passed = 0;
    auto stats2 = filter_pretraining(second, 512, [&](const FastaRecord&) { ++passed; });
    CHECK(stats2.kept == stats1.kept);
    CHECK(stats2.nonstandard == 0);
    CHECK(stats2.too_long == 0);
    CHECK(passed == 2);
}

TEST_CASE("affixing is invertible and line-per-record") {
    CHECK(affix_pretraining("ACD") == "Seq=<ACD>");
    CHECK(strip_affixes("Seq=<ACD>") == "ACD");
    CHECK(strip_affixes(affix_pretraining("")) == "");
    CHECK_THROWS_AS(strip_affixes("ACD"), DataError);
}

TEST_CASE("instruction builder emits exactly two records per kept pair") {
    std::vector<AnnotatedProtein> annotated = {
        {"ACDE", "SAM-MT"},
        {std::string(255, 'A'), "TPHD"},
        {std::string(256, 'A'), "TPHD"},  // too long, excluded
        {"ACXE", "Trx"},                  // nonstandard, excluded
        {"MKVL", ""},                     // empty tag, excluded
        {"MKVL", "CheY"},
        {"GSHM", "CheY"},
        {"WYWY", "Trx"},
    };
    InstructionStats stats;
    auto records = build_instruction_records(annotated, 256, stats);
    CHECK(stats.pairs_in == 8);
    CHECK(stats.pairs_kept == 5);
    CHECK(stats.records_out == 10);
    CHECK(records.size() == 10);
    CHECK(stats.rejected_too_long == 1);
    CHECK(stats.rejected_nonstandard == 1);
    CHECK(stats.rejected_empty_tag == 1);

    // Task G then task D for each pair, protein always affixed.
    CHECK(records[0].instruction == kGenerationInstruction);
    CHECK(records[0].input == "SAM-MT");
    CHECK(records[0].output == "Seq=<ACDE>");
    CHECK(records[1].instruction == kDeterminationInstruction);
    CHECK(records[1].input == "Seq=<ACDE>");
    CHECK(records[1].output == "SAM-MT");

    for (std::size_t i = 0; i < records.size(); i += 2) {
        CHECK(records[i].instruction == kGenerationInstruction);
        CHECK(records[i + 1].instruction == kDeterminationInstruction);
        // The protein-bearing field re-validates after stripping affixes.
        CHECK(is_standard_residue_text(strip_affixes(records[i].output)));
    }
}

TEST_CASE("instruction jsonl round-trips through a JSON parser") {
    InstructionRecord rec{"inst \"quoted\"", "in\nput", "out\\put"};
    auto line = instruction_to_jsonl(rec);
    auto parsed = nlohmann::json::parse(line);
    CHECK(parsed["instruction"] == rec.instruction);
    CHECK(parsed["input"] == rec.input);
    CHECK(parsed["output"] == rec.output);
}

TEST_CASE("split is deterministic, disjoint, and exhaustive") {
    std::vector<int> records(10);
    std::iota(records.begin(), records.end(), 0);
    auto [train1, test1] = split_train_test(records, 0.9, 7);
    auto [train2, test2] = split_train_test(records, 0.9, 7);
    CHECK(train1.size() == 9);
    CHECK(test1.size() == 1);
    CHECK(train1 == train2);
    CHECK(test1 == test2);

    std::multiset<int> all(train1.begin(), train1.end());
    all.insert(test1.begin(), test1.end());
    CHECK(all == std::multiset<int>(records.begin(), records.end()));

    auto [train3, test3] = split_train_test(records, 0.9, 8);
    CHECK((train3 != train1 || test3 != test1));  // seed matters

    CHECK_THROWS_AS(split_train_test(records, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split_train_test(records, 1.0, 1), ConfigError);
}

namespace {

// Synthesizes FASTA text on demand so the full input never exists in
// memory; lets the streaming property be checked against a large input.
class SyntheticFastaBuf : public std::streambuf {
public:
    SyntheticFastaBuf(std::size_t records, std::size_t seq_len)
        : records_(records), seq_len_(seq_len) {}

private:
    int underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        if (emitted_ == records_) return traits_type::eof();
        chunk_ = ">rec" + std::to_string(emitted_) + "\n";
        chunk_ += std::string(seq_len_, "ACDEFGHIKLMNPQRSTVWY"[emitted_ % 20]);
        chunk_ += "\n";
        ++emitted_;
        setg(chunk_.data(), chunk_.data(), chunk_.data() + chunk_.size());
        return traits_type::to_int_type(*gptr());
    }

    std::size_t records_;
    std::size_t seq_len_;
    std::size_t emitted_ = 0;
    std::string chunk_;
};

}  // namespace

TEST_CASE("filtering streams records with constant memory") {
    const std::size_t records = 300000;
    const std::size_t seq_len = 400;  // ~120 MB of virtual input
    SyntheticFastaBuf buf(records, seq_len);
    std::istream in(&buf);

    std::size_t seen = 0;
    auto stats = filter_pretraining(in, 512, [&](const FastaRecord& rec) {
        ++seen;
        CHECK(rec.residues.size() == seq_len);
    });
    CHECK(stats.total == records);
    CHECK(stats.kept == records);
    CHECK(seen == records);

    // Peak RSS must stay far below the virtual input size.
    struct rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    CHECK(usage.ru_maxrss < 100 * 1024);  // KiB
}

TEST_CASE("annotations resolve ids through the cross-reference fasta") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "epgf_datasets_test";
    fs::create_directories(dir);
    {
        std::ofstream fasta(dir / "xref.fasta");
        fasta << ">p1\nACDE\n>p2\nMKVL\n";
        std::ofstream tsv(dir / "ann.tsv");
        tsv << "p1\tSAM-MT\n";
        tsv << "GSHM\tTPHD\n";  // literal residues, not an id
    }
    auto annotated = load_annotations((dir / "ann.tsv").string(), (dir / "xref.fasta").string());
    REQUIRE(annotated.size() == 2);
    CHECK(annotated[0].residues == "ACDE");
    CHECK(annotated[0].tag == "SAM-MT");
    CHECK(annotated[1].residues == "GSHM");
    CHECK(annotated[1].tag == "TPHD");
}
