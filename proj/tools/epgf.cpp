// epgf: segment-level protein sequence generation with biophysical
// selection, plus the data preparation, scoring, serving, and evaluation
// commands around it.

#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "epgf/datasets.hpp"
#include "epgf/engine.hpp"
#include "epgf/error.hpp"
#include "epgf/eval.hpp"
#include "epgf/ngram.hpp"
#include "epgf/remote.hpp"
#include "epgf/version.hpp"

namespace {

using nlohmann::json;

// Write-then-rename so interrupted runs never leave truncated files
// under the final name.
class AtomicWriter {
public:
    explicit AtomicWriter(const std::string& path)
        : final_path_(path), tmp_path_(path + ".tmp"), out_(tmp_path_) {
        if (!out_) throw epgf::DataError("cannot open output file: " + tmp_path_);
    }
    ~AtomicWriter() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_path_, ec);
        }
    }
    std::ostream& stream() { return out_; }
    void commit() {
        out_.close();
        if (!out_) throw epgf::DataError("error while writing " + tmp_path_);
        std::filesystem::rename(tmp_path_, final_path_);
        committed_ = true;
    }

private:
    std::string final_path_;
    std::string tmp_path_;
    std::ofstream out_;
    bool committed_ = false;
};

struct ManifestScope {
    std::string subcommand;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string config_snapshot;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void emit() const {
        double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json manifest = {{"subcommand", subcommand}, {"version", epgf::kVersion},
                         {"seed", seed},             {"inputs", inputs},
                         {"outputs", outputs},       {"config", config_snapshot},
                         {"wall_clock_s", wall}};
        std::cerr << json{{"run_manifest", manifest}}.dump() << "\n";
    }
};

epgf::ModelServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

// ---------------------------------------------------------------- options

struct PrepareOpts {
    std::string fasta;
    std::size_t max_len = 512;
    bool affix = true;
    std::string out;
};

struct InstructionsOpts {
    std::string annotations;
    std::string fasta;
    std::size_t max_len = 256;
    double split = 0.9;
    std::uint64_t seed = 42;
    std::string out_train;
    std::string out_test;
};

struct TrainOpts {
    std::string corpus;
    std::string tags;
    int order = 3;
    double alpha = 0.1;
    std::string out;
};

struct ServeOpts {
    std::string model;
    std::string bind = "127.0.0.1:8080";
};

struct GenerateOpts {
    std::string model;
    std::string endpoint;
    std::string tag;
    std::string scorer_config;
    epgf::GenerationConfig cfg;
    int count = 1;
    bool baseline = false;
    std::string trace_out;
    std::string out;
    std::string score_scope = "prefix";
    std::string id_prefix = "epgf";
};

struct ScoreOpts {
    std::string in;
    std::string tag;
    std::string scorer_config;
    std::string out;
};

struct EvaluateOpts {
    std::string arm_a;
    std::string arm_b;
    std::string reference;
    std::string tag;
    std::string scorer_config;
    std::string report;
    std::string table;
};

// ---------------------------------------------------------------- helpers

std::optional<std::string> opt_tag(const std::string& tag) {
    return tag.empty() ? std::nullopt : std::optional<std::string>(tag);
}

epgf::ScorerConfig load_scorer(const std::string& path) {
    return path.empty() ? epgf::ScorerConfig::defaults() : epgf::ScorerConfig::load(path);
}

std::unique_ptr<epgf::SequenceModel> open_model(const std::string& model_path,
                                                const std::string& endpoint) {
    if (!model_path.empty() && !endpoint.empty())
        throw epgf::ConfigError("--model and --endpoint are mutually exclusive");
    if (!model_path.empty())
        return std::make_unique<epgf::NgramModel>(epgf::NgramModel::load(model_path));
    if (!endpoint.empty())
        return std::make_unique<epgf::RemoteModel>(epgf::RemoteModel::connect(endpoint));
    throw epgf::ConfigError("one of --model or --endpoint (or EPGF_MODEL_ENDPOINT) is required");
}

std::vector<epgf::Sequence> read_validated_fasta(const std::string& path,
                                                 const epgf::Alphabet& alphabet,
                                                 std::vector<std::string>* ids = nullptr) {
    std::vector<epgf::Sequence> sequences;
    for (const auto& record : epgf::read_fasta_file(path)) {
        sequences.push_back(epgf::validate_sequence(record.residues, alphabet));
        if (ids) ids->push_back(record.id);
    }
    return sequences;
}

// ---------------------------------------------------------------- runners

void run_prepare(const PrepareOpts& opt, ManifestScope& scope) {
    std::ifstream in(opt.fasta);
    if (!in) throw epgf::DataError("cannot open FASTA file: " + opt.fasta);
    AtomicWriter writer(opt.out);
    auto stats = epgf::filter_pretraining(in, opt.max_len, [&](const epgf::FastaRecord& rec) {
        writer.stream() << (opt.affix ? epgf::affix_pretraining(rec.residues) : rec.residues)
                        << "\n";
    });
    writer.commit();
    std::cerr << json{{"total", stats.total},
                      {"kept", stats.kept},
                      {"nonstandard", stats.nonstandard},
                      {"too_long", stats.too_long}}
                     .dump()
              << "\n";
    scope.inputs = {opt.fasta};
    scope.outputs = {opt.out};
}

void run_instructions(const InstructionsOpts& opt, ManifestScope& scope) {
    auto annotated = epgf::load_annotations(
        opt.annotations, opt.fasta.empty() ? std::nullopt : std::optional(opt.fasta));
    epgf::InstructionStats stats;
    auto records = epgf::build_instruction_records(annotated, opt.max_len, stats);
    auto [train, test] = epgf::split_train_test(std::move(records), opt.split, opt.seed);

    AtomicWriter train_out(opt.out_train);
    for (const auto& rec : train) train_out.stream() << epgf::instruction_to_jsonl(rec) << "\n";
    train_out.commit();
    AtomicWriter test_out(opt.out_test);
    for (const auto& rec : test) test_out.stream() << epgf::instruction_to_jsonl(rec) << "\n";
    test_out.commit();

    std::cerr << json{{"pairs_in", stats.pairs_in},
                      {"pairs_kept", stats.pairs_kept},
                      {"records_out", stats.records_out},
                      {"rejected_nonstandard", stats.rejected_nonstandard},
                      {"rejected_too_long", stats.rejected_too_long},
                      {"rejected_empty_tag", stats.rejected_empty_tag},
                      {"train", train.size()},
                      {"test", test.size()}}
                     .dump()
              << "\n";
    scope.seed = opt.seed;
    scope.inputs = {opt.annotations};
    if (!opt.fasta.empty()) scope.inputs.push_back(opt.fasta);
    scope.outputs = {opt.out_train, opt.out_test};
}

void run_train(const TrainOpts& opt, ManifestScope& scope) {
    std::map<std::string, std::string> tag_by_id;
    if (!opt.tags.empty()) {
        std::ifstream in(opt.tags);
        if (!in) throw epgf::DataError("cannot open tags file: " + opt.tags);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw epgf::DataError(opt.tags + ":" + std::to_string(lineno) +
                                      ": expected 'id<TAB>tag'");
            tag_by_id[line.substr(0, tab)] = line.substr(tab + 1);
        }
    }

    epgf::Alphabet alphabet;
    std::vector<epgf::TaggedSequence> corpus;
    for (const auto& record : epgf::read_fasta_file(opt.corpus)) {
        epgf::TaggedSequence entry;
        entry.seq = epgf::validate_sequence(record.residues, alphabet);
        auto it = tag_by_id.find(record.id);
        if (it != tag_by_id.end()) entry.tag = it->second;
        corpus.push_back(std::move(entry));
    }
    auto model = epgf::NgramModel::train(corpus, opt.order, opt.alpha);

    // save() streams directly; wrap in the same write-then-rename step.
    std::string tmp = opt.out + ".tmp";
    model.save(tmp);
    std::filesystem::rename(tmp, opt.out);

    std::cerr << json{{"sequences", corpus.size()},
                      {"contexts", model.context_count()},
                      {"order", model.order()},
                      {"model_id", model.model_id()}}
                     .dump()
              << "\n";
    scope.inputs = {opt.corpus};
    if (!opt.tags.empty()) scope.inputs.push_back(opt.tags);
    scope.outputs = {opt.out};
}

void run_serve(const ServeOpts& opt, ManifestScope& scope) {
    auto model = epgf::NgramModel::load(opt.model);
    auto colon = opt.bind.rfind(':');
    if (colon == std::string::npos)
        throw epgf::ConfigError("--bind must be host:port, got '" + opt.bind + "'");
    std::string host = opt.bind.substr(0, colon);
    int port = std::stoi(opt.bind.substr(colon + 1));

    epgf::ModelServer server(model);
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cerr << json{{"serving", opt.bind}, {"model_id", model.model_id()}}.dump() << "\n";
    server.run(host, port);
    g_server = nullptr;
    scope.inputs = {opt.model};
}

void run_generate(GenerateOpts& opt, ManifestScope& scope) {
    if (opt.count < 1) throw epgf::ConfigError("--count must be >= 1");
    if (opt.baseline && !opt.trace_out.empty())
        throw epgf::ConfigError("--trace-out is not available with --baseline");
    opt.cfg.score_scope = epgf::parse_score_scope(opt.score_scope);
    opt.cfg.validate();

    auto model = open_model(opt.model, opt.endpoint);
    auto scorer = load_scorer(opt.scorer_config);
    auto tag = opt_tag(opt.tag);
    std::uint64_t master_seed = opt.cfg.seed;

    std::vector<epgf::FastaRecord> records;
    std::unique_ptr<AtomicWriter> trace_writer;
    if (!opt.trace_out.empty()) trace_writer = std::make_unique<AtomicWriter>(opt.trace_out);

    for (int i = 0; i < opt.count; ++i) {
        epgf::GenerationConfig cfg = opt.cfg;
        cfg.seed = epgf::derive_seed(master_seed, static_cast<std::uint64_t>(i));
        char idbuf[64];
        std::snprintf(idbuf, sizeof(idbuf), "%s_%04d", opt.id_prefix.c_str(), i);

        std::string residues;
        double overall = 0.0;
        epgf::StopReason stop;
        if (opt.baseline) {
            auto seq = epgf::baseline_generate(*model, cfg, tag);
            residues = epgf::detokenize(seq, model->alphabet());
            stop = !seq.tokens.empty() && seq.tokens.back() == model->alphabet().eos()
                       ? epgf::StopReason::EOS
                       : epgf::StopReason::MaxLength;
            if (!residues.empty())
                overall = epgf::bioscore(epgf::validate_sequence(residues, model->alphabet()),
                                         tag, scorer)
                              .overall;
        } else {
            auto result = epgf::generate(*model, scorer, cfg, tag);
            residues = result.trace.final_sequence;
            stop = result.trace.stop_reason;
            if (!residues.empty())
                overall = epgf::bioscore(epgf::validate_sequence(residues, model->alphabet()),
                                         tag, scorer)
                              .overall;
            if (trace_writer)
                trace_writer->stream()
                    << epgf::trace_to_jsonl(result.trace, model->alphabet(), idbuf) << "\n";
        }
        records.push_back(
            {idbuf, epgf::generation_description(tag, overall, stop, cfg.seed), residues});
    }

    AtomicWriter out(opt.out);
    epgf::write_fasta(out.stream(), records);
    out.commit();
    if (trace_writer) trace_writer->commit();

    scope.seed = master_seed;
    if (!opt.model.empty()) scope.inputs.push_back(opt.model);
    if (!opt.endpoint.empty()) scope.inputs.push_back(opt.endpoint);
    scope.outputs = {opt.out};
    if (!opt.trace_out.empty()) scope.outputs.push_back(opt.trace_out);
}

void run_score(const ScoreOpts& opt, ManifestScope& scope) {
    epgf::Alphabet alphabet;
    auto scorer = load_scorer(opt.scorer_config);
    auto tag = opt_tag(opt.tag);
    std::vector<std::string> ids;
    auto sequences = read_validated_fasta(opt.in, alphabet, &ids);

    std::unique_ptr<AtomicWriter> writer;
    if (!opt.out.empty()) writer = std::make_unique<AtomicWriter>(opt.out);
    std::ostream& out = writer ? writer->stream() : std::cout;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        auto report = epgf::bioscore(sequences[i], tag, scorer);
        out << epgf::report_to_jsonl(report, ids[i]) << "\n";
    }
    if (writer) writer->commit();
    scope.inputs = {opt.in};
    if (!opt.out.empty()) scope.outputs = {opt.out};
}

void run_evaluate(const EvaluateOpts& opt, ManifestScope& scope) {
    epgf::Alphabet alphabet;
    auto scorer = load_scorer(opt.scorer_config);
    auto tag = opt_tag(opt.tag);
    auto arm_a = read_validated_fasta(opt.arm_a, alphabet);
    auto arm_b = read_validated_fasta(opt.arm_b, alphabet);
    std::vector<epgf::Sequence> reference;
    if (!opt.reference.empty()) reference = read_validated_fasta(opt.reference, alphabet);

    auto report = epgf::ablation_report(arm_a, arm_b, scorer, tag, reference);
    std::string table = epgf::ablation_table(report);
    std::cout << table;
    if (!opt.report.empty()) {
        AtomicWriter writer(opt.report);
        writer.stream() << epgf::ablation_json(report) << "\n";
        writer.commit();
        scope.outputs.push_back(opt.report);
    }
    if (!opt.table.empty()) {
        AtomicWriter writer(opt.table);
        writer.stream() << table;
        writer.commit();
        scope.outputs.push_back(opt.table);
    }
    scope.inputs = {opt.arm_a, opt.arm_b};
    if (!opt.reference.empty()) scope.inputs.push_back(opt.reference);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"segment-level protein generation with biophysical selection"};
    app.set_version_flag("--version", epgf::kVersion);
    app.set_config("--config", "", "key-value config file mirroring flag names");
    app.require_subcommand(1);

    PrepareOpts prep;
    auto* prep_cmd = app.add_subcommand("prepare-data", "filter and affix a FASTA corpus");
    prep_cmd->add_option("--fasta", prep.fasta, "input FASTA")->required();
    prep_cmd->add_option("--max-len", prep.max_len, "keep sequences strictly shorter than this")
        ->capture_default_str();
    prep_cmd->add_flag("--affix,!--no-affix", prep.affix, "wrap lines as Seq=<...>")
        ->capture_default_str();
    prep_cmd->add_option("--out", prep.out, "output text file, one sequence per line")
        ->required();

    InstructionsOpts instr;
    auto* instr_cmd =
        app.add_subcommand("make-instructions", "build the two-task instruction dataset");
    instr_cmd->add_option("--annotations", instr.annotations, "TSV: residues_or_id<TAB>tag")
        ->required();
    instr_cmd->add_option("--fasta", instr.fasta, "optional FASTA to resolve ids");
    instr_cmd->add_option("--max-len", instr.max_len, "keep proteins strictly shorter than this")
        ->capture_default_str();
    instr_cmd->add_option("--split", instr.split, "train fraction")->capture_default_str();
    instr_cmd->add_option("--seed", instr.seed, "shuffle seed")->capture_default_str();
    instr_cmd->add_option("--out-train", instr.out_train, "train JSONL")->required();
    instr_cmd->add_option("--out-test", instr.out_test, "test JSONL")->required();

    TrainOpts train;
    auto* train_cmd = app.add_subcommand("train", "train the n-gram baseline model");
    train_cmd->add_option("--corpus", train.corpus, "training FASTA")->required();
    train_cmd->add_option("--tags", train.tags, "optional TSV: record_id<TAB>tag");
    train_cmd->add_option("--order", train.order, "n-gram order k")->capture_default_str();
    train_cmd->add_option("--alpha", train.alpha, "add-alpha smoothing")->capture_default_str();
    train_cmd->add_option("--out", train.out, "model file")->required();

    ServeOpts serve;
    auto* serve_cmd = app.add_subcommand("serve", "serve a model over HTTP");
    serve_cmd->add_option("--model", serve.model, "model file")->required();
    serve_cmd->add_option("--bind", serve.bind, "host:port")->capture_default_str();

    GenerateOpts gen;
    auto* gen_cmd = app.add_subcommand("generate", "generate protein sequences");
    gen_cmd->add_option("--model", gen.model, "local model file");
    gen_cmd->add_option("--endpoint", gen.endpoint, "model server URL")
        ->envname("EPGF_MODEL_ENDPOINT");
    gen_cmd->add_option("--tag", gen.tag, "condition on this superfamily tag");
    gen_cmd->add_option("--scorer-config", gen.scorer_config, "scorer config file");
    gen_cmd->add_option("--num", gen.cfg.num_candidates, "candidate segments per round N")
        ->capture_default_str();
    gen_cmd->add_option("--segment-len", gen.cfg.segment_len, "tokens per segment L")
        ->capture_default_str();
    gen_cmd->add_option("--tau0", gen.cfg.tau0, "initial selection temperature")
        ->capture_default_str();
    gen_cmd->add_option("--tau-final", gen.cfg.tau_final, "temperature floor")
        ->capture_default_str();
    gen_cmd->add_option("--gamma", gen.cfg.gamma, "temperature decay rate")
        ->capture_default_str();
    gen_cmd->add_option("--floor", gen.cfg.score_floor, "minimum acceptable biophysical score")
        ->capture_default_str();
    gen_cmd->add_option("--max-residues", gen.cfg.max_residues, "stop once reached")
        ->capture_default_str();
    gen_cmd->add_option("--seed", gen.cfg.seed, "master seed")->capture_default_str();
    gen_cmd->add_option("--count", gen.count, "sequences to emit")->capture_default_str();
    gen_cmd->add_flag("--baseline", gen.baseline, "plain sampling ablation arm");
    gen_cmd->add_flag("--length-norm", gen.cfg.length_normalized_filter,
                      "rank candidates by logprob per token");
    gen_cmd->add_option("--trace-out", gen.trace_out, "JSONL generation traces");
    gen_cmd->add_option("--out", gen.out, "output FASTA")->required();
    gen_cmd->add_option("--score-scope", gen.score_scope, "score 'prefix' or 'segment'")
        ->capture_default_str();
    gen_cmd->add_option("--id-prefix", gen.id_prefix, "FASTA id prefix")->capture_default_str();

    ScoreOpts score;
    auto* score_cmd = app.add_subcommand("score", "score sequences, one JSON report per line");
    score_cmd->add_option("--in", score.in, "input FASTA")->required();
    score_cmd->add_option("--tag", score.tag, "superfamily tag for motif scoring");
    score_cmd->add_option("--scorer-config", score.scorer_config, "scorer config file");
    score_cmd->add_option("--out", score.out, "output JSONL (default stdout)");

    EvaluateOpts eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "compare two generation arms");
    eval_cmd->add_option("--arm-a", eval.arm_a, "FASTA for arm A")->required();
    eval_cmd->add_option("--arm-b", eval.arm_b, "FASTA for arm B")->required();
    eval_cmd->add_option("--reference", eval.reference, "optional reference FASTA");
    eval_cmd->add_option("--tag", eval.tag, "superfamily tag");
    eval_cmd->add_option("--scorer-config", eval.scorer_config, "scorer config file");
    eval_cmd->add_option("--report", eval.report, "JSON report path");
    eval_cmd->add_option("--table", eval.table, "plain-text table path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    ManifestScope scope;
    scope.config_snapshot = app.config_to_str(true, false);
    try {
        if (prep_cmd->parsed()) {
            scope.subcommand = "prepare-data";
            run_prepare(prep, scope);
        } else if (instr_cmd->parsed()) {
            scope.subcommand = "make-instructions";
            run_instructions(instr, scope);
        } else if (train_cmd->parsed()) {
            scope.subcommand = "train";
            run_train(train, scope);
        } else if (serve_cmd->parsed()) {
            scope.subcommand = "serve";
            run_serve(serve, scope);
        } else if (gen_cmd->parsed()) {
            scope.subcommand = "generate";
            run_generate(gen, scope);
        } else if (score_cmd->parsed()) {
            scope.subcommand = "score";
            run_score(score, scope);
        } else if (eval_cmd->parsed()) {
            scope.subcommand = "evaluate";
            run_evaluate(eval, scope);
        }
        scope.emit();
    } catch (const epgf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.family()) {
            case epgf::ErrorFamily::Usage: return 2;
            case epgf::ErrorFamily::Data: return 3;
            case epgf::ErrorFamily::Model: return 4;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
