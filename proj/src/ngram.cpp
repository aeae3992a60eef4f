#include "epgf/ngram.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "epgf/error.hpp"

namespace epgf {

TokenDistribution distribution_from_logprobs(std::span<const double> logprobs) {
    TokenDistribution dist;
    dist.probs.resize(logprobs.size());
    for (std::size_t i = 0; i < logprobs.size(); ++i) dist.probs[i] = std::exp(logprobs[i]);
    return dist;
}

NgramModel::NgramModel(int order, double alpha, Alphabet alphabet)
    : order_(order), alpha_(alpha), alphabet_(std::move(alphabet)) {
    if (order_ < 1) throw ConfigError("n-gram order must be >= 1");
    if (order_ > kMaxOrder)
        throw ConfigError("n-gram order " + std::to_string(order_) + " exceeds the maximum of " +
                          std::to_string(kMaxOrder));
    if (!(alpha_ > 0.0)) throw ConfigError("smoothing alpha must be positive");
    for (TokenId id = 0; id < static_cast<TokenId>(kNumResidues); ++id) emittable_.push_back(id);
    emittable_.push_back(alphabet_.eos());
}

NgramModel NgramModel::uniform(int order, double alpha, Alphabet alphabet) {
    return NgramModel(order, alpha, std::move(alphabet));
}

NgramModel NgramModel::train(const std::vector<TaggedSequence>& corpus, int order, double alpha) {
    if (corpus.empty()) throw DataError("training corpus is empty");
    Alphabet alphabet;
    for (const auto& entry : corpus) {
        if (entry.tag) alphabet.add_condition(*entry.tag);
    }
    NgramModel model(order, alpha, std::move(alphabet));
    for (const auto& entry : corpus) {
        check_sequence(entry.seq, model.alphabet_);
        std::vector<TokenId> stream;
        stream.reserve(entry.seq.tokens.size() + order + 2);
        for (int i = 0; i + 1 < order; ++i) stream.push_back(model.alphabet_.bos());
        if (entry.tag) stream.push_back(*model.alphabet_.condition_id(*entry.tag));
        for (TokenId id : entry.seq.tokens) {
            if (model.alphabet_.is_residue(id)) stream.push_back(id);
        }
        stream.push_back(model.alphabet_.eos());
        model.observe(stream);
    }
    return model;
}

void NgramModel::observe(std::span<const TokenId> stream) {
    std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
    for (std::size_t p = 0; p < stream.size(); ++p) {
        TokenId tok = stream[p];
        bool emission = alphabet_.is_residue(tok) || tok == alphabet_.eos();
        if (!emission) continue;
        std::size_t lo = p >= ctx_len ? p - ctx_len : 0;
        std::vector<TokenId> ctx(stream.begin() + lo, stream.begin() + p);
        ++counts_[ctx][tok];
    }
}

std::vector<TokenId> NgramModel::context_key(std::span<const TokenId> context) const {
    std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
    std::vector<TokenId> key;
    key.reserve(ctx_len);
    if (context.size() < ctx_len) {
        for (std::size_t i = context.size(); i < ctx_len; ++i) key.push_back(alphabet_.bos());
    }
    std::size_t take = std::min(context.size(), ctx_len);
    key.insert(key.end(), context.end() - take, context.end());
    return key;
}

TokenDistribution NgramModel::next_distribution(std::span<const TokenId> context) const {
    for (TokenId id : context) {
        if (!alphabet_.is_valid(id))
            throw ModelError("context token " + std::to_string(id) + " outside alphabet");
    }
    TokenDistribution dist;
    dist.probs.assign(alphabet_.vocab_size(), 0.0);
    auto key = context_key(context);
    auto it = counts_.find(key);
    double v = static_cast<double>(emittable_.size());
    if (it == counts_.end()) {
        for (TokenId tok : emittable_) dist.probs[tok] = 1.0 / v;
        return dist;
    }
    double total = 0.0;
    for (const auto& [tok, cnt] : it->second) total += static_cast<double>(cnt);
    double denom = total + alpha_ * v;
    for (TokenId tok : emittable_) {
        auto cit = it->second.find(tok);
        double cnt = cit == it->second.end() ? 0.0 : static_cast<double>(cit->second);
        dist.probs[tok] = (cnt + alpha_) / denom;
    }
    return dist;
}

std::vector<double> NgramModel::next_logprobs(std::span<const TokenId> context) const {
    auto dist = next_distribution(context);
    std::vector<double> lp(dist.probs.size(), kLogProbFloor);
    for (std::size_t i = 0; i < dist.probs.size(); ++i) {
        if (dist.probs[i] > 0.0) lp[i] = std::log(dist.probs[i]);
    }
    return lp;
}

namespace {

struct LogprobSteps {
    double logprob = 0.0;
    std::size_t steps = 0;
};

}  // namespace

double NgramModel::sequence_logprob(const Sequence& seq) const {
    check_sequence(seq, alphabet_);
    std::vector<TokenId> stream;
    for (int i = 0; i + 1 < order_; ++i) stream.push_back(alphabet_.bos());
    bool has_eos = false;
    for (TokenId id : seq.tokens) {
        if (id == alphabet_.bos()) continue;  // pad already covers BOS
        if (id == alphabet_.eos()) has_eos = true;
        stream.push_back(id);
    }
    if (!has_eos) stream.push_back(alphabet_.eos());

    std::size_t pad = static_cast<std::size_t>(order_ - 1);
    double lp = 0.0;
    for (std::size_t p = pad; p < stream.size(); ++p) {
        TokenId tok = stream[p];
        if (!alphabet_.is_residue(tok) && tok != alphabet_.eos()) continue;  // context-only token
        auto dist = next_distribution(std::span<const TokenId>(stream.data(), p));
        lp += std::log(dist.probs[tok]);
    }
    return lp;
}

double NgramModel::perplexity(const std::vector<TaggedSequence>& corpus) const {
    if (corpus.empty()) throw DataError("perplexity corpus is empty");
    double nll = 0.0;
    std::size_t steps = 0;
    for (const auto& entry : corpus) {
        Sequence seq = entry.seq;
        if (entry.tag) {
            auto cond = alphabet_.condition_id(*entry.tag);
            if (!cond) throw ModelError("unknown condition tag: " + *entry.tag);
            Sequence tagged;
            tagged.tokens.push_back(*cond);
            for (TokenId id : seq.tokens) {
                if (id != alphabet_.bos()) tagged.tokens.push_back(id);
            }
            tagged.residue_len = seq.residue_len;
            seq = std::move(tagged);
        }
        nll -= sequence_logprob(seq);
        steps += seq.residue_len + 1;  // residue emissions plus the EOS step
    }
    return std::exp(nll / static_cast<double>(steps));
}

std::string NgramModel::model_id() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "ngram-k%d-a%g", order_, alpha_);
    return std::string(buf) + (counts_.empty() ? "-uniform" : "");
}

void NgramModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    char alpha_buf[64];
    std::snprintf(alpha_buf, sizeof(alpha_buf), "%.17g", alpha_);
    out << "epgf-ngram-v1\n";
    out << "order " << order_ << "\n";
    out << "alpha " << alpha_buf << "\n";
    out << "alphabet " << alphabet_.hash() << "\n";
    out << "conditions " << alphabet_.num_conditions() << "\n";
    for (const auto& label : alphabet_.condition_labels()) out << label << "\n";
    out << "contexts " << counts_.size() << "\n";
    for (const auto& [ctx, row] : counts_) {
        for (TokenId id : ctx) out << id << " ";
        out << ":";
        for (const auto& [tok, cnt] : row) out << " " << tok << " " << cnt;
        out << "\n";
    }
    if (!out) throw DataError("error while writing model file: " + path);
}

NgramModel NgramModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    std::string line;
    auto next_line = [&]() {
        if (!std::getline(in, line)) throw DataError(path + ": truncated model file");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    if (next_line() != "epgf-ngram-v1") throw DataError(path + ": not an epgf-ngram-v1 file");

    auto field = [&](const std::string& name) {
        next_line();
        if (line.rfind(name + " ", 0) != 0)
            throw DataError(path + ": expected '" + name + "' header line");
        return line.substr(name.size() + 1);
    };
    int order = std::stoi(field("order"));
    double alpha = std::stod(field("alpha"));
    std::string stored_hash = field("alphabet");
    std::size_t n_conditions = std::stoul(field("conditions"));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n_conditions; ++i) labels.push_back(next_line());

    NgramModel model(order, alpha, Alphabet(labels));
    if (model.alphabet_.hash() != stored_hash)
        throw DataError(path + ": alphabet hash mismatch (file corrupt or foreign tokenization)");

    std::size_t n_contexts = std::stoul(field("contexts"));
    for (std::size_t i = 0; i < n_contexts; ++i) {
        std::istringstream row(next_line());
        std::vector<TokenId> ctx;
        std::string tok;
        while (row >> tok && tok != ":") ctx.push_back(std::stoi(tok));
        if (tok != ":") throw DataError(path + ": malformed context record");
        std::map<TokenId, std::uint64_t> counts;
        TokenId id;
        std::uint64_t cnt;
        while (row >> id >> cnt) counts[id] = cnt;
        model.counts_[std::move(ctx)] = std::move(counts);
    }
    return model;
}

}  // namespace epgf
