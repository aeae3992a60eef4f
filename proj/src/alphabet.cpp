#include "epgf/alphabet.hpp"

#include <algorithm>

#include "epgf/error.hpp"

namespace epgf {

Alphabet::Alphabet() : Alphabet(std::vector<std::string>{}) {}

Alphabet::Alphabet(const std::vector<std::string>& condition_labels) {
    bos_ = static_cast<TokenId>(kNumResidues);
    eos_ = bos_ + 1;
    sep_ = bos_ + 2;
    vocab_size_ = kNumResidues + 3;
    for (const auto& label : condition_labels) add_condition(label);
}

std::optional<TokenId> Alphabet::residue_id(char letter) const noexcept {
    auto pos = kResidueLetters.find(letter);
    if (pos == std::string_view::npos) return std::nullopt;
    return static_cast<TokenId>(pos);
}

char Alphabet::residue_letter(TokenId id) const {
    if (!is_residue(id)) throw DataError("token id " + std::to_string(id) + " is not a residue");
    return kResidueLetters[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Alphabet::condition_id(std::string_view label) const noexcept {
    for (std::size_t i = 0; i < condition_labels_.size(); ++i) {
        if (condition_labels_[i] == label)
            return sep_ + 1 + static_cast<TokenId>(i);
    }
    return std::nullopt;
}

const std::string& Alphabet::condition_label(TokenId id) const {
    if (!is_condition(id))
        throw DataError("token id " + std::to_string(id) + " is not a condition token");
    return condition_labels_[static_cast<std::size_t>(id - sep_ - 1)];
}

TokenId Alphabet::add_condition(const std::string& label) {
    if (label.empty()) throw ConfigError("condition label must be non-empty");
    if (auto existing = condition_id(label)) return *existing;
    condition_labels_.push_back(label);
    vocab_size_ += 1;
    return static_cast<TokenId>(vocab_size_ - 1);
}

std::string Alphabet::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::string_view s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        h ^= 0x1f;
        h *= 1099511628211ULL;
    };
    mix(kResidueLetters);
    mix("BOS,EOS,SEP");
    for (const auto& label : condition_labels_) mix(label);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

bool Alphabet::operator==(const Alphabet& other) const noexcept {
    return condition_labels_ == other.condition_labels_;
}

}  // namespace epgf
