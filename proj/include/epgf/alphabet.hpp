#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epgf {

using TokenId = std::int32_t;

// The 20 standard amino acids in this fixed order define token ids 0..19.
inline constexpr std::string_view kResidueLetters = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr std::size_t kNumResidues = 20;

// Token table: residues 0..19, then BOS/EOS/SEP, then one token per
// registered condition label (superfamily tag). Ids are dense and stable
// for the lifetime of the Alphabet.
class Alphabet {
public:
    Alphabet();
    explicit Alphabet(const std::vector<std::string>& condition_labels);

    TokenId bos() const noexcept { return bos_; }
    TokenId eos() const noexcept { return eos_; }
    TokenId sep() const noexcept { return sep_; }

    std::size_t vocab_size() const noexcept { return vocab_size_; }
    std::size_t num_conditions() const noexcept { return condition_labels_.size(); }
    const std::vector<std::string>& condition_labels() const noexcept { return condition_labels_; }

    bool is_residue(TokenId id) const noexcept {
        return id >= 0 && id < static_cast<TokenId>(kNumResidues);
    }
    bool is_condition(TokenId id) const noexcept {
        return id > sep_ && id < static_cast<TokenId>(vocab_size_);
    }
    bool is_valid(TokenId id) const noexcept {
        return id >= 0 && id < static_cast<TokenId>(vocab_size_);
    }

    // Residue letter <-> token id. residue_id returns nullopt for any
    // character outside the 20-letter alphabet (lowercase included).
    std::optional<TokenId> residue_id(char letter) const noexcept;
    char residue_letter(TokenId id) const;

    std::optional<TokenId> condition_id(std::string_view label) const noexcept;
    const std::string& condition_label(TokenId id) const;

    // Registers a new condition label; returns its token id. Idempotent
    // for labels already present.
    TokenId add_condition(const std::string& label);

    // FNV-1a over the full token table; used as the wire handshake so two
    // endpoints never silently mix tokenizations.
    std::string hash() const;

    bool operator==(const Alphabet& other) const noexcept;

private:
    TokenId bos_;
    TokenId eos_;
    TokenId sep_;
    std::size_t vocab_size_;
    std::vector<std::string> condition_labels_;
};

}  // namespace epgf
