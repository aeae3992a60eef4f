#include "epgf/sequence.hpp"

#include "epgf/error.hpp"

namespace epgf {

Sequence validate_sequence(std::string_view text, const Alphabet& alphabet) {
    Sequence seq;
    seq.tokens.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        auto id = alphabet.residue_id(text[i]);
        if (!id) throw InvalidResidueError(i, text[i]);
        seq.tokens.push_back(*id);
    }
    seq.residue_len = seq.tokens.size();
    return seq;
}

std::string detokenize(const Sequence& seq, const Alphabet& alphabet) {
    std::string out;
    out.reserve(seq.tokens.size());
    for (TokenId id : seq.tokens) {
        if (alphabet.is_residue(id)) out.push_back(alphabet.residue_letter(id));
    }
    return out;
}

void check_sequence(const Sequence& seq, const Alphabet& alphabet) {
    std::size_t residues = 0;
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        TokenId id = seq.tokens[i];
        if (!alphabet.is_valid(id))
            throw DataError("token id " + std::to_string(id) + " outside alphabet");
        if (id == alphabet.bos() && i != 0)
            throw DataError("BOS allowed only at position 0");
        if (id == alphabet.eos() && i + 1 != seq.tokens.size())
            throw DataError("EOS allowed only at the last position");
        if (alphabet.is_residue(id)) ++residues;
    }
    if (residues != seq.residue_len)
        throw DataError("residue_len " + std::to_string(seq.residue_len) +
                        " does not match token content (" + std::to_string(residues) + ")");
}

Segment make_segment(std::vector<TokenId> tokens, const Alphabet& alphabet, std::size_t max_len) {
    if (tokens.empty()) throw DataError("segment must contain at least one token");
    if (tokens.size() > max_len)
        throw DataError("segment length " + std::to_string(tokens.size()) + " exceeds " +
                        std::to_string(max_len));
    bool terminal = false;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == alphabet.eos()) {
            if (i + 1 != tokens.size()) throw DataError("EOS must be the last segment token");
            terminal = true;
        } else if (!alphabet.is_residue(tokens[i])) {
            throw DataError("segment may contain only residues and a trailing EOS");
        }
    }
    return Segment{std::move(tokens), terminal};
}

void append_segment(Sequence& seq, const Segment& segment, const Alphabet& alphabet) {
    for (TokenId id : segment.tokens) {
        seq.tokens.push_back(id);
        if (alphabet.is_residue(id)) ++seq.residue_len;
    }
}

bool is_standard_residue_text(std::string_view text) noexcept {
    for (char c : text) {
        if (kResidueLetters.find(c) == std::string_view::npos) return false;
    }
    return true;
}

}  // namespace epgf
