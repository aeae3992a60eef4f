#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "epgf/alphabet.hpp"

namespace epgf {

// A validated token sequence. May carry a leading BOS, one condition token
// right after it, and a trailing EOS; everything else is residues.
struct Sequence {
    std::vector<TokenId> tokens;
    std::size_t residue_len = 0;

    bool empty() const noexcept { return tokens.empty(); }
    std::size_t size() const noexcept { return tokens.size(); }
};

// A contiguous run of up to L freshly decoded tokens. EOS, when present,
// is the last token and marks the segment terminal.
struct Segment {
    std::vector<TokenId> tokens;
    bool terminal = false;
};

// Builds a Sequence from raw residue text. Rejects any character outside
// the 20 standard amino acids (X, B, Z, U, O, gaps, whitespace, lowercase)
// with InvalidResidueError carrying position and offending character.
Sequence validate_sequence(std::string_view text, const Alphabet& alphabet);

// Residue text of a sequence; control and condition tokens are stripped.
// validate_sequence(detokenize(s)) reproduces the residue tokens of s.
std::string detokenize(const Sequence& seq, const Alphabet& alphabet);

// Checks token validity, BOS/EOS placement, and residue_len consistency.
// Throws DataError on violation.
void check_sequence(const Sequence& seq, const Alphabet& alphabet);

// Builds a checked Segment. Throws DataError when tokens is empty, longer
// than max_len, or has EOS anywhere but last.
Segment make_segment(std::vector<TokenId> tokens, const Alphabet& alphabet, std::size_t max_len);

// Appends a segment to a sequence, updating residue_len.
void append_segment(Sequence& seq, const Segment& segment, const Alphabet& alphabet);

// True if the raw residue text is valid; no exception path.
bool is_standard_residue_text(std::string_view text) noexcept;

}  // namespace epgf
