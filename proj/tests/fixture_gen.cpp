// Regenerates tests/fixtures/natural500.fasta: 500 synthetic sequences
// assembled from a fixed vocabulary of motif blocks. Most blocks have
// natural background composition; a minority are biophysically bad
// (charged homorepeats, hydrophobic runs, low-complexity repeats) the way
// real aggregation-prone regions are. A trigram model trained on this
// corpus emits the bad blocks at their corpus rate, which is the headroom
// guided selection is supposed to exploit.
//
// The output is committed; rerun only when the recipe changes:
//   ./fixture_gen > tests/fixtures/natural500.fasta

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "epgf/bioscore.hpp"
#include "epgf/rng.hpp"

using namespace epgf;

namespace {

char draw_background(Rng& rng, const std::array<double, 20>& freqs) {
    double u = rng.next_unit();
    double cum = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        cum += freqs[i];
        if (u < cum) return kResidueLetters[i];
    }
    return kResidueLetters[19];
}

}  // namespace

int main() {
    auto freqs = ScorerConfig::defaults().background_freqs;
    Rng rng(20240101);

    std::vector<std::string> good_blocks;
    for (int b = 0; b < 24; ++b) {
        std::string block;
        for (int j = 0; j < 15; ++j) block.push_back(draw_background(rng, freqs));
        good_blocks.push_back(block);
    }
    const std::vector<std::string> bad_blocks = {
        std::string(15, 'E'),  // polyE acidic run
        std::string(15, 'K'),  // polyK basic run
        std::string(15, 'I'),  // hydrophobic run
        "KEKEKEKEKEKEKEK",     // charge zipper
        "QNQNQNQNQNQNQNQ",     // polar low-complexity repeat
        "ACACACACACACACA",     // two-letter repeat
    };
    const double bad_rate = 0.15;

    for (int i = 0; i < 500; ++i) {
        std::size_t target = 380 + rng.next_below(101);  // 380..480
        std::string s;
        while (s.size() < target) {
            if (rng.next_unit() < bad_rate) {
                s += bad_blocks[rng.next_below(bad_blocks.size())];
            } else {
                s += good_blocks[rng.next_below(good_blocks.size())];
            }
        }
        std::printf(">syn%03d len=%zu\n%s\n", i, s.size(), s.c_str());
    }
    return 0;
}
