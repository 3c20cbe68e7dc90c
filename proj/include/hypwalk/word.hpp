#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hypwalk {

// Letters of a free group: +i is generator i (1-based), -i its inverse.
using Letter = int16_t;

inline Letter inverseLetter(Letter l) { return static_cast<Letter>(-l); }

// Total order on letters: a < a^-1 < b < b^-1 < ...
inline int letterRank(Letter l) {
    int g = l > 0 ? l : -l;
    return 2 * (g - 1) + (l < 0 ? 1 : 0);
}

// A reduced word over free generators. The representation is always reduced:
// no x x^-1 substring survives construction or multiplication.
class Word {
public:
    Word() = default;
    static Word fromLetters(std::span<const Letter> letters);  // reduces
    static Word generator(int index, bool inverse = false);

    bool empty() const { return letters_.size() == 0; }
    size_t size() const { return letters_.size(); }
    Letter at(size_t i) const { return letters_[i]; }
    const std::vector<Letter>& letters() const { return letters_; }

    Word inverse() const;
    Word pow(long long n) const;
    Word prefix(size_t n) const;

    // Right-multiply by a single letter, reducing in place.
    void pushReduced(Letter l);
    // Right-multiply by a word, reducing at the seam.
    void appendReduced(const Word& w);

    // g = u c u^-1 with c cyclically reduced; returns c and fills u.
    Word cyclicReduce(Word* conjugator = nullptr) const;

    bool operator==(const Word& o) const { return letters_ == o.letters_; }
    // Canonical order: by length, then letterRank-lexicographic.
    bool operator<(const Word& o) const;

    size_t commonPrefixLength(const Word& o) const;

    // Letters as text, e.g. "abA" = a b a^-1 (rank <= 26).
    std::string str() const;
    std::string strExpanded() const;  // "g1g2'" form, any rank
    static Word parse(const std::string& text);  // accepts "abA", "a^5", "e"

    uint64_t hash() const;

private:
    std::vector<Letter> letters_;
};

struct WordHash {
    size_t operator()(const Word& w) const { return static_cast<size_t>(w.hash()); }
};

}  // namespace hypwalk
