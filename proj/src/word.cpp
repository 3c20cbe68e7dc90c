#include "hypwalk/word.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "hypwalk/errors.hpp"

namespace hypwalk {

Word Word::fromLetters(std::span<const Letter> letters) {
    Word w;
    w.letters_.reserve(letters.size());
    for (Letter l : letters) w.pushReduced(l);
    return w;
}

Word Word::generator(int index, bool inverse) {
    if (index < 1) throw Error("generator index must be >= 1");
    Word w;
    w.letters_.push_back(static_cast<Letter>(inverse ? -index : index));
    return w;
}

void Word::pushReduced(Letter l) {
    if (l == 0) throw Error("letter 0 is not a generator");
    if (!letters_.empty() && letters_.back() == -l) {
        letters_.pop_back();
    } else {
        letters_.push_back(l);
    }
}

void Word::appendReduced(const Word& w) {
    for (Letter l : w.letters_) pushReduced(l);
}

Word Word::inverse() const {
    Word w;
    w.letters_.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it)
        w.letters_.push_back(static_cast<Letter>(-*it));
    return w;
}

Word Word::pow(long long n) const {
    Word base = n < 0 ? inverse() : *this;
    long long m = n < 0 ? -n : n;
    Word out;
    for (long long i = 0; i < m; ++i) out.appendReduced(base);
    return out;
}

Word Word::prefix(size_t n) const {
    Word w;
    n = std::min(n, letters_.size());
    w.letters_.assign(letters_.begin(), letters_.begin() + static_cast<long>(n));
    return w;
}

Word Word::cyclicReduce(Word* conjugator) const {
    size_t lo = 0, hi = letters_.size();
    while (hi - lo >= 2 && letters_[lo] == -letters_[hi - 1]) {
        ++lo;
        --hi;
    }
    if (conjugator) {
        Word u;
        u.letters_.assign(letters_.begin(), letters_.begin() + static_cast<long>(lo));
        *conjugator = u;
    }
    Word core;
    core.letters_.assign(letters_.begin() + static_cast<long>(lo),
                         letters_.begin() + static_cast<long>(hi));
    return core;
}

bool Word::operator<(const Word& o) const {
    if (letters_.size() != o.letters_.size()) return letters_.size() < o.letters_.size();
    for (size_t i = 0; i < letters_.size(); ++i) {
        int a = letterRank(letters_[i]), b = letterRank(o.letters_[i]);
        if (a != b) return a < b;
    }
    return false;
}

size_t Word::commonPrefixLength(const Word& o) const {
    size_t n = std::min(letters_.size(), o.letters_.size());
    size_t i = 0;
    while (i < n && letters_[i] == o.letters_[i]) ++i;
    return i;
}

std::string Word::str() const {
    if (letters_.empty()) return "e";
    std::string s;
    s.reserve(letters_.size());
    for (Letter l : letters_) {
        int g = l > 0 ? l : -l;
        if (g > 26) return strExpanded();
        char c = static_cast<char>('a' + g - 1);
        s.push_back(l > 0 ? c : static_cast<char>(std::toupper(c)));
    }
    return s;
}

std::string Word::strExpanded() const {
    std::string s;
    for (Letter l : letters_) {
        s += "g" + std::to_string(std::abs(l)) + (l < 0 ? "'" : "");
    }
    return s;
}

Word Word::parse(const std::string& text) {
    if (text == "e" || text == "1" || text.empty()) return Word();
    auto caret = text.find('^');
    if (caret != std::string::npos) {
        Word base = parse(text.substr(0, caret));
        long long n = std::stoll(text.substr(caret + 1));
        return base.pow(n);
    }
    Word w;
    for (char c : text) {
        if (std::islower(static_cast<unsigned char>(c))) {
            w.pushReduced(static_cast<Letter>(c - 'a' + 1));
        } else if (std::isupper(static_cast<unsigned char>(c))) {
            w.pushReduced(static_cast<Letter>(-(c - 'A' + 1)));
        } else {
            throw Error("cannot parse word letter '" + std::string(1, c) + "'");
        }
    }
    return w;
}

uint64_t Word::hash() const {
    uint64_t h = 1469598103934665603ULL;
    for (Letter l : letters_) {
        h ^= static_cast<uint64_t>(static_cast<uint16_t>(l));
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace hypwalk
