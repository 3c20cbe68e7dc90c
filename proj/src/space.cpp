#include "hypwalk/space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypwalk/errors.hpp"

namespace hypwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Reduced infinite word u c c c...: cancel the head tail against the period,
// rotating the period as letters are consumed.
void normalizePeriodic(Word& head, Word& period) {
    if (period.empty()) return;
    std::vector<Letter> h(head.letters());
    std::vector<Letter> p(period.letters());
    while (!h.empty() && h.back() == -p.front()) {
        h.pop_back();
        std::rotate(p.begin(), p.begin() + 1, p.end());
    }
    head = Word::fromLetters(h);
    period = Word::fromLetters(p);
}

double hpDistance(std::complex<double> p, std::complex<double> q) {
    double dx = p.real() - q.real(), dy = p.imag() - q.imag();
    double arg = 1.0 + (dx * dx + dy * dy) / (2.0 * p.imag() * q.imag());
    return std::acosh(std::max(1.0, arg));
}

// log |x - xi| for an interior point x and a finite boundary coordinate xi.
double logAbsToBoundary(std::complex<double> x, double xi) {
    double dx = x.real() - xi;
    return 0.5 * std::log(dx * dx + x.imag() * x.imag());
}

}  // namespace

std::string backendName(Backend b) {
    return b == Backend::tree ? "free_group" : "fuchsian";
}

GroupElement GroupElement::halfplane(Mat2 m) {
    double dt = m.det();
    if (!(dt > 0)) throw Error("group matrix must have positive determinant");
    double s = std::sqrt(dt);
    return {Backend::halfplane, Word{}, Mat2{m.a / s, m.b / s, m.c / s, m.d / s}};
}

bool GroupElement::isIdentity() const {
    return backend == Backend::tree ? word.empty() : mat.isIdentity();
}

std::string GroupElement::str() const {
    return backend == Backend::tree ? word.str() : mat.str();
}

SpacePoint SpacePoint::halfplane(std::complex<double> z) {
    if (!(z.imag() > 0)) throw Error("half-plane point needs Im z > 0");
    return {Backend::halfplane, Word{}, z};
}

std::string SpacePoint::str() const {
    if (backend == Backend::tree) return word.str();
    std::ostringstream os;
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::fabs(z.imag()) << "i";
    return os.str();
}

BoundaryPoint BoundaryPoint::treePrefix(Word prefix) {
    return {Backend::tree, std::move(prefix), Word{}, 0, false};
}

BoundaryPoint BoundaryPoint::treePeriodic(Word head, Word period) {
    if (period.empty()) throw Error("periodic boundary point needs a nonempty period");
    normalizePeriodic(head, period);
    return {Backend::tree, std::move(head), std::move(period), 0, false};
}

BoundaryPoint BoundaryPoint::real(double x) { return {Backend::halfplane, {}, {}, x, false}; }

BoundaryPoint BoundaryPoint::infinity() { return {Backend::halfplane, {}, {}, 0, true}; }

bool BoundaryPoint::exact() const {
    return backend == Backend::halfplane || !period.empty();
}

int BoundaryPoint::depth() const {
    if (backend == Backend::halfplane || !period.empty())
        return std::numeric_limits<int>::max();
    return static_cast<int>(head.size());
}

Letter BoundaryPoint::letterAt(int i) const {
    if (i < static_cast<int>(head.size())) return head.at(static_cast<size_t>(i));
    if (period.empty()) throw InsufficientResolution("boundary prefix exhausted at depth " +
                                                     std::to_string(head.size()));
    int j = (i - static_cast<int>(head.size())) % static_cast<int>(period.size());
    return period.at(static_cast<size_t>(j));
}

std::string BoundaryPoint::str() const {
    if (backend == Backend::halfplane) {
        if (at_inf) return "inf";
        std::ostringstream os;
        os << xi;
        return os.str();
    }
    if (period.empty()) return head.str() + "...[" + std::to_string(head.size()) + "]";
    return (head.empty() ? std::string() : head.str()) + "(" + period.str() + ")^inf";
}

BoundaryRegion BoundaryRegion::treeCylinders(std::vector<Word> prefixes) {
    BoundaryRegion r;
    r.backend = Backend::tree;
    r.cylinders = std::move(prefixes);
    return r;
}

BoundaryRegion BoundaryRegion::halfplaneIntervals(std::vector<Interval> ivs, bool with_inf) {
    BoundaryRegion r;
    r.backend = Backend::halfplane;
    r.intervals = std::move(ivs);
    r.include_infinity = with_inf;
    return r;
}

bool BoundaryRegion::contains(const BoundaryPoint& p) const {
    if (p.backend != backend) throw BackendMismatch("region/point backend mismatch");
    if (backend == Backend::tree) {
        if (cylinders.empty()) return true;  // whole boundary
        for (const Word& c : cylinders) {
            if (p.depth() < static_cast<int>(c.size()))
                throw InsufficientResolution("sample shallower than cylinder depth " +
                                             std::to_string(c.size()));
            bool match = true;
            for (size_t i = 0; i < c.size(); ++i) {
                if (p.letterAt(static_cast<int>(i)) != c.at(i)) {
                    match = false;
                    break;
                }
            }
            if (match) return true;
        }
        return false;
    }
    if (intervals.empty() && !include_infinity) return true;  // whole boundary
    if (p.at_inf) return include_infinity;
    for (const auto& iv : intervals)
        if (p.xi >= iv.lo && p.xi <= iv.hi) return true;
    return false;
}

std::string BoundaryRegion::str() const {
    std::ostringstream os;
    if (backend == Backend::tree) {
        if (cylinders.empty()) return "all";
        for (size_t i = 0; i < cylinders.size(); ++i)
            os << (i ? " u " : "") << "cyl(" << cylinders[i].str() << ")";
    } else {
        for (size_t i = 0; i < intervals.size(); ++i)
            os << (i ? " u " : "") << "[" << intervals[i].lo << "," << intervals[i].hi << "]";
        if (include_infinity) os << " u {inf}";
    }
    return os.str();
}

SpaceModel SpaceModel::freeGroup(int rank, double visual_base) {
    if (rank < 1) throw Error("free group rank must be >= 1");
    if (!(visual_base > 1)) throw Error("visual base must exceed 1");
    SpaceModel m;
    m.backend_ = Backend::tree;
    m.rank_ = rank;
    m.base_ = visual_base;
    m.delta_ = 0;
    for (int i = 1; i <= rank; ++i) m.gens_.push_back(GroupElement::tree(Word::generator(i)));
    for (int i = 1; i <= rank; ++i)
        m.gens_.push_back(GroupElement::tree(Word::generator(i, true)));
    return m;
}

SpaceModel SpaceModel::fuchsian(std::vector<Mat2> generators, double visual_base, double delta) {
    if (generators.empty()) throw Error("fuchsian backend needs at least one generator");
    if (!(visual_base > 1)) throw Error("visual base must exceed 1");
    SpaceModel m;
    m.backend_ = Backend::halfplane;
    m.rank_ = static_cast<int>(generators.size());
    m.base_ = visual_base;
    for (const Mat2& g : generators) m.gens_.push_back(GroupElement::halfplane(g));
    const size_t n = m.gens_.size();
    for (size_t i = 0; i < n; ++i)
        m.gens_.push_back({Backend::halfplane, Word{}, m.gens_[i].mat.inverseDet1()});
    if (delta > 0) {
        m.delta_ = delta;
    } else {
        m.delta_ = m.estimateDelta(20000, 0xD0C5EEDULL) * 1.2;
    }
    return m;
}

SpacePoint SpaceModel::basepoint() const {
    return backend_ == Backend::tree ? SpacePoint::tree(Word{})
                                     : SpacePoint::halfplane({0, 1});
}

GroupElement SpaceModel::identity() const {
    return backend_ == Backend::tree ? GroupElement::tree(Word{})
                                     : GroupElement::halfplane(Mat2::identity());
}

void SpaceModel::requireBackend(Backend b, const char* what) const {
    if (b != backend_)
        throw BackendMismatch(std::string(what) + ": expected " + backendName(backend_) +
                              " argument, got " + backendName(b));
}

GroupElement SpaceModel::multiply(const GroupElement& g, const GroupElement& h) const {
    requireBackend(g.backend, "multiply");
    requireBackend(h.backend, "multiply");
    if (backend_ == Backend::tree) {
        Word w = g.word;
        w.appendReduced(h.word);
        return GroupElement::tree(std::move(w));
    }
    return {Backend::halfplane, Word{}, g.mat.mulDet1(h.mat)};
}

GroupElement SpaceModel::inverse(const GroupElement& g) const {
    requireBackend(g.backend, "inverse");
    if (backend_ == Backend::tree) return GroupElement::tree(g.word.inverse());
    return {Backend::halfplane, Word{}, g.mat.inverseDet1()};
}

GroupElement SpaceModel::power(const GroupElement& g, long long n) const {
    requireBackend(g.backend, "power");
    if (backend_ == Backend::tree) return GroupElement::tree(g.word.pow(n));
    GroupElement acc = identity();
    GroupElement base = n < 0 ? inverse(g) : g;
    long long m = n < 0 ? -n : n;
    for (long long i = 0; i < m; ++i) acc = multiply(acc, base);
    return acc;
}

SpacePoint SpaceModel::act(const GroupElement& g, const SpacePoint& p) const {
    requireBackend(g.backend, "act");
    requireBackend(p.backend, "act");
    if (backend_ == Backend::tree) {
        Word w = g.word;
        w.appendReduced(p.word);
        return SpacePoint::tree(std::move(w));
    }
    return {Backend::halfplane, Word{}, g.mat.apply(p.z)};
}

BoundaryPoint SpaceModel::actBoundary(const GroupElement& g, const BoundaryPoint& xi) const {
    requireBackend(g.backend, "actBoundary");
    requireBackend(xi.backend, "actBoundary");
    if (backend_ == Backend::halfplane) {
        double x;
        bool ninf;
        g.mat.applyBoundary(xi.xi, xi.at_inf, x, ninf);
        return ninf ? BoundaryPoint::infinity() : BoundaryPoint::real(x);
    }
    Word head = g.word;
    size_t before = head.size() + xi.head.size();
    head.appendReduced(xi.head);
    if (!xi.period.empty()) {
        Word period = xi.period;
        return BoundaryPoint::treePeriodic(std::move(head), std::move(period));
    }
    // Prefix sample: the result is certified only if the seam cancellation
    // did not consume the whole prefix.
    size_t cancelled = (before - head.size()) / 2;
    if (cancelled >= xi.head.size() && !xi.head.empty())
        return BoundaryPoint::treePrefix(Word{});  // depth 0: resolution lost
    return BoundaryPoint::treePrefix(std::move(head));
}

double SpaceModel::distance(const SpacePoint& p, const SpacePoint& q) const {
    requireBackend(p.backend, "distance");
    requireBackend(q.backend, "distance");
    if (backend_ == Backend::tree) {
        size_t c = p.word.commonPrefixLength(q.word);
        return static_cast<double>(p.word.size() + q.word.size() - 2 * c);
    }
    return hpDistance(p.z, q.z);
}

double SpaceModel::gromov(const SpacePoint& p, const SpacePoint& q, const SpacePoint& base) const {
    return 0.5 * (distance(base, p) + distance(base, q) - distance(p, q));
}

double SpaceModel::gromovBoundary(const BoundaryPoint& xi, const BoundaryPoint& eta) const {
    requireBackend(xi.backend, "gromovBoundary");
    requireBackend(eta.backend, "gromovBoundary");
    if (backend_ == Backend::halfplane) {
        if (xi.at_inf && eta.at_inf) return kInf;
        if (xi.at_inf) return 0.5 * std::log1p(eta.xi * eta.xi);
        if (eta.at_inf) return 0.5 * std::log1p(xi.xi * xi.xi);
        if (xi.xi == eta.xi) return kInf;
        return 0.5 * (std::log1p(xi.xi * xi.xi) + std::log1p(eta.xi * eta.xi)) -
               std::log(std::fabs(xi.xi - eta.xi));
    }
    // Tree: confluence of the two words.
    bool both_exact = xi.exact() && eta.exact();
    long limit;
    if (both_exact) {
        // Eventually periodic sequences agree iff they agree this far.
        limit = static_cast<long>(xi.head.size() + eta.head.size() +
                                  xi.period.size() * eta.period.size() + 1);
    } else {
        limit = std::min(xi.depth(), eta.depth());
    }
    for (long i = 0; i < limit; ++i) {
        if (xi.letterAt(static_cast<int>(i)) != eta.letterAt(static_cast<int>(i)))
            return static_cast<double>(i);
    }
    if (both_exact) return kInf;  // same boundary point
    throw InsufficientResolution(
        "boundary points indistinguishable at available depth " + std::to_string(limit));
}

double SpaceModel::gromovMixed(const BoundaryPoint& xi, const SpacePoint& x) const {
    requireBackend(xi.backend, "gromovMixed");
    requireBackend(x.backend, "gromovMixed");
    if (backend_ == Backend::halfplane) {
        double d0 = hpDistance({0, 1}, x.z);
        if (xi.at_inf) return 0.5 * (d0 + std::log(x.z.imag()));
        return 0.5 * (d0 + std::log(x.z.imag()) + std::log1p(xi.xi * xi.xi)) -
               logAbsToBoundary(x.z, xi.xi);
    }
    long m = static_cast<long>(x.word.size());
    long limit = std::min<long>(m, xi.depth());
    for (long i = 0; i < limit; ++i) {
        if (xi.letterAt(static_cast<int>(i)) != x.word.at(static_cast<size_t>(i)))
            return static_cast<double>(i);
    }
    if (limit == m) return static_cast<double>(m);  // x lies on the ray
    throw InsufficientResolution("boundary prefix too shallow to resolve (x|xi): depth " +
                                 std::to_string(xi.depth()) + " < |x| = " + std::to_string(m));
}

double SpaceModel::gromovBoundaryAt(const BoundaryPoint& xi, const BoundaryPoint& eta,
                                    const SpacePoint& base) const {
    double at_o = gromovBoundary(xi, eta);
    if (std::isinf(at_o)) return at_o;
    SpacePoint o = basepoint();
    return at_o + 0.5 * (busemann(xi, o, base) + busemann(eta, o, base));
}

double SpaceModel::gromovMixedAt(const BoundaryPoint& xi, const SpacePoint& x,
                                 const SpacePoint& base) const {
    SpacePoint o = basepoint();
    return gromovMixed(xi, x) + 0.5 * busemann(xi, o, base) +
           0.5 * (distance(base, x) - distance(o, x));
}

double SpaceModel::visualQuasimetric(const BoundaryPoint& xi, const BoundaryPoint& eta) const {
    double g = gromovBoundary(xi, eta);
    if (std::isinf(g)) return 0.0;
    return std::pow(base_, -g);
}

double SpaceModel::busemann(const BoundaryPoint& xi, const SpacePoint& x,
                            const SpacePoint& y) const {
    requireBackend(xi.backend, "busemann");
    requireBackend(x.backend, "busemann");
    requireBackend(y.backend, "busemann");
    if (backend_ == Backend::halfplane) {
        if (xi.at_inf) return std::log(x.z.imag()) - std::log(y.z.imag());
        return (std::log(x.z.imag()) - 2.0 * logAbsToBoundary(x.z, xi.xi)) -
               (std::log(y.z.imag()) - 2.0 * logAbsToBoundary(y.z, xi.xi));
    }
    // beta_xi(x,y) = (|y| - 2(y|xi)) - (|x| - 2(x|xi)), all at the basepoint.
    double gx = gromovMixed(xi, x);
    double gy = gromovMixed(xi, y);
    return (static_cast<double>(y.word.size()) - 2.0 * gy) -
           (static_cast<double>(x.word.size()) - 2.0 * gx);
}

SpaceModel::Classification SpaceModel::classify(const GroupElement& g) const {
    requireBackend(g.backend, "classify");
    Classification res;
    if (backend_ == Backend::tree) {
        Word conj;
        Word core = g.word.cyclicReduce(&conj);
        if (core.empty()) return res;
        res.hyperbolic = true;
        res.plus = BoundaryPoint::treePeriodic(conj, core);
        res.minus = BoundaryPoint::treePeriodic(conj, core.inverse());
        return res;
    }
    const Mat2& m = g.mat;
    double tr = m.trace();
    if (!(std::fabs(tr) > 2.0 + 1e-12)) return res;
    res.hyperbolic = true;
    double disc = std::sqrt(tr * tr - 4.0);
    if (std::fabs(m.c) > 1e-14) {
        double z1 = (m.a - m.d + disc) / (2.0 * m.c);
        double z2 = (m.a - m.d - disc) / (2.0 * m.c);
        // Attractive fixed point: |c z + d| > 1 (Mobius derivative < 1).
        bool z1_attr = std::fabs(m.c * z1 + m.d) > 1.0;
        res.plus = BoundaryPoint::real(z1_attr ? z1 : z2);
        res.minus = BoundaryPoint::real(z1_attr ? z2 : z1);
    } else {
        double zf = m.b / (m.d - m.a);
        if (std::fabs(m.a) > std::fabs(m.d)) {
            res.plus = BoundaryPoint::infinity();
            res.minus = BoundaryPoint::real(zf);
        } else {
            res.plus = BoundaryPoint::real(zf);
            res.minus = BoundaryPoint::infinity();
        }
    }
    return res;
}

GroupElement SpaceModel::randomElement(Rng& rng, int max_len) const {
    int len = rng.rangeInt(0, max_len);
    if (backend_ == Backend::tree) {
        Word w;
        for (int i = 0; i < len; ++i) {
            // Uniform over non-cancelling letters keeps the length equal to len.
            for (;;) {
                int k = rng.rangeInt(1, rank_);
                Letter l = static_cast<Letter>(rng.below(2) ? k : -k);
                if (w.empty() || w.letters().back() != -l) {
                    w.pushReduced(l);
                    break;
                }
            }
        }
        return GroupElement::tree(std::move(w));
    }
    GroupElement g = identity();
    for (int i = 0; i < len; ++i) {
        const GroupElement& s = gens_[rng.below(gens_.size())];
        g = multiply(g, s);
    }
    return g;
}

double SpaceModel::estimateDelta(int quadruple_count, uint64_t seed) const {
    if (quadruple_count < 1) throw Error("estimateDelta needs quadruple_count >= 1");
    Rng rng(mix64(seed ^ 0x6e0cf0d9ULL));
    const int max_len = backend_ == Backend::tree ? 14 : 10;
    double worst = 0.0;
    for (int i = 0; i < quadruple_count; ++i) {
        SpacePoint x = orbitPoint(randomElement(rng, max_len));
        SpacePoint y = orbitPoint(randomElement(rng, max_len));
        SpacePoint z = orbitPoint(randomElement(rng, max_len));
        SpacePoint w = orbitPoint(randomElement(rng, max_len));
        double defect =
            std::min(gromov(x, y, w), gromov(y, z, w)) - gromov(x, z, w);
        worst = std::max(worst, defect);
    }
    return worst;
}

std::string SpaceModel::formatElement(const GroupElement& g) const {
    return g.str();
}

GroupElement SpaceModel::parseElement(const std::string& text) const {
    if (text.empty()) throw Error("empty element token");
    if (text[0] == 'g' && text.size() > 1 && std::isdigit(static_cast<unsigned char>(text[1]))) {
        size_t caret = text.find('^');
        std::string idx_part = caret == std::string::npos ? text.substr(1) : text.substr(1, caret - 1);
        int idx = std::stoi(idx_part);
        if (idx < 1 || idx > rank_)
            throw Error("generator reference g" + std::to_string(idx) + " out of range 1.." +
                        std::to_string(rank_));
        long long expo = 1;
        if (caret != std::string::npos) expo = std::stoll(text.substr(caret + 1));
        return power(gens_[static_cast<size_t>(idx - 1)], expo);
    }
    if (backend_ == Backend::tree) {
        Word w = Word::parse(text);
        for (Letter l : w.letters()) {
            int k = l > 0 ? l : -l;
            if (k > rank_)
                throw Error("letter '" + std::string(1, static_cast<char>('a' + k - 1)) +
                            "' exceeds rank " + std::to_string(rank_));
        }
        return GroupElement::tree(std::move(w));
    }
    throw Error("half-plane elements must be generator references (g1, g2^-1, ...)");
}

}  // namespace hypwalk
