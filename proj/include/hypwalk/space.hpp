#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hypwalk/mobius.hpp"
#include "hypwalk/rng.hpp"
#include "hypwalk/word.hpp"

namespace hypwalk {

enum class Backend { tree, halfplane };

std::string backendName(Backend b);

// An isometry of the model space: a reduced word (tree backend) or a
// det-1 real matrix (half-plane backend).
struct GroupElement {
    Backend backend = Backend::tree;
    Word word;  // tree
    Mat2 mat;   // halfplane

    static GroupElement tree(Word w) { return {Backend::tree, std::move(w), Mat2{}}; }
    static GroupElement halfplane(Mat2 m);

    bool isIdentity() const;
    std::string str() const;
};

// A point of the space: vertex of the Cayley tree, or z with Im z > 0.
struct SpacePoint {
    Backend backend = Backend::tree;
    Word word;
    std::complex<double> z{0, 1};

    static SpacePoint tree(Word w) { return {Backend::tree, std::move(w), {0, 1}}; }
    static SpacePoint halfplane(std::complex<double> z);
    std::string str() const;
};

// A boundary point. Tree backend: an eventually periodic infinite word
// (head + repeating period, exact) or a depth-stamped prefix (period empty,
// resolved only to depth() letters). Half-plane backend: a coordinate in
// R u {inf}, always exact.
struct BoundaryPoint {
    Backend backend = Backend::tree;
    Word head;
    Word period;
    double xi = 0;
    bool at_inf = false;

    static BoundaryPoint treePrefix(Word prefix);
    static BoundaryPoint treePeriodic(Word head, Word period);
    static BoundaryPoint real(double x);
    static BoundaryPoint infinity();

    bool exact() const;
    // Number of resolved letters (tree); INT_MAX when exact.
    int depth() const;
    Letter letterAt(int i) const;
    std::string str() const;
};

// A union of boundary cylinders (tree) or coordinate intervals (half-plane),
// used as the open sets U of the estimators.
struct BoundaryRegion {
    Backend backend = Backend::tree;
    std::vector<Word> cylinders;
    struct Interval {
        double lo, hi;
    };  // lo <= hi; membership by coordinate
    std::vector<Interval> intervals;
    bool include_infinity = false;

    static BoundaryRegion treeCylinders(std::vector<Word> prefixes);
    static BoundaryRegion halfplaneIntervals(std::vector<Interval> ivs, bool with_inf = false);
    // Throws InsufficientResolution when a tree sample is shallower than a
    // cylinder it would have to be tested against.
    bool contains(const BoundaryPoint& p) const;
    bool wholeBoundary() const { return backend == Backend::tree ? cylinders.empty() : intervals.empty() && include_infinity; }
    std::string str() const;
};

// One of the two concrete geometries behind a common interface. Immutable
// after construction; all operations are pure.
class SpaceModel {
public:
    static SpaceModel freeGroup(int rank, double visual_base = 2.718281828459045235);
    // delta <= 0 requests the empirical estimate (+20% margin).
    static SpaceModel fuchsian(std::vector<Mat2> generators,
                               double visual_base = 2.718281828459045235,
                               double delta = -1.0);

    Backend backend() const { return backend_; }
    int rank() const { return rank_; }
    double visualBase() const { return base_; }
    double delta() const { return delta_; }
    SpacePoint basepoint() const;
    // Generator list, closed under inverses. Tree: a, b, ..., a^-1, b^-1, ...
    const std::vector<GroupElement>& generators() const { return gens_; }

    GroupElement identity() const;
    GroupElement multiply(const GroupElement& g, const GroupElement& h) const;
    GroupElement inverse(const GroupElement& g) const;
    GroupElement power(const GroupElement& g, long long n) const;

    SpacePoint act(const GroupElement& g, const SpacePoint& p) const;
    BoundaryPoint actBoundary(const GroupElement& g, const BoundaryPoint& xi) const;
    SpacePoint orbitPoint(const GroupElement& g) const { return act(g, basepoint()); }

    double distance(const SpacePoint& p, const SpacePoint& q) const;
    double gromov(const SpacePoint& p, const SpacePoint& q, const SpacePoint& base) const;
    // Boundary products; +infinity for provably equal exact points.
    double gromovBoundary(const BoundaryPoint& xi, const BoundaryPoint& eta) const;
    double gromovBoundaryAt(const BoundaryPoint& xi, const BoundaryPoint& eta,
                            const SpacePoint& base) const;
    double gromovMixed(const BoundaryPoint& xi, const SpacePoint& x) const;
    double gromovMixedAt(const BoundaryPoint& xi, const SpacePoint& x,
                         const SpacePoint& base) const;

    // rho(xi,eta) = a^{-(xi|eta)}; 0 for equal exact points; exact
    // ultrametric on trees.
    double visualQuasimetric(const BoundaryPoint& xi, const BoundaryPoint& eta) const;

    // Exact Busemann cocycle beta_xi(x, y); both backends are CAT(-1).
    double busemann(const BoundaryPoint& xi, const SpacePoint& x, const SpacePoint& y) const;

    struct Classification {
        bool hyperbolic = false;
        BoundaryPoint plus, minus;  // attractive / repulsive fixed points
    };
    Classification classify(const GroupElement& g) const;

    // Max four-point defect min{(x|y),(y|z)} - (x|z) over sampled orbit
    // quadruples; deterministic in the seed; lower bound for true delta.
    double estimateDelta(int quadruple_count, uint64_t seed) const;

    GroupElement randomElement(Rng& rng, int max_len) const;

    std::string formatElement(const GroupElement& g) const;
    // "abA", "a^5", "e" (tree) or "g1", "g2^-3" (generator references).
    GroupElement parseElement(const std::string& text) const;

private:
    SpaceModel() = default;
    void requireBackend(Backend b, const char* what) const;

    Backend backend_ = Backend::tree;
    int rank_ = 2;
    double base_ = 2.718281828459045235;
    double delta_ = 0;
    std::vector<GroupElement> gens_;
};

}  // namespace hypwalk
