#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypwalk/space.hpp"

namespace hypwalk {

// A finitely supported probability measure on the group. Atoms are kept in
// canonical order with duplicates merged; masses are positive and sum to 1
// within 1e-12.
class FiniteMeasure {
public:
    FiniteMeasure(const SpaceModel& model, std::vector<GroupElement> atoms,
                  std::vector<double> masses);

    Backend backend() const { return backend_; }
    size_t size() const { return atoms_.size(); }
    const GroupElement& atom(size_t i) const { return atoms_[i]; }
    double mass(size_t i) const { return masses_[i]; }
    const std::vector<double>& masses() const { return masses_; }
    bool symmetric() const { return symmetric_; }

    // Mass of a specific element (0 when absent).
    double massOf(const SpaceModel& model, const GroupElement& g) const;

    double entropy() const;
    double firstMoment(const SpaceModel& model) const;
    double maxStepLength(const SpaceModel& model) const;

    std::string str(const SpaceModel& model) const;

private:
    Backend backend_;
    std::vector<GroupElement> atoms_;
    std::vector<double> masses_;
    bool symmetric_ = false;
};

inline constexpr size_t kDefaultSupportCap = 1000000;

// Pushforward of the product measure under the group law; canonical dedup.
// Throws ResourceLimit beyond the support cap or on a quantization collision
// (matrix backend).
FiniteMeasure convolve(const SpaceModel& model, const FiniteMeasure& m1,
                       const FiniteMeasure& m2, size_t support_cap = kDefaultSupportCap);

// The mixture family mu_k = 1/2 mu + 1/4 (delta_{g0^k} + delta_{g0^-k})
// driven by a hyperbolic element g0.
class MuKFamily {
public:
    MuKFamily(const SpaceModel& model, FiniteMeasure base, GroupElement gamma0);

    const FiniteMeasure& base() const { return base_; }
    const GroupElement& gamma0() const { return gamma0_; }
    const BoundaryPoint& fixedPlus() const { return plus_; }
    const BoundaryPoint& fixedMinus() const { return minus_; }

    FiniteMeasure makeMuK(const SpaceModel& model, long long k) const;
    // gamma_k = gamma0^k applied to the basepoint.
    SpacePoint gammaK(const SpaceModel& model, long long k) const;

private:
    FiniteMeasure base_;
    GroupElement gamma0_;
    BoundaryPoint plus_, minus_;
};

}  // namespace hypwalk
