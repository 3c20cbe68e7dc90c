#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>

namespace hypwalk {

inline constexpr double kMinImag = 1e-300;  // below this a trajectory is unusable

// Real 2x2 matrix acting on the upper half-plane by z -> (az+b)/(cz+d).
// Group elements keep det = 1 (renormalized after products); scaled
// projective representatives are also supported since the action ignores
// scalar factors.
struct Mat2 {
    double a = 1, b = 0, c = 0, d = 1;

    static Mat2 identity() { return {}; }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }

    // Product renormalized to det 1; throws on nonpositive determinant.
    Mat2 mulDet1(const Mat2& o) const;
    // Plain product normalized by the largest |entry| (projective form).
    Mat2 mulScaled(const Mat2& o) const;

    Mat2 inverseDet1() const { return {d, -b, -c, a}; }

    // Mobius action on an interior point; throws PrecisionLoss when the
    // image's imaginary part falls below kMinImag.
    std::complex<double> apply(std::complex<double> z) const;

    // Action on a boundary coordinate (real axis plus infinity).
    void applyBoundary(double x, bool at_inf, double& out_x, bool& out_inf) const;

    // Sign-canonical representative (M and -M act identically).
    Mat2 canonicalSign() const;

    std::array<int64_t, 4> quantizedKey(double resolution = 1e-9) const;
    bool approxEq(const Mat2& o, double tol) const;
    bool isIdentity(double tol = 1e-12) const;

    std::string str() const;
};

}  // namespace hypwalk
