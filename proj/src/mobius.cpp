#include "hypwalk/mobius.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypwalk/errors.hpp"

namespace hypwalk {

Mat2 Mat2::mulDet1(const Mat2& o) const {
    Mat2 m{a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    double dt = m.det();
    if (!(dt > 0)) throw Error("matrix product has nonpositive determinant");
    double s = std::sqrt(dt);
    m.a /= s;
    m.b /= s;
    m.c /= s;
    m.d /= s;
    return m;
}

Mat2 Mat2::mulScaled(const Mat2& o) const {
    Mat2 m{a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    double s = std::max(std::max(std::fabs(m.a), std::fabs(m.b)),
                        std::max(std::fabs(m.c), std::fabs(m.d)));
    if (s > 0) {
        m.a /= s;
        m.b /= s;
        m.c /= s;
        m.d /= s;
    }
    return m;
}

std::complex<double> Mat2::apply(std::complex<double> z) const {
    std::complex<double> num = a * z + b;
    std::complex<double> den = c * z + d;
    std::complex<double> w = num / den;
    if (!(w.imag() > kMinImag) || !std::isfinite(w.imag()) || !std::isfinite(w.real())) {
        throw PrecisionLoss("orbit point left the representable upper half-plane (Im z <= 1e-300)");
    }
    return w;
}

void Mat2::applyBoundary(double x, bool at_inf, double& out_x, bool& out_inf) const {
    if (at_inf) {
        if (c == 0.0) {
            out_inf = true;
            out_x = 0;
        } else {
            out_inf = false;
            out_x = a / c;
        }
        return;
    }
    double den = c * x + d;
    if (den == 0.0) {
        out_inf = true;
        out_x = 0;
        return;
    }
    out_inf = false;
    out_x = (a * x + b) / den;
}

Mat2 Mat2::canonicalSign() const {
    const double* es[4] = {&a, &b, &c, &d};
    for (const double* e : es) {
        if (std::fabs(*e) > 1e-14) {
            if (*e < 0) return {-a, -b, -c, -d};
            return *this;
        }
    }
    return *this;
}

std::array<int64_t, 4> Mat2::quantizedKey(double resolution) const {
    Mat2 m = canonicalSign();
    auto q = [&](double v) { return static_cast<int64_t>(std::llround(v / resolution)); };
    return {q(m.a), q(m.b), q(m.c), q(m.d)};
}

bool Mat2::approxEq(const Mat2& o, double tol) const {
    Mat2 x = canonicalSign(), y = o.canonicalSign();
    return std::fabs(x.a - y.a) <= tol && std::fabs(x.b - y.b) <= tol &&
           std::fabs(x.c - y.c) <= tol && std::fabs(x.d - y.d) <= tol;
}

bool Mat2::isIdentity(double tol) const {
    Mat2 m = canonicalSign();
    return std::fabs(m.a - 1) <= tol && std::fabs(m.b) <= tol && std::fabs(m.c) <= tol &&
           std::fabs(m.d - 1) <= tol;
}

std::string Mat2::str() const {
    std::ostringstream os;
    os << "[" << a << " " << b << "; " << c << " " << d << "]";
    return os.str();
}

}  // namespace hypwalk
