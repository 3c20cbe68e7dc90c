#include "hypwalk/stats.hpp"

#include <algorithm>
#include <cmath>

#include "hypwalk/errors.hpp"
#include "hypwalk/rng.hpp"

namespace hypwalk {
namespace stats {

namespace {

// Regularized incomplete beta by Lentz continued fraction.
double betacf(double a, double b, double x) {
    const int kMaxIter = 300;
    const double eps = 3e-14, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

double incBeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double mean(std::span<const double> xs) {
    if (xs.empty()) throw Error("mean of empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sampleSd(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean(xs), s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

double bootstrapSe(std::span<const double> xs, int resamples, uint64_t seed) {
    if (xs.size() < 2) return 0.0;
    Rng rng(mix64(seed ^ 0xb007u));
    std::vector<double> means;
    means.reserve(static_cast<size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
        double s = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) s += xs[rng.below(xs.size())];
        means.push_back(s / static_cast<double>(xs.size()));
    }
    return sampleSd(means);
}

OlsFit olsFit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("olsFit needs matched n >= 2");
    OlsFit f;
    f.n = static_cast<int>(x.size());
    double mx = mean(x), my = mean(y);
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0) throw Error("olsFit: degenerate x values");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    f.rms_residual = std::sqrt(ss_res / static_cast<double>(f.n));
    if (f.n > 2) {
        double sigma2 = ss_res / static_cast<double>(f.n - 2);
        f.slope_se = std::sqrt(sigma2 / sxx);
        if (f.slope_se > 0) {
            double t = f.slope / f.slope_se;
            f.slope_p = studentTwoSidedP(t, static_cast<double>(f.n - 2));
        } else {
            f.slope_p = f.slope == 0 ? 1.0 : 0.0;
        }
    }
    return f;
}

TrendTest mannKendall(std::span<const double> xs) {
    TrendTest t;
    size_t n = xs.size();
    if (n < 3) return t;
    double s = 0;
    for (size_t i = 0; i + 1 < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            if (xs[j] > xs[i]) s += 1;
            else if (xs[j] < xs[i]) s -= 1;
        }
    t.statistic = s;
    double var = static_cast<double>(n) * (n - 1) * (2.0 * n + 5.0) / 18.0;
    double z = 0;
    if (s > 0) z = (s - 1) / std::sqrt(var);
    else if (s < 0) z = (s + 1) / std::sqrt(var);
    t.p_two_sided = 2.0 * (1.0 - normalCdf(std::fabs(z)));
    t.p_increasing = 1.0 - normalCdf(z);
    return t;
}

BinomCI wilson(long successes, long trials, double confidence) {
    if (trials <= 0) throw Error("wilson CI needs trials > 0");
    // invert the normal CDF by bisection; plenty for reporting
    double alpha = 1.0 - confidence;
    double target = 1.0 - alpha / 2.0;
    double lo = 0, hi = 10;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (normalCdf(mid) < target) lo = mid;
        else hi = mid;
    }
    double z = 0.5 * (lo + hi);
    double n = static_cast<double>(trials);
    double p = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

double normalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double studentTwoSidedP(double t, double nu) {
    double x = nu / (nu + t * t);
    return incBeta(nu / 2.0, 0.5, x);
}

}  // namespace stats
}  // namespace hypwalk
