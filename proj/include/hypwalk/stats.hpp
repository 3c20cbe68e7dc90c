#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hypwalk {
namespace stats {

double mean(std::span<const double> xs);
double sampleSd(std::span<const double> xs);

// Standard error of the mean by seeded bootstrap (resamples deterministic
// in the seed).
double bootstrapSe(std::span<const double> xs, int resamples, uint64_t seed);

struct OlsFit {
    double slope = 0, intercept = 0;
    double r2 = 0;
    double slope_se = 0;
    double slope_p = 1;     // two-sided p-value for slope == 0
    double rms_residual = 0;
    int n = 0;
};
OlsFit olsFit(std::span<const double> x, std::span<const double> y);

struct TrendTest {
    double statistic = 0;   // Mann-Kendall S
    double p_two_sided = 1;
    double p_increasing = 1;  // one-sided, H1: increasing
};
TrendTest mannKendall(std::span<const double> xs);

struct BinomCI {
    double estimate = 0, lo = 0, hi = 0;
};
// Wilson score interval at the given confidence (e.g. 0.99).
BinomCI wilson(long successes, long trials, double confidence);

double normalCdf(double z);
// Two-sided Student-t p-value with nu degrees of freedom.
double studentTwoSidedP(double t, double nu);

}  // namespace stats
}  // namespace hypwalk
