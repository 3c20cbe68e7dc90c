#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypwalk/measure.hpp"
#include "hypwalk/space.hpp"
#include "hypwalk/stats.hpp"
#include "hypwalk/walk.hpp"

namespace hypwalk {

// A numeric estimate carrying its provenance: sample count, standard error
// and the seed that reproduces it.
struct EstimateCI {
    double value = 0;
    double std_error = 0;
    long n = 0;
    std::string method;
    uint64_t seed = 0;
};

// Ratios a_n/n and increments a_n - a_{n-1} of a subadditive sequence.
// Both decrease to the same limit; the increment converges much faster and
// stays a certified upper bound, so it is the reported limit estimate.
struct SubadditiveSequence {
    std::vector<double> ratio;      // index n-1 holds a_n / n
    std::vector<double> increment;  // index n-1 holds a_n - a_{n-1}
    double limitEstimate() const;
    double convergenceGap() const;  // |last two increments|
};

// Exact distribution of the distance chain |x_n| for radial nearest-neighbor
// measures on the tree: equal mass on every generator plus optional mass at
// the identity. Then mu^n(x) depends on |x| only.
class RadialTable {
public:
    static bool isRadial(const FiniteMeasure& m, const SpaceModel& model);
    static RadialTable build(const FiniteMeasure& m, const SpaceModel& model, int n_table);

    int nTable() const { return static_cast<int>(rows_.size()); }
    const std::vector<double>& row(int n) const { return rows_[static_cast<size_t>(n - 1)]; }
    double classCount(int r) const;  // number of words at distance r
    double L(int n) const { return L_[static_cast<size_t>(n - 1)]; }
    double H(int n) const { return H_[static_cast<size_t>(n - 1)]; }
    double maxRowSumError() const { return max_row_err_; }

private:
    int rank_ = 2;
    std::vector<std::vector<double>> rows_;
    std::vector<double> L_, H_;
    double max_row_err_ = 0;
};

// Boundary samples tagged with the model and visual base they live on;
// resolution metadata is retained per sample.
class EmpiricalBoundaryMeasure {
public:
    EmpiricalBoundaryMeasure(const SpaceModel& model, std::vector<BoundarySample> samples);

    const SpaceModel& model() const { return *model_; }
    Backend backend() const { return model_->backend(); }
    double visualBase() const { return model_->visualBase(); }
    size_t size() const { return samples_.size(); }
    const BoundarySample& sample(size_t i) const { return samples_[i]; }
    double medianResolution() const { return median_resolution_; }

    // Indices of samples resolved deeply enough for confluence threshold t
    // (tree); every index on the half-plane.
    std::vector<size_t> eligible(int threshold) const;

    // Fraction of samples lying in a region; unresolved samples are counted
    // separately, never silently classified.
    struct RegionMass {
        long inside = 0, resolved = 0, unresolved = 0;
    };
    RegionMass regionMass(const BoundaryRegion& region) const;

    // Visual threshold -> tree confluence threshold (smallest t with
    // a^{-t} <= radius).
    int confluenceThreshold(double radius) const;

private:
    const SpaceModel* model_;
    std::vector<BoundarySample> samples_;
    double median_resolution_ = 0;
};

EmpiricalBoundaryMeasure makeBoundaryMeasure(const FiniteMeasure& m, const SpaceModel& model,
                                             const WalkConfig& cfg);

// ---- rate of escape -------------------------------------------------------

EstimateCI escapeRateMc(const FiniteMeasure& m, const SpaceModel& model, const WalkConfig& cfg);

// Exact subadditive sequence L(mu^n)/n on the tree, via the radial distance
// chain or convolution powers for small supports.
SubadditiveSequence escapeRateExactTree(const FiniteMeasure& m, const SpaceModel& model,
                                        int n_table, size_t support_cap = kDefaultSupportCap);

// ---- asymptotic entropy ---------------------------------------------------

SubadditiveSequence entropyRateExactTree(const FiniteMeasure& m, const SpaceModel& model,
                                         int n_table, size_t support_cap = kDefaultSupportCap);

// min over computed n of H(mu^n)/n (falls back to H(mu)).
double entropyUpperBound(const FiniteMeasure& m, const SpaceModel& model, int max_n = 8,
                         size_t support_cap = kDefaultSupportCap);

// Certified upper bounds for h from the same convolution sequence: the plain
// ratio and the (tighter) increment bound.
struct EntropyBounds {
    double ratio_bound = 0;      // min_n H(mu^n)/n
    double increment_bound = 0;  // min_n H(mu^n) - H(mu^{n-1})
    double best = 0;
    int n_used = 1;
};
EntropyBounds entropyBounds(const FiniteMeasure& m, const SpaceModel& model, int max_n = 8,
                            size_t support_cap = kDefaultSupportCap);

// ---- Busemann route for the rate of escape --------------------------------

EstimateCI escapeRateBusemann(const FiniteMeasure& m, const SpaceModel& model,
                              const EmpiricalBoundaryMeasure& nu);

// ---- dimension estimators --------------------------------------------------

struct DimOptions {
    int centers = 256;
    int min_window = 5;
    double max_rms = 0.05;
    double min_avg_count = 30;
    double min_avg_pairs = 100;
    int bootstrap = 200;
    uint64_t seed = 1;
};

struct DimFitResult {
    bool ok = false;
    std::string note;
    EstimateCI est;
    double median = 0, iqr = 0;
    double failed_fraction = 0;
    int window_lo = 0, window_hi = 0;  // radii indices of the accepted window
    std::vector<double> slopes;
};

std::vector<double> defaultRadiiGrid(const EmpiricalBoundaryMeasure& nu, int max_scales = 24);

DimFitResult pointwiseDimension(const EmpiricalBoundaryMeasure& nu,
                                const std::vector<double>& radii, const DimOptions& opts);

DimFitResult correlationDimension(const EmpiricalBoundaryMeasure& nu,
                                  const std::vector<double>& radii, const DimOptions& opts);

// ---- inequality checks ------------------------------------------------------

struct DimBoundReport {
    double dim = 0, dim_se = 0;
    double h = 0, h_se = 0;
    double l = 0, l_se = 0;
    double bound = 0, bound_se = 0;
    double slack = 0;  // bound + 3 sigma - dim
    bool passed = false;
};
DimBoundReport dimBoundCheck(const EstimateCI& h, const EstimateCI& l, const EstimateCI& dim,
                             double visual_base);

struct ConvexityReport {
    double min_value = 0;
    long evaluated = 0, failures = 0;
};
ConvexityReport convexityCheck(const SpaceModel& model, const MuKFamily& fam,
                               const EmpiricalBoundaryMeasure& nu_k, long long k);

struct GromovBoundReport {
    std::vector<long long> k;
    std::vector<double> max_product;  // max over samples outside U, both signs of k
    stats::OlsFit trend;
    long failures = 0;
};
GromovBoundReport gromovBoundCheck(const SpaceModel& model, const MuKFamily& fam,
                                   const BoundaryRegion& exclude,
                                   const std::vector<long long>& k_grid,
                                   const std::vector<const EmpiricalBoundaryMeasure*>& nu_ks);

struct OpenSetMass {
    stats::BinomCI ci;
    long inside = 0, resolved = 0, unresolved = 0;
};
OpenSetMass openSetMass(const EmpiricalBoundaryMeasure& nu, const BoundaryRegion& region,
                        double confidence = 0.99);

// ---- the mu_k sweep ---------------------------------------------------------

struct RatioRow {
    long long k = 0;
    double H_mu = 0;            // H(mu_k)
    double h_bound_ratio = 0;   // min_n H(mu_k^n)/n
    double h_bound_incr = 0;    // min_n increment bound
    double h_bound = 0;         // min of the two
    int bound_n = 1;
    EstimateCI l_mc;
    double busemann_integrand = 0;  // (1/4) mean bracket over nu_k
    double busemann_lower = 0;      // integrand - L(mu)/2
    double ratio = 0;               // h_bound / l_mc
    double convexity_min = 0;
    long convexity_failures = 0;
    double region_mass = 0;  // empirical nu_k(U)
    double region_mass_lo = 0;
    long region_unresolved = 0;
};

struct RatioTable {
    std::vector<RatioRow> rows;
    stats::OlsFit l_affine_fit;  // l_mc vs k
    GromovBoundReport gromov;
};

struct RatioOptions {
    WalkConfig walk;            // for l_mc (steps, trajectories)
    WalkConfig boundary;        // for nu_k sampling (steps = 0 -> auto)
    int entropy_refine_n = 8;
    size_t support_cap = kDefaultSupportCap;
    std::optional<BoundaryRegion> mass_region;     // 4.2-style open set U
    std::optional<BoundaryRegion> exclude_region;  // U for the product bound
};

RatioTable ratioExperiment(const SpaceModel& model, const MuKFamily& fam,
                           const std::vector<long long>& k_grid, const RatioOptions& opts);

}  // namespace hypwalk
