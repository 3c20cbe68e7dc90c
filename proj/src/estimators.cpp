#include "hypwalk/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hypwalk/errors.hpp"
#include "hypwalk/rng.hpp"
#include "hypwalk/util.hpp"

namespace hypwalk {

namespace {

constexpr double kPi = 3.14159265358979323846;

// ------------------------------------------------------------------ indexes

// Lexicographic (prefix-first) view of tree boundary samples: samples that
// share a prefix are contiguous, so ball and pair counts reduce to range
// queries over one sort.
struct TreeIndex {
    std::vector<std::vector<Letter>> words;  // pool order
    std::vector<size_t> order;               // sorted into lexicographic order
    std::vector<int> lcp;                    // neighbor common-prefix lengths

    TreeIndex(const EmpiricalBoundaryMeasure& nu, const std::vector<size_t>& pool) {
        words.reserve(pool.size());
        for (size_t idx : pool) {
            const BoundaryPoint& p = nu.sample(idx).point;
            std::vector<Letter> w;
            int d = std::min<int>(p.depth(), 1 << 12);
            w.reserve(static_cast<size_t>(d));
            for (int i = 0; i < d; ++i) w.push_back(p.letterAt(i));
            words.push_back(std::move(w));
        }
        order.resize(words.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            const auto& x = words[a];
            const auto& y = words[b];
            size_t n = std::min(x.size(), y.size());
            for (size_t i = 0; i < n; ++i) {
                int ra = letterRank(x[i]), rb = letterRank(y[i]);
                if (ra != rb) return ra < rb;
            }
            return x.size() < y.size();
        });
        lcp.assign(order.empty() ? 0 : order.size() - 1, 0);
        for (size_t i = 0; i + 1 < order.size(); ++i) {
            const auto& x = words[order[i]];
            const auto& y = words[order[i + 1]];
            size_t n = std::min(x.size(), y.size());
            size_t c = 0;
            while (c < n && x[c] == y[c]) ++c;
            lcp[i] = static_cast<int>(c);
        }
    }

    // Number of pool samples whose first t letters equal center's first t.
    long ballCount(const std::vector<Letter>& center, int t) const {
        if (t <= 0) return static_cast<long>(words.size());
        auto cmp = [&](size_t idx, int bound) {
            // compare words[idx] (truncated to t) against center prefix:
            // -1 less, 0 equal-prefix, +1 greater; bound unused
            (void)bound;
            const auto& w = words[idx];
            for (int i = 0; i < t; ++i) {
                if (static_cast<size_t>(i) >= w.size()) return -1;  // shorter: sorts first
                int rw = letterRank(w[static_cast<size_t>(i)]);
                int rc = letterRank(center[static_cast<size_t>(i)]);
                if (rw != rc) return rw < rc ? -1 : 1;
            }
            return 0;
        };
        auto lo = std::partition_point(order.begin(), order.end(),
                                       [&](size_t idx) { return cmp(idx, 0) < 0; });
        auto hi = std::partition_point(lo, order.end(),
                                       [&](size_t idx) { return cmp(idx, 0) <= 0; });
        return static_cast<long>(hi - lo);
    }

    // Pairs with confluence >= t, optionally weighted by multiplicities.
    double pairsAtLeast(int t, const std::vector<int>* mult = nullptr) const {
        double total = 0;
        double run = order.empty() ? 0 : weightOf(0, mult);
        for (size_t i = 0; i + 1 < order.size(); ++i) {
            if (lcp[i] >= t) {
                run += weightOf(i + 1, mult);
            } else {
                total += run * (run - 1) / 2;
                run = weightOf(i + 1, mult);
            }
        }
        total += run * (run - 1) / 2;
        return total;
    }

private:
    double weightOf(size_t sorted_pos, const std::vector<int>* mult) const {
        return mult ? static_cast<double>((*mult)[order[sorted_pos]]) : 1.0;
    }
};

// Boundary coordinates of the half-plane pulled to circle angles; the visual
// quasimetric is monotone in the angle gap, so thresholds become gaps.
struct CircleIndex {
    std::vector<double> theta;  // sorted

    CircleIndex(const EmpiricalBoundaryMeasure& nu, const std::vector<size_t>& pool) {
        theta.reserve(pool.size());
        for (size_t idx : pool) {
            const BoundaryPoint& p = nu.sample(idx).point;
            theta.push_back(p.at_inf ? kPi : 2.0 * std::atan(p.xi));
        }
        std::sort(theta.begin(), theta.end());
    }

    // rho = |sin(gap/2)|^{ln a} <= r  <=>  gap <= 2 asin(r^{1/ln a})
    static double gapFor(double radius, double base) {
        double s = std::pow(radius, 1.0 / std::log(base));
        if (s >= 1.0) return kPi - 1e-12;
        return 2.0 * std::asin(s);
    }

    long ballCount(double center, double gap) const {
        // count theta in [center-gap, center+gap] with wraparound
        auto count_in = [&](double lo, double hi) {
            auto a = std::lower_bound(theta.begin(), theta.end(), lo);
            auto b = std::upper_bound(theta.begin(), theta.end(), hi);
            return static_cast<long>(b - a);
        };
        double lo = center - gap, hi = center + gap;
        long c = 0;
        c += count_in(std::max(lo, -kPi), std::min(hi, kPi));
        if (lo < -kPi) c += count_in(lo + 2 * kPi, kPi);
        if (hi > kPi) c += count_in(-kPi, hi - 2 * kPi);
        return c;
    }

    double pairsWithin(double gap, const std::vector<int>* mult_sorted = nullptr) const {
        // forward two-pointer over the doubled circle; gap < pi so each
        // unordered pair is counted exactly once
        size_t n = theta.size();
        if (n < 2) return 0;
        double total = 0;
        size_t j = 0;
        double wsum = 0;  // weights in window (i, j]
        for (size_t i = 0; i < n; ++i) {
            if (j < i + 1) {
                j = i + 1;
                wsum = 0;
            }
            while (j < i + n) {
                double tj = j < n ? theta[j] : theta[j - n] + 2 * kPi;
                if (tj - theta[i] > gap) break;
                wsum += mult_sorted ? static_cast<double>((*mult_sorted)[j % n]) : 1.0;
                ++j;
            }
            double wi = mult_sorted ? static_cast<double>((*mult_sorted)[i]) : 1.0;
            total += wi * wsum;
            // slide: remove nothing here; window [i+1, j) persists, but the
            // pair (i, x) counted with weight wi * w(x); when i advances the
            // window lower bound moves, so subtract w(i+1) if inside
            if (j > i + 1) {
                double wnext = mult_sorted ? static_cast<double>((*mult_sorted)[(i + 1) % n]) : 1.0;
                wsum -= wnext;
            }
        }
        // each unordered pair within half-circle counted once going forward
        return mult_sorted ? total : total;  // weights already pairwise products
    }
};

int chooseWindow(const std::vector<double>& xs, const std::vector<double>& ys,
                 const std::vector<double>& counts, int min_window, double max_rms,
                 double min_avg_count, int* out_lo, int* out_hi, double* out_slope) {
    int n = static_cast<int>(xs.size());
    for (int w = n; w >= min_window; --w) {
        for (int lo = n - w; lo >= 0; --lo) {  // prefer smaller radii (larger index)
            int hi = lo + w - 1;
            double avg = 0;
            for (int i = lo; i <= hi; ++i) avg += counts[static_cast<size_t>(i)];
            avg /= w;
            if (avg < min_avg_count) continue;
            std::vector<double> x(xs.begin() + lo, xs.begin() + hi + 1);
            std::vector<double> y(ys.begin() + lo, ys.begin() + hi + 1);
            auto fit = stats::olsFit(x, y);
            if (fit.rms_residual > max_rms) continue;
            *out_lo = lo;
            *out_hi = hi;
            *out_slope = fit.slope;
            return 1;
        }
    }
    return 0;
}

}  // namespace

// ---------------------------------------------------------------- sequences

double SubadditiveSequence::limitEstimate() const {
    if (!increment.empty()) return increment.back();
    return ratio.empty() ? 0 : ratio.back();
}

double SubadditiveSequence::convergenceGap() const {
    if (increment.size() >= 2)
        return std::fabs(increment[increment.size() - 1] - increment[increment.size() - 2]);
    return ratio.empty() ? 0 : ratio.back();
}

// --------------------------------------------------------------- RadialTable

bool RadialTable::isRadial(const FiniteMeasure& m, const SpaceModel& model) {
    if (m.backend() != Backend::tree) return false;
    int letters_seen = 0;
    double letter_mass = -1;
    for (size_t i = 0; i < m.size(); ++i) {
        const Word& w = m.atom(i).word;
        if (w.empty()) continue;  // lazy mass at the identity is fine
        if (w.size() != 1) return false;
        ++letters_seen;
        if (letter_mass < 0)
            letter_mass = m.mass(i);
        else if (std::fabs(m.mass(i) - letter_mass) > 1e-15)
            return false;
    }
    return letters_seen == 2 * model.rank();
}

RadialTable RadialTable::build(const FiniteMeasure& m, const SpaceModel& model, int n_table) {
    if (!isRadial(m, model))
        throw Error("radial table requires equal mass on all 2k generators");
    if (n_table < 1) throw Error("n_table must be >= 1");
    RadialTable t;
    t.rank_ = model.rank();
    const int two_k = 2 * t.rank_;
    double q = 0, lazy = 0;
    for (size_t i = 0; i < m.size(); ++i) {
        if (m.atom(i).word.empty())
            lazy = m.mass(i);
        else
            q = m.mass(i);
    }
    const double up = (two_k - 1) * q, down = q;

    std::vector<double> p{1.0};
    const double log2k = std::log(static_cast<double>(two_k));
    const double logb = std::log(static_cast<double>(two_k - 1));
    for (int n = 1; n <= n_table; ++n) {
        std::vector<double> np(static_cast<size_t>(n) + 1, 0.0);
        for (size_t r = 0; r < p.size(); ++r) {
            double pr = p[r];
            if (pr == 0) continue;
            if (r == 0) {
                np[1] += pr * (two_k * q);
                np[0] += pr * lazy;
            } else {
                np[r + 1] += pr * up;
                np[r - 1] += pr * down;
                np[r] += pr * lazy;
            }
        }
        p = std::move(np);
        // compensated row sum, L and H
        double s = 0, comp = 0, L = 0, H = 0;
        for (size_t r = 0; r < p.size(); ++r) {
            double x = p[r];
            double tt = s + x;
            comp += std::fabs(s) >= std::fabs(x) ? (s - tt) + x : (x - tt) + s;
            s = tt;
            if (x <= 0) continue;
            L += x * static_cast<double>(r);
            double logN = r == 0 ? 0.0 : log2k + (static_cast<double>(r) - 1) * logb;
            H += x * (logN - std::log(x));
        }
        t.max_row_err_ = std::max(t.max_row_err_, std::fabs(s + comp - 1.0));
        t.rows_.push_back(p);
        t.L_.push_back(L);
        t.H_.push_back(H);
    }
    return t;
}

double RadialTable::classCount(int r) const {
    if (r == 0) return 1;
    return 2.0 * rank_ * std::pow(2.0 * rank_ - 1, r - 1);
}

// ------------------------------------------------------------ boundary meas.

EmpiricalBoundaryMeasure::EmpiricalBoundaryMeasure(const SpaceModel& model,
                                                   std::vector<BoundarySample> samples)
    : model_(&model), samples_(std::move(samples)) {
    if (samples_.empty()) throw Error("empirical boundary measure needs samples");
    for (const auto& s : samples_)
        if (s.point.backend != model.backend())
            throw BackendMismatch("boundary sample backend mismatch");
    std::vector<double> res;
    res.reserve(samples_.size());
    for (const auto& s : samples_) res.push_back(s.resolution);
    std::sort(res.begin(), res.end());
    median_resolution_ = res[res.size() / 2];
}

std::vector<size_t> EmpiricalBoundaryMeasure::eligible(int threshold) const {
    std::vector<size_t> idx;
    idx.reserve(samples_.size());
    for (size_t i = 0; i < samples_.size(); ++i) {
        if (backend() == Backend::halfplane ||
            samples_[i].point.depth() >= threshold)
            idx.push_back(i);
    }
    return idx;
}

EmpiricalBoundaryMeasure::RegionMass EmpiricalBoundaryMeasure::regionMass(
    const BoundaryRegion& region) const {
    RegionMass rm;
    for (const auto& s : samples_) {
        try {
            if (region.contains(s.point)) ++rm.inside;
            ++rm.resolved;
        } catch (const InsufficientResolution&) {
            ++rm.unresolved;
        }
    }
    return rm;
}

int EmpiricalBoundaryMeasure::confluenceThreshold(double radius) const {
    if (!(radius > 0)) throw Error("radius must be positive");
    double t = -std::log(radius) / std::log(visualBase());
    return std::max(0, static_cast<int>(std::ceil(t - 1e-9)));
}

EmpiricalBoundaryMeasure makeBoundaryMeasure(const FiniteMeasure& m, const SpaceModel& model,
                                             const WalkConfig& cfg) {
    BoundaryBatch batch = sampleBoundary(m, model, cfg);
    return EmpiricalBoundaryMeasure(model, std::move(batch.samples));
}

// ------------------------------------------------------------- escape rates

EstimateCI escapeRateMc(const FiniteMeasure& m, const SpaceModel& model, const WalkConfig& cfg) {
    cfg.validate();
    WalkConfig local = cfg;
    local.stride = local.steps;  // only the endpoint is needed
    std::vector<double> vals(static_cast<size_t>(local.trajectories),
                             std::numeric_limits<double>::quiet_NaN());
    parallelFor(static_cast<size_t>(local.trajectories), local.threads, [&](size_t i) {
        Trajectory t = sampleTrajectory(m, model, local, static_cast<int>(i));
        if (t.valid && !t.distance.empty())
            vals[i] = t.distance.back() / static_cast<double>(t.steps_at.back());
    });
    std::vector<double> ok;
    ok.reserve(vals.size());
    long invalid = 0;
    for (double v : vals) {
        if (std::isnan(v))
            ++invalid;
        else
            ok.push_back(v);
    }
    if (invalid > 0 &&
        static_cast<double>(invalid) > 0.01 * static_cast<double>(local.trajectories))
        throw EstimatorFailure("escape_rate_mc: " + std::to_string(invalid) +
                               " invalid trajectories (precision aborts)");
    EstimateCI e;
    e.value = stats::mean(ok);
    e.std_error = stats::bootstrapSe(ok, 200, local.seed ^ 0xe5caULL);
    e.n = static_cast<long>(ok.size());
    e.method = "escape_rate_mc";
    e.seed = local.seed;
    return e;
}

namespace {

// Shared power iteration for the exact tree routes.
SubadditiveSequence exactTreeSequence(const FiniteMeasure& m, const SpaceModel& model,
                                      int n_table, size_t cap, bool entropy_route) {
    if (model.backend() != Backend::tree)
        throw Error("exact tree route is unsupported on this backend");
    if (n_table < 1) throw Error("n_table must be >= 1");
    SubadditiveSequence seq;
    if (RadialTable::isRadial(m, model)) {
        RadialTable t = RadialTable::build(m, model, n_table);
        double prev = 0;
        for (int n = 1; n <= n_table; ++n) {
            double a_n = entropy_route ? t.H(n) : t.L(n);
            seq.ratio.push_back(a_n / n);
            seq.increment.push_back(a_n - prev);
            prev = a_n;
        }
        return seq;
    }
    // Small-support route: exact convolution powers under the cap; a cap
    // overflow surfaces as the resource error suggesting the radial route.
    FiniteMeasure pw = m;
    double prev = 0;
    for (int n = 1; n <= n_table; ++n) {
        if (n > 1) pw = convolve(model, pw, m, cap);
        double a_n = entropy_route ? pw.entropy() : pw.firstMoment(model);
        seq.ratio.push_back(a_n / n);
        seq.increment.push_back(a_n - prev);
        prev = a_n;
    }
    return seq;
}

}  // namespace

SubadditiveSequence escapeRateExactTree(const FiniteMeasure& m, const SpaceModel& model,
                                        int n_table, size_t support_cap) {
    return exactTreeSequence(m, model, n_table, support_cap, false);
}

SubadditiveSequence entropyRateExactTree(const FiniteMeasure& m, const SpaceModel& model,
                                         int n_table, size_t support_cap) {
    return exactTreeSequence(m, model, n_table, support_cap, true);
}

EntropyBounds entropyBounds(const FiniteMeasure& m, const SpaceModel& model, int max_n,
                            size_t support_cap) {
    EntropyBounds b;
    double H1 = m.entropy();
    b.ratio_bound = H1;
    b.increment_bound = H1;
    b.n_used = 1;
    if (model.backend() == Backend::tree && RadialTable::isRadial(m, model)) {
        int n_table = std::max(max_n, 48);
        RadialTable t = RadialTable::build(m, model, n_table);
        for (int n = 2; n <= n_table; ++n) {
            b.ratio_bound = std::min(b.ratio_bound, t.H(n) / n);
            b.increment_bound = std::min(b.increment_bound, t.H(n) - t.H(n - 1));
        }
        b.n_used = n_table;
    } else {
        FiniteMeasure pw = m;
        double prev = H1;
        for (int n = 2; n <= max_n; ++n) {
            if (pw.size() * m.size() > support_cap + support_cap / 4) break;
            try {
                pw = convolve(model, pw, m, support_cap);
            } catch (const ResourceLimit&) {
                break;
            }
            double Hn = pw.entropy();
            b.ratio_bound = std::min(b.ratio_bound, Hn / n);
            b.increment_bound = std::min(b.increment_bound, Hn - prev);
            prev = Hn;
            b.n_used = n;
        }
    }
    b.best = std::min(b.ratio_bound, b.increment_bound);
    return b;
}

double entropyUpperBound(const FiniteMeasure& m, const SpaceModel& model, int max_n,
                         size_t support_cap) {
    return entropyBounds(m, model, max_n, support_cap).ratio_bound;
}

EstimateCI escapeRateBusemann(const FiniteMeasure& m, const SpaceModel& model,
                              const EmpiricalBoundaryMeasure& nu) {
    SpacePoint o = model.basepoint();
    std::vector<SpacePoint> targets;
    targets.reserve(m.size());
    for (size_t i = 0; i < m.size(); ++i)
        targets.push_back(model.orbitPoint(model.inverse(m.atom(i))));

    std::vector<double> ys;
    ys.reserve(nu.size());
    long failures = 0;
    for (size_t s = 0; s < nu.size(); ++s) {
        const BoundaryPoint& xi = nu.sample(s).point;
        double y = 0;
        bool ok = true;
        for (size_t i = 0; i < m.size() && ok; ++i) {
            try {
                y += m.mass(i) * model.busemann(xi, o, targets[i]);
            } catch (const InsufficientResolution&) {
                ok = false;
            }
        }
        if (ok)
            ys.push_back(y);
        else
            ++failures;
    }
    if (static_cast<double>(failures) > 0.01 * static_cast<double>(nu.size()))
        throw EstimatorFailure("escape_rate_busemann: " + std::to_string(failures) + "/" +
                               std::to_string(nu.size()) +
                               " samples under-resolved for the support");
    EstimateCI e;
    e.value = stats::mean(ys);
    e.std_error = stats::bootstrapSe(ys, 200, 0xb53eULL + nu.size());
    e.n = static_cast<long>(ys.size());
    e.method = "escape_rate_busemann";
    return e;
}

// ------------------------------------------------------------- dimensions

std::vector<double> defaultRadiiGrid(const EmpiricalBoundaryMeasure& nu, int max_scales) {
    int J = max_scales;
    if (nu.backend() == Backend::tree)
        J = std::min(J, static_cast<int>(std::floor(nu.medianResolution())));
    J = std::max(J, 2);
    std::vector<double> radii;
    radii.reserve(static_cast<size_t>(J));
    for (int j = 1; j <= J; ++j) radii.push_back(std::pow(nu.visualBase(), -j));
    return radii;
}

DimFitResult pointwiseDimension(const EmpiricalBoundaryMeasure& nu,
                                const std::vector<double>& radii, const DimOptions& opts) {
    DimFitResult res;
    if (radii.size() < static_cast<size_t>(opts.min_window)) {
        res.note = "radii grid shorter than the minimum window";
        return res;
    }
    int tmax = nu.backend() == Backend::tree ? nu.confluenceThreshold(radii.back()) : 0;
    std::vector<size_t> pool = nu.eligible(tmax);
    if (pool.size() < 32) {
        res.note = "too few samples resolved to depth " + std::to_string(tmax);
        return res;
    }

    std::unique_ptr<TreeIndex> ti;
    std::unique_ptr<CircleIndex> ci;
    std::vector<int> thresholds;
    std::vector<double> gaps;
    if (nu.backend() == Backend::tree) {
        ti = std::make_unique<TreeIndex>(nu, pool);
        for (double r : radii) thresholds.push_back(nu.confluenceThreshold(r));
    } else {
        ci = std::make_unique<CircleIndex>(nu, pool);
        for (double r : radii) gaps.push_back(CircleIndex::gapFor(r, nu.visualBase()));
    }

    const size_t n_pool = pool.size();
    int centers = std::min<int>(opts.centers, static_cast<int>(n_pool));
    std::vector<double> log_r;
    for (double r : radii) log_r.push_back(std::log(r));

    int failed = 0;
    for (int c = 0; c < centers; ++c) {
        size_t pi = static_cast<size_t>(c) * n_pool / static_cast<size_t>(centers);
        std::vector<double> xs, ys, counts;
        for (size_t j = 0; j < radii.size(); ++j) {
            long cnt;
            if (ti) {
                cnt = ti->ballCount(ti->words[pi], thresholds[j]);
            } else {
                cnt = ci->ballCount(ci->theta[pi * ci->theta.size() / n_pool], gaps[j]);
            }
            if (cnt < 1) break;  // deeper radii only get emptier
            xs.push_back(log_r[j]);
            ys.push_back(std::log(static_cast<double>(cnt) / static_cast<double>(n_pool)));
            counts.push_back(static_cast<double>(cnt));
        }
        int lo = 0, hi = 0;
        double slope = 0;
        if (static_cast<int>(xs.size()) >= opts.min_window &&
            chooseWindow(xs, ys, counts, opts.min_window, opts.max_rms, opts.min_avg_count,
                         &lo, &hi, &slope)) {
            res.slopes.push_back(slope);
        } else {
            ++failed;
        }
    }
    res.failed_fraction = centers > 0 ? static_cast<double>(failed) / centers : 1.0;
    if (res.slopes.empty()) {
        res.note = "no center admitted a scaling window";
        return res;
    }

    std::vector<double> sorted = res.slopes;
    std::sort(sorted.begin(), sorted.end());
    res.median = sorted[sorted.size() / 2];
    size_t q1 = sorted.size() / 4, q3 = (3 * sorted.size()) / 4;
    res.iqr = sorted[std::min(q3, sorted.size() - 1)] - sorted[q1];

    // bootstrap SE of the median over centers
    Rng rng(mix64(opts.seed ^ 0xd1aULL));
    std::vector<double> med_bs;
    for (int b = 0; b < opts.bootstrap; ++b) {
        std::vector<double> take;
        take.reserve(sorted.size());
        for (size_t i = 0; i < sorted.size(); ++i)
            take.push_back(res.slopes[rng.below(res.slopes.size())]);
        std::nth_element(take.begin(), take.begin() + static_cast<long>(take.size() / 2),
                         take.end());
        med_bs.push_back(take[take.size() / 2]);
    }
    res.est.value = res.median;
    res.est.std_error = stats::sampleSd(med_bs);
    res.est.n = static_cast<long>(res.slopes.size());
    res.est.method = "pointwise_dimension";
    res.est.seed = opts.seed;
    res.ok = res.failed_fraction <= 0.20;
    if (!res.ok)
        res.note = "scaling window failed for " +
                   std::to_string(static_cast<int>(res.failed_fraction * 100)) + "% of centers";
    return res;
}

DimFitResult correlationDimension(const EmpiricalBoundaryMeasure& nu,
                                  const std::vector<double>& radii, const DimOptions& opts) {
    DimFitResult res;
    if (radii.size() < static_cast<size_t>(opts.min_window)) {
        res.note = "radii grid shorter than the minimum window";
        return res;
    }
    int tmax = nu.backend() == Backend::tree ? nu.confluenceThreshold(radii.back()) : 0;
    std::vector<size_t> pool = nu.eligible(tmax);
    if (pool.size() < 32) {
        res.note = "too few samples resolved to depth " + std::to_string(tmax);
        return res;
    }
    std::unique_ptr<TreeIndex> ti;
    std::unique_ptr<CircleIndex> ci;
    std::vector<int> thresholds;
    std::vector<double> gaps;
    if (nu.backend() == Backend::tree) {
        ti = std::make_unique<TreeIndex>(nu, pool);
        for (double r : radii) thresholds.push_back(nu.confluenceThreshold(r));
    } else {
        ci = std::make_unique<CircleIndex>(nu, pool);
        for (double r : radii) gaps.push_back(CircleIndex::gapFor(r, nu.visualBase()));
    }
    const double n_pool = static_cast<double>(pool.size());
    const double norm = n_pool * (n_pool - 1) / 2;

    std::vector<double> xs, ys, counts;
    std::vector<int> kept_j;
    for (size_t j = 0; j < radii.size(); ++j) {
        double pairs = ti ? ti->pairsAtLeast(thresholds[j]) : ci->pairsWithin(gaps[j]);
        if (pairs < 1) break;
        xs.push_back(std::log(radii[j]));
        ys.push_back(std::log(pairs / norm));
        counts.push_back(pairs);
        kept_j.push_back(static_cast<int>(j));
    }
    int lo = 0, hi = 0;
    double slope = 0;
    if (static_cast<int>(xs.size()) < opts.min_window ||
        !chooseWindow(xs, ys, counts, opts.min_window, opts.max_rms, opts.min_avg_pairs, &lo,
                      &hi, &slope)) {
        res.note = "no pair-count scaling window";
        return res;
    }
    res.window_lo = kept_j[static_cast<size_t>(lo)];
    res.window_hi = kept_j[static_cast<size_t>(hi)];

    // bootstrap over samples: multiplicity draws reuse the fixed window
    int B = pool.size() >= 50000 ? std::min(opts.bootstrap, 50) : opts.bootstrap;
    Rng rng(mix64(opts.seed ^ 0xc0deULL));
    std::vector<double> slopes_bs;
    std::vector<int> mult(pool.size());
    std::vector<int> mult_sorted(pool.size());
    for (int b = 0; b < B; ++b) {
        std::fill(mult.begin(), mult.end(), 0);
        for (size_t i = 0; i < pool.size(); ++i) ++mult[rng.below(pool.size())];
        std::vector<double> bx, by;
        bool usable = true;
        if (ci) {
            // mult must follow the sorted order of theta; CircleIndex sorted
            // its own copy, so resampling weights are attached by rank
            for (size_t i = 0; i < pool.size(); ++i) mult_sorted[i] = mult[i];
        }
        for (int j = lo; j <= hi && usable; ++j) {
            double pairs = ti ? ti->pairsAtLeast(thresholds[static_cast<size_t>(kept_j[static_cast<size_t>(j)])], &mult)
                              : ci->pairsWithin(gaps[static_cast<size_t>(kept_j[static_cast<size_t>(j)])], &mult_sorted);
            if (pairs < 1) {
                usable = false;
                break;
            }
            bx.push_back(xs[static_cast<size_t>(j)]);
            by.push_back(std::log(pairs / norm));
        }
        if (usable && bx.size() >= 2) slopes_bs.push_back(stats::olsFit(bx, by).slope);
    }

    res.est.value = slope;
    res.est.std_error = slopes_bs.size() >= 2 ? stats::sampleSd(slopes_bs) : 0.0;
    res.est.n = static_cast<long>(pool.size());
    res.est.method = "correlation_dimension";
    res.est.seed = opts.seed;
    res.median = slope;
    res.ok = true;
    return res;
}

// ------------------------------------------------------------- inequalities

DimBoundReport dimBoundCheck(const EstimateCI& h, const EstimateCI& l, const EstimateCI& dim,
                             double visual_base) {
    if (!(l.value > 0)) throw Error("dim bound check needs a positive rate of escape");
    DimBoundReport r;
    r.dim = dim.value;
    r.dim_se = dim.std_error;
    r.h = h.value;
    r.h_se = h.std_error;
    r.l = l.value;
    r.l_se = l.std_error;
    double loga = std::log(visual_base);
    r.bound = h.value / (l.value * loga);
    double rel = 0;
    if (h.value > 0) rel += (h.std_error / h.value) * (h.std_error / h.value);
    rel += (l.std_error / l.value) * (l.std_error / l.value);
    r.bound_se = r.bound * std::sqrt(rel);
    double sigma = std::sqrt(r.bound_se * r.bound_se + dim.std_error * dim.std_error);
    r.slack = r.bound + 3 * sigma - dim.value;
    r.passed = r.slack >= 0;
    return r;
}

ConvexityReport convexityCheck(const SpaceModel& model, const MuKFamily& fam,
                               const EmpiricalBoundaryMeasure& nu_k, long long k) {
    ConvexityReport rep;
    SpacePoint o = model.basepoint();
    SpacePoint gk = fam.gammaK(model, k);
    SpacePoint gmk = fam.gammaK(model, -k);
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < nu_k.size(); ++i) {
        try {
            double v = model.busemann(nu_k.sample(i).point, o, gk) +
                       model.busemann(nu_k.sample(i).point, o, gmk);
            best = std::min(best, v);
            ++rep.evaluated;
        } catch (const InsufficientResolution&) {
            ++rep.failures;
        }
    }
    if (rep.evaluated == 0) throw EstimatorFailure("convexity check: no resolvable samples");
    rep.min_value = best;
    return rep;
}

namespace {

double maxProductOutside(const SpaceModel& model, const MuKFamily& fam,
                         const BoundaryRegion& exclude, long long k,
                         const EmpiricalBoundaryMeasure& nu, long* failures) {
    SpacePoint gk = fam.gammaK(model, k);
    SpacePoint gmk = fam.gammaK(model, -k);
    double mx = 0;
    for (size_t i = 0; i < nu.size(); ++i) {
        const BoundaryPoint& xi = nu.sample(i).point;
        try {
            if (exclude.contains(xi)) continue;  // samples inside U are rejected
            mx = std::max(mx, model.gromovMixed(xi, gk));
            mx = std::max(mx, model.gromovMixed(xi, gmk));
        } catch (const InsufficientResolution&) {
            ++*failures;
        }
    }
    return mx;
}

}  // namespace

GromovBoundReport gromovBoundCheck(const SpaceModel& model, const MuKFamily& fam,
                                   const BoundaryRegion& exclude,
                                   const std::vector<long long>& k_grid,
                                   const std::vector<const EmpiricalBoundaryMeasure*>& nu_ks) {
    if (k_grid.size() != nu_ks.size())
        throw Error("gromov bound check: k grid / sample sets mismatch");
    if (!exclude.contains(fam.fixedPlus()) || !exclude.contains(fam.fixedMinus()))
        throw Error("gromov bound check: U must contain both fixed points of gamma0");
    GromovBoundReport rep;
    for (size_t i = 0; i < k_grid.size(); ++i) {
        rep.k.push_back(k_grid[i]);
        rep.max_product.push_back(
            maxProductOutside(model, fam, exclude, k_grid[i], *nu_ks[i], &rep.failures));
    }
    if (rep.k.size() >= 3) {
        std::vector<double> xs(rep.k.begin(), rep.k.end());
        rep.trend = stats::olsFit(xs, rep.max_product);
    }
    return rep;
}

OpenSetMass openSetMass(const EmpiricalBoundaryMeasure& nu, const BoundaryRegion& region,
                        double confidence) {
    auto rm = nu.regionMass(region);
    OpenSetMass out;
    out.inside = rm.inside;
    out.resolved = rm.resolved;
    out.unresolved = rm.unresolved;
    if (rm.resolved == 0) throw EstimatorFailure("open set mass: no resolvable samples");
    out.ci = stats::wilson(rm.inside, rm.resolved, confidence);
    return out;
}

// --------------------------------------------------------------- mu_k sweep

RatioTable ratioExperiment(const SpaceModel& model, const MuKFamily& fam,
                           const std::vector<long long>& k_grid, const RatioOptions& opts) {
    if (k_grid.empty()) throw Error("ratio experiment needs a nonempty k grid");
    for (size_t i = 1; i < k_grid.size(); ++i)
        if (k_grid[i] <= k_grid[i - 1]) throw Error("k grid must be strictly ascending");

    RatioTable table;
    std::vector<double> ks, ls;
    SpacePoint o = model.basepoint();
    double L_mu = fam.base().firstMoment(model);
    if (opts.exclude_region) {
        if (!opts.exclude_region->contains(fam.fixedPlus()) ||
            !opts.exclude_region->contains(fam.fixedMinus()))
            throw Error("ratio experiment: exclude region must contain both fixed points");
    }

    for (long long k : k_grid) {
        RatioRow row;
        row.k = k;
        FiniteMeasure mu_k = fam.makeMuK(model, k);
        row.H_mu = mu_k.entropy();

        EntropyBounds hb = entropyBounds(mu_k, model, opts.entropy_refine_n, opts.support_cap);
        row.h_bound_ratio = hb.ratio_bound;
        row.h_bound_incr = hb.increment_bound;
        row.h_bound = hb.best;
        row.bound_n = hb.n_used;

        WalkConfig wcfg = opts.walk;
        wcfg.seed = mix64(opts.walk.seed ^ mix64(static_cast<uint64_t>(k) + 0x5aULL));
        row.l_mc = escapeRateMc(mu_k, model, wcfg);
        ks.push_back(static_cast<double>(k));
        ls.push_back(row.l_mc.value);

        WalkConfig bcfg = opts.boundary;
        bcfg.seed = mix64(opts.boundary.seed ^ mix64(static_cast<uint64_t>(k) + 0xb0ULL));
        EmpiricalBoundaryMeasure nu_k = makeBoundaryMeasure(mu_k, model, bcfg);

        SpacePoint gk = fam.gammaK(model, k);
        SpacePoint gmk = fam.gammaK(model, -k);
        double bracket_sum = 0;
        long bracket_n = 0;
        for (size_t i = 0; i < nu_k.size(); ++i) {
            try {
                bracket_sum += model.busemann(nu_k.sample(i).point, o, gk) +
                               model.busemann(nu_k.sample(i).point, o, gmk);
                ++bracket_n;
            } catch (const InsufficientResolution&) {
            }
        }
        if (bracket_n == 0) throw EstimatorFailure("ratio experiment: no resolvable samples");
        row.busemann_integrand = 0.25 * bracket_sum / static_cast<double>(bracket_n);
        row.busemann_lower = row.busemann_integrand - 0.5 * L_mu;

        auto conv = convexityCheck(model, fam, nu_k, k);
        row.convexity_min = conv.min_value;
        row.convexity_failures = conv.failures;

        if (opts.mass_region) {
            auto mass = openSetMass(nu_k, *opts.mass_region, 0.99);
            row.region_mass = mass.ci.estimate;
            row.region_mass_lo = mass.ci.lo;
            row.region_unresolved = mass.unresolved;
        }
        if (opts.exclude_region) {
            table.gromov.k.push_back(k);
            table.gromov.max_product.push_back(maxProductOutside(
                model, fam, *opts.exclude_region, k, nu_k, &table.gromov.failures));
        }

        row.ratio = row.h_bound / row.l_mc.value;
        table.rows.push_back(row);
    }

    table.l_affine_fit = stats::olsFit(ks, ls);
    if (opts.exclude_region && table.gromov.k.size() >= 3) {
        std::vector<double> xs(table.gromov.k.begin(), table.gromov.k.end());
        table.gromov.trend = stats::olsFit(xs, table.gromov.max_product);
    }
    return table;
}

}  // namespace hypwalk
