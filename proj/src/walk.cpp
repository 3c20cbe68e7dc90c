#include "hypwalk/walk.hpp"

#include <algorithm>
#include <cmath>

#include "hypwalk/errors.hpp"
#include "hypwalk/rng.hpp"
#include "hypwalk/util.hpp"

namespace hypwalk {

namespace {

constexpr uint64_t kTrajTag = 0x7261775f6b6c6177ULL;
constexpr uint64_t kPilotTag = 0x746f6c6970ULL;

std::vector<double> cumulativeMasses(const FiniteMeasure& m) {
    std::vector<double> cdf(m.size());
    double s = 0.0;
    for (size_t i = 0; i < m.size(); ++i) {
        s += m.mass(i);
        cdf[i] = s;
    }
    cdf.back() = 1.0;  // guard against accumulated rounding at the top
    return cdf;
}

size_t drawIndex(const std::vector<double>& cdf, Rng& rng) {
    double u = rng.uniform01();
    return static_cast<size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u,
                         [](double c, double v) { return c <= v; }) -
        cdf.begin());
}

double hpDistanceFromBase(std::complex<double> z) {
    double dx = z.real(), dy = z.imag() - 1.0;
    double arg = 1.0 + (dx * dx + dy * dy) / (2.0 * z.imag());
    return std::acosh(std::max(1.0, arg));
}

}  // namespace

void WalkConfig::validate() const {
    if (steps < 0) throw Error("walk steps must be >= 0");
    if (trajectories < 1) throw Error("walk needs >= 1 trajectory");
    if (stride < 1) throw Error("stride must be >= 1");
    if (max_steps < 1) throw Error("max_steps must be >= 1");
    if (steps > max_steps)
        throw Error("walk steps " + std::to_string(steps) + " exceed max_steps cap " +
                    std::to_string(max_steps));
}

Trajectory sampleTrajectory(const FiniteMeasure& m, const SpaceModel& model,
                            const WalkConfig& cfg, int index) {
    cfg.validate();
    if (index < 0 || index >= cfg.trajectories) throw Error("trajectory index out of range");
    if (m.backend() != model.backend()) throw BackendMismatch("measure/model backend mismatch");

    Trajectory out;
    out.index = index;
    out.traj_seed = mix64(cfg.seed ^ kTrajTag ^ mix64(static_cast<uint64_t>(index)));
    Rng rng = Rng::forIndex(cfg.seed ^ kTrajTag, static_cast<uint64_t>(index));
    const auto cdf = cumulativeMasses(m);

    auto record = [&](int n, double dist, SpacePoint pos) {
        out.steps_at.push_back(n);
        out.distance.push_back(dist);
        out.position.push_back(std::move(pos));
    };

    if (model.backend() == Backend::tree) {
        std::vector<Letter> stack;
        stack.reserve(static_cast<size_t>(cfg.steps) + 8);
        for (int n = 1; n <= cfg.steps; ++n) {
            const Word& inc = m.atom(drawIndex(cdf, rng)).word;
            for (Letter l : inc.letters()) {
                if (!stack.empty() && stack.back() == -l)
                    stack.pop_back();
                else
                    stack.push_back(l);
            }
            if (n % cfg.stride == 0 || n == cfg.steps)
                record(n, static_cast<double>(stack.size()),
                       SpacePoint::tree(Word::fromLetters(stack)));
        }
        out.steps_completed = cfg.steps;
        return out;
    }

    // Half-plane: accumulate the product projectively (normalized by the
    // largest entry) so entries never overflow; the action ignores scale.
    Mat2 acc = Mat2::identity();
    for (int n = 1; n <= cfg.steps; ++n) {
        acc = acc.mulScaled(m.atom(drawIndex(cdf, rng)).mat);
        if (n % cfg.stride == 0 || n == cfg.steps) {
            std::complex<double> z;
            try {
                z = acc.apply({0, 1});
            } catch (const PrecisionLoss&) {
                out.valid = false;
                out.steps_completed = n;
                return out;
            }
            record(n, hpDistanceFromBase(z), SpacePoint{Backend::halfplane, Word{}, z});
        }
    }
    out.steps_completed = cfg.steps;
    return out;
}

double pilotEscapeRate(const FiniteMeasure& m, const SpaceModel& model, uint64_t seed) {
    WalkConfig pilot;
    pilot.steps = 256;
    pilot.trajectories = 64;
    pilot.seed = seed ^ kPilotTag;
    pilot.stride = 256;
    double s = 0.0;
    int used = 0;
    for (int i = 0; i < pilot.trajectories; ++i) {
        Trajectory t = sampleTrajectory(m, model, pilot, i);
        if (!t.valid || t.distance.empty()) continue;
        s += t.distance.back() / t.steps_at.back();
        ++used;
    }
    if (used == 0) throw EstimatorFailure("pilot walk produced no valid trajectories");
    return s / used;
}

int autoTruncationDepth(const FiniteMeasure& m, const SpaceModel& model, const WalkConfig& cfg) {
    double l_hat = pilotEscapeRate(m, model, cfg.seed);
    int depth = 200;
    if (l_hat > 1e-9)
        depth = std::max(200, static_cast<int>(std::ceil(40.0 / l_hat)));
    return std::min(depth, cfg.max_steps);
}

BoundaryBatch sampleBoundary(const FiniteMeasure& m, const SpaceModel& model,
                             const WalkConfig& cfg) {
    WalkConfig local = cfg;
    if (local.steps == 0) local.steps = autoTruncationDepth(m, model, cfg);
    local.validate();

    BoundaryBatch batch;
    batch.requested = local.trajectories;
    batch.n_max = local.steps;
    const auto cdf = cumulativeMasses(m);
    const int n_max = local.steps;
    const int n_mid = n_max / 2;

    std::vector<BoundarySample> all(static_cast<size_t>(local.trajectories));
    parallelFor(static_cast<size_t>(local.trajectories), local.threads, [&](size_t idx) {
        Rng rng = Rng::forIndex(local.seed ^ kTrajTag, idx);
        BoundarySample s;
        s.truncation = n_max;
        if (model.backend() == Backend::tree) {
            std::vector<Letter> stack;
            std::vector<Letter> mid;
            for (int n = 1; n <= n_max; ++n) {
                const Word& inc = m.atom(drawIndex(cdf, rng)).word;
                for (Letter l : inc.letters()) {
                    if (!stack.empty() && stack.back() == -l)
                        stack.pop_back();
                    else
                        stack.push_back(l);
                }
                if (n == n_mid) mid = stack;
            }
            size_t conf = 0;
            size_t lim = std::min(stack.size(), mid.size());
            while (conf < lim && stack[conf] == mid[conf]) ++conf;
            s.resolution = static_cast<double>(conf);
            size_t depth = std::min<size_t>(conf, static_cast<size_t>(local.boundary_depth_cap));
            s.point = BoundaryPoint::treePrefix(
                Word::fromLetters({stack.data(), depth}));
            s.valid = true;
        } else {
            Mat2 acc = Mat2::identity();
            bool ok = true;
            std::complex<double> z{0, 1};
            for (int n = 1; n <= n_max && ok; ++n) {
                acc = acc.mulScaled(m.atom(drawIndex(cdf, rng)).mat);
                if (n == n_max) {
                    try {
                        z = acc.apply({0, 1});
                    } catch (const PrecisionLoss&) {
                        ok = false;
                    }
                }
            }
            if (ok && std::fabs(z.real()) < 1e12) {
                s.point = BoundaryPoint::real(z.real());
                s.resolution = -std::log(z.imag());
                s.valid = true;
            } else if (ok) {
                s.point = BoundaryPoint::infinity();
                s.resolution = 0;
                s.valid = true;
            } else {
                s.valid = false;
            }
        }
        all[idx] = std::move(s);
    });

    for (auto& s : all) {
        if (s.valid)
            batch.samples.push_back(std::move(s));
        else
            ++batch.invalid_count;
    }
    double invalid_frac =
        static_cast<double>(batch.invalid_count) / static_cast<double>(batch.requested);
    if (invalid_frac > 0.01)
        throw EstimatorFailure(
            "boundary sampling: " + std::to_string(batch.invalid_count) + "/" +
            std::to_string(batch.requested) +
            " trajectories invalid (precision aborts); depth " + std::to_string(n_max) +
            " is too deep for this configuration");

    std::vector<double> res;
    res.reserve(batch.samples.size());
    for (const auto& s : batch.samples) res.push_back(s.resolution);
    std::sort(res.begin(), res.end());
    batch.median_resolution = res.empty() ? 0 : res[res.size() / 2];
    if (batch.median_resolution < cfg.resolution_floor)
        throw EstimatorFailure("boundary sampling: median resolution " +
                               std::to_string(batch.median_resolution) +
                               " below configured floor " +
                               std::to_string(cfg.resolution_floor) +
                               "; increase the truncation depth");
    return batch;
}

}  // namespace hypwalk
