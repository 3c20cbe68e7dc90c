#pragma once

#include <cstdint>
#include <vector>

#include "hypwalk/measure.hpp"
#include "hypwalk/space.hpp"

namespace hypwalk {

struct WalkConfig {
    int steps = 1000;          // trajectory length; 0 asks sampleBoundary for auto depth
    int trajectories = 1000;
    uint64_t seed = 1;
    int stride = 1;            // record positions/distances every this many steps
    double resolution_floor = 8.0;  // tree: confluence depth; half-plane: -log Im
    int max_steps = 5000;
    int boundary_depth_cap = 64;
    int threads = 1;

    void validate() const;
};

struct Trajectory {
    int index = 0;
    uint64_t traj_seed = 0;
    bool valid = true;
    int steps_completed = 0;
    std::vector<int> steps_at;        // recorded n values (stride multiples + final)
    std::vector<double> distance;     // |x_n| at recorded n
    std::vector<SpacePoint> position; // x_n . o at recorded n
};

struct BoundarySample {
    BoundaryPoint point;
    int truncation = 0;       // n_max used
    double resolution = 0;    // tree: confluence depth with the midpoint;
                              // half-plane: -log Im of the final point
    bool valid = true;
};

struct BoundaryBatch {
    std::vector<BoundarySample> samples;  // valid samples only, in index order
    int requested = 0;
    int invalid_count = 0;
    int n_max = 0;
    double median_resolution = 0;
};

// Deterministic function of (cfg.seed, index); increments drawn by
// inverse CDF over the canonical support order.
Trajectory sampleTrajectory(const FiniteMeasure& m, const SpaceModel& model,
                            const WalkConfig& cfg, int index);

// Truncated harmonic-measure samples with per-sample resolution metadata.
// Fails hard when more than 1% of trajectories are invalid or the median
// resolution misses the configured floor.
BoundaryBatch sampleBoundary(const FiniteMeasure& m, const SpaceModel& model,
                             const WalkConfig& cfg);

// Cheap drift estimate used to choose the automatic truncation depth.
double pilotEscapeRate(const FiniteMeasure& m, const SpaceModel& model, uint64_t seed);

// max(200, ceil(40 / pilot drift)), clamped to cfg.max_steps.
int autoTruncationDepth(const FiniteMeasure& m, const SpaceModel& model, const WalkConfig& cfg);

}  // namespace hypwalk
