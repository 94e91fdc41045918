// Coarse-to-fine orchestration of the matcher across power-of-two scales.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nnfield/matcher.hpp"

namespace nnf {

struct PyramidConfig {
    std::vector<double> scales = {0.125, 0.25, 0.5, 1.0}; // strictly increasing, last = 1
    std::vector<int> iters_per_level = {1, 1, 2, 6};      // same length, all >= 1
    std::uint64_t rng_seed = 0;
};

/// Repeated 2x average pooling; dims floor-divide by 2 per halving.
/// factor must be a reciprocal power of two (1, 1/2, 1/4, ...).
FeatureMap downscale_features(const FeatureMap& fm, double factor);

/// Lifts a coarse map to roughly doubled dims: nearest replication with
/// every coordinate doubled, then clamped into [0, q_h) x [0, q_w).
PositionMap upscale_seed(const PositionMap& h, int out_h, int out_w,
                         int q_h, int q_w);

/// Dimensions and iteration budget of one pyramid level.
struct LevelSpec {
    double scale = 1.0;
    int k_height = 0, k_width = 0;
    int q_height = 0, q_width = 0;
    int iterations = 0; // M at this level
    int sweep_length = 0; // L at this level
};

/// Validates cfg against the input maps and lays out the levels
/// coarsest-first, exactly as run_cfe will execute them.
std::vector<LevelSpec> plan_levels(const FeatureMap& k_map,
                                   const FeatureMap& q_map,
                                   const PyramidConfig& cfg);

struct CfeResult {
    Nnf nnf;
    std::vector<std::uint64_t> evals_per_level; // coarsest-first
    std::uint64_t total_evals() const;
};

/// Called after each (lr, ref) iteration with the level index
/// (coarsest-first), the state at that level's resolution, and cumulative
/// evaluations across all levels so far.
using CfeIterationHook = std::function<void(int, const Nnf&, std::uint64_t)>;

/// Runs the matcher on each level coarsest-first: random init at the
/// coarsest, each finer level seeded by upscale_seed of the previous
/// result with relevances re-evaluated on entry.
CfeResult run_cfe(const FeatureMap& k_map, const FeatureMap& q_map,
                  const PyramidConfig& cfg, const MatchConfig& match_cfg,
                  const CfeIterationHook& hook = nullptr);

} // namespace nnf
