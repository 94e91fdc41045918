// Enumerated ground-truth matching, field quality metrics, and the exact
// operation-count model the instrumented counters are checked against.
#pragma once

#include <cstdint>
#include <vector>

#include "nnfield/matcher.hpp"
#include "nnfield/pyramid.hpp"

namespace nnf {

/// Evaluation accounting for one matcher run. The unit is candidate
/// evaluations charged by propagation steps (9 per position per step);
/// initialization and level-entry re-scoring are not charged, matching
/// the closed forms in cost_model_*.
struct CostLedger {
    std::uint64_t relevance_evals = 0;
    std::vector<std::uint64_t> per_level_breakdown;
    double wall_time_s = 0.0;
};

/// All-pairs argmax matching. Ties resolve to the smallest row-major
/// linear index in q_map. Charges q-position-count evaluations per k
/// position.
Nnf brute_force_nnf(const FeatureMap& k_map, const FeatureMap& q_map,
                    std::uint64_t* evals = nullptr);

/// Mean over positions of (s_star - s)^2, computed on relevance values.
double nnf_mse(const RelevanceMap& s, const RelevanceMap& s_star);

struct TracePoint {
    std::uint64_t evals = 0;
    double mse = 0.0;
};

/// Snapshot schedule for convergence_trace: one matcher configuration,
/// sampled after every (lr, ref) iteration.
struct TraceSchedule {
    bool coarse_to_fine = true; // false: single full-resolution run
    PyramidConfig pyramid;      // used when coarse_to_fine
    MatchConfig match;
};

/// Runs the scheduled matcher and, after every iteration, measures MSE
/// against the cached full-resolution enumerated oracle. Coarse-level
/// states are lifted to full resolution and re-scored there before
/// comparison, so both schedule kinds report in the same units.
/// Measurement work is not charged to the evaluation count.
std::vector<TracePoint> convergence_trace(const FeatureMap& k_map,
                                          const FeatureMap& q_map,
                                          const TraceSchedule& schedule);

/// Closed-form predicted evaluation counts. These must match the
/// instrumented counters exactly.
std::uint64_t cost_model_enumerated(int k_h, int k_w, int q_h, int q_w);
std::uint64_t cost_model_single(int h, int w, const MatchConfig& cfg);
std::uint64_t cost_model_cfe(int k_h, int k_w, int q_h, int q_w,
                             const PyramidConfig& cfg);

} // namespace nnf
