// Plain serial implementations of the parallel kernels. These stay
// deliberately simple and loop-ordered; tests require the OpenMP engine
// to match them bit for bit at every thread count, and the benchmark
// target compares their throughput.
#pragma once

#include "nnfield/aggregate.hpp"
#include "nnfield/matcher.hpp"

namespace nnf::reference {

Nnf init_nnf(const FeatureMap& k_map, const FeatureMap& q_map,
             const PositionMap* seed_map, const MatchConfig& cfg);

Nnf lr_propagate(const Nnf& state, const FeatureMap& k_map,
                 const FeatureMap& q_map, int t, std::uint64_t* evals = nullptr);

Nnf ref_propagate(const Nnf& state, const FeatureMap& k_map,
                  const FeatureMap& q_map, int t, std::uint64_t* evals = nullptr);

Nnf brute_force_nnf(const FeatureMap& k_map, const FeatureMap& q_map,
                    std::uint64_t* evals = nullptr);

FeatureMap standard_aggregate(const FeatureMap& v, const PositionMap& h,
                              const AggregationConfig& cfg);

FeatureMap dynamic_aggregate(const FeatureMap& v, const PositionMap& h,
                             const OffsetField& offsets,
                             const AggregationConfig& cfg);

} // namespace nnf::reference
