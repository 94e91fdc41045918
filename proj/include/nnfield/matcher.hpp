// Randomized nearest-neighbor-field matcher: random initialization, then
// alternating source-side and target-side propagation with jump-flood
// dilations 2^t. Every kernel is a synchronous double-buffered map over
// positions, so outputs are identical for any thread count.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nnfield/feature.hpp"

namespace nnf {

struct Coord {
    std::int32_t row = 0;
    std::int32_t col = 0;

    friend bool operator==(const Coord&, const Coord&) = default;
};

/// Per-position coordinates into a target feature map.
struct PositionMap {
    int height = 0;
    int width = 0;
    std::vector<Coord> coords;

    PositionMap() = default;
    PositionMap(int height_, int width_);

    Coord& at(int y, int x) { return coords[static_cast<std::size_t>(y) * width + x]; }
    Coord at(int y, int x) const { return coords[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-position normalized-inner-product scores, always in [-1, 1].
struct RelevanceMap {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    RelevanceMap() = default;
    RelevanceMap(int height_, int width_, double fill = 0.0);

    double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct Nnf {
    PositionMap pos;
    RelevanceMap rel;
};

struct MatchConfig {
    int m_multiplier = 6;         // outer rounds over the dilation sweep
    std::uint64_t rng_seed = 0;
    double epsilon_norm = kNormEpsilon;
};

/// Score between the patch at j in k_map and the patch at j_prime in
/// q_map: inner product of the L2-normalized feature vectors. Either
/// vector with norm below eps yields exactly 0.
double relevance(const FeatureMap& k_map, const FeatureMap& q_map, Coord j,
                 Coord j_prime, double eps = kNormEpsilon);

/// Length L of the dilation sweep: max(1, floor(log2(max(h, w) / 8))).
int dilation_sweep_length(int h, int w);

/// Candidate inspections charged per position by one propagation step
/// (the position itself plus its eight dilated neighbors).
constexpr std::uint64_t kCandidatesPerStep = 9;

/// Random (counter-based, thread-schedule independent) or seeded matches,
/// with their scores evaluated on the given maps.
Nnf init_nnf(const FeatureMap& k_map, const FeatureMap& q_map,
             const PositionMap* seed_map, const MatchConfig& cfg);

/// One source-side propagation step at dilation 2^t: every position adopts
/// the best match among its own and those of its eight dilated neighbors
/// (out-of-bounds neighbors are skipped; ties keep the incumbent). Reads
/// only pre-step state. evals, when given, is charged 9 per position.
Nnf lr_propagate(const Nnf& state, const FeatureMap& k_map,
                 const FeatureMap& q_map, int t, std::uint64_t* evals = nullptr);

/// One target-side propagation step at dilation 2^t: candidates are the
/// current match and its eight dilated neighbors in q_map, clamped into
/// bounds. Same accounting and tie rule as lr_propagate.
Nnf ref_propagate(const Nnf& state, const FeatureMap& k_map,
                  const FeatureMap& q_map, int t, std::uint64_t* evals = nullptr);

/// Callback invoked after each (lr, ref) iteration with the current state
/// and the number of candidate evaluations charged so far.
using IterationHook = std::function<void(const Nnf&, std::uint64_t)>;

/// Full matcher: init (random or seeded), then m_multiplier rounds of the
/// dilation sweep t = 0..L-1, each iteration one lr_propagate followed by
/// one ref_propagate. Charges exactly 18 * H * W * M * L evaluations.
Nnf run_embedded_patchmatch(const FeatureMap& k_map, const FeatureMap& q_map,
                            const MatchConfig& cfg,
                            const PositionMap* seed_map = nullptr,
                            std::uint64_t* evals = nullptr,
                            const IterationHook& hook = nullptr);

/// Binary dump, magic "NNF1": u32 height, width, then per position
/// u32 row, u32 col, f32 relevance, row-major (little endian).
void save_nnf(const Nnf& nnf, const std::string& path);
Nnf load_nnf(const std::string& path);

namespace detail {

// Steps on pre-normalized maps; run_embedded_patchmatch normalizes once
// and iterates on these.
Nnf lr_propagate_normalized(const Nnf& state, const FeatureMap& k_norm,
                            const FeatureMap& q_norm, int t, std::uint64_t* evals);
Nnf ref_propagate_normalized(const Nnf& state, const FeatureMap& k_norm,
                             const FeatureMap& q_norm, int t, std::uint64_t* evals);

// Uniform coordinate for position index idx under the given seed.
Coord random_coord(std::uint64_t seed, std::uint64_t idx, int q_h, int q_w);

// Neighbor offsets in fixed row-major scan order.
inline constexpr int kNeighborOffsets[8][2] = {
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};

} // namespace detail

} // namespace nnf
