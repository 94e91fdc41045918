#include "nnfield/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nnf::reference {

Nnf init_nnf(const FeatureMap& k_map, const FeatureMap& q_map,
             const PositionMap* seed_map, const MatchConfig& cfg) {
    const FeatureMap k_norm = normalize_features(k_map, cfg.epsilon_norm);
    const FeatureMap q_norm = normalize_features(q_map, cfg.epsilon_norm);
    Nnf out{PositionMap(k_map.height, k_map.width),
            RelevanceMap(k_map.height, k_map.width)};
    for (int y = 0; y < k_map.height; ++y) {
        for (int x = 0; x < k_map.width; ++x) {
            const std::uint64_t idx =
                static_cast<std::uint64_t>(y) * k_map.width + x;
            const Coord m = seed_map ? seed_map->at(y, x)
                                     : detail::random_coord(cfg.rng_seed, idx,
                                                            q_map.height,
                                                            q_map.width);
            out.pos.at(y, x) = m;
            out.rel.at(y, x) = dot_normalized(k_norm.at(y, x),
                                              q_norm.at(m.row, m.col),
                                              k_map.channels);
        }
    }
    return out;
}

Nnf lr_propagate(const Nnf& state, const FeatureMap& k_map,
                 const FeatureMap& q_map, int t, std::uint64_t* evals) {
    const FeatureMap k_norm = normalize_features(k_map);
    const FeatureMap q_norm = normalize_features(q_map);
    const int H = k_map.height, W = k_map.width, C = k_map.channels;
    const int d = 1 << t;
    Nnf out{PositionMap(H, W), RelevanceMap(H, W)};
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double best = state.rel.at(y, x);
            Coord best_match = state.pos.at(y, x);
            if (evals) *evals += kCandidatesPerStep;
            for (const auto& off : detail::kNeighborOffsets) {
                const int uy = y + off[0] * d;
                const int ux = x + off[1] * d;
                if (uy < 0 || uy >= H || ux < 0 || ux >= W) continue;
                const Coord cand = state.pos.at(uy, ux);
                const double r = dot_normalized(k_norm.at(y, x),
                                                q_norm.at(cand.row, cand.col), C);
                if (r > best) {
                    best = r;
                    best_match = cand;
                }
            }
            out.rel.at(y, x) = best;
            out.pos.at(y, x) = best_match;
        }
    }
    return out;
}

Nnf ref_propagate(const Nnf& state, const FeatureMap& k_map,
                  const FeatureMap& q_map, int t, std::uint64_t* evals) {
    const FeatureMap k_norm = normalize_features(k_map);
    const FeatureMap q_norm = normalize_features(q_map);
    const int H = k_map.height, W = k_map.width, C = k_map.channels;
    const int QH = q_map.height, QW = q_map.width;
    const int d = 1 << t;
    Nnf out{PositionMap(H, W), RelevanceMap(H, W)};
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const Coord center = state.pos.at(y, x);
            double best = state.rel.at(y, x);
            Coord best_match = center;
            if (evals) *evals += kCandidatesPerStep;
            for (const auto& off : detail::kNeighborOffsets) {
                Coord cand;
                cand.row = std::clamp(center.row + off[0] * d, 0, QH - 1);
                cand.col = std::clamp(center.col + off[1] * d, 0, QW - 1);
                const double r = dot_normalized(k_norm.at(y, x),
                                                q_norm.at(cand.row, cand.col), C);
                if (r > best) {
                    best = r;
                    best_match = cand;
                }
            }
            out.rel.at(y, x) = best;
            out.pos.at(y, x) = best_match;
        }
    }
    return out;
}

Nnf brute_force_nnf(const FeatureMap& k_map, const FeatureMap& q_map,
                    std::uint64_t* evals) {
    const FeatureMap k_norm = normalize_features(k_map);
    const FeatureMap q_norm = normalize_features(q_map);
    const int C = k_map.channels;
    Nnf out{PositionMap(k_map.height, k_map.width),
            RelevanceMap(k_map.height, k_map.width)};
    for (int y = 0; y < k_map.height; ++y) {
        for (int x = 0; x < k_map.width; ++x) {
            double best = -2.0;
            Coord best_match{0, 0};
            for (int qy = 0; qy < q_map.height; ++qy) {
                for (int qx = 0; qx < q_map.width; ++qx) {
                    const double r =
                        dot_normalized(k_norm.at(y, x), q_norm.at(qy, qx), C);
                    if (r > best) {
                        best = r;
                        best_match = Coord{qy, qx};
                    }
                    if (evals) ++*evals;
                }
            }
            out.rel.at(y, x) = best;
            out.pos.at(y, x) = best_match;
        }
    }
    return out;
}

FeatureMap standard_aggregate(const FeatureMap& v, const PositionMap& h,
                              const AggregationConfig& cfg) {
    FeatureMap out(v.channels, h.height, h.width);
    const bool per_channel =
        cfg.kernel_weights.size() == static_cast<std::size_t>(kTapCount) * v.channels;
    if (!per_channel && cfg.kernel_weights.size() != static_cast<std::size_t>(kTapCount)) {
        throw std::invalid_argument("kernel_weights must hold 9 taps or channels*9 taps");
    }
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x) {
            const Coord center = h.at(y, x);
            for (int c = 0; c < v.channels; ++c) {
                const double* wt = cfg.kernel_weights.data() +
                                   (per_channel ? static_cast<std::size_t>(c) * kTapCount : 0);
                double acc = 0.0;
                for (int tap = 0; tap < kTapCount; ++tap) {
                    const int sy =
                        std::clamp(center.row + kTapOffsets[tap][0], 0, v.height - 1);
                    const int sx =
                        std::clamp(center.col + kTapOffsets[tap][1], 0, v.width - 1);
                    acc += wt[tap] * v.at(sy, sx)[c];
                }
                out.at(y, x)[c] = acc;
            }
        }
    }
    return out;
}

FeatureMap dynamic_aggregate(const FeatureMap& v, const PositionMap& h,
                             const OffsetField& offsets,
                             const AggregationConfig& cfg) {
    FeatureMap out(v.channels, h.height, h.width);
    const bool per_channel =
        cfg.kernel_weights.size() == static_cast<std::size_t>(kTapCount) * v.channels;
    if (!per_channel && cfg.kernel_weights.size() != static_cast<std::size_t>(kTapCount)) {
        throw std::invalid_argument("kernel_weights must hold 9 taps or channels*9 taps");
    }
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x) {
            const Coord center = h.at(y, x);
            const double* dp = offsets.at(y, x);
            for (int c = 0; c < v.channels; ++c) {
                const double* wt = cfg.kernel_weights.data() +
                                   (per_channel ? static_cast<std::size_t>(c) * kTapCount : 0);
                double acc = 0.0;
                for (int tap = 0; tap < kTapCount; ++tap) {
                    const double sy = center.row + kTapOffsets[tap][0] + dp[tap * 2 + 0];
                    const double sx = center.col + kTapOffsets[tap][1] + dp[tap * 2 + 1];
                    const double fy = std::floor(sy);
                    const double fx = std::floor(sx);
                    const double ay = sy - fy;
                    const double ax = sx - fx;
                    const int y0 = std::clamp(static_cast<int>(fy), 0, v.height - 1);
                    const int y1 = std::clamp(static_cast<int>(fy) + 1, 0, v.height - 1);
                    const int x0 = std::clamp(static_cast<int>(fx), 0, v.width - 1);
                    const int x1 = std::clamp(static_cast<int>(fx) + 1, 0, v.width - 1);
                    const double top =
                        (1.0 - ax) * v.at(y0, x0)[c] + ax * v.at(y0, x1)[c];
                    const double bot =
                        (1.0 - ax) * v.at(y1, x0)[c] + ax * v.at(y1, x1)[c];
                    acc += wt[tap] * ((1.0 - ay) * top + ay * bot);
                }
                out.at(y, x)[c] = acc;
            }
        }
    }
    return out;
}

} // namespace nnf::reference
