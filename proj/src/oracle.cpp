#include "nnfield/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nnf {

Nnf brute_force_nnf(const FeatureMap& k_map, const FeatureMap& q_map,
                    std::uint64_t* evals) {
    if (k_map.empty() || q_map.empty()) {
        throw std::invalid_argument("brute_force_nnf: empty feature map");
    }
    if (k_map.channels != q_map.channels) {
        throw std::invalid_argument("brute_force_nnf: channel count mismatch");
    }
    const FeatureMap k_norm = normalize_features(k_map);
    const FeatureMap q_norm = normalize_features(q_map);
    const int H = k_map.height, W = k_map.width;
    const int QH = q_map.height, QW = q_map.width;
    const int C = k_map.channels;

    Nnf out{PositionMap(H, W), RelevanceMap(H, W)};
    std::uint64_t count = 0;

#pragma omp parallel for schedule(static) reduction(+ : count)
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double* kv = k_norm.at(y, x);
            double best = -2.0;
            Coord best_match{0, 0};
            for (int qy = 0; qy < QH; ++qy) {
                for (int qx = 0; qx < QW; ++qx) {
                    const double r = dot_normalized(kv, q_norm.at(qy, qx), C);
                    if (r > best) {
                        best = r;
                        best_match = Coord{qy, qx};
                    }
                }
            }
            count += static_cast<std::uint64_t>(QH) * QW;
            out.rel.at(y, x) = best;
            out.pos.at(y, x) = best_match;
        }
    }
    if (evals) *evals += count;
    return out;
}

double nnf_mse(const RelevanceMap& s, const RelevanceMap& s_star) {
    if (s.height != s_star.height || s.width != s_star.width) {
        throw std::invalid_argument("nnf_mse: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        const double d = s_star.values[i] - s.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(s.values.size());
}

namespace {

// Lifts a level-resolution position map to full resolution following the
// remaining level plan, then re-scores every match on the full-size maps.
RelevanceMap rescore_at_full(const PositionMap& pos, int level,
                             const std::vector<LevelSpec>& levels,
                             const FeatureMap& k_norm,
                             const FeatureMap& q_norm) {
    PositionMap lifted = pos;
    for (std::size_t i = level; i + 1 < levels.size(); ++i) {
        const int gap = static_cast<int>(
            std::llround(std::log2(levels[i + 1].scale / levels[i].scale)));
        for (int g = gap - 1; g >= 0; --g) {
            lifted = upscale_seed(lifted, levels[i + 1].k_height >> g,
                                  levels[i + 1].k_width >> g,
                                  levels[i + 1].q_height >> g,
                                  levels[i + 1].q_width >> g);
        }
    }
    RelevanceMap rel(k_norm.height, k_norm.width);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < k_norm.height; ++y) {
        for (int x = 0; x < k_norm.width; ++x) {
            const Coord c = lifted.at(y, x);
            rel.at(y, x) = dot_normalized(k_norm.at(y, x), q_norm.at(c.row, c.col),
                                          k_norm.channels);
        }
    }
    return rel;
}

} // namespace

std::vector<TracePoint> convergence_trace(const FeatureMap& k_map,
                                          const FeatureMap& q_map,
                                          const TraceSchedule& schedule) {
    const Nnf star = brute_force_nnf(k_map, q_map);
    const FeatureMap k_norm = normalize_features(k_map);
    const FeatureMap q_norm = normalize_features(q_map);

    std::vector<TracePoint> trace;
    if (schedule.coarse_to_fine) {
        const auto levels = plan_levels(k_map, q_map, schedule.pyramid);
        const int finest = static_cast<int>(levels.size()) - 1;
        run_cfe(k_map, q_map, schedule.pyramid, schedule.match,
                [&](int level, const Nnf& state, std::uint64_t cum) {
                    const RelevanceMap rel =
                        (level == finest)
                            ? state.rel
                            : rescore_at_full(state.pos, level, levels, k_norm, q_norm);
                    trace.push_back({cum, nnf_mse(rel, star.rel)});
                });
    } else {
        run_embedded_patchmatch(k_map, q_map, schedule.match, nullptr, nullptr,
                                [&](const Nnf& state, std::uint64_t cum) {
                                    trace.push_back({cum, nnf_mse(state.rel, star.rel)});
                                });
    }
    return trace;
}

std::uint64_t cost_model_enumerated(int k_h, int k_w, int q_h, int q_w) {
    return static_cast<std::uint64_t>(k_h) * k_w * q_h * q_w;
}

std::uint64_t cost_model_single(int h, int w, const MatchConfig& cfg) {
    const std::uint64_t n = static_cast<std::uint64_t>(h) * w;
    const std::uint64_t l = static_cast<std::uint64_t>(dilation_sweep_length(h, w));
    return 2 * kCandidatesPerStep * n * static_cast<std::uint64_t>(cfg.m_multiplier) * l;
}

std::uint64_t cost_model_cfe(int k_h, int k_w, int q_h, int q_w,
                             const PyramidConfig& cfg) {
    FeatureMap k_shape(1, k_h, k_w);
    FeatureMap q_shape(1, q_h, q_w);
    const auto levels = plan_levels(k_shape, q_shape, cfg);
    std::uint64_t total = 0;
    for (const LevelSpec& s : levels) {
        const std::uint64_t n = static_cast<std::uint64_t>(s.k_height) * s.k_width;
        total += 2 * kCandidatesPerStep * n *
                 static_cast<std::uint64_t>(s.iterations) *
                 static_cast<std::uint64_t>(s.sweep_length);
    }
    return total;
}

} // namespace nnf
