#include "nnfield/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nnf {

namespace {

// Number of halvings encoded by a reciprocal-power-of-two factor, or -1.
int halvings_for_factor(double factor) {
    for (int m = 0; m <= 16; ++m) {
        if (factor == std::ldexp(1.0, -m)) return m;
    }
    return -1;
}

FeatureMap halve(const FeatureMap& fm) {
    const int oh = fm.height / 2;
    const int ow = fm.width / 2;
    if (oh < 1 || ow < 1) {
        throw std::invalid_argument("downscale_features: dimension underflow");
    }
    FeatureMap out(fm.channels, oh, ow);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double* d = out.at(y, x);
            const double* s00 = fm.at(2 * y, 2 * x);
            const double* s01 = fm.at(2 * y, 2 * x + 1);
            const double* s10 = fm.at(2 * y + 1, 2 * x);
            const double* s11 = fm.at(2 * y + 1, 2 * x + 1);
            for (int c = 0; c < fm.channels; ++c) {
                d[c] = 0.25 * (s00[c] + s01[c] + s10[c] + s11[c]);
            }
        }
    }
    return out;
}

} // namespace

FeatureMap downscale_features(const FeatureMap& fm, double factor) {
    const int m = halvings_for_factor(factor);
    if (m < 0) {
        throw std::invalid_argument(
            "downscale_features: factor must be a reciprocal power of two");
    }
    FeatureMap cur = fm;
    for (int i = 0; i < m; ++i) {
        cur = halve(cur);
    }
    return cur;
}

PositionMap upscale_seed(const PositionMap& h, int out_h, int out_w,
                         int q_h, int q_w) {
    if (out_h < 1 || out_w < 1 || q_h < 1 || q_w < 1) {
        throw std::invalid_argument("upscale_seed: bad target dims");
    }
    PositionMap out(out_h, out_w);
    for (int y = 0; y < out_h; ++y) {
        const int sy = std::min(y / 2, h.height - 1);
        for (int x = 0; x < out_w; ++x) {
            const int sx = std::min(x / 2, h.width - 1);
            const Coord c = h.at(sy, sx);
            Coord lifted;
            lifted.row = std::clamp(c.row * 2, 0, q_h - 1);
            lifted.col = std::clamp(c.col * 2, 0, q_w - 1);
            out.at(y, x) = lifted;
        }
    }
    return out;
}

std::vector<LevelSpec> plan_levels(const FeatureMap& k_map,
                                   const FeatureMap& q_map,
                                   const PyramidConfig& cfg) {
    if (cfg.scales.empty() || cfg.scales.size() != cfg.iters_per_level.size()) {
        throw std::invalid_argument(
            "plan_levels: scales and iters_per_level must be same nonempty length");
    }
    if (cfg.scales.back() != 1.0) {
        throw std::invalid_argument("plan_levels: last scale must be 1");
    }
    for (std::size_t i = 0; i + 1 < cfg.scales.size(); ++i) {
        if (!(cfg.scales[i] < cfg.scales[i + 1])) {
            throw std::invalid_argument("plan_levels: scales must be strictly increasing");
        }
    }
    std::vector<LevelSpec> specs;
    specs.reserve(cfg.scales.size());
    for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
        const int m = halvings_for_factor(cfg.scales[i]);
        if (m < 0) {
            throw std::invalid_argument(
                "plan_levels: scale " + std::to_string(cfg.scales[i]) +
                " is not a reciprocal power of two");
        }
        if (cfg.iters_per_level[i] < 1) {
            throw std::invalid_argument("plan_levels: iterations must be >= 1");
        }
        LevelSpec s;
        s.scale = cfg.scales[i];
        s.k_height = k_map.height >> m;
        s.k_width = k_map.width >> m;
        s.q_height = q_map.height >> m;
        s.q_width = q_map.width >> m;
        s.iterations = cfg.iters_per_level[i];
        if (s.k_height < 1 || s.k_width < 1 || s.q_height < 1 || s.q_width < 1) {
            throw std::invalid_argument(
                "plan_levels: scale " + std::to_string(cfg.scales[i]) +
                " collapses a map to zero size");
        }
        s.sweep_length = dilation_sweep_length(s.k_height, s.k_width);
        specs.push_back(s);
    }
    return specs;
}

std::uint64_t CfeResult::total_evals() const {
    return std::accumulate(evals_per_level.begin(), evals_per_level.end(),
                           std::uint64_t{0});
}

CfeResult run_cfe(const FeatureMap& k_map, const FeatureMap& q_map,
                  const PyramidConfig& cfg, const MatchConfig& match_cfg,
                  const CfeIterationHook& hook) {
    const std::vector<LevelSpec> levels = plan_levels(k_map, q_map, cfg);
    const int n_levels = static_cast<int>(levels.size());

    // Halving cascade shared by all levels.
    std::vector<FeatureMap> k_levels(n_levels), q_levels(n_levels);
    k_levels[n_levels - 1] = k_map;
    q_levels[n_levels - 1] = q_map;
    for (int i = n_levels - 2; i >= 0; --i) {
        const double ratio = levels[i].scale / levels[i + 1].scale;
        k_levels[i] = downscale_features(k_levels[i + 1], ratio);
        q_levels[i] = downscale_features(q_levels[i + 1], ratio);
    }

    CfeResult result;
    result.evals_per_level.assign(n_levels, 0);

    PositionMap seed;
    std::uint64_t cum = 0;
    for (int i = 0; i < n_levels; ++i) {
        MatchConfig mc = match_cfg;
        mc.rng_seed = cfg.rng_seed;
        mc.m_multiplier = levels[i].iterations;

        std::uint64_t level_evals = 0;
        IterationHook level_hook;
        if (hook) {
            const std::uint64_t base = cum;
            level_hook = [&, i, base](const Nnf& state, std::uint64_t so_far) {
                hook(i, state, base + so_far);
            };
        }
        const PositionMap* seed_ptr = (i == 0) ? nullptr : &seed;
        Nnf nnf = run_embedded_patchmatch(k_levels[i], q_levels[i], mc, seed_ptr,
                                          &level_evals, level_hook);
        result.evals_per_level[i] = level_evals;
        cum += level_evals;

        if (i + 1 < n_levels) {
            // One doubling per octave between consecutive levels.
            const int gap = static_cast<int>(
                std::llround(std::log2(levels[i + 1].scale / levels[i].scale)));
            seed = nnf.pos;
            for (int g = gap - 1; g >= 0; --g) {
                seed = upscale_seed(seed, levels[i + 1].k_height >> g,
                                    levels[i + 1].k_width >> g,
                                    levels[i + 1].q_height >> g,
                                    levels[i + 1].q_width >> g);
            }
        } else {
            result.nnf = std::move(nnf);
        }
    }
    return result;
}

} // namespace nnf
