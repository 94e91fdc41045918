#include "nnfield/matcher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nnf {

PositionMap::PositionMap(int height_, int width_)
    : height(height_), width(width_),
      coords(static_cast<std::size_t>(height_) * width_) {
    if (height_ < 1 || width_ < 1) {
        throw std::invalid_argument("PositionMap: dimensions must be positive");
    }
}

RelevanceMap::RelevanceMap(int height_, int width_, double fill)
    : height(height_), width(width_),
      values(static_cast<std::size_t>(height_) * width_, fill) {
    if (height_ < 1 || width_ < 1) {
        throw std::invalid_argument("RelevanceMap: dimensions must be positive");
    }
}

double relevance(const FeatureMap& k_map, const FeatureMap& q_map, Coord j,
                 Coord j_prime, double eps) {
    if (k_map.channels != q_map.channels) {
        throw std::invalid_argument("relevance: channel count mismatch");
    }
    if (j.row < 0 || j.row >= k_map.height || j.col < 0 || j.col >= k_map.width ||
        j_prime.row < 0 || j_prime.row >= q_map.height || j_prime.col < 0 ||
        j_prime.col >= q_map.width) {
        throw std::invalid_argument("relevance: position out of bounds");
    }
    const int C = k_map.channels;
    std::vector<double> a(C), b(C);
    normalize_vector(k_map.at(j.row, j.col), a.data(), C, eps);
    normalize_vector(q_map.at(j_prime.row, j_prime.col), b.data(), C, eps);
    return dot_normalized(a.data(), b.data(), C);
}

int dilation_sweep_length(int h, int w) {
    const unsigned int m = static_cast<unsigned int>(std::max(h, w));
    // floor(log2(m / 8)) == floor(log2(m)) - 3 for m >= 1
    const int l = static_cast<int>(std::bit_width(m)) - 1 - 3;
    return std::max(1, l);
}

namespace detail {

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

Coord random_coord(std::uint64_t seed, std::uint64_t idx, int q_h, int q_w) {
    const std::uint64_t h = splitmix64(seed ^ splitmix64(idx + 1));
    Coord c;
    c.row = static_cast<std::int32_t>((h >> 32) % static_cast<std::uint64_t>(q_h));
    c.col = static_cast<std::int32_t>((h & 0xffffffffull) % static_cast<std::uint64_t>(q_w));
    return c;
}

Nnf lr_propagate_normalized(const Nnf& state, const FeatureMap& k_norm,
                            const FeatureMap& q_norm, int t,
                            std::uint64_t* evals) {
    const int H = k_norm.height;
    const int W = k_norm.width;
    const int C = k_norm.channels;
    const int d = 1 << t;
    Nnf out{PositionMap(H, W), RelevanceMap(H, W)};
    std::uint64_t count = 0;

#pragma omp parallel for schedule(static) reduction(+ : count)
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            // Candidate u = self: score already on file from the last step.
            double best = state.rel.at(y, x);
            Coord best_match = state.pos.at(y, x);
            count += kCandidatesPerStep;
            const double* kv = k_norm.at(y, x);
            for (const auto& off : kNeighborOffsets) {
                const int uy = y + off[0] * d;
                const int ux = x + off[1] * d;
                if (uy < 0 || uy >= H || ux < 0 || ux >= W) continue;
                const Coord cand = state.pos.at(uy, ux);
                const double r = dot_normalized(kv, q_norm.at(cand.row, cand.col), C);
                if (r > best) {
                    best = r;
                    best_match = cand;
                }
            }
            out.rel.at(y, x) = best;
            out.pos.at(y, x) = best_match;
        }
    }
    if (evals) *evals += count;
    return out;
}

Nnf ref_propagate_normalized(const Nnf& state, const FeatureMap& k_norm,
                             const FeatureMap& q_norm, int t,
                             std::uint64_t* evals) {
    const int H = k_norm.height;
    const int W = k_norm.width;
    const int C = k_norm.channels;
    const int QH = q_norm.height;
    const int QW = q_norm.width;
    const int d = 1 << t;
    Nnf out{PositionMap(H, W), RelevanceMap(H, W)};
    std::uint64_t count = 0;

#pragma omp parallel for schedule(static) reduction(+ : count)
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const Coord center = state.pos.at(y, x);
            double best = state.rel.at(y, x);
            Coord best_match = center;
            count += kCandidatesPerStep;
            const double* kv = k_norm.at(y, x);
            for (const auto& off : kNeighborOffsets) {
                Coord cand;
                cand.row = std::clamp(center.row + off[0] * d, 0, QH - 1);
                cand.col = std::clamp(center.col + off[1] * d, 0, QW - 1);
                const double r = dot_normalized(kv, q_norm.at(cand.row, cand.col), C);
                if (r > best) {
                    best = r;
                    best_match = cand;
                }
            }
            out.rel.at(y, x) = best;
            out.pos.at(y, x) = best_match;
        }
    }
    if (evals) *evals += count;
    return out;
}

} // namespace detail

namespace {

void check_pair(const FeatureMap& k_map, const FeatureMap& q_map) {
    if (k_map.empty() || q_map.empty()) {
        throw std::invalid_argument("matcher: empty feature map");
    }
    if (k_map.channels != q_map.channels) {
        throw std::invalid_argument("matcher: channel count mismatch");
    }
}

void check_state(const Nnf& state, const FeatureMap& k_map) {
    if (state.pos.height != k_map.height || state.pos.width != k_map.width ||
        state.rel.height != k_map.height || state.rel.width != k_map.width) {
        throw std::invalid_argument("matcher: state dims do not match k_map");
    }
}

} // namespace

Nnf init_nnf(const FeatureMap& k_map, const FeatureMap& q_map,
             const PositionMap* seed_map, const MatchConfig& cfg) {
    check_pair(k_map, q_map);
    const int H = k_map.height;
    const int W = k_map.width;
    const int C = k_map.channels;
    if (seed_map && (seed_map->height != H || seed_map->width != W)) {
        throw std::invalid_argument("init_nnf: seed_map dims do not match k_map");
    }
    if (seed_map) {
        for (const Coord& m : seed_map->coords) {
            if (m.row < 0 || m.row >= q_map.height || m.col < 0 ||
                m.col >= q_map.width) {
                throw std::invalid_argument("init_nnf: seed coordinate out of bounds");
            }
        }
    }
    const FeatureMap k_norm = normalize_features(k_map, cfg.epsilon_norm);
    const FeatureMap q_norm = normalize_features(q_map, cfg.epsilon_norm);

    Nnf out{PositionMap(H, W), RelevanceMap(H, W)};

#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::uint64_t idx = static_cast<std::uint64_t>(y) * W + x;
            const Coord m = seed_map
                                ? seed_map->at(y, x)
                                : detail::random_coord(cfg.rng_seed, idx,
                                                       q_map.height, q_map.width);
            out.pos.at(y, x) = m;
            out.rel.at(y, x) =
                dot_normalized(k_norm.at(y, x), q_norm.at(m.row, m.col), C);
        }
    }
    return out;
}

Nnf lr_propagate(const Nnf& state, const FeatureMap& k_map,
                 const FeatureMap& q_map, int t, std::uint64_t* evals) {
    check_pair(k_map, q_map);
    check_state(state, k_map);
    return detail::lr_propagate_normalized(state, normalize_features(k_map),
                                           normalize_features(q_map), t, evals);
}

Nnf ref_propagate(const Nnf& state, const FeatureMap& k_map,
                  const FeatureMap& q_map, int t, std::uint64_t* evals) {
    check_pair(k_map, q_map);
    check_state(state, k_map);
    return detail::ref_propagate_normalized(state, normalize_features(k_map),
                                            normalize_features(q_map), t, evals);
}

Nnf run_embedded_patchmatch(const FeatureMap& k_map, const FeatureMap& q_map,
                            const MatchConfig& cfg, const PositionMap* seed_map,
                            std::uint64_t* evals, const IterationHook& hook) {
    check_pair(k_map, q_map);
    if (cfg.m_multiplier < 1) {
        throw std::invalid_argument("run_embedded_patchmatch: m_multiplier must be >= 1");
    }
    const FeatureMap k_norm = normalize_features(k_map, cfg.epsilon_norm);
    const FeatureMap q_norm = normalize_features(q_map, cfg.epsilon_norm);

    Nnf state = init_nnf(k_map, q_map, seed_map, cfg);
    const int L = dilation_sweep_length(k_map.height, k_map.width);
    std::uint64_t local = 0;
    for (int round = 0; round < cfg.m_multiplier; ++round) {
        for (int t = 0; t < L; ++t) {
            state = detail::lr_propagate_normalized(state, k_norm, q_norm, t, &local);
            state = detail::ref_propagate_normalized(state, k_norm, q_norm, t, &local);
            if (hook) hook(state, local);
        }
    }
    if (evals) *evals += local;
    return state;
}

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error(path + ": truncated data");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void save_nnf(const Nnf& nnf, const std::string& path) {
    if (nnf.pos.height != nnf.rel.height || nnf.pos.width != nnf.rel.width) {
        throw std::invalid_argument("save_nnf: position/relevance dims differ");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write("NNF1", 4);
    write_u32(os, static_cast<std::uint32_t>(nnf.pos.height));
    write_u32(os, static_cast<std::uint32_t>(nnf.pos.width));
    for (int y = 0; y < nnf.pos.height; ++y) {
        for (int x = 0; x < nnf.pos.width; ++x) {
            const Coord c = nnf.pos.at(y, x);
            write_u32(os, static_cast<std::uint32_t>(c.row));
            write_u32(os, static_cast<std::uint32_t>(c.col));
            const float r = static_cast<float>(nnf.rel.at(y, x));
            std::uint32_t bits;
            std::memcpy(&bits, &r, 4);
            write_u32(os, bits);
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

Nnf load_nnf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NNF1", 4) != 0) {
        throw std::runtime_error(path + ": not an NNF1 file");
    }
    const int h = static_cast<int>(read_u32(is, path));
    const int w = static_cast<int>(read_u32(is, path));
    if (h < 1 || w < 1) throw std::runtime_error(path + ": bad dimensions");
    Nnf nnf{PositionMap(h, w), RelevanceMap(h, w)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Coord c;
            c.row = static_cast<std::int32_t>(read_u32(is, path));
            c.col = static_cast<std::int32_t>(read_u32(is, path));
            const std::uint32_t bits = read_u32(is, path);
            float r;
            std::memcpy(&r, &bits, 4);
            nnf.pos.at(y, x) = c;
            nnf.rel.at(y, x) = r;
        }
    }
    return nnf;
}

} // namespace nnf
