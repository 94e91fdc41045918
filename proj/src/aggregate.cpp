#include "nnfield/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nnf {

OffsetField::OffsetField(int height_, int width_, double fill)
    : height(height_), width(width_),
      data(static_cast<std::size_t>(height_) * width_ * kTapCount * 2, fill) {
    if (height_ < 1 || width_ < 1) {
        throw std::invalid_argument("OffsetField: dimensions must be positive");
    }
}

std::vector<double> delta_kernel() {
    std::vector<double> w(kTapCount, 0.0);
    w[4] = 1.0; // center tap
    return w;
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

// Tap weight row lookup: shared (9) or per-channel (C x 9) layouts.
const double* tap_row(const std::vector<double>& weights, int channel, int n_channels) {
    if (weights.size() == static_cast<std::size_t>(kTapCount)) {
        return weights.data();
    }
    if (weights.size() == static_cast<std::size_t>(kTapCount) * n_channels) {
        return weights.data() + static_cast<std::size_t>(channel) * kTapCount;
    }
    throw std::invalid_argument(
        "kernel_weights must hold 9 taps or channels*9 taps");
}

inline double bilinear(const FeatureMap& v, double y, double x, int c) {
    const double fy = std::floor(y);
    const double fx = std::floor(x);
    const double ay = y - fy;
    const double ax = x - fx;
    const int y0 = std::clamp(static_cast<int>(fy), 0, v.height - 1);
    const int y1 = std::clamp(static_cast<int>(fy) + 1, 0, v.height - 1);
    const int x0 = std::clamp(static_cast<int>(fx), 0, v.width - 1);
    const int x1 = std::clamp(static_cast<int>(fx) + 1, 0, v.width - 1);
    const double top = (1.0 - ax) * v.at(y0, x0)[c] + ax * v.at(y0, x1)[c];
    const double bot = (1.0 - ax) * v.at(y1, x0)[c] + ax * v.at(y1, x1)[c];
    return (1.0 - ay) * top + ay * bot;
}

void check_positions(const PositionMap& h, const FeatureMap& v) {
    for (const Coord& c : h.coords) {
        if (c.row < 0 || c.row >= v.height || c.col < 0 || c.col >= v.width) {
            throw std::invalid_argument("aggregate: match coordinate out of bounds");
        }
    }
}

} // namespace

void save_weights(const ConvWeights& w, const std::string& path) {
    if (w.weights.size() != static_cast<std::size_t>(w.out_channels) *
                                w.in_channels * w.kh * w.kw) {
        throw std::invalid_argument("save_weights: inconsistent dimensions");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write("WGT1", 4);
    write_u32(os, static_cast<std::uint32_t>(w.out_channels));
    write_u32(os, static_cast<std::uint32_t>(w.in_channels));
    write_u32(os, static_cast<std::uint32_t>(w.kh));
    write_u32(os, static_cast<std::uint32_t>(w.kw));
    for (double x : w.weights) {
        const float f = static_cast<float>(x);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_u32(os, bits);
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

ConvWeights load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "WGT1", 4) != 0) {
        throw std::runtime_error(path + ": not a WGT1 file");
    }
    ConvWeights w;
    w.out_channels = static_cast<int>(read_u32(is, path));
    w.in_channels = static_cast<int>(read_u32(is, path));
    w.kh = static_cast<int>(read_u32(is, path));
    w.kw = static_cast<int>(read_u32(is, path));
    if (w.out_channels < 1 || w.in_channels < 1 || w.kh < 1 || w.kw < 1) {
        throw std::runtime_error(path + ": bad dimensions");
    }
    const std::size_t n = static_cast<std::size_t>(w.out_channels) *
                          w.in_channels * w.kh * w.kw;
    w.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t bits = read_u32(is, path);
        float f;
        std::memcpy(&f, &bits, 4);
        w.weights[i] = f;
    }
    return w;
}

FeatureMap apply_conv(const FeatureMap& in, const ConvWeights& w) {
    if (w.in_channels != in.channels) {
        throw std::invalid_argument("apply_conv: input channel mismatch");
    }
    if (w.kh % 2 == 0 || w.kw % 2 == 0) {
        throw std::invalid_argument("apply_conv: kernel dims must be odd");
    }
    const int ry = w.kh / 2;
    const int rx = w.kw / 2;
    FeatureMap out(w.out_channels, in.height, in.width);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double* o = out.at(y, x);
            for (int oc = 0; oc < w.out_channels; ++oc) {
                double acc = 0.0;
                for (int ic = 0; ic < in.channels; ++ic) {
                    for (int ky = 0; ky < w.kh; ++ky) {
                        const int sy = std::clamp(y + ky - ry, 0, in.height - 1);
                        for (int kx = 0; kx < w.kw; ++kx) {
                            const int sx = std::clamp(x + kx - rx, 0, in.width - 1);
                            const double wt =
                                w.weights[((static_cast<std::size_t>(oc) * in.channels + ic) *
                                               w.kh + ky) * w.kw + kx];
                            acc += wt * in.at(sy, sx)[ic];
                        }
                    }
                }
                o[oc] = acc;
            }
        }
    }
    return out;
}

FeatureMap standard_aggregate(const FeatureMap& v, const PositionMap& h,
                              const AggregationConfig& cfg) {
    check_positions(h, v);
    FeatureMap out(v.channels, h.height, h.width);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x) {
            const Coord center = h.at(y, x);
            double* o = out.at(y, x);
            for (int c = 0; c < v.channels; ++c) {
                const double* wt = tap_row(cfg.kernel_weights, c, v.channels);
                double acc = 0.0;
                for (int tap = 0; tap < kTapCount; ++tap) {
                    const int sy =
                        std::clamp(center.row + kTapOffsets[tap][0], 0, v.height - 1);
                    const int sx =
                        std::clamp(center.col + kTapOffsets[tap][1], 0, v.width - 1);
                    acc += wt[tap] * v.at(sy, sx)[c];
                }
                o[c] = acc;
            }
        }
    }
    return out;
}

OffsetField predict_offsets(const FeatureMap& f, const FeatureMap& y_prime,
                            const AggregationConfig& cfg) {
    if (f.height != y_prime.height || f.width != y_prime.width) {
        throw std::invalid_argument("predict_offsets: map dims differ");
    }
    switch (cfg.offset_source) {
    case OffsetSource::zero:
        return OffsetField(f.height, f.width, 0.0);
    case OffsetSource::callback:
        if (!cfg.offset_callback) {
            throw std::invalid_argument("predict_offsets: callback not set");
        }
        return cfg.offset_callback(f, y_prime);
    case OffsetSource::file:
        break;
    }
    const ConvWeights& w = cfg.offset_filter;
    if (w.empty()) {
        throw std::invalid_argument("predict_offsets: no offset filter loaded");
    }
    if (w.out_channels != kTapCount * 2) {
        throw std::invalid_argument("predict_offsets: filter must output 18 channels");
    }
    if (w.in_channels != f.channels + y_prime.channels) {
        throw std::invalid_argument(
            "predict_offsets: filter input channels must match [f ; y_prime]");
    }
    FeatureMap cat(f.channels + y_prime.channels, f.height, f.width);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            double* d = cat.at(y, x);
            std::memcpy(d, f.at(y, x), sizeof(double) * f.channels);
            std::memcpy(d + f.channels, y_prime.at(y, x),
                        sizeof(double) * y_prime.channels);
        }
    }
    const FeatureMap conv = apply_conv(cat, w);
    OffsetField field(f.height, f.width);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            std::memcpy(field.at(y, x), conv.at(y, x),
                        sizeof(double) * kTapCount * 2);
        }
    }
    return field;
}

FeatureMap dynamic_aggregate(const FeatureMap& v, const PositionMap& h,
                             const OffsetField& offsets,
                             const AggregationConfig& cfg) {
    check_positions(h, v);
    if (offsets.height != h.height || offsets.width != h.width) {
        throw std::invalid_argument("dynamic_aggregate: offset field dims differ");
    }
    for (double d : offsets.data) {
        if (!std::isfinite(d)) {
            throw std::invalid_argument("dynamic_aggregate: non-finite offset");
        }
    }
    FeatureMap out(v.channels, h.height, h.width);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x) {
            const Coord center = h.at(y, x);
            const double* dp = offsets.at(y, x);
            double* o = out.at(y, x);
            for (int c = 0; c < v.channels; ++c) {
                const double* wt = tap_row(cfg.kernel_weights, c, v.channels);
                double acc = 0.0;
                for (int tap = 0; tap < kTapCount; ++tap) {
                    const double sy =
                        center.row + kTapOffsets[tap][0] + dp[tap * 2 + 0];
                    const double sx =
                        center.col + kTapOffsets[tap][1] + dp[tap * 2 + 1];
                    acc += wt[tap] * bilinear(v, sy, sx, c);
                }
                o[c] = acc;
            }
        }
    }
    return out;
}

std::pair<FeatureMap, std::vector<RelevanceMap>> fuse_multiscale(
    const std::vector<FeatureMap>& ys, const std::vector<RelevanceMap>& ss,
    const ConvWeights* final_transform) {
    if (ys.empty() || ys.size() != ss.size()) {
        throw std::invalid_argument("fuse_multiscale: need equal nonzero counts");
    }
    const int n = static_cast<int>(ys.size());
    const int H = ys[0].height;
    const int W = ys[0].width;
    const int C = ys[0].channels;
    for (const FeatureMap& y : ys) {
        if (y.height != H || y.width != W || y.channels != C) {
            throw std::invalid_argument("fuse_multiscale: aggregated map dims differ");
        }
    }
    for (const RelevanceMap& s : ss) {
        if (s.height != H || s.width != W) {
            throw std::invalid_argument("fuse_multiscale: relevance map dims differ");
        }
    }

    std::vector<RelevanceMap> weights(n);
    for (int i = 0; i < n; ++i) {
        weights[i] = RelevanceMap(H, W);
    }
    FeatureMap fused(C, H, W);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        std::vector<double> e(n);
        for (int x = 0; x < W; ++x) {
            double hi = -2.0;
            for (int i = 0; i < n; ++i) {
                hi = std::max(hi, ss[i].at(y, x));
            }
            double denom = 0.0;
            for (int i = 0; i < n; ++i) {
                e[i] = std::exp(ss[i].at(y, x) - hi);
                denom += e[i];
            }
            double* o = fused.at(y, x);
            for (int c = 0; c < C; ++c) o[c] = 0.0;
            for (int i = 0; i < n; ++i) {
                const double wi = e[i] / denom;
                weights[i].at(y, x) = wi;
                const double* yi = ys[i].at(y, x);
                for (int c = 0; c < C; ++c) {
                    o[c] += yi[c] * wi;
                }
            }
        }
    }
    if (final_transform && !final_transform->empty()) {
        fused = apply_conv(fused, *final_transform);
    }
    return {std::move(fused), std::move(weights)};
}

} // namespace nnf
