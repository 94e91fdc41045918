#include "nnfield/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nnf {

namespace {

// Catmull-Rom weights (cubic convolution, a = -0.5) for the four taps
// around a sample point with fractional offset f in [0,1).
void catmull_rom_weights(double f, double w[4]) {
    const double f2 = f * f;
    const double f3 = f2 * f;
    w[0] = -0.5 * f3 + f2 - 0.5 * f;
    w[1] = 1.5 * f3 - 2.5 * f2 + 1.0;
    w[2] = -1.5 * f3 + 2.0 * f2 + 0.5 * f;
    w[3] = 0.5 * f3 - 0.5 * f2;
}

struct TapPlan {
    int idx[4];
    double w[4];
};

// Per output coordinate: the four clamped source rows/columns and weights.
std::vector<TapPlan> plan_axis(int in_dim, int out_dim) {
    std::vector<TapPlan> plan(out_dim);
    const double scale = static_cast<double>(in_dim) / out_dim;
    for (int o = 0; o < out_dim; ++o) {
        const double src = (o + 0.5) * scale - 0.5;
        const double base = std::floor(src);
        const double f = src - base;
        TapPlan& p = plan[o];
        catmull_rom_weights(f, p.w);
        const int b = static_cast<int>(base);
        for (int t = 0; t < 4; ++t) {
            p.idx[t] = std::clamp(b - 1 + t, 0, in_dim - 1);
        }
    }
    return plan;
}

} // namespace

Image bicubic_resize(const Image& img, int out_h, int out_w) {
    if (img.empty() || img.height < 1 || img.width < 1) {
        throw std::invalid_argument("bicubic_resize: empty input image");
    }
    if (out_h < 1 || out_w < 1) {
        throw std::invalid_argument("bicubic_resize: output dims must be >= 1");
    }
    const int C = img.channels;
    const auto cols = plan_axis(img.width, out_w);
    const auto rows = plan_axis(img.height, out_h);

    // Horizontal pass, then vertical.
    Image tmp(C, img.height, out_w);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const TapPlan& p = cols[x];
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (int t = 0; t < 4; ++t) {
                    acc += p.w[t] * img.at(y, p.idx[t], c);
                }
                tmp.at(y, x, c) = static_cast<float>(acc);
            }
        }
    }
    Image out(C, out_h, out_w);
    for (int y = 0; y < out_h; ++y) {
        const TapPlan& p = rows[y];
        for (int x = 0; x < out_w; ++x) {
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (int t = 0; t < 4; ++t) {
                    acc += p.w[t] * tmp.at(p.idx[t], x, c);
                }
                out.at(y, x, c) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

std::vector<Image> make_ref_pyramid(const Image& ref, double k, int n,
                                    int min_dim) {
    if (!(k > 0.0) || k > 1.0) {
        throw std::invalid_argument("make_ref_pyramid: k must be in (0, 1]");
    }
    if (n < 1) {
        throw std::invalid_argument("make_ref_pyramid: n must be >= 1");
    }
    std::vector<Image> levels;
    levels.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double s = std::pow(k, i);
        // Half away from zero, fixed here so level dims are reproducible.
        const int h = static_cast<int>(std::llround(ref.height * s));
        const int w = static_cast<int>(std::llround(ref.width * s));
        if (h < min_dim || w < min_dim) {
            throw std::invalid_argument(
                "make_ref_pyramid: level " + std::to_string(i) + " is " +
                std::to_string(h) + "x" + std::to_string(w) +
                ", below the minimum of " + std::to_string(min_dim));
        }
        if (i == 0) {
            levels.push_back(ref);
        } else {
            levels.push_back(bicubic_resize(ref, h, w));
        }
    }
    return levels;
}

} // namespace nnf
