// Regenerates the bundled benchmark images under data/: two overlapping
// crops of one deterministic synthetic scene (overlapping shapes over
// multi-octave texture, a stand-in for a photograph) plus the
// 4x-downsampled version of crop A.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>

#include "nnfield/image.hpp"
#include "nnfield/resample.hpp"

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double unit(std::uint64_t seed, std::uint64_t key) {
    return static_cast<double>(splitmix64(seed ^ splitmix64(key)) >> 11) /
           9007199254740992.0; // [0, 1)
}

double cell_value(std::uint64_t seed, int octave, int gy, int gx) {
    return unit(seed, static_cast<std::uint64_t>(octave) * 0x100000001ull +
                          static_cast<std::uint64_t>(gy) * 0x10001ull +
                          static_cast<std::uint64_t>(gx) + 7);
}

// Multi-octave value noise. The 32/16/8-cell octaves survive 4x
// degradation and localize matches; the 3/2-cell octaves are the
// high-frequency payload a plain bicubic upsampler cannot recover.
nnf::Image make_scene(int size, std::uint64_t seed) {
    nnf::Image img(1, size, size, 0.5f);

    const int cell_sizes[5] = {8, 16, 32, 3, 2};
    const double amps[5] = {0.30, 0.20, 0.15, 0.26, 0.14};
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double v = img.at(y, x, 0);
            for (int o = 0; o < 5; ++o) {
                const double fy = static_cast<double>(y) / cell_sizes[o];
                const double fx = static_cast<double>(x) / cell_sizes[o];
                const int gy = static_cast<int>(fy);
                const int gx = static_cast<int>(fx);
                const double ay = fy - gy;
                const double ax = fx - gx;
                const double v00 = cell_value(seed, o, gy, gx);
                const double v01 = cell_value(seed, o, gy, gx + 1);
                const double v10 = cell_value(seed, o, gy + 1, gx);
                const double v11 = cell_value(seed, o, gy + 1, gx + 1);
                const double top = (1.0 - ax) * v00 + ax * v01;
                const double bot = (1.0 - ax) * v10 + ax * v11;
                v += amps[o] * (((1.0 - ay) * top + ay * bot) - 0.5);
            }
            img.at(y, x, 0) = static_cast<float>(std::clamp(v, 0.02, 0.98));
        }
    }
    return img;
}

nnf::Image crop(const nnf::Image& src, int y0, int x0, int size) {
    nnf::Image out(src.channels, size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            for (int c = 0; c < src.channels; ++c) {
                out.at(y, x, c) = src.at(y0 + y, x0 + x, c);
            }
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "data";
    const nnf::Image scene = make_scene(128, 20240817);

    const nnf::Image a = crop(scene, 16, 16, 96);
    const nnf::Image b = crop(scene, 20, 16, 96); // shifted down by 4 rows
    // Quantize crop A before downsampling so bench_lr is exactly the 4x
    // bicubic reduction of the stored bench_a.pgm.
    nnf::save_pnm(a, dir + "/bench_a.pgm");
    const nnf::Image a_stored = nnf::load_pnm(dir + "/bench_a.pgm");
    const nnf::Image lr = nnf::bicubic_resize(a_stored, 24, 24);

    nnf::save_pnm(b, dir + "/bench_b.pgm");
    nnf::save_pnm(lr, dir + "/bench_lr.pgm");
    std::cout << "wrote " << dir << "/bench_a.pgm, bench_b.pgm, bench_lr.pgm\n";
    return 0;
}
