#include "nnfield/feature.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nnf {

FeatureMap::FeatureMap(int channels_, int height_, int width_, double fill)
    : channels(channels_), height(height_), width(width_),
      data(static_cast<std::size_t>(channels_) * height_ * width_, fill) {
    if (channels_ < 1 || height_ < 1 || width_ < 1) {
        throw std::invalid_argument("FeatureMap: dimensions must be positive");
    }
}

FeatureMap extract_descriptors(const Image& img, const DescriptorConfig& cfg) {
    const int ps = cfg.patch_size;
    if (ps < 1 || ps % 2 == 0) {
        throw std::invalid_argument("extract_descriptors: patch_size must be odd and >= 1");
    }
    if (img.height < ps || img.width < ps) {
        throw std::invalid_argument("extract_descriptors: image smaller than patch_size");
    }
    const int C = img.channels;
    const int r = ps / 2;
    FeatureMap out(C * ps * ps, img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double* d = out.at(y, x);
            int k = 0;
            for (int dy = -r; dy <= r; ++dy) {
                const int sy = std::clamp(y + dy, 0, img.height - 1);
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = std::clamp(x + dx, 0, img.width - 1);
                    for (int c = 0; c < C; ++c) {
                        d[k++] = img.at(sy, sx, c);
                    }
                }
            }
            if (cfg.mean_subtract) {
                double sum = 0.0;
                for (int i = 0; i < out.channels; ++i) sum += d[i];
                const double mean = sum / out.channels;
                for (int i = 0; i < out.channels; ++i) d[i] -= mean;
            }
        }
    }
    return out;
}

void normalize_vector(const double* src, double* dst, int n, double eps) {
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        ss += src[i] * src[i];
    }
    const double norm = std::sqrt(ss);
    if (norm < eps) {
        std::fill(dst, dst + n, 0.0);
        return;
    }
    for (int i = 0; i < n; ++i) {
        dst[i] = src[i] / norm;
    }
}

FeatureMap normalize_features(const FeatureMap& fm, double eps) {
    FeatureMap out(fm.channels, fm.height, fm.width);
    const std::size_t positions = fm.position_count();
    for (std::size_t p = 0; p < positions; ++p) {
        normalize_vector(fm.data.data() + p * fm.channels,
                         out.data.data() + p * fm.channels, fm.channels, eps);
    }
    return out;
}

double dot_normalized(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return std::clamp(acc, -1.0, 1.0);
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
    if (!is) throw std::runtime_error(path + ": truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

float read_f32(std::istream& is, const std::string& path) {
    const std::uint32_t bits = read_u32(is, path);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

void save_feature_map(const FeatureMap& fm, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write("FMP1", 4);
    write_u32(os, static_cast<std::uint32_t>(fm.channels));
    write_u32(os, static_cast<std::uint32_t>(fm.height));
    write_u32(os, static_cast<std::uint32_t>(fm.width));
    for (int c = 0; c < fm.channels; ++c) {
        for (int y = 0; y < fm.height; ++y) {
            for (int x = 0; x < fm.width; ++x) {
                write_f32(os, static_cast<float>(fm.at(y, x)[c]));
            }
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

FeatureMap load_feature_map(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "FMP1", 4) != 0) {
        throw std::runtime_error(path + ": not an FMP1 file");
    }
    const int c = static_cast<int>(read_u32(is, path));
    const int h = static_cast<int>(read_u32(is, path));
    const int w = static_cast<int>(read_u32(is, path));
    if (c < 1 || h < 1 || w < 1) {
        throw std::runtime_error(path + ": bad dimensions");
    }
    FeatureMap fm(c, h, w);
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                fm.at(y, x)[ch] = read_f32(is, path);
            }
        }
    }
    return fm;
}

} // namespace nnf
