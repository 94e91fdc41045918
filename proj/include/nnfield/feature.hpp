// Dense feature maps and the patch-descriptor extractor.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnfield/image.hpp"

namespace nnf {

/// C-dimensional feature vector per position. Stored interleaved so a
/// position's vector is contiguous: data[(y * width + x) * channels + c].
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int channels_, int height_, int width_, double fill = 0.0);

    const double* at(int y, int x) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    }
    double* at(int y, int x) {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    }
    std::size_t position_count() const {
        return static_cast<std::size_t>(height) * width;
    }
    bool empty() const { return data.empty(); }
};

struct DescriptorConfig {
    int patch_size = 3;        // odd, >= 1
    bool mean_subtract = true; // per-position mean removal
};

/// Flattens the clamp-padded patch_size x patch_size neighborhood of every
/// pixel into a feature vector (window position row-major, channels
/// fastest), optionally subtracting the vector's own mean. Output is
/// channels * patch_size^2 wide at the input resolution.
FeatureMap extract_descriptors(const Image& img, const DescriptorConfig& cfg = {});

constexpr double kNormEpsilon = 1e-12;

/// L2-normalizes src (length n) into dst. Vectors with norm below eps map
/// to all zeros, so later inner products on them evaluate to exactly 0.
void normalize_vector(const double* src, double* dst, int n,
                      double eps = kNormEpsilon);

/// Per-position L2 normalization of the whole map.
FeatureMap normalize_features(const FeatureMap& fm, double eps = kNormEpsilon);

/// Inner product of two already-normalized vectors, clamped to [-1, 1].
double dot_normalized(const double* a, const double* b, int n);

/// Binary dump, magic "FMP1": u32 channels, height, width (little endian),
/// then f32 payload ordered channel, row, column.
void save_feature_map(const FeatureMap& fm, const std::string& path);
FeatureMap load_feature_map(const std::string& path);

} // namespace nnf
