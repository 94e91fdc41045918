// Relevance-guided feature gathering around matched positions: a 9-tap
// kernel with optional per-position fractional offsets, and softmax
// fusion of per-scale results.
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nnfield/feature.hpp"
#include "nnfield/matcher.hpp"

namespace nnf {

/// Dense linear filter bank, weights[((o * in_c + i) * kh + ky) * kw + kx].
/// Serialized as "WGT1": u32 out_channels, in_channels, kh, kw, f32 data.
struct ConvWeights {
    int out_channels = 0;
    int in_channels = 0;
    int kh = 0;
    int kw = 0;
    std::vector<double> weights;

    bool empty() const { return weights.empty(); }
};

void save_weights(const ConvWeights& w, const std::string& path);
ConvWeights load_weights(const std::string& path);

/// Applies a filter bank with clamp-to-edge boundary handling.
FeatureMap apply_conv(const FeatureMap& in, const ConvWeights& w);

/// The fixed 3x3 tap grid, row-major: (-1,-1), (-1,0), ... (1,1).
inline constexpr int kTapOffsets[9][2] = {
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 0}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};

constexpr int kTapCount = 9;

/// Per-position, per-tap 2-D displacements, interleaved
/// data[((y * width + x) * 9 + tap) * 2 + {0: drow, 1: dcol}].
struct OffsetField {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    OffsetField() = default;
    OffsetField(int height_, int width_, double fill = 0.0);

    double* at(int y, int x) {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * kTapCount * 2;
    }
    const double* at(int y, int x) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * kTapCount * 2;
    }
};

enum class OffsetSource { zero, file, callback };

struct AggregationConfig {
    /// 9 taps shared across channels, or channels * 9 entries for
    /// per-output-channel taps (row per channel). Default box kernel.
    std::vector<double> kernel_weights = std::vector<double>(kTapCount, 1.0 / 9.0);
    OffsetSource offset_source = OffsetSource::zero;
    ConvWeights offset_filter; // file mode, 18 output channels
    std::function<OffsetField(const FeatureMap&, const FeatureMap&)> offset_callback;
};

/// Center-one-hot tap weights; aggregation degenerates to a lookup.
std::vector<double> delta_kernel();

/// Gathers the 3x3 patch of v around each position's match h(p) through
/// the kernel weights, clamp-to-edge at the borders.
FeatureMap standard_aggregate(const FeatureMap& v, const PositionMap& h,
                              const AggregationConfig& cfg);

/// Produces the per-tap displacement field from the LR feature map and the
/// standard aggregate: all zeros, a stored 3x3 filter bank over the
/// channel concatenation [f ; y_prime], or a caller-supplied callback.
OffsetField predict_offsets(const FeatureMap& f, const FeatureMap& y_prime,
                            const AggregationConfig& cfg);

/// Like standard_aggregate but each tap is displaced by its per-position
/// offset and sampled bilinearly (clamp-to-edge). Zero offsets reproduce
/// standard_aggregate bit for bit.
FeatureMap dynamic_aggregate(const FeatureMap& v, const PositionMap& h,
                             const OffsetField& offsets,
                             const AggregationConfig& cfg);

/// Per-position softmax over the scales' relevance values, then the
/// weighted sum of the aggregated maps; final_transform (when given)
/// applies a filter bank to the blend. Returns the fused map and the
/// softmax weight planes.
std::pair<FeatureMap, std::vector<RelevanceMap>> fuse_multiscale(
    const std::vector<FeatureMap>& ys, const std::vector<RelevanceMap>& ss,
    const ConvWeights* final_transform = nullptr);

} // namespace nnf
