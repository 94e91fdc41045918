// Dense image container and binary PNM (PGM/PPM) i/o.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nnf {

/// Grayscale (1 channel) or RGB (3 channel) image, interleaved row-major:
/// data[(y * width + x) * channels + c]. Loaded pixels live in [0,1];
/// intermediate processing may leave that range but must stay finite.
struct Image {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    Image() = default;
    Image(int channels_, int height_, int width_, float fill = 0.0f);

    float& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool empty() const { return data.empty(); }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(height) * width;
    }
};

/// Reads an 8-bit binary PGM (P5) or PPM (P6); values are mapped to [0,1]
/// by dividing by 255. Throws std::runtime_error on malformed input.
Image load_pnm(const std::string& path);

/// Writes PGM for 1-channel and PPM for 3-channel images. Values are
/// clamped to [0,1] and quantized by rounding to 8 bits.
void save_pnm(const Image& img, const std::string& path);

/// Peak signal-to-noise ratio in dB over all channels, full-scale 1.0.
double psnr(const Image& a, const Image& b);

/// Converts RGB to single-channel luma (Rec.601 weights); grayscale
/// inputs pass through unchanged.
Image to_gray(const Image& img);

} // namespace nnf
