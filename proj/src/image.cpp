#include "nnfield/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace nnf {

Image::Image(int channels_, int height_, int width_, float fill)
    : channels(channels_), height(height_), width(width_),
      data(static_cast<std::size_t>(channels_) * height_ * width_, fill) {
    if (channels_ != 1 && channels_ != 3) {
        throw std::invalid_argument("Image: channels must be 1 or 3");
    }
    if (height_ < 1 || width_ < 1) {
        throw std::invalid_argument("Image: dimensions must be positive");
    }
}

namespace {

// Skips whitespace and '#' comment lines between PNM header tokens.
int next_header_int(std::istream& is, const std::string& path) {
    while (true) {
        int ch = is.peek();
        if (ch == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(ch)) {
            is.get();
        } else {
            break;
        }
    }
    int value = -1;
    if (!(is >> value)) {
        throw std::runtime_error("malformed PNM header in " + path);
    }
    return value;
}

} // namespace

Image load_pnm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open " + path);
    }
    char magic[2] = {0, 0};
    is.read(magic, 2);
    int channels = 0;
    if (magic[0] == 'P' && magic[1] == '5') {
        channels = 1;
    } else if (magic[0] == 'P' && magic[1] == '6') {
        channels = 3;
    } else {
        throw std::runtime_error(path + ": not a binary PGM/PPM file");
    }
    const int width = next_header_int(is, path);
    const int height = next_header_int(is, path);
    const int maxval = next_header_int(is, path);
    if (width < 1 || height < 1) {
        throw std::runtime_error(path + ": bad dimensions");
    }
    if (maxval != 255) {
        throw std::runtime_error(path + ": only 8-bit (maxval 255) supported");
    }
    is.get(); // single whitespace byte after maxval

    Image img(channels, height, width);
    std::vector<unsigned char> raw(img.data.size());
    is.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(is.gcount()) != raw.size()) {
        throw std::runtime_error(path + ": truncated pixel data");
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        img.data[i] = static_cast<float>(raw[i]) / 255.0f;
    }
    return img;
}

void save_pnm(const Image& img, const std::string& path) {
    if (img.empty()) {
        throw std::invalid_argument("save_pnm: empty image");
    }
    if (img.channels != 1 && img.channels != 3) {
        throw std::invalid_argument("save_pnm: channels must be 1 or 3");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    os << (img.channels == 1 ? "P5" : "P6") << "\n"
       << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.data.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const float v = std::clamp(img.data[i], 0.0f, 1.0f);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    os.write(reinterpret_cast<const char*>(raw.data()),
             static_cast<std::streamsize>(raw.size()));
    if (!os) {
        throw std::runtime_error("write failed: " + path);
    }
}

double psnr(const Image& a, const Image& b) {
    if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
        throw std::invalid_argument("psnr: dimension mismatch");
    }
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.data.size());
    if (mse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(1.0 / mse);
}

Image to_gray(const Image& img) {
    if (img.channels == 1) {
        return img;
    }
    Image out(1, img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            out.at(y, x, 0) = 0.299f * img.at(y, x, 0) +
                              0.587f * img.at(y, x, 1) +
                              0.114f * img.at(y, x, 2);
        }
    }
    return out;
}

} // namespace nnf
