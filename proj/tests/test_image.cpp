#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "nnfield/image.hpp"
#include "test_util.hpp"

using namespace nnf;

namespace {

std::string tmp_path(const char* name) {
    return std::string("test_image_") + name;
}

} // namespace

TEST_CASE("pgm round trip preserves 8-bit values") {
    Image img(1, 5, 7);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x)
            img.at(y, x, 0) = static_cast<float>((y * 7 + x) % 256) / 255.0f;
    const std::string path = tmp_path("rt.pgm");
    save_pnm(img, path);
    const Image back = load_pnm(path);
    REQUIRE(back.channels == 1);
    REQUIRE(back.height == 5);
    REQUIRE(back.width == 7);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(0));
    }
    std::remove(path.c_str());
}

TEST_CASE("ppm round trip preserves channels") {
    Image img = testutil::random_image(3, 4, 6, 99);
    const std::string path = tmp_path("rt.ppm");
    save_pnm(img, path);
    const Image back = load_pnm(path);
    REQUIRE(back.channels == 3);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        // One quantization step at most.
        CHECK(std::abs(back.data[i] - img.data[i]) <= 0.5f / 255.0f + 1e-7f);
    }
    std::remove(path.c_str());
}

TEST_CASE("pgm header comments and whitespace are accepted") {
    const std::string path = tmp_path("hdr.pgm");
    {
        std::ofstream os(path, std::ios::binary);
        os << "P5\n# a comment\n 3 # trailing\n2\n255\n";
        const unsigned char px[6] = {0, 51, 102, 153, 204, 255};
        os.write(reinterpret_cast<const char*>(px), 6);
    }
    const Image img = load_pnm(path);
    CHECK(img.width == 3);
    CHECK(img.height == 2);
    CHECK(img.at(0, 1, 0) == doctest::Approx(51.0 / 255.0));
    std::remove(path.c_str());
}

TEST_CASE("load errors are descriptive") {
    CHECK_THROWS_AS(load_pnm("does_not_exist.pgm"), std::runtime_error);

    const std::string bad_magic = tmp_path("bad.pgm");
    {
        std::ofstream os(bad_magic, std::ios::binary);
        os << "P2\n2 2\n255\n0 0 0 0";
    }
    CHECK_THROWS_AS(load_pnm(bad_magic), std::runtime_error);
    std::remove(bad_magic.c_str());

    const std::string truncated = tmp_path("trunc.pgm");
    {
        std::ofstream os(truncated, std::ios::binary);
        os << "P5\n4 4\n255\n";
        os << "xy"; // 2 of 16 bytes
    }
    CHECK_THROWS_AS(load_pnm(truncated), std::runtime_error);
    std::remove(truncated.c_str());

    const std::string maxval = tmp_path("maxval.pgm");
    {
        std::ofstream os(maxval, std::ios::binary);
        os << "P5\n1 1\n127\nx";
    }
    CHECK_THROWS_AS(load_pnm(maxval), std::runtime_error);
    std::remove(maxval.c_str());
}

TEST_CASE("psnr") {
    Image a(1, 4, 4, 0.0f);
    Image b(1, 4, 4, 0.5f);
    // MSE 0.25 -> 10 log10(4)
    CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
    CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
    Image c(1, 4, 5, 0.0f);
    CHECK_THROWS_AS(psnr(a, c), std::invalid_argument);
}

TEST_CASE("to_gray") {
    const Image g = testutil::random_image(1, 3, 3, 1);
    const Image same = to_gray(g);
    CHECK(same.data == g.data);

    Image rgb(3, 1, 1);
    rgb.at(0, 0, 0) = 1.0f;
    rgb.at(0, 0, 1) = 0.0f;
    rgb.at(0, 0, 2) = 0.0f;
    CHECK(to_gray(rgb).at(0, 0, 0) == doctest::Approx(0.299).epsilon(1e-6));
}

TEST_CASE("invalid construction") {
    CHECK_THROWS_AS(Image(2, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(Image(1, 0, 4), std::invalid_argument);
}
