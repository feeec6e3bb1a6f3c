#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "unadv/image_io.hpp"
#include "unadv/rng.hpp"

using namespace unadv;

namespace {

std::filesystem::path tmp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "unadv_imageio_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("imageio") {

TEST_CASE("ppm round trip is exact for quantized images") {
    Rng rng(11);
    Tensor im({5, 7, 3});
    for (int i = 0; i < im.size(); ++i) im[i] = rng.uniform();
    Tensor q = img::quantize8(im);
    const std::string path = (tmp_dir() / "round.ppm").string();
    img::write_ppm(path, q);
    Tensor back = img::read_ppm(path);
    REQUIRE(back.shape() == std::vector<int>{5, 7, 3});
    CHECK(testutil::bitwise_equal(back, q));
}

TEST_CASE("quantize8 rounds and clamps") {
    Tensor im({1, 4, 3});
    im[0] = -0.2;
    im[1] = 1.7;
    im[2] = 0.5;
    im[3] = 128.4 / 255.0;
    for (int i = 4; i < 12; ++i) im[i] = 0.0;
    Tensor q = img::quantize8(im);
    CHECK(q[0] == 0.0);
    CHECK(q[1] == 1.0);
    CHECK(q[2] == 128.0 / 255.0); // 0.5*255 = 127.5 rounds away from zero
    CHECK(q[3] == 128.0 / 255.0);
    CHECK(testutil::bitwise_equal(img::quantize8(q), q));
}

TEST_CASE("rank-4 single image accepted, batches rejected") {
    Tensor im({1, 3, 3, 3}, 0.25);
    const std::string path = (tmp_dir() / "rank4.ppm").string();
    img::write_ppm(path, im);
    Tensor back = img::read_ppm(path);
    REQUIRE(back.shape() == std::vector<int>{3, 3, 3});
    for (int i = 0; i < back.size(); ++i) CHECK(back[i] == 64.0 / 255.0);

    CHECK_THROWS_AS(img::write_ppm(path, Tensor({2, 3, 3, 3})), std::invalid_argument);
    CHECK_THROWS_AS(img::write_ppm(path, Tensor({3, 3})), std::invalid_argument);
}

TEST_CASE("header with comments parses") {
    const std::string path = (tmp_dir() / "comment.ppm").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "P6\n# made by hand\n2 1\n255\n";
        const unsigned char px[6] = {255, 0, 0, 0, 0, 255};
        out.write(reinterpret_cast<const char*>(px), 6);
    }
    Tensor t = img::read_ppm(path);
    REQUIRE(t.shape() == std::vector<int>{1, 2, 3});
    CHECK(t[0] == 1.0);
    CHECK(t[5] == 1.0);
    CHECK(t[1] == 0.0);
}

TEST_CASE("malformed files rejected") {
    auto dir = tmp_dir();
    const std::string p3 = (dir / "bad_magic.ppm").string();
    {
        std::ofstream out(p3, std::ios::binary);
        out << "P3\n1 1\n255\n0 0 0\n";
    }
    CHECK_THROWS_WITH_AS(img::read_ppm(p3), doctest::Contains("not a P6"), std::runtime_error);

    const std::string trunc = (dir / "trunc.ppm").string();
    {
        std::ofstream out(trunc, std::ios::binary);
        out << "P6\n4 4\n255\n";
        out << "xyz"; // 3 of 48 bytes
    }
    CHECK_THROWS_WITH_AS(img::read_ppm(trunc), doctest::Contains("truncated"), std::runtime_error);

    const std::string maxval = (dir / "maxval.ppm").string();
    {
        std::ofstream out(maxval, std::ios::binary);
        out << "P6\n1 1\n65535\n";
        out << "abcdef";
    }
    CHECK_THROWS_WITH_AS(img::read_ppm(maxval), doctest::Contains("maxval"), std::runtime_error);

    CHECK_THROWS_AS(img::read_ppm((dir / "missing.ppm").string()), std::runtime_error);
}

} // TEST_SUITE
