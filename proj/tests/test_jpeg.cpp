#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "unadv/jpeg.hpp"
#include "unadv/rng.hpp"

using namespace unadv;

namespace {

Tensor gradient_image(int h, int w) {
    Tensor im({h, w, 3});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            real* px = im.data() + (static_cast<int64_t>(y) * w + x) * 3;
            px[0] = (h > 1 ? real(y) / (h - 1) : 0.5);
            px[1] = (w > 1 ? real(x) / (w - 1) : 0.5);
            px[2] = 0.25 + 0.5 * ((y + x) % 2 == 0);
        }
    return im;
}

Tensor noisy_image(int h, int w, uint64_t seed) {
    Rng rng(seed);
    Tensor im({h, w, 3});
    for (int i = 0; i < im.size(); ++i) im[i] = rng.uniform();
    return im;
}

real mse(const Tensor& a, const Tensor& b) {
    REQUIRE(a.size() == b.size());
    real s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / a.size();
}

real max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.size() == b.size());
    real m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

size_t find_marker(const std::vector<uint8_t>& bytes, uint8_t marker) {
    for (size_t i = 0; i + 1 < bytes.size(); ++i)
        if (bytes[i] == 0xff && bytes[i + 1] == marker) return i;
    return bytes.size();
}

} // namespace

TEST_SUITE("jpeg") {

TEST_CASE("fdct matches the direct transform definition") {
    Rng rng(31);
    real block[64];
    real ref[64];
    for (int i = 0; i < 64; ++i) block[i] = rng.uniform(-128.0, 127.0);
    const real pi = 3.14159265358979323846;
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            real s = 0.0;
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    s += block[y * 8 + x] * std::cos((2 * x + 1) * u * pi / 16.0) *
                         std::cos((2 * y + 1) * v * pi / 16.0);
            const real cu = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
            const real cv = v == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
            ref[v * 8 + u] = 0.25 * cu * cv * s;
        }
    jpeg::fdct8x8(block);
    for (int i = 0; i < 64; ++i) CHECK(std::abs(block[i] - ref[i]) < 1e-9);
}

TEST_CASE("a constant block transforms to a lone DC coefficient") {
    real block[64];
    for (int i = 0; i < 64; ++i) block[i] = 37.5;
    jpeg::fdct8x8(block);
    CHECK(block[0] == doctest::Approx(8.0 * 37.5).epsilon(1e-12));
    for (int i = 1; i < 64; ++i) CHECK(std::abs(block[i]) < 1e-10);
}

TEST_CASE("idct inverts fdct") {
    Rng rng(32);
    real block[64];
    real orig[64];
    for (int i = 0; i < 64; ++i) orig[i] = block[i] = rng.uniform(-128.0, 127.0);
    jpeg::fdct8x8(block);
    jpeg::idct8x8(block);
    for (int i = 0; i < 64; ++i) CHECK(std::abs(block[i] - orig[i]) < 1e-10);
}

TEST_CASE("encode is deterministic and framed by the expected markers") {
    const Tensor im = noisy_image(24, 16, 99);
    const auto a = jpeg::encode(im, 80);
    const auto b = jpeg::encode(im, 80);
    CHECK(a == b);
    REQUIRE(a.size() > 4);
    CHECK(a[0] == 0xff);
    CHECK(a[1] == 0xd8);
    CHECK(a[a.size() - 2] == 0xff);
    CHECK(a[a.size() - 1] == 0xd9);
    CHECK(find_marker(a, 0xdb) < a.size()); // DQT
    CHECK(find_marker(a, 0xc0) < a.size()); // SOF0
    CHECK(find_marker(a, 0xc4) < a.size()); // DHT
    CHECK(find_marker(a, 0xda) < a.size()); // SOS
    CHECK(find_marker(a, 0xc2) == a.size()); // no progressive frame
}

TEST_CASE("quality 50 writes the unscaled quantization table") {
    const auto bytes = jpeg::encode(gradient_image(8, 8), 50);
    const size_t dqt = find_marker(bytes, 0xdb);
    REQUIRE(dqt + 10 < bytes.size());
    CHECK(bytes[dqt + 4] == 0); // Pq=0, Tq=0
    const uint8_t zz_head[6] = {16, 11, 12, 14, 12, 10};
    for (int i = 0; i < 6; ++i) CHECK(bytes[dqt + 5 + i] == zz_head[i]);
}

TEST_CASE("round trip at high quality is close") {
    const Tensor im = gradient_image(24, 24);
    const Tensor back = jpeg::decode(jpeg::encode(im, 95));
    REQUIRE(back.shape() == im.shape());
    CHECK(mse(im, back) < 1e-4);
    CHECK(max_abs_diff(im, back) < 0.12);
    for (int i = 0; i < back.size(); ++i) {
        REQUIRE(back[i] >= 0.0);
        REQUIRE(back[i] <= 1.0);
    }
}

TEST_CASE("lower quality loses strictly more") {
    const Tensor im = noisy_image(32, 32, 4);
    const real hi = mse(im, jpeg::decode(jpeg::encode(im, 50)));
    const real lo = mse(im, jpeg::decode(jpeg::encode(im, 7)));
    CHECK(hi > 0.0);
    CHECK(lo > hi);
}

TEST_CASE("sizes that are not multiples of eight survive") {
    for (auto [h, w] : {std::pair{19, 13}, {1, 1}, {8, 8}, {9, 24}}) {
        const Tensor im = gradient_image(h, w);
        const Tensor back = jpeg::decode(jpeg::encode(im, 85));
        REQUIRE(back.shape() == std::vector<int>{h, w, 3});
        CHECK(mse(im, back) < 5e-3);
    }
}

TEST_CASE("rank-4 single images are accepted") {
    Tensor im({1, 10, 12, 3});
    for (int i = 0; i < im.size(); ++i) im[i] = 0.5;
    const Tensor back = jpeg::decode(jpeg::encode(im, 90));
    REQUIRE(back.shape() == std::vector<int>{10, 12, 3});
    CHECK(max_abs_diff(back, back) == 0.0);
    for (int i = 0; i < back.size(); ++i) CHECK(std::abs(back[i] - 0.5) < 0.02);
}

TEST_CASE("quality outside the range is rejected") {
    const Tensor im = gradient_image(8, 8);
    CHECK_THROWS_WITH_AS(jpeg::encode(im, 0), doctest::Contains("quality"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(jpeg::encode(im, 101), doctest::Contains("quality"),
                         std::invalid_argument);
}

TEST_CASE("bad input shapes are rejected") {
    CHECK_THROWS_WITH_AS(jpeg::encode(Tensor({4, 4}), 80), doctest::Contains("expected"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(jpeg::encode(Tensor({4, 4, 2}), 80), doctest::Contains("expected"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(jpeg::encode(Tensor({2, 4, 4, 3}), 80), doctest::Contains("expected"),
                         std::invalid_argument);
}

TEST_CASE("malformed streams are rejected") {
    const Tensor im = gradient_image(16, 16);
    const auto good = jpeg::encode(im, 75);

    SUBCASE("empty") { CHECK_THROWS_AS(jpeg::decode({}), std::runtime_error); }
    SUBCASE("not a jpeg") {
        CHECK_THROWS_WITH_AS(jpeg::decode({0x50, 0x36, 0x0a}), doctest::Contains("SOI"),
                             std::runtime_error);
    }
    SUBCASE("truncated") {
        auto cut = good;
        cut.resize(cut.size() * 3 / 5);
        CHECK_THROWS_AS(jpeg::decode(cut), std::runtime_error);
    }
    SUBCASE("progressive frame") {
        auto prog = good;
        const size_t sof = find_marker(prog, 0xc0);
        REQUIRE(sof < prog.size());
        prog[sof + 1] = 0xc2;
        CHECK_THROWS_WITH_AS(jpeg::decode(prog), doctest::Contains("baseline"),
                             std::runtime_error);
    }
    SUBCASE("wrong component count") {
        auto gray = good;
        const size_t sof = find_marker(gray, 0xc0);
        REQUIRE(sof + 9 < gray.size());
        gray[sof + 9] = 1;
        CHECK_THROWS_WITH_AS(jpeg::decode(gray), doctest::Contains("3-component"),
                             std::runtime_error);
    }
    SUBCASE("restart interval") {
        std::vector<uint8_t> dri = {0xff, 0xd8, 0xff, 0xdd, 0x00, 0x04, 0x00, 0x02};
        dri.insert(dri.end(), good.begin() + 2, good.end());
        CHECK_THROWS_WITH_AS(jpeg::decode(dri), doctest::Contains("restart"), std::runtime_error);
    }
    SUBCASE("app segments are skipped") {
        std::vector<uint8_t> app = {0xff, 0xd8, 0xff, 0xe0, 0x00, 0x04, 0x4a, 0x46};
        app.insert(app.end(), good.begin() + 2, good.end());
        const Tensor back = jpeg::decode(app);
        CHECK(testutil::bitwise_equal(back, jpeg::decode(good)));
    }
}

} // TEST_SUITE
