#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "unadv/corruption.hpp"
#include "unadv/jpeg.hpp"
#include "unadv/rng.hpp"

using namespace unadv;

namespace {

Tensor random_image(int h, int w, uint64_t seed) {
    Rng rng(seed);
    Tensor im({h, w, 3});
    for (int i = 0; i < im.size(); ++i) im[i] = rng.uniform();
    return im;
}

Tensor constant_image(int h, int w, real v) {
    Tensor im({h, w, 3});
    for (int i = 0; i < im.size(); ++i) im[i] = v;
    return im;
}

real mean_of(const Tensor& t) {
    real s = 0.0;
    for (int i = 0; i < t.size(); ++i) s += t[i];
    return s / t.size();
}

} // namespace

TEST_SUITE("corruption") {

TEST_CASE("severity zero is the exact identity for every kind") {
    const Tensor im = random_image(16, 12, 21);
    for (corr::Kind k : corr::all_kinds()) {
        CHECK(testutil::bitwise_equal(corr::corrupt_image(im, k, 0, 5), im));
    }
    Tensor batch({2, 6, 6, 3});
    for (int i = 0; i < batch.size(); ++i) batch[i] = 0.25 + 0.5 * (i % 2);
    corr::CorruptionSpec spec{corr::Kind::snow, 0, 77};
    CHECK(testutil::bitwise_equal(corr::corrupt(batch, spec), batch));
}

TEST_CASE("every kind and severity stays in range and is deterministic") {
    const Tensor im = random_image(20, 20, 3);
    for (corr::Kind k : corr::all_kinds())
        for (int sev = 1; sev <= 5; ++sev) {
            const Tensor a = corr::corrupt_image(im, k, sev, 99);
            const Tensor b = corr::corrupt_image(im, k, sev, 99);
            REQUIRE(a.shape() == im.shape());
            CHECK(testutil::bitwise_equal(a, b));
            for (int i = 0; i < a.size(); ++i) {
                REQUIRE(a[i] >= 0.0);
                REQUIRE(a[i] <= 1.0);
            }
        }
}

TEST_CASE("different seeds decorrelate the stochastic kinds") {
    const Tensor im = random_image(16, 16, 40);
    for (corr::Kind k : {corr::Kind::gaussian_noise, corr::Kind::shot_noise,
                         corr::Kind::impulse_noise, corr::Kind::glass_blur, corr::Kind::snow,
                         corr::Kind::frost, corr::Kind::fog, corr::Kind::elastic}) {
        const Tensor a = corr::corrupt_image(im, k, 4, 1);
        const Tensor b = corr::corrupt_image(im, k, 4, 2);
        CHECK_FALSE(testutil::bitwise_equal(a, b));
    }
}

TEST_CASE("batch results match per-image results under the fanned seeds") {
    Tensor batch({4, 16, 16, 3});
    Rng rng(8);
    for (int i = 0; i < batch.size(); ++i) batch[i] = rng.uniform();
    for (corr::Kind k : {corr::Kind::gaussian_noise, corr::Kind::glass_blur, corr::Kind::jpeg}) {
        corr::CorruptionSpec spec{k, 3, 9};
        const Tensor out = corr::corrupt(batch, spec);
        for (int i = 0; i < 4; ++i) {
            Tensor im({16, 16, 3});
            std::copy_n(batch.data() + i * im.size(), im.size(), im.data());
            const Tensor one =
                corr::corrupt_image(im, k, 3, fan_seed(9, "corrupt-image", static_cast<uint64_t>(i)));
            Tensor row({16, 16, 3});
            std::copy_n(out.data() + i * im.size(), im.size(), row.data());
            CHECK(testutil::bitwise_equal(row, one));
        }
    }
}

TEST_CASE("brightness applies the offset published in the catalog") {
    const auto catalog = nlohmann::json::parse(corr::corruption_catalog_json());
    const auto offsets = catalog["kinds"]["brightness"]["offset"];
    REQUIRE(offsets.size() == 5);
    const Tensor im = constant_image(8, 8, 0.5);
    for (int sev = 1; sev <= 5; ++sev) {
        const real expect = std::min(1.0, 0.5 + offsets[sev - 1].get<real>());
        const Tensor out = corr::corrupt_image(im, corr::Kind::brightness, sev, 0);
        for (int i = 0; i < out.size(); ++i) CHECK(out[i] == expect);
    }
}

TEST_CASE("gaussian noise matches the tabulated sigma") {
    const auto catalog = nlohmann::json::parse(corr::corruption_catalog_json());
    const real sigma = catalog["kinds"]["gaussian_noise"]["sigma"][2].get<real>();
    const Tensor im = constant_image(58, 58, 0.5);
    const Tensor out = corr::corrupt_image(im, corr::Kind::gaussian_noise, 3, 123);
    real mean = 0.0, var = 0.0;
    for (int i = 0; i < out.size(); ++i) mean += out[i] - 0.5;
    mean /= out.size();
    for (int i = 0; i < out.size(); ++i)
        var += (out[i] - 0.5 - mean) * (out[i] - 0.5 - mean);
    var /= out.size() - 1;
    CHECK(std::abs(std::sqrt(var) - sigma) < 0.05 * sigma);
    CHECK(std::abs(mean) < 0.01);
}

TEST_CASE("impulse noise saturates the tabulated fraction of samples") {
    const auto catalog = nlohmann::json::parse(corr::corruption_catalog_json());
    const real frac = catalog["kinds"]["impulse_noise"]["fraction"][2].get<real>();
    const Tensor im = constant_image(58, 58, 0.5);
    const Tensor out = corr::corrupt_image(im, corr::Kind::impulse_noise, 3, 7);
    int zeros = 0, ones = 0, kept = 0;
    for (int i = 0; i < out.size(); ++i) {
        if (out[i] == 0.0) ++zeros;
        else if (out[i] == 1.0) ++ones;
        else {
            CHECK(out[i] == 0.5);
            ++kept;
        }
    }
    const real hit = real(zeros + ones) / out.size();
    CHECK(std::abs(hit - frac) < 0.01);
    CHECK(zeros > 0);
    CHECK(ones > 0);
    CHECK(kept > 0);
}

TEST_CASE("shot noise quantizes to counts and keeps the mean") {
    const auto catalog = nlohmann::json::parse(corr::corruption_catalog_json());
    const real lambda = catalog["kinds"]["shot_noise"]["lambda"][2].get<real>();
    const Tensor im = constant_image(58, 58, 0.5);
    const Tensor out = corr::corrupt_image(im, corr::Kind::shot_noise, 3, 11);
    for (int i = 0; i < out.size(); ++i) {
        if (out[i] == 1.0) continue; // clamped tail
        const real k = out[i] * lambda;
        CHECK(std::abs(k - std::lround(k)) < 1e-9);
    }
    CHECK(std::abs(mean_of(out) - 0.5) < 0.01);
}

TEST_CASE("pixelate produces constant blocks") {
    const Tensor im = random_image(32, 32, 5);
    const Tensor out = corr::corrupt_image(im, corr::Kind::pixelate, 5, 0);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            for (int c = 0; c < 3; ++c) {
                const int64_t i = (static_cast<int64_t>(y) * 32 + x) * 3 + c;
                const int64_t j = (static_cast<int64_t>(y - y % 4) * 32 + (x - x % 4)) * 3 + c;
                CHECK(out[i] == out[j]);
            }
    CHECK_FALSE(testutil::bitwise_equal(out, im));
}

TEST_CASE("contrast fixes constant images") {
    const Tensor half = constant_image(16, 16, 0.5);
    for (int sev = 1; sev <= 5; ++sev)
        CHECK(testutil::bitwise_equal(corr::corrupt_image(half, corr::Kind::contrast, sev, 0), half));
    const Tensor odd = constant_image(16, 16, 0.3);
    const Tensor out = corr::corrupt_image(odd, corr::Kind::contrast, 5, 0);
    for (int i = 0; i < out.size(); ++i) CHECK(std::abs(out[i] - 0.3) < 1e-12);
}

TEST_CASE("contrast pulls toward the per-channel mean") {
    const Tensor im = random_image(16, 16, 6);
    const Tensor out = corr::corrupt_image(im, corr::Kind::contrast, 4, 0);
    real mi[3] = {0, 0, 0}, mo[3] = {0, 0, 0};
    for (int i = 0; i < im.size(); ++i) {
        mi[i % 3] += im[i];
        mo[i % 3] += out[i];
    }
    real spread_in = 0.0, spread_out = 0.0;
    for (int i = 0; i < im.size(); ++i) {
        spread_in += std::abs(im[i] - mi[i % 3] / 256);
        spread_out += std::abs(out[i] - mo[i % 3] / 256);
    }
    CHECK(spread_out < 0.5 * spread_in);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(mo[c] - mi[c]) / 256 < 1e-9);
}

TEST_CASE("fog only brightens dark pixels") {
    const Tensor im = constant_image(16, 16, 0.5);
    const Tensor out = corr::corrupt_image(im, corr::Kind::fog, 3, 31);
    real lifted = 0.0;
    for (int i = 0; i < out.size(); ++i) {
        REQUIRE(out[i] >= 0.5);
        REQUIRE(out[i] <= 0.9 + 1e-12);
        lifted = std::max(lifted, out[i] - 0.5);
    }
    CHECK(lifted > 0.01);
}

TEST_CASE("snow whitens and adds streaks") {
    const auto catalog = nlohmann::json::parse(corr::corruption_catalog_json());
    const real whiten = catalog["kinds"]["snow"]["whiten"][4].get<real>();
    const Tensor im = constant_image(24, 24, 0.2);
    const Tensor out = corr::corrupt_image(im, corr::Kind::snow, 5, 13);
    const real base = (1.0 - whiten) * 0.2 + whiten * 0.85;
    for (int i = 0; i < out.size(); ++i) REQUIRE(out[i] >= base - 1e-12);
    CHECK(mean_of(out) > base + 1e-4); // some flakes actually landed
}

TEST_CASE("frost dims the base image and adds a bounded overlay") {
    const auto catalog = nlohmann::json::parse(corr::corruption_catalog_json());
    const real keep = catalog["kinds"]["frost"]["keep"][3].get<real>();
    const real overlay = catalog["kinds"]["frost"]["overlay"][3].get<real>();
    const Tensor im = constant_image(20, 20, 0.6);
    const Tensor out = corr::corrupt_image(im, corr::Kind::frost, 4, 17);
    for (int i = 0; i < out.size(); ++i) {
        REQUIRE(out[i] >= keep * 0.6 - 1e-12);
        REQUIRE(out[i] <= keep * 0.6 + overlay + 1e-12);
    }
    CHECK_FALSE(testutil::bitwise_equal(out, im));
}

TEST_CASE("kernel kinds roughly preserve the mean") {
    const Tensor im = random_image(24, 24, 44);
    const real m = mean_of(im);
    for (corr::Kind k : {corr::Kind::defocus_blur, corr::Kind::motion_blur, corr::Kind::glass_blur,
                         corr::Kind::zoom_blur}) {
        const Tensor out = corr::corrupt_image(im, k, 3, 50);
        CHECK(std::abs(mean_of(out) - m) < 0.02);
    }
}

TEST_CASE("elastic keeps values inside the input range and moves pixels") {
    const Tensor im = random_image(24, 24, 9);
    real lo = 1.0, hi = 0.0;
    for (int i = 0; i < im.size(); ++i) {
        lo = std::min(lo, im[i]);
        hi = std::max(hi, im[i]);
    }
    const Tensor out = corr::corrupt_image(im, corr::Kind::elastic, 5, 23);
    real diff = 0.0;
    for (int i = 0; i < out.size(); ++i) {
        REQUIRE(out[i] >= lo - 1e-12);
        REQUIRE(out[i] <= hi + 1e-12);
        diff = std::max(diff, std::abs(out[i] - im[i]));
    }
    CHECK(diff > 1e-3);
}

TEST_CASE("the jpeg kind is the real codec round trip") {
    const auto catalog = nlohmann::json::parse(corr::corruption_catalog_json());
    const int q = catalog["kinds"]["jpeg"]["quality"][0].get<int>();
    const Tensor im = random_image(17, 23, 73);
    const Tensor out = corr::corrupt_image(im, corr::Kind::jpeg, 1, 0);
    CHECK(testutil::bitwise_equal(out, jpeg::decode(jpeg::encode(im, q))));
    CHECK_FALSE(testutil::bitwise_equal(out, im));
}

TEST_CASE("the catalog is complete and stable") {
    const std::string a = corr::corruption_catalog_json();
    const std::string b = corr::corruption_catalog_json();
    CHECK(a == b);
    const auto catalog = nlohmann::json::parse(a);
    CHECK(catalog["version"].get<int>() == 1);
    CHECK(catalog["severities"].get<int>() == 5);
    CHECK(catalog["base_side"].get<int>() == 32);
    const auto& kinds = catalog["kinds"];
    REQUIRE(kinds.size() == corr::kKindCount);
    std::set<std::string> names;
    for (corr::Kind k : corr::all_kinds()) {
        const std::string name = corr::to_string(k);
        names.insert(name);
        REQUIRE(kinds.contains(name));
        for (const auto& [key, value] : kinds[name].items())
            if (value.is_array()) CHECK(value.size() == 5);
    }
    CHECK(names.size() == corr::kKindCount);
}

TEST_CASE("kind names round trip") {
    for (corr::Kind k : corr::all_kinds())
        CHECK(corr::kind_from_string(corr::to_string(k)) == k);
    CHECK_THROWS_WITH_AS(corr::kind_from_string("fogg"), doctest::Contains("unknown"),
                         std::invalid_argument);
}

TEST_CASE("bad arguments are rejected") {
    const Tensor im = constant_image(8, 8, 0.5);
    CHECK_THROWS_WITH_AS(corr::corrupt_image(im, corr::Kind::fog, -1, 0),
                         doctest::Contains("severity"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(corr::corrupt_image(im, corr::Kind::fog, 6, 0),
                         doctest::Contains("severity"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(corr::corrupt_image(im, static_cast<corr::Kind>(99), 3, 0),
                         doctest::Contains("kind"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(corr::corrupt_image(Tensor({4, 4}), corr::Kind::fog, 3, 0),
                         doctest::Contains("(H,W,3)"), std::invalid_argument);
    corr::CorruptionSpec spec{corr::Kind::fog, 3, 0};
    CHECK_THROWS_WITH_AS(corr::corrupt(im, spec), doctest::Contains("(B,H,W,3)"),
                         std::invalid_argument);
    spec.severity = 7;
    Tensor batch({1, 8, 8, 3});
    CHECK_THROWS_WITH_AS(corr::corrupt(batch, spec), doctest::Contains("severity"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(corr::post_fn(spec), doctest::Contains("severity"), std::invalid_argument);
}

TEST_CASE("the post hook folds both seeds into the corruption stream") {
    const Tensor im = random_image(12, 12, 2);
    corr::CorruptionSpec spec{corr::Kind::gaussian_noise, 2, 55};
    auto hook = corr::post_fn(spec);
    const Tensor a = hook(im, 1234);
    const Tensor b = corr::corrupt_image(im, spec.kind, spec.severity,
                                         fan_seed(55, "corrupt-post", 1234));
    CHECK(testutil::bitwise_equal(a, b));
    CHECK_FALSE(testutil::bitwise_equal(hook(im, 1234), hook(im, 1235)));
    corr::CorruptionSpec off{corr::Kind::gaussian_noise, 0, 55};
    CHECK(testutil::bitwise_equal(corr::post_fn(off)(im, 1), im));
}

} // TEST_SUITE
