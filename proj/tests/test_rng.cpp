#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "unadv/rng.hpp"

using unadv::Rng;

TEST_SUITE("rng") {

TEST_CASE("engine is the reference mt19937_64") {
    Rng r(42);
    CHECK(r.next_u64() == 13930160852258120406ull);
    CHECK(r.next_u64() == 11788048577503494824ull);
    CHECK(r.next_u64() == 13874630024467741450ull);
}

TEST_CASE("same seed, same stream") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    Rng c(8);
    bool all_equal = true;
    Rng a2(7);
    for (int i = 0; i < 100; ++i) all_equal = all_equal && (a2.uniform() == c.uniform());
    CHECK_FALSE(all_equal);
}

TEST_CASE("uniform bounds and mean") {
    Rng r(1);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);

    for (int i = 0; i < 1000; ++i) {
        const double v = r.uniform(-3.0, 2.0);
        CHECK(v >= -3.0);
        CHECK(v < 2.0);
    }
}

TEST_CASE("below covers the range uniformly enough") {
    Rng r(2);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const int64_t v = r.below(7);
        REQUIRE(v >= 0);
        REQUIRE(v < 7);
        ++counts[static_cast<size_t>(v)];
    }
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("normal moments") {
    Rng r(3);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        REQUIRE(std::isfinite(x));
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
    Rng r2(4);
    const double y = r2.normal(10.0, 0.5);
    CHECK(y > 5.0);
    CHECK(y < 15.0);
}

TEST_CASE("poisson moments") {
    Rng r(5);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const int k = r.poisson(3.0);
        REQUIRE(k >= 0);
        sum += k;
        sq += static_cast<double>(k) * k;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean - 3.0) < 0.05);
    CHECK(std::abs(var - 3.0) < 0.1);
}

TEST_CASE("fnv1a64 reference vectors") {
    CHECK(unadv::fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(unadv::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(unadv::fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("mix64 reference values") {
    CHECK(unadv::mix64(0) == 0xe220a8397b1dcdafull);
    CHECK(unadv::mix64(1) == 0x910a2dec89025cc1ull);
}

TEST_CASE("fan_seed separates stages and indices") {
    const uint64_t top = 1234;
    CHECK(unadv::fan_seed(top, "train") == unadv::fan_seed(top, "train"));
    CHECK(unadv::fan_seed(top, "train") != unadv::fan_seed(top, "eval"));
    CHECK(unadv::fan_seed(top, "train", 0) != unadv::fan_seed(top, "train", 1));
    CHECK(unadv::fan_seed(top, "train") != unadv::fan_seed(top + 1, "train"));

    std::set<uint64_t> seen;
    for (uint64_t i = 0; i < 1000; ++i) seen.insert(unadv::fan_seed(top, "images", i));
    CHECK(seen.size() == 1000);
}

} // TEST_SUITE
