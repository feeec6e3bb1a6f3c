#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "unadv/compositor.hpp"
#include "unadv/image_io.hpp"

using namespace unadv;
using namespace unadv::comp;

namespace {

constexpr real kPi = AffineRanges::kPi;

std::filesystem::path tmp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "unadv_compositor_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

Tensor ones_mask(int n) { return Tensor({n, n}, 1.0); }

// Zero-pads an (n,n,3) patch into the center of an (m,m,3) canvas. Requires
// matching parity so the offset is integral.
Tensor zero_pad_center(const Tensor& patch, int m) {
    const int n = patch.shape()[0];
    const int off = (m - n) / 2;
    Tensor out({m, m, 3});
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            for (int c = 0; c < 3; ++c)
                out[(static_cast<int64_t>(y + off) * m + (x + off)) * 3 + c] =
                    patch[(static_cast<int64_t>(y) * n + x) * 3 + c];
    return out;
}

AffineRanges default_ranges(int n, int m, uint64_t seed = 0) {
    AffineRanges r;
    r.patch_side = n;
    r.canvas_side = m;
    r.seed = seed;
    return r;
}

} // namespace

TEST_SUITE("compositor") {

TEST_CASE("patch init lands in [0.4,0.6] with a full mask") {
    PatchParams p = PatchParams::make(6, 3, 99);
    REQUIRE(p.values.shape() == std::vector<int>{6, 6, 3});
    REQUIRE(p.mask.shape() == std::vector<int>{6, 6});
    CHECK(p.target_class == 3);
    for (int i = 0; i < p.values.size(); ++i) {
        CHECK(p.values[i] >= 0.4);
        CHECK(p.values[i] < 0.6);
    }
    for (int i = 0; i < p.mask.size(); ++i) CHECK(p.mask[i] == 1.0);
    CHECK(testutil::bitwise_equal(PatchParams::make(6, 3, 99).values, p.values));
    CHECK_FALSE(testutil::bitwise_equal(PatchParams::make(6, 3, 100).values, p.values));
    CHECK_NOTHROW(validate_patch(p));

    CHECK_THROWS_AS(PatchParams::make(0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(PatchParams::make(4, -1, 1), std::invalid_argument);

    PatchParams bad = p;
    bad.values[0] = 1.5;
    CHECK_THROWS_AS(validate_patch(bad), std::invalid_argument);
    bad = p;
    bad.mask[0] = 0.5;
    CHECK_THROWS_AS(validate_patch(bad), std::invalid_argument);
}

TEST_CASE("sample_affine draws stay in range and respect containment") {
    AffineRanges r = default_ranges(10, 32);
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        AffineTransform t = sample_affine(r, rng);
        CHECK(t.rotation >= r.rot_lo);
        CHECK(t.rotation < r.rot_hi);
        CHECK(t.scale >= r.scale_lo);
        CHECK(t.scale < r.scale_hi);
        const real slack = 0.5 * 32 - bbox_half_extent(10, t.rotation, t.scale);
        CHECK(std::abs(t.tx) <= slack);
        CHECK(std::abs(t.ty) <= slack);
    }
}

TEST_CASE("sample_affine is deterministic per seed") {
    AffineRanges r = default_ranges(7, 32, 1234);
    Rng a = r.make_rng();
    Rng b = r.make_rng();
    for (int i = 0; i < 50; ++i) {
        AffineTransform ta = sample_affine(r, a);
        AffineTransform tb = sample_affine(r, b);
        CHECK(ta.rotation == tb.rotation);
        CHECK(ta.scale == tb.scale);
        CHECK(ta.tx == tb.tx);
        CHECK(ta.ty == tb.ty);
    }
    Rng c(4321);
    AffineTransform tc = sample_affine(r, c);
    Rng d = r.make_rng();
    AffineTransform td = sample_affine(r, d);
    CHECK(tc.rotation != td.rotation);
}

TEST_CASE("sampled rotation/scale means match uniform expectation") {
    AffineRanges r = default_ranges(10, 32);
    Rng rng(2024);
    const int n = 10000;
    real rot_sum = 0.0, scale_sum = 0.0, tx_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        AffineTransform t = sample_affine(r, rng);
        rot_sum += t.rotation;
        scale_sum += t.scale;
        tx_sum += t.tx;
    }
    // three-sigma bands for the sample mean of U[lo,hi]: (hi-lo)/sqrt(12n)
    CHECK(std::abs(rot_sum / n) < 3.0 * (2.0 * kPi) / std::sqrt(12.0 * n));
    CHECK(std::abs(scale_sum / n - 1.0) < 3.0 * 0.6 / std::sqrt(12.0 * n));
    CHECK(std::abs(tx_sum / n) < 0.3); // |tx| <= 16, so se < 0.093
}

TEST_CASE("degenerate ranges produce exact values") {
    AffineRanges r = default_ranges(5, 32);
    r.rot_lo = r.rot_hi = 0.3;
    r.scale_lo = r.scale_hi = 1.1;
    Rng rng(1);
    AffineTransform t = sample_affine(r, rng);
    CHECK(t.rotation == 0.3);
    CHECK(t.scale == 1.1);
}

TEST_CASE("infeasible ranges are rejected") {
    AffineRanges r = default_ranges(30, 32);
    CHECK_FALSE(ranges_feasible(r)); // 30*1.3*sqrt(2)/2 = 27.6 > 16
    Rng rng(1);
    CHECK_THROWS_WITH_AS(sample_affine(r, rng), doctest::Contains("cannot fit"),
                         std::invalid_argument);

    CHECK(ranges_feasible(default_ranges(10, 32)));
    AffineRanges tight = default_ranges(30, 32);
    tight.rot_lo = tight.rot_hi = 0.0;
    tight.scale_lo = tight.scale_hi = 1.0;
    CHECK(ranges_feasible(tight)); // axis-aligned unit scale just fits

    AffineRanges bad = default_ranges(5, 32);
    bad.scale_lo = 0.0;
    CHECK_THROWS_AS(ranges_feasible(bad), std::invalid_argument);
    bad = default_ranges(5, 32);
    bad.rot_lo = 1.0;
    bad.rot_hi = 0.0;
    CHECK_THROWS_AS(sample_affine(bad, rng), std::invalid_argument);
}

TEST_CASE("identity warp reproduces the zero-padded patch exactly") {
    for (int n : {4, 5}) {
        const int m = n == 4 ? 8 : 9; // matching parity keeps the grids aligned
        Rng rng(n);
        Tensor patch = testutil::random_tensor({n, n, 3}, rng, 0.0, 1.0);
        Warped w = warp(patch, ones_mask(n), identity_transform(), m);
        CHECK(testutil::bitwise_equal(w.values, zero_pad_center(patch, m)));
        const int off = (m - n) / 2;
        for (int y = 0; y < m; ++y)
            for (int x = 0; x < m; ++x) {
                const bool inside = y >= off && y < off + n && x >= off && x < off + n;
                CHECK(w.mask[y * m + x] == (inside ? 1.0 : 0.0));
            }
    }
}

TEST_CASE("integer translation shifts the patch exactly") {
    const int n = 4, m = 10;
    Rng rng(5);
    Tensor patch = testutil::random_tensor({n, n, 3}, rng, 0.0, 1.0);
    AffineTransform t;
    t.tx = 2.0;
    t.ty = -1.0;
    Warped w = warp(patch, ones_mask(n), t, m);
    const int off = (m - n) / 2; // 3
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            for (int c = 0; c < 3; ++c)
                CHECK(w.values[(static_cast<int64_t>(y + off - 1) * m + (x + off + 2)) * 3 + c] ==
                      patch[(static_cast<int64_t>(y) * n + x) * 3 + c]);
    real mass = 0.0;
    for (int i = 0; i < w.mask.size(); ++i) mass += w.mask[i];
    CHECK(mass == 16.0);
}

TEST_CASE("rotation by 2*pi matches identity within 1e-5") {
    const int n = 5;
    Rng rng(9);
    Tensor patch = testutil::random_tensor({n, n, 3}, rng, 0.0, 1.0);
    Tensor mask = ones_mask(n);
    mask[2 * n + 2] = 0.0; // a hole, so the mask path is exercised too
    AffineTransform full;
    full.rotation = 2.0 * kPi;
    for (int m : {16, 17}) {
        Warped a = warp(patch, mask, identity_transform(), m);
        Warped b = warp(patch, mask, full, m);
        if (m % 2 == 1) // aligned grids keep mask samples away from the 0.5 edge
            CHECK(testutil::bitwise_equal(a.mask, b.mask));
        real worst = 0.0;
        for (int i = 0; i < a.values.size(); ++i)
            worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
        CHECK(worst <= 1e-5);
    }
}

TEST_CASE("quarter-turn warp permutes pixels") {
    const int n = 5, m = 5;
    Rng rng(13);
    Tensor patch = testutil::random_tensor({n, n, 3}, rng, 0.0, 1.0);
    AffineTransform t;
    t.rotation = kPi / 2.0;
    Warped w = warp(patch, ones_mask(n), t, m);
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x) {
            CHECK(w.mask[y * m + x] == 1.0);
            for (int c = 0; c < 3; ++c)
                CHECK(w.values[(static_cast<int64_t>(y) * m + x) * 3 + c] ==
                      doctest::Approx(patch[(static_cast<int64_t>(n - 1 - x) * n + y) * 3 + c])
                          .epsilon(1e-12));
        }
}

TEST_CASE("warp masks follow the stencil, not the value field") {
    const int n = 4, m = 8;
    Tensor patch({n, n, 3}, 0.9);
    Tensor mask = ones_mask(n);
    mask[0] = 0.0; // knock out one corner pixel
    Warped w = warp(patch, mask, identity_transform(), m);
    const int off = 2;
    CHECK(w.mask[off * m + off] == 0.0);
    CHECK(w.mask[off * m + off + 1] == 1.0);
    real mass = 0.0;
    for (int i = 0; i < w.mask.size(); ++i) mass += w.mask[i];
    CHECK(mass == 15.0);
}

TEST_CASE("warp rejects bad inputs") {
    Tensor patch({4, 4, 3}, 0.5);
    Tensor mask = ones_mask(4);

    AffineTransform big;
    big.scale = 3.0;
    CHECK_THROWS_WITH_AS(warp(patch, mask, big, 8), doctest::Contains("does not fit"),
                         std::invalid_argument);
    AffineTransform shoved;
    shoved.tx = 3.0;
    CHECK_THROWS_AS(warp(patch, mask, shoved, 8), std::invalid_argument);
    AffineTransform flat;
    flat.scale = 0.0;
    CHECK_THROWS_AS(warp(patch, mask, flat, 8), std::invalid_argument);

    Tensor soft = mask;
    soft[3] = 0.25;
    CHECK_THROWS_AS(warp(patch, soft, identity_transform(), 8), std::invalid_argument);
    CHECK_THROWS_AS(warp(Tensor({4, 4}), mask, identity_transform(), 8), std::invalid_argument);
    CHECK_THROWS_AS(warp(patch, Tensor({5, 5}, 1.0), identity_transform(), 8),
                    std::invalid_argument);
}

TEST_CASE("composite selects per pixel and preserves the rest bitwise") {
    const int m = 6;
    Rng rng(21);
    Tensor image = testutil::random_tensor({m, m, 3}, rng, 0.0, 1.0);
    Tensor wv = testutil::random_tensor({m, m, 3}, rng, 0.0, 1.0);
    Tensor wm({m, m});
    for (int i = 0; i < wm.size(); ++i) wm[i] = rng.below(2) ? 1.0 : 0.0;

    Tensor out = composite(image, wv, wm);
    for (int i = 0; i < m * m; ++i)
        for (int c = 0; c < 3; ++c)
            CHECK(out[i * 3 + c] == (wm[i] == 1.0 ? wv[i * 3 + c] : image[i * 3 + c]));

    SUBCASE("all-zero mask returns the image bitwise") {
        CHECK(testutil::bitwise_equal(composite(image, wv, Tensor({m, m})), image));
    }
    SUBCASE("all-one mask returns the warped values") {
        CHECK(testutil::bitwise_equal(composite(image, wv, Tensor({m, m}, 1.0)), wv));
    }
    SUBCASE("rank-4 image keeps its shape") {
        Tensor im4({1, m, m, 3});
        for (int i = 0; i < im4.size(); ++i) im4[i] = image[i];
        Tensor out4 = composite(im4, wv, wm);
        REQUIRE(out4.shape() == std::vector<int>{1, m, m, 3});
        for (int i = 0; i < out4.size(); ++i) CHECK(out4[i] == out[i]);
    }
    SUBCASE("non-binary mask rejected") {
        Tensor soft = wm;
        soft[0] = 0.5;
        CHECK_THROWS_WITH_AS(composite(image, wv, soft), doctest::Contains("expected exactly 0 or 1"),
                             std::invalid_argument);
    }
    SUBCASE("shape mismatches rejected") {
        CHECK_THROWS_AS(composite(image, Tensor({m, m + 1, 3}), wm), std::invalid_argument);
        CHECK_THROWS_AS(composite(Tensor({m, m, 1}), wv, wm), std::invalid_argument);
        CHECK_THROWS_AS(composite(image, wv, Tensor({m + 1, m + 1})), std::invalid_argument);
    }
}

TEST_CASE("half-mask composite has the closed form") {
    const int n = 4, m = 8;
    Tensor image({m, m, 3}, 0.25);
    Tensor patch({n, n, 3}, 0.75);
    Tensor mask({n, n});
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n / 2; ++x) mask[y * n + x] = 1.0; // left half on
    Warped w = warp(patch, mask, identity_transform(), m);
    Tensor out = composite(image, w.values, w.mask);
    int hi = 0, lo = 0;
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x)
            for (int c = 0; c < 3; ++c) {
                const real v = out[(static_cast<int64_t>(y) * m + x) * 3 + c];
                const bool in_left_half = y >= 2 && y < 6 && x >= 2 && x < 4;
                CHECK(v == (in_left_half ? 0.75 : 0.25));
                (v == 0.75 ? hi : lo)++;
            }
    CHECK(hi == 8 * 3);
    CHECK(lo == (m * m - 8) * 3);
}

TEST_CASE("warp_op gradients match finite differences") {
    const int n = 5, m = 16;
    Rng rng(31);
    Tensor patch0 = testutil::random_tensor({n, n, 3}, rng, 0.1, 0.9);
    Tensor mask = ones_mask(n);
    mask[7] = 0.0;
    AffineTransform t;
    t.rotation = 0.7;
    t.scale = 1.15;
    t.tx = 1.3;
    t.ty = -2.1;
    Tensor proj = testutil::random_tensor({m, m, 3}, rng);

    auto loss_of = [&](const Tensor& p) {
        ad::Tape tape;
        auto pr = tape.input(p, true);
        auto w = warp_op(tape, pr, mask, t, m);
        return tape.value(tape.sum(tape.mul(w, tape.input(proj))))[0];
    };

    ad::Tape tape;
    auto pr = tape.input(patch0, true);
    Tensor got_mask;
    auto w = warp_op(tape, pr, mask, t, m, &got_mask);
    auto loss = tape.sum(tape.mul(w, tape.input(proj)));
    Tensor grad = tape.backward(loss, {pr})[0];

    CHECK(testutil::bitwise_equal(got_mask, warp(patch0, mask, t, m).mask));
    Tensor fd = testutil::fd_gradient(patch0, loss_of);
    CHECK(testutil::max_rel_err(grad, fd) <= 1e-3);
}

TEST_CASE("composite path gradients match finite differences and stay local") {
    const int n = 4, m = 12;
    Rng rng(41);
    Tensor patch0 = testutil::random_tensor({n, n, 3}, rng, 0.1, 0.9);
    Tensor mask = ones_mask(n);
    Tensor image = testutil::random_tensor({m, m, 3}, rng, 0.0, 1.0);
    AffineTransform t;
    t.rotation = -0.4;
    t.scale = 0.9;
    t.tx = -1.7;
    t.ty = 0.6;
    Tensor proj = testutil::random_tensor({m, m, 3}, rng);

    auto build = [&](ad::Tape& tape, const Tensor& p, Tensor* wm_out) {
        auto pr = tape.input(p, true);
        Tensor wm;
        auto wv = warp_op(tape, pr, mask, t, m, &wm);
        if (wm_out) *wm_out = wm;
        auto out = composite_op(tape, image, wv, wm);
        return std::pair{pr, out};
    };

    auto loss_of = [&](const Tensor& p) {
        ad::Tape tape;
        auto res = build(tape, p, nullptr);
        return tape.value(tape.sum(tape.mul(res.second, tape.input(proj))))[0];
    };

    ad::Tape tape;
    Tensor wm;
    auto [pr, out] = build(tape, patch0, &wm);
    auto loss = tape.sum(tape.mul(out, tape.input(proj)));
    Tensor grad = tape.backward(loss, {pr})[0];
    Tensor fd = testutil::fd_gradient(patch0, loss_of);
    CHECK(testutil::max_rel_err(grad, fd) <= 1e-3);

    // Project onto masked-off pixels only: nothing may reach the patch.
    Tensor off_proj({m, m, 3});
    for (int i = 0; i < m * m; ++i)
        if (wm[i] == 0.0)
            for (int c = 0; c < 3; ++c) off_proj[i * 3 + c] = 1.0;
    ad::Tape tape2;
    auto [pr2, out2] = build(tape2, patch0, nullptr);
    auto loss2 = tape2.sum(tape2.mul(out2, tape2.input(off_proj)));
    Tensor grad2 = tape2.backward(loss2, {pr2})[0];
    for (int i = 0; i < grad2.size(); ++i) CHECK(grad2[i] == 0.0);
}

TEST_CASE("composite_op gradient is the mask, exactly") {
    const int m = 6;
    Rng rng(51);
    Tensor image = testutil::random_tensor({m, m, 3}, rng, 0.0, 1.0);
    Tensor wv0 = testutil::random_tensor({m, m, 3}, rng, 0.0, 1.0);
    Tensor wm({m, m});
    for (int i = 0; i < wm.size(); ++i) wm[i] = rng.below(2) ? 1.0 : 0.0;
    Tensor proj = testutil::random_tensor({m, m, 3}, rng);

    ad::Tape tape;
    auto wr = tape.input(wv0, true);
    auto out = composite_op(tape, image, wr, wm);
    auto loss = tape.sum(tape.mul(out, tape.input(proj)));
    Tensor grad = tape.backward(loss, {wr})[0];
    for (int i = 0; i < grad.size(); ++i) CHECK(grad[i] == wm[i / 3] * proj[i]);
}

TEST_CASE("composite_batch matches stacked per-sample ops") {
    const int n = 4, m = 12, B = 3;
    Rng rng(61);
    Tensor patch0 = testutil::random_tensor({n, n, 3}, rng, 0.1, 0.9);
    Tensor mask = ones_mask(n);
    mask[5] = 0.0;
    Tensor images = testutil::random_tensor({B, m, m, 3}, rng, 0.0, 1.0);
    AffineRanges r = default_ranges(n, m);
    Rng draw(62);
    std::vector<AffineTransform> tfs;
    for (int b = 0; b < B; ++b) tfs.push_back(sample_affine(r, draw));
    Tensor proj = testutil::random_tensor({B, m, m, 3}, rng);

    ad::Tape fused;
    auto pf = fused.input(patch0, true);
    auto outf = composite_batch(fused, pf, mask, images, tfs);
    auto lossf = fused.sum(fused.mul(outf, fused.input(proj)));
    Tensor gradf = fused.backward(lossf, {pf})[0];

    ad::Tape stacked;
    auto ps = stacked.input(patch0, true);
    ad::Tape::Ref loss_acc;
    Tensor outf_val = fused.value(outf);
    for (int b = 0; b < B; ++b) {
        Tensor im({m, m, 3}), pj({m, m, 3});
        for (int i = 0; i < im.size(); ++i) {
            im[i] = images[static_cast<int64_t>(b) * m * m * 3 + i];
            pj[i] = proj[static_cast<int64_t>(b) * m * m * 3 + i];
        }
        Tensor wm;
        auto wv = warp_op(stacked, ps, mask, tfs[b], m, &wm);
        auto ob = composite_op(stacked, im, wv, wm);
        for (int i = 0; i < im.size(); ++i)
            CHECK(stacked.value(ob)[i] == outf_val[static_cast<int64_t>(b) * m * m * 3 + i]);
        auto lb = stacked.sum(stacked.mul(ob, stacked.input(pj)));
        loss_acc = b == 0 ? lb : stacked.add(loss_acc, lb);
    }
    Tensor grads = stacked.backward(loss_acc, {ps})[0];
    CHECK(stacked.value(loss_acc)[0] == doctest::Approx(fused.value(lossf)[0]).epsilon(1e-12));
    CHECK(testutil::max_rel_err(gradf, grads) <= 1e-12);

    auto loss_of = [&](const Tensor& p) {
        ad::Tape tape;
        auto pr = tape.input(p, true);
        auto out = composite_batch(tape, pr, mask, images, tfs);
        return tape.value(tape.sum(tape.mul(out, tape.input(proj))))[0];
    };
    Tensor fd = testutil::fd_gradient(patch0, loss_of);
    CHECK(testutil::max_rel_err(gradf, fd) <= 1e-3);

    CHECK_THROWS_AS(composite_batch(fused, pf, mask, images, {tfs[0]}), std::invalid_argument);
}

TEST_CASE("patch archive round-trips exactly") {
    auto dir = tmp_dir();
    PatchParams p = PatchParams::make(5, 2, 77);
    p.values = img::quantize8(p.values);
    for (int i = 0; i < 5; ++i) p.mask[i] = 0.0; // notch the first row
    const std::string ppm = (dir / "patch.ppm").string();
    const std::string sidecar = (dir / "patch.json").string();
    save_patch(p, ppm, sidecar, "trained", 0xdeadbeefcafef00dull, 4242);

    PatchArchive a = load_patch(ppm, sidecar);
    CHECK(testutil::bitwise_equal(a.patch.values, p.values));
    CHECK(testutil::bitwise_equal(a.patch.mask, p.mask));
    CHECK(a.patch.target_class == 2);
    CHECK(a.kind == "trained");
    CHECK(a.training_config_digest == 0xdeadbeefcafef00dull);
    CHECK(a.seed == 4242);

    std::ifstream in(sidecar);
    auto j = nlohmann::json::parse(in);
    CHECK(j.at("n") == 5);
    CHECK(j.at("training_config_digest") == "deadbeefcafef00d");
    CHECK(j.at("seed") == "0000000000001092");
}

TEST_CASE("patch archive rejects corrupt sidecars") {
    auto dir = tmp_dir();
    PatchParams p = PatchParams::make(4, 1, 5);
    p.values = img::quantize8(p.values);
    const std::string ppm = (dir / "bad.ppm").string();
    const std::string sidecar = (dir / "bad.json").string();
    save_patch(p, ppm, sidecar, "trained", 1, 2);

    auto rewrite = [&](const std::function<void(nlohmann::json&)>& mutate) {
        std::ifstream in(sidecar);
        auto j = nlohmann::json::parse(in);
        in.close();
        mutate(j);
        std::ofstream out(sidecar);
        out << j.dump();
    };

    rewrite([](nlohmann::json& j) { j["n"] = 7; });
    CHECK_THROWS_WITH_AS(load_patch(ppm, sidecar), doctest::Contains("does not match"),
                         std::runtime_error);

    save_patch(p, ppm, sidecar, "trained", 1, 2);
    rewrite([](nlohmann::json& j) { j["mask"][3] = 2; });
    CHECK_THROWS_WITH_AS(load_patch(ppm, sidecar), doctest::Contains("expected 0 or 1"),
                         std::runtime_error);

    save_patch(p, ppm, sidecar, "trained", 1, 2);
    rewrite([](nlohmann::json& j) { j["seed"] = "xyz"; });
    CHECK_THROWS_WITH_AS(load_patch(ppm, sidecar), doctest::Contains("hex"), std::runtime_error);

    save_patch(p, ppm, sidecar, "trained", 1, 2);
    rewrite([](nlohmann::json& j) { j.erase("kind"); });
    CHECK_THROWS_AS(load_patch(ppm, sidecar), std::runtime_error);

    {
        std::ofstream out(sidecar);
        out << "{ not json";
    }
    CHECK_THROWS_WITH_AS(load_patch(ppm, sidecar), doctest::Contains("bad JSON"),
                         std::runtime_error);
    CHECK_THROWS_AS(load_patch((dir / "nope.ppm").string(), sidecar), std::runtime_error);
}

} // TEST_SUITE
