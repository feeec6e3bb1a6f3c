#include "unadv/compositor.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "unadv/image_io.hpp"

namespace unadv::comp {

namespace {

constexpr real kPi = AffineRanges::kPi;
constexpr real kHalfPi = kPi / 2.0;
constexpr real kQuarterPi = kPi / 4.0;
constexpr real kSqrt2 = 1.41421356237309504880;
// Slack for containment checks so boundary draws from sample_affine are
// never rejected by warp due to rounding.
constexpr real kFitTol = 1e-6;

void require_binary(const Tensor& mask, const char* where) {
    for (int64_t i = 0; i < mask.size(); ++i)
        if (mask[i] != 0.0 && mask[i] != 1.0)
            throw std::invalid_argument(std::string(where) + ": mask entry " + std::to_string(i) +
                                        " is " + std::to_string(mask[i]) + ", expected exactly 0 or 1");
}

int patch_side_of(const Tensor& values, const Tensor& mask, const char* where) {
    const auto& vs = values.shape();
    if (vs.size() != 3 || vs[0] != vs[1] || vs[2] != 3 || vs[0] < 1)
        throw std::invalid_argument(std::string(where) + ": patch values must be (n,n,3), got " +
                                    values.shape_str());
    const auto& ms = mask.shape();
    if (ms.size() != 2 || ms[0] != vs[0] || ms[1] != vs[0])
        throw std::invalid_argument(std::string(where) + ": mask must be (n,n) matching values, got " +
                                    mask.shape_str() + " for values " + values.shape_str());
    return vs[0];
}

void validate_transform(const AffineTransform& t, const char* where) {
    if (!std::isfinite(t.rotation) || !std::isfinite(t.scale) || !std::isfinite(t.tx) ||
        !std::isfinite(t.ty) || !(t.scale > 0.0))
        throw std::invalid_argument(std::string(where) + ": transform must be finite with scale > 0");
}

void check_fit(int n, int m, const AffineTransform& t, const char* where) {
    const real h = bbox_half_extent(n, t.rotation, t.scale);
    const real half = 0.5 * m;
    if (h + std::abs(t.tx) > half + kFitTol || h + std::abs(t.ty) > half + kFitTol)
        throw std::invalid_argument(std::string(where) + ": transformed patch (half-extent " +
                                    std::to_string(h) + ", translation " + std::to_string(t.tx) + "," +
                                    std::to_string(t.ty) + ") does not fit a " + std::to_string(m) +
                                    "px canvas");
}

// Canvas pixel centers -> patch pixel coordinates: the inverse of
// q = R(rot) * scale * p + t, both measured from the respective grid centers.
struct InverseMap {
    real c, s, inv_scale, tx, ty, cn, cm;

    InverseMap(const AffineTransform& t, int n, int m)
        : c(std::cos(t.rotation)),
          s(std::sin(t.rotation)),
          inv_scale(1.0 / t.scale),
          tx(t.tx),
          ty(t.ty),
          cn(0.5 * (n - 1)),
          cm(0.5 * (m - 1)) {}

    void operator()(int xc, int yc, real& u, real& v) const {
        const real dx = (xc - cm) - tx;
        const real dy = (yc - cm) - ty;
        u = (c * dx + s * dy) * inv_scale + cn;
        v = (-s * dx + c * dy) * inv_scale + cn;
    }
};

// Bilinear tap: pixel index, weight. Out-of-range taps are dropped (zero
// fill), so a sample returns at most four taps.
struct Taps {
    int idx[4];
    real w[4];
    int count = 0;
};

Taps taps_at(real v, real u, int n) {
    Taps t;
    const real v0f = std::floor(v), u0f = std::floor(u);
    const int v0 = static_cast<int>(v0f), u0 = static_cast<int>(u0f);
    const real fv = v - v0f, fu = u - u0f;
    for (int dy = 0; dy < 2; ++dy) {
        const int yy = v0 + dy;
        if (yy < 0 || yy >= n) continue;
        const real wy = dy ? fv : 1.0 - fv;
        for (int dx = 0; dx < 2; ++dx) {
            const int xx = u0 + dx;
            if (xx < 0 || xx >= n) continue;
            t.idx[t.count] = yy * n + xx;
            t.w[t.count] = wy * (dx ? fu : 1.0 - fu);
            ++t.count;
        }
    }
    return t;
}

// Accumulates d(loss)/d(patch values) for one canvas, gated by an optional
// per-pixel keep mask (used by the composite paths). grad points at an
// (m,m,3) block.
void scatter_patch_grad(Tensor& dpatch, const real* grad, const Tensor* keep,
                        const AffineTransform& t, int n, int m) {
    const InverseMap inv(t, n, m);
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x) {
            if (keep && (*keep)[y * m + x] == 0.0) continue;
            real u, v;
            inv(x, y, u, v);
            const Taps tp = taps_at(v, u, n);
            const real* g = grad + (static_cast<int64_t>(y) * m + x) * 3;
            for (int k = 0; k < tp.count; ++k)
                for (int c = 0; c < 3; ++c) dpatch[tp.idx[k] * 3 + c] += tp.w[k] * g[c];
        }
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

uint64_t parse_hex64(const std::string& s, const char* field) {
    if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw std::runtime_error(std::string("load_patch: field '") + field +
                                 "' must be 16 lowercase hex digits, got '" + s + "'");
    return std::strtoull(s.c_str(), nullptr, 16);
}

} // namespace

PatchParams PatchParams::make(int n, int target_class, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("PatchParams: side must be >= 1, got " + std::to_string(n));
    if (target_class < 0)
        throw std::invalid_argument("PatchParams: target_class must be >= 0, got " +
                                    std::to_string(target_class));
    PatchParams p;
    p.values = Tensor({n, n, 3});
    Rng rng(seed);
    for (int64_t i = 0; i < p.values.size(); ++i) p.values[i] = rng.uniform(0.4, 0.6);
    p.mask = Tensor({n, n}, 1.0);
    p.target_class = target_class;
    return p;
}

void validate_patch(const PatchParams& p) {
    patch_side_of(p.values, p.mask, "validate_patch");
    require_binary(p.mask, "validate_patch");
    for (int64_t i = 0; i < p.values.size(); ++i)
        if (!(p.values[i] >= 0.0 && p.values[i] <= 1.0))
            throw std::invalid_argument("validate_patch: value " + std::to_string(p.values[i]) +
                                        " at index " + std::to_string(i) + " outside [0,1]");
    if (p.target_class < 0)
        throw std::invalid_argument("validate_patch: target_class must be >= 0, got " +
                                    std::to_string(p.target_class));
}

AffineTransform identity_transform() { return AffineTransform{}; }

real bbox_half_extent(int n, real rotation, real scale) {
    return 0.5 * n * scale * (std::abs(std::cos(rotation)) + std::abs(std::sin(rotation)));
}

namespace {

void validate_ranges(const AffineRanges& r) {
    if (r.patch_side < 1 || r.canvas_side < 1)
        throw std::invalid_argument("AffineRanges: patch_side and canvas_side must be >= 1, got " +
                                    std::to_string(r.patch_side) + " and " +
                                    std::to_string(r.canvas_side));
    if (!std::isfinite(r.rot_lo) || !std::isfinite(r.rot_hi) || r.rot_lo > r.rot_hi)
        throw std::invalid_argument("AffineRanges: rotation range must be finite with lo <= hi");
    if (!std::isfinite(r.scale_lo) || !std::isfinite(r.scale_hi) || !(r.scale_lo > 0.0) ||
        r.scale_lo > r.scale_hi)
        throw std::invalid_argument("AffineRanges: scale range must be positive with lo <= hi");
}

// max over [lo,hi] of |cos t| + |sin t|. The function has period pi/2 with
// peaks sqrt(2) at pi/4 + k*pi/2 and no other interior maxima, so the max is
// sqrt(2) if the interval contains a peak and an endpoint value otherwise.
real worst_bbox_factor(real lo, real hi) {
    if (hi - lo >= kHalfPi) return kSqrt2;
    const real k = std::ceil((lo - kQuarterPi) / kHalfPi);
    if (kQuarterPi + k * kHalfPi <= hi) return kSqrt2;
    const auto f = [](real t) { return std::abs(std::cos(t)) + std::abs(std::sin(t)); };
    return std::max(f(lo), f(hi));
}

} // namespace

bool ranges_feasible(const AffineRanges& r) {
    validate_ranges(r);
    const real h = 0.5 * r.patch_side * r.scale_hi * worst_bbox_factor(r.rot_lo, r.rot_hi);
    return h <= 0.5 * r.canvas_side + kFitTol;
}

AffineTransform sample_affine(const AffineRanges& r, Rng& rng) {
    if (!ranges_feasible(r))
        throw std::invalid_argument(
            "sample_affine: a " + std::to_string(r.patch_side) + "px patch cannot fit a " +
            std::to_string(r.canvas_side) + "px canvas over the requested rotation/scale ranges");
    AffineTransform t;
    t.rotation = rng.uniform(r.rot_lo, r.rot_hi);
    t.scale = rng.uniform(r.scale_lo, r.scale_hi);
    real tmax = 0.5 * r.canvas_side - bbox_half_extent(r.patch_side, t.rotation, t.scale);
    if (tmax < 0.0) tmax = 0.0;
    t.tx = rng.uniform(-tmax, tmax);
    t.ty = rng.uniform(-tmax, tmax);
    return t;
}

Warped warp(const Tensor& values, const Tensor& mask, const AffineTransform& t, int m) {
    const int n = patch_side_of(values, mask, "warp");
    require_binary(mask, "warp");
    if (m < 1) throw std::invalid_argument("warp: canvas side must be >= 1, got " + std::to_string(m));
    validate_transform(t, "warp");
    check_fit(n, m, t, "warp");

    Warped out{Tensor({m, m, 3}), Tensor({m, m})};
    const InverseMap inv(t, n, m);
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x) {
            real u, v;
            inv(x, y, u, v);
            const Taps tp = taps_at(v, u, n);
            real mval = 0.0;
            real rgb[3] = {0.0, 0.0, 0.0};
            for (int k = 0; k < tp.count; ++k) {
                mval += tp.w[k] * mask[tp.idx[k]];
                for (int c = 0; c < 3; ++c) rgb[c] += tp.w[k] * values[tp.idx[k] * 3 + c];
            }
            const int64_t o = static_cast<int64_t>(y) * m + x;
            out.mask[o] = mval >= 0.5 ? 1.0 : 0.0;
            for (int c = 0; c < 3; ++c) out.values[o * 3 + c] = rgb[c];
        }
    return out;
}

namespace {

// Shared shape checks for composite paths; returns the canvas side.
int composite_side(const Tensor& image, const Tensor& wv, const Tensor& wm, const char* where) {
    const auto& is = image.shape();
    const bool ok = (is.size() == 3 && is[2] == 3 && is[0] == is[1]) ||
                    (is.size() == 4 && is[0] == 1 && is[3] == 3 && is[1] == is[2]);
    if (!ok)
        throw std::invalid_argument(std::string(where) + ": image must be (m,m,3) or (1,m,m,3), got " +
                                    image.shape_str());
    const int m = is.size() == 3 ? is[0] : is[1];
    const auto& vs = wv.shape();
    if (vs.size() != 3 || vs[0] != m || vs[1] != m || vs[2] != 3)
        throw std::invalid_argument(std::string(where) + ": warped values must be (" +
                                    std::to_string(m) + "," + std::to_string(m) + ",3), got " +
                                    wv.shape_str());
    const auto& ms = wm.shape();
    if (ms.size() != 2 || ms[0] != m || ms[1] != m)
        throw std::invalid_argument(std::string(where) + ": warped mask must be (" + std::to_string(m) +
                                    "," + std::to_string(m) + "), got " + wm.shape_str());
    require_binary(wm, where);
    return m;
}

} // namespace

Tensor composite(const Tensor& image, const Tensor& warped_values, const Tensor& warped_mask) {
    const int m = composite_side(image, warped_values, warped_mask, "composite");
    Tensor out = image;
    // out = image*(1-M) + warped*M with a binary M: a per-pixel select, so
    // unmasked pixels are carried over bitwise.
    for (int64_t i = 0; i < static_cast<int64_t>(m) * m; ++i)
        if (warped_mask[i] == 1.0)
            for (int c = 0; c < 3; ++c) out[i * 3 + c] = warped_values[i * 3 + c];
    return out;
}

ad::Tape::Ref warp_op(ad::Tape& tape, ad::Tape::Ref patch_values, const Tensor& mask,
                      const AffineTransform& t, int m, Tensor* out_mask) {
    const Tensor& pv = tape.value(patch_values);
    Warped w = warp(pv, mask, t, m);
    if (out_mask) *out_mask = w.mask;
    const int n = pv.shape()[0];
    const AffineTransform tf = t;
    return tape.custom(std::move(w.values), {patch_values},
                       [patch_values, tf, n, m](ad::Tape& tp, const Tensor& g) {
                           Tensor dp({n, n, 3});
                           scatter_patch_grad(dp, g.data(), nullptr, tf, n, m);
                           tp.accumulate(patch_values, dp);
                       });
}

ad::Tape::Ref composite_op(ad::Tape& tape, const Tensor& image, ad::Tape::Ref warped_values,
                           const Tensor& warped_mask) {
    Tensor out = composite(image, tape.value(warped_values), warped_mask);
    const int m = warped_mask.shape()[0];
    Tensor mask_copy = warped_mask;
    return tape.custom(std::move(out), {warped_values},
                       [warped_values, mask_copy = std::move(mask_copy), m](ad::Tape& tp,
                                                                            const Tensor& g) {
                           Tensor dw({m, m, 3});
                           for (int64_t i = 0; i < dw.size(); ++i)
                               dw[i] = mask_copy[i / 3] * g[i];
                           tp.accumulate(warped_values, dw);
                       });
}

ad::Tape::Ref composite_batch(ad::Tape& tape, ad::Tape::Ref patch_values, const Tensor& mask,
                              const Tensor& images, const std::vector<AffineTransform>& transforms) {
    const Tensor& pv = tape.value(patch_values);
    const int n = patch_side_of(pv, mask, "composite_batch");
    const auto& is = images.shape();
    if (is.size() != 4 || is[1] != is[2] || is[3] != 3)
        throw std::invalid_argument("composite_batch: images must be (B,m,m,3), got " +
                                    images.shape_str());
    const int B = is[0], m = is[1];
    if (static_cast<int>(transforms.size()) != B)
        throw std::invalid_argument("composite_batch: got " + std::to_string(transforms.size()) +
                                    " transforms for batch " + std::to_string(B));

    Tensor out = images;
    std::vector<Tensor> masks;
    masks.reserve(transforms.size());
    for (int b = 0; b < B; ++b) {
        Warped w = warp(pv, mask, transforms[b], m);
        real* dst = out.data() + static_cast<int64_t>(b) * m * m * 3;
        for (int64_t i = 0; i < static_cast<int64_t>(m) * m; ++i)
            if (w.mask[i] == 1.0)
                for (int c = 0; c < 3; ++c) dst[i * 3 + c] = w.values[i * 3 + c];
        masks.push_back(std::move(w.mask));
    }

    auto tfs = transforms;
    return tape.custom(
        std::move(out), {patch_values},
        [patch_values, tfs = std::move(tfs), masks = std::move(masks), n, m](ad::Tape& tp,
                                                                             const Tensor& g) {
            Tensor dp({n, n, 3});
            for (size_t b = 0; b < tfs.size(); ++b)
                scatter_patch_grad(dp, g.data() + static_cast<int64_t>(b) * m * m * 3, &masks[b],
                                   tfs[b], n, m);
            tp.accumulate(patch_values, dp);
        });
}

void save_patch(const PatchParams& p, const std::string& image_path, const std::string& json_path,
                const std::string& kind, uint64_t training_config_digest, uint64_t seed) {
    validate_patch(p);
    img::write_ppm(image_path, p.values);
    nlohmann::json j;
    j["kind"] = kind;
    j["target_class"] = p.target_class;
    j["n"] = p.side();
    std::vector<int> bits(static_cast<size_t>(p.mask.size()));
    for (int64_t i = 0; i < p.mask.size(); ++i) bits[static_cast<size_t>(i)] = p.mask[i] == 1.0 ? 1 : 0;
    j["mask"] = bits;
    j["training_config_digest"] = hex64(training_config_digest);
    j["seed"] = hex64(seed);
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("save_patch: cannot open " + json_path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("save_patch: write failed for " + json_path);
}

PatchArchive load_patch(const std::string& image_path, const std::string& json_path) {
    Tensor values = img::read_ppm(image_path);
    if (values.shape()[0] != values.shape()[1])
        throw std::runtime_error("load_patch: patch image must be square, got " + values.shape_str());
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("load_patch: cannot open " + json_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("load_patch: bad JSON in " + json_path + ": " + e.what());
    }

    PatchArchive a;
    try {
        a.kind = j.at("kind").get<std::string>();
        a.patch.target_class = j.at("target_class").get<int>();
        const int n = j.at("n").get<int>();
        if (n != values.shape()[0])
            throw std::runtime_error("load_patch: sidecar n=" + std::to_string(n) +
                                     " does not match image side " +
                                     std::to_string(values.shape()[0]));
        const auto bits = j.at("mask").get<std::vector<int>>();
        if (static_cast<int64_t>(bits.size()) != static_cast<int64_t>(n) * n)
            throw std::runtime_error("load_patch: mask has " + std::to_string(bits.size()) +
                                     " entries, expected " + std::to_string(n * n));
        a.patch.mask = Tensor({n, n});
        for (size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] != 0 && bits[i] != 1)
                throw std::runtime_error("load_patch: mask entry " + std::to_string(i) + " is " +
                                         std::to_string(bits[i]) + ", expected 0 or 1");
            a.patch.mask[static_cast<int64_t>(i)] = bits[i];
        }
        a.training_config_digest = parse_hex64(j.at("training_config_digest").get<std::string>(),
                                               "training_config_digest");
        a.seed = parse_hex64(j.at("seed").get<std::string>(), "seed");
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_patch: bad sidecar " + json_path + ": " + e.what());
    }
    a.patch.values = std::move(values);
    validate_patch(a.patch);
    return a;
}

} // namespace unadv::comp
