#include "unadv/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "unadv/image_io.hpp"
#include "unadv/jpeg.hpp"
#include "unadv/rng.hpp"

namespace unadv::corr {

namespace {

constexpr int kBaseSide = 32; // the side the severity tables are tuned for
constexpr int kCatalogVersion = 1;

constexpr real kGaussianSigma[5] = {0.04, 0.08, 0.12, 0.18, 0.26};
constexpr real kShotLambda[5] = {60.0, 25.0, 12.0, 5.0, 3.0};
constexpr real kImpulseFraction[5] = {0.02, 0.04, 0.07, 0.12, 0.19};
constexpr real kDefocusRadius[5] = {0.8, 1.2, 1.7, 2.3, 3.0};
constexpr real kGlassSigma[5] = {0.25, 0.35, 0.45, 0.6, 0.75};
constexpr int kGlassIters[5] = {1, 1, 2, 3, 4};
constexpr int kGlassShift = 1;
constexpr int kMotionLength[5] = {3, 5, 7, 9, 12};
constexpr real kZoomMax[5] = {1.06, 1.11, 1.16, 1.21, 1.26};
constexpr real kZoomStep = 0.01;
constexpr real kSnowThreshold[5] = {2.4, 2.2, 2.0, 1.8, 1.55};
constexpr int kSnowLength[5] = {3, 4, 5, 7, 9};
constexpr real kSnowWhiten[5] = {0.10, 0.15, 0.20, 0.28, 0.35};
constexpr real kFrostKeep[5] = {0.92, 0.88, 0.84, 0.78, 0.72};
constexpr real kFrostOverlay[5] = {0.22, 0.30, 0.38, 0.48, 0.58};
constexpr real kFogAmount[5] = {0.35, 0.5, 0.65, 0.8, 0.95};
constexpr real kFogPlateau = 0.9;
constexpr real kPlasmaRoughness = 0.55;
constexpr real kBrightnessOffset[5] = {0.1, 0.2, 0.3, 0.4, 0.5};
constexpr real kContrastFactor[5] = {0.55, 0.4, 0.3, 0.2, 0.12};
constexpr real kElasticAlpha[5] = {0.6, 1.1, 1.7, 2.4, 3.3};
constexpr real kElasticSigma[5] = {3.0, 2.6, 2.2, 1.9, 1.6};
constexpr int kPixelateSide[5] = {24, 20, 16, 12, 8};
constexpr int kJpegQuality[5] = {25, 18, 15, 10, 7};

real clamp01(real v) { return std::clamp(v, 0.0, 1.0); }

void clamp_all(Tensor& t) {
    for (int i = 0; i < t.size(); ++i) t[i] = clamp01(t[i]);
}

struct ImageRef {
    int h, w;
};

ImageRef image_dims(const Tensor& image) {
    const auto& s = image.shape();
    if (s.size() != 3 || s[2] != 3)
        throw std::invalid_argument("corrupt_image: expected an (H,W,3) image, got " +
                                    image.shape_str());
    return {s[0], s[1]};
}

real pixel(const Tensor& im, int w, int y, int x, int c) {
    return im[(static_cast<int64_t>(y) * w + x) * 3 + c];
}

real& pixel(Tensor& im, int w, int y, int x, int c) {
    return im[(static_cast<int64_t>(y) * w + x) * 3 + c];
}

real sample_bilinear(const Tensor& im, int h, int w, real y, real x, int c) {
    y = std::clamp(y, 0.0, static_cast<real>(h - 1));
    x = std::clamp(x, 0.0, static_cast<real>(w - 1));
    const int y0 = std::min(static_cast<int>(y), h - 1);
    const int x0 = std::min(static_cast<int>(x), w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const int x1 = std::min(x0 + 1, w - 1);
    const real fy = y - y0, fx = x - x0;
    return (1 - fy) * ((1 - fx) * pixel(im, w, y0, x0, c) + fx * pixel(im, w, y0, x1, c)) +
           fy * ((1 - fx) * pixel(im, w, y1, x0, c) + fx * pixel(im, w, y1, x1, c));
}

// Generic normalized-kernel convolution with edge-clamped taps.
Tensor convolve(const Tensor& im, int h, int w, const std::vector<real>& kernel, int kh, int kw) {
    Tensor out(im.shape());
    const int cy = kh / 2, cx = kw / 2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                real s = 0.0;
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        const int sy = std::clamp(y + ky - cy, 0, h - 1);
                        const int sx = std::clamp(x + kx - cx, 0, w - 1);
                        s += kernel[static_cast<size_t>(ky) * kw + kx] * pixel(im, w, sy, sx, c);
                    }
                pixel(out, w, y, x, c) = s;
            }
    return out;
}

std::vector<real> gaussian_taps(real sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<real> k(static_cast<size_t>(2 * r + 1));
    real sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += k[static_cast<size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (auto& v : k) v /= sum;
    return k;
}

Tensor blur_gaussian(const Tensor& im, int h, int w, real sigma) {
    const auto taps = gaussian_taps(sigma);
    const int r = (static_cast<int>(taps.size()) - 1) / 2;
    Tensor mid(im.shape());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                real s = 0.0;
                for (int i = -r; i <= r; ++i)
                    s += taps[static_cast<size_t>(i + r)] * pixel(im, w, y, std::clamp(x + i, 0, w - 1), c);
                pixel(mid, w, y, x, c) = s;
            }
    Tensor out(im.shape());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                real s = 0.0;
                for (int i = -r; i <= r; ++i)
                    s += taps[static_cast<size_t>(i + r)] * pixel(mid, w, std::clamp(y + i, 0, h - 1), x, c);
                pixel(out, w, y, x, c) = s;
            }
    return out;
}

// Line kernel of the given length at the given angle, bilinearly splatted and
// normalized; shared by motion blur and the snow/frost streaks.
std::vector<real> line_kernel(int length, real angle, int* side_out) {
    const int r = (length + 1) / 2;
    const int side = 2 * r + 1;
    std::vector<real> k(static_cast<size_t>(side) * side, 0.0);
    const real dx = std::cos(angle), dy = std::sin(angle);
    const int samples = 8 * length;
    for (int i = 0; i < samples; ++i) {
        const real t = (samples == 1 ? 0.0 : static_cast<real>(i) / (samples - 1) - 0.5) * (length - 1);
        const real px = r + t * dx, py = r + t * dy;
        const int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
        const real fx = px - x0, fy = py - y0;
        for (int oy = 0; oy <= 1; ++oy)
            for (int ox = 0; ox <= 1; ++ox) {
                const int xx = x0 + ox, yy = y0 + oy;
                if (xx < 0 || xx >= side || yy < 0 || yy >= side) continue;
                k[static_cast<size_t>(yy) * side + xx] +=
                    (ox ? fx : 1 - fx) * (oy ? fy : 1 - fy);
            }
    }
    real sum = 0.0;
    for (real v : k) sum += v;
    for (auto& v : k) v /= sum;
    *side_out = side;
    return k;
}

// Diamond-square plasma field on a (2^k+1) lattice, min-max normalized to
// [0,1] and cropped to (h,w).
std::vector<real> plasma(int h, int w, Rng& rng, real roughness) {
    int n = 1;
    while (n + 1 < std::max(h, w)) n *= 2;
    const int side = n + 1;
    std::vector<real> g(static_cast<size_t>(side) * side, 0.0);
    auto at = [&](int y, int x) -> real& { return g[static_cast<size_t>(y) * side + x]; };
    at(0, 0) = rng.uniform();
    at(0, n) = rng.uniform();
    at(n, 0) = rng.uniform();
    at(n, n) = rng.uniform();
    real amp = 1.0;
    for (int step = n; step >= 2; step /= 2) {
        const int half = step / 2;
        for (int y = half; y < side; y += step)
            for (int x = half; x < side; x += step)
                at(y, x) = 0.25 * (at(y - half, x - half) + at(y - half, x + half) +
                                   at(y + half, x - half) + at(y + half, x + half)) +
                           rng.uniform(-amp, amp);
        for (int y = 0; y < side; y += half)
            for (int x = (y / half) % 2 == 0 ? half : 0; x < side; x += step) {
                real s = 0.0;
                int cnt = 0;
                if (y >= half) s += at(y - half, x), ++cnt;
                if (y + half < side) s += at(y + half, x), ++cnt;
                if (x >= half) s += at(y, x - half), ++cnt;
                if (x + half < side) s += at(y, x + half), ++cnt;
                at(y, x) = s / cnt + rng.uniform(-amp, amp);
            }
        amp *= roughness;
    }
    real lo = g[0], hi = g[0];
    for (real v : g) lo = std::min(lo, v), hi = std::max(hi, v);
    const real span = hi - lo;
    std::vector<real> out(static_cast<size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out[static_cast<size_t>(y) * w + x] =
                span > 0.0 ? (at(y, x) - lo) / span : 0.5;
    return out;
}

Tensor apply_gaussian_noise(const Tensor& im, real sigma, Rng& rng) {
    Tensor out = im;
    for (int i = 0; i < out.size(); ++i) out[i] = clamp01(out[i] + sigma * rng.normal());
    return out;
}

Tensor apply_shot_noise(const Tensor& im, real lambda, Rng& rng) {
    Tensor out = im;
    for (int i = 0; i < out.size(); ++i)
        out[i] = clamp01(rng.poisson(clamp01(out[i]) * lambda) / lambda);
    return out;
}

Tensor apply_impulse_noise(const Tensor& im, real fraction, Rng& rng) {
    Tensor out = im;
    for (int i = 0; i < out.size(); ++i) {
        const real u = rng.uniform();
        if (u < 0.5 * fraction)
            out[i] = 0.0;
        else if (u < fraction)
            out[i] = 1.0;
    }
    return out;
}

Tensor apply_defocus(const Tensor& im, int h, int w, real radius) {
    const int r = static_cast<int>(std::ceil(radius + 0.5));
    const int side = 2 * r + 1;
    std::vector<real> k(static_cast<size_t>(side) * side);
    real sum = 0.0;
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x) {
            const real d = std::sqrt(static_cast<real>(y * y + x * x));
            sum += k[static_cast<size_t>(y + r) * side + (x + r)] =
                std::clamp(radius + 0.5 - d, 0.0, 1.0);
        }
    for (auto& v : k) v /= sum;
    Tensor out = convolve(im, h, w, k, side, side);
    clamp_all(out);
    return out;
}

Tensor apply_glass(const Tensor& im, int h, int w, real sigma, int iters, Rng& rng) {
    Tensor out = blur_gaussian(im, h, w, sigma);
    for (int it = 0; it < iters; ++it)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int dy = static_cast<int>(rng.below(2 * kGlassShift + 1)) - kGlassShift;
                const int dx = static_cast<int>(rng.below(2 * kGlassShift + 1)) - kGlassShift;
                const int sy = std::clamp(y + dy, 0, h - 1);
                const int sx = std::clamp(x + dx, 0, w - 1);
                for (int c = 0; c < 3; ++c)
                    std::swap(pixel(out, w, y, x, c), pixel(out, w, sy, sx, c));
            }
    out = blur_gaussian(out, h, w, sigma);
    clamp_all(out);
    return out;
}

Tensor apply_motion(const Tensor& im, int h, int w, int length, Rng& rng) {
    const real angle = rng.uniform(0.0, 3.14159265358979323846);
    int side = 0;
    const auto k = line_kernel(length, angle, &side);
    Tensor out = convolve(im, h, w, k, side, side);
    clamp_all(out);
    return out;
}

Tensor apply_zoom(const Tensor& im, int h, int w, real max_zoom) {
    Tensor acc(im.shape());
    const real cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
    int count = 0;
    for (real f = 1.0; f <= max_zoom + 1e-9; f += kZoomStep) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c)
                    pixel(acc, w, y, x, c) +=
                        sample_bilinear(im, h, w, cy + (y - cy) / f, cx + (x - cx) / f, c);
        ++count;
    }
    for (int i = 0; i < acc.size(); ++i) acc[i] = clamp01(acc[i] / count);
    return acc;
}

Tensor apply_snow(const Tensor& im, int h, int w, real threshold, int length, real whiten,
                  Rng& rng) {
    std::vector<real> field(static_cast<size_t>(h) * w);
    real peak = 0.0;
    for (auto& v : field) {
        v = std::max(rng.normal() - threshold, 0.0);
        peak = std::max(peak, v);
    }
    if (peak > 0.0)
        for (auto& v : field) v /= peak;
    const real angle = rng.uniform(-1.396, -1.047); // roughly -80..-60 degrees: falling streaks
    int side = 0;
    const auto k = line_kernel(length, angle, &side);
    Tensor flakes({h, w, 3});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                pixel(flakes, w, y, x, c) = field[static_cast<size_t>(y) * w + x];
    flakes = convolve(flakes, h, w, k, side, side);
    Tensor out = im;
    for (int i = 0; i < out.size(); ++i)
        out[i] = clamp01((1.0 - whiten) * out[i] + whiten * 0.85 + flakes[i]);
    return out;
}

Tensor apply_frost(const Tensor& im, int h, int w, real keep, real overlay, Rng& rng) {
    const auto field = plasma(h, w, rng, kPlasmaRoughness);
    const real angle = rng.uniform(0.0, 3.14159265358979323846);
    int side = 0;
    const auto k = line_kernel(5, angle, &side);
    Tensor ice({h, w, 3});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                pixel(ice, w, y, x, c) = field[static_cast<size_t>(y) * w + x];
    ice = convolve(ice, h, w, k, side, side);
    Tensor out = im;
    for (int i = 0; i < out.size(); ++i) {
        const real p = clamp01((ice[i] - 0.5) * 2.5);
        out[i] = clamp01(keep * out[i] + overlay * p);
    }
    return out;
}

Tensor apply_fog(const Tensor& im, int h, int w, real amount, Rng& rng) {
    const auto field = plasma(h, w, rng, kPlasmaRoughness);
    Tensor out = im;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const real p = field[static_cast<size_t>(y) * w + x];
            for (int c = 0; c < 3; ++c) {
                real& v = pixel(out, w, y, x, c);
                v = clamp01(v + amount * p * (kFogPlateau - v));
            }
        }
    return out;
}

Tensor apply_brightness(const Tensor& im, real offset) {
    Tensor out = im;
    for (int i = 0; i < out.size(); ++i) out[i] = clamp01(out[i] + offset);
    return out;
}

Tensor apply_contrast(const Tensor& im, int h, int w, real factor) {
    real mean[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < im.size(); ++i) mean[i % 3] += im[i];
    for (real& m : mean) m /= static_cast<real>(h) * w;
    Tensor out = im;
    for (int i = 0; i < out.size(); ++i)
        out[i] = clamp01(mean[i % 3] + (out[i] - mean[i % 3]) * factor);
    return out;
}

Tensor apply_elastic(const Tensor& im, int h, int w, real alpha, real sigma, Rng& rng) {
    Tensor dy({h, w, 3}), dx({h, w, 3}); // smoothed per-pixel shifts; channel 0 used
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const real vy = rng.uniform(-1.0, 1.0), vx = rng.uniform(-1.0, 1.0);
            for (int c = 0; c < 3; ++c) {
                pixel(dy, w, y, x, c) = vy;
                pixel(dx, w, y, x, c) = vx;
            }
        }
    dy = blur_gaussian(dy, h, w, sigma);
    dx = blur_gaussian(dx, h, w, sigma);
    auto rms = [&](const Tensor& d) {
        real s = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) s += pixel(d, w, y, x, 0) * pixel(d, w, y, x, 0);
        return std::sqrt(s / (static_cast<real>(h) * w));
    };
    const real sy = rms(dy), sx = rms(dx);
    const real gy = sy > 0.0 ? alpha / sy : 0.0;
    const real gx = sx > 0.0 ? alpha / sx : 0.0;
    Tensor out(im.shape());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                pixel(out, w, y, x, c) =
                    clamp01(sample_bilinear(im, h, w, y + gy * pixel(dy, w, y, x, 0),
                                            x + gx * pixel(dx, w, y, x, 0), c));
    return out;
}

Tensor apply_pixelate(const Tensor& im, int h, int w, int target) {
    const int dh = std::max(1, static_cast<int>(std::lround(h * static_cast<real>(target) / kBaseSide)));
    const int dw = std::max(1, static_cast<int>(std::lround(w * static_cast<real>(target) / kBaseSide)));
    if (dh >= h && dw >= w) return im;
    const Tensor small = img::resize_area(im, std::min(dh, h), std::min(dw, w));
    const int sh = small.shape()[0], sw = small.shape()[1];
    Tensor out(im.shape());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int sy = static_cast<int>(static_cast<int64_t>(y) * sh / h);
            const int sx = static_cast<int>(static_cast<int64_t>(x) * sw / w);
            for (int c = 0; c < 3; ++c)
                pixel(out, w, y, x, c) = clamp01(pixel(small, sw, sy, sx, c));
        }
    return out;
}

Tensor apply_jpeg(const Tensor& im, int quality) {
    Tensor out = jpeg::decode(jpeg::encode(im, quality));
    return out;
}

} // namespace

const std::array<Kind, kKindCount>& all_kinds() {
    static const std::array<Kind, kKindCount> kinds = {
        Kind::gaussian_noise, Kind::shot_noise, Kind::impulse_noise, Kind::defocus_blur,
        Kind::glass_blur,     Kind::motion_blur, Kind::zoom_blur,    Kind::snow,
        Kind::frost,          Kind::fog,         Kind::brightness,   Kind::contrast,
        Kind::elastic,        Kind::pixelate,    Kind::jpeg,
    };
    return kinds;
}

std::string to_string(Kind kind) {
    switch (kind) {
    case Kind::gaussian_noise: return "gaussian_noise";
    case Kind::shot_noise: return "shot_noise";
    case Kind::impulse_noise: return "impulse_noise";
    case Kind::defocus_blur: return "defocus_blur";
    case Kind::glass_blur: return "glass_blur";
    case Kind::motion_blur: return "motion_blur";
    case Kind::zoom_blur: return "zoom_blur";
    case Kind::snow: return "snow";
    case Kind::frost: return "frost";
    case Kind::fog: return "fog";
    case Kind::brightness: return "brightness";
    case Kind::contrast: return "contrast";
    case Kind::elastic: return "elastic";
    case Kind::pixelate: return "pixelate";
    case Kind::jpeg: return "jpeg";
    }
    throw std::invalid_argument("to_string: unknown corruption kind");
}

Kind kind_from_string(const std::string& name) {
    for (Kind k : all_kinds())
        if (to_string(k) == name) return k;
    throw std::invalid_argument("kind_from_string: unknown corruption kind '" + name + "'");
}

Tensor corrupt_image(const Tensor& image, Kind kind, int severity, uint64_t image_seed) {
    const auto [h, w] = image_dims(image);
    if (severity < 0 || severity > kSeverityCount)
        throw std::invalid_argument("corrupt_image: severity must be in [0,5], got " +
                                    std::to_string(severity));
    to_string(kind); // rejects out-of-range enum values
    if (severity == 0) return image;

    const int s = severity - 1;
    Rng rng(image_seed);
    switch (kind) {
    case Kind::gaussian_noise: return apply_gaussian_noise(image, kGaussianSigma[s], rng);
    case Kind::shot_noise: return apply_shot_noise(image, kShotLambda[s], rng);
    case Kind::impulse_noise: return apply_impulse_noise(image, kImpulseFraction[s], rng);
    case Kind::defocus_blur: return apply_defocus(image, h, w, kDefocusRadius[s]);
    case Kind::glass_blur: return apply_glass(image, h, w, kGlassSigma[s], kGlassIters[s], rng);
    case Kind::motion_blur: return apply_motion(image, h, w, kMotionLength[s], rng);
    case Kind::zoom_blur: return apply_zoom(image, h, w, kZoomMax[s]);
    case Kind::snow: return apply_snow(image, h, w, kSnowThreshold[s], kSnowLength[s], kSnowWhiten[s], rng);
    case Kind::frost: return apply_frost(image, h, w, kFrostKeep[s], kFrostOverlay[s], rng);
    case Kind::fog: return apply_fog(image, h, w, kFogAmount[s], rng);
    case Kind::brightness: return apply_brightness(image, kBrightnessOffset[s]);
    case Kind::contrast: return apply_contrast(image, h, w, kContrastFactor[s]);
    case Kind::elastic: return apply_elastic(image, h, w, kElasticAlpha[s], kElasticSigma[s], rng);
    case Kind::pixelate: return apply_pixelate(image, h, w, kPixelateSide[s]);
    case Kind::jpeg: return apply_jpeg(image, kJpegQuality[s]);
    }
    throw std::invalid_argument("corrupt_image: unknown corruption kind");
}

Tensor corrupt(const Tensor& batch, const CorruptionSpec& spec) {
    const auto& s = batch.shape();
    if (s.size() != 4 || s[3] != 3)
        throw std::invalid_argument("corrupt: expected a (B,H,W,3) batch, got " +
                                    batch.shape_str());
    if (spec.severity < 0 || spec.severity > kSeverityCount)
        throw std::invalid_argument("corrupt: severity must be in [0,5], got " +
                                    std::to_string(spec.severity));
    to_string(spec.kind);
    if (spec.severity == 0) return batch;

    const int b = s[0], h = s[1], w = s[2];
    const int64_t stride = static_cast<int64_t>(h) * w * 3;
    Tensor out(batch.shape());
    for (int i = 0; i < b; ++i) {
        Tensor im({h, w, 3});
        std::copy_n(batch.data() + i * stride, stride, im.data());
        const Tensor done = corrupt_image(im, spec.kind, spec.severity,
                                          fan_seed(spec.seed, "corrupt-image", static_cast<uint64_t>(i)));
        std::copy_n(done.data(), stride, out.data() + i * stride);
    }
    return out;
}

std::function<Tensor(const Tensor&, uint64_t)> post_fn(const CorruptionSpec& spec) {
    if (spec.severity < 0 || spec.severity > kSeverityCount)
        throw std::invalid_argument("post_fn: severity must be in [0,5], got " +
                                    std::to_string(spec.severity));
    to_string(spec.kind);
    return [spec](const Tensor& image, uint64_t seed) {
        return corrupt_image(image, spec.kind, spec.severity,
                             fan_seed(spec.seed, "corrupt-post", seed));
    };
}

std::string corruption_catalog_json() {
    using nlohmann::json;
    auto arr = [](const auto (&t)[5]) { return json(std::vector(std::begin(t), std::end(t))); };
    json kinds;
    kinds["gaussian_noise"] = {{"sigma", arr(kGaussianSigma)}};
    kinds["shot_noise"] = {{"lambda", arr(kShotLambda)}};
    kinds["impulse_noise"] = {{"fraction", arr(kImpulseFraction)}};
    kinds["defocus_blur"] = {{"radius", arr(kDefocusRadius)}};
    kinds["glass_blur"] = {
        {"sigma", arr(kGlassSigma)}, {"iterations", arr(kGlassIters)}, {"max_shift", kGlassShift}};
    kinds["motion_blur"] = {{"length", arr(kMotionLength)}};
    kinds["zoom_blur"] = {{"max_zoom", arr(kZoomMax)}, {"step", kZoomStep}};
    kinds["snow"] = {{"threshold_sigma", arr(kSnowThreshold)},
                     {"streak_length", arr(kSnowLength)},
                     {"whiten", arr(kSnowWhiten)}};
    kinds["frost"] = {{"keep", arr(kFrostKeep)}, {"overlay", arr(kFrostOverlay)}};
    kinds["fog"] = {{"amount", arr(kFogAmount)},
                    {"plateau", kFogPlateau},
                    {"roughness", kPlasmaRoughness}};
    kinds["brightness"] = {{"offset", arr(kBrightnessOffset)}};
    kinds["contrast"] = {{"factor", arr(kContrastFactor)}};
    kinds["elastic"] = {{"displacement", arr(kElasticAlpha)}, {"smoothing_sigma", arr(kElasticSigma)}};
    kinds["pixelate"] = {{"target_side", arr(kPixelateSide)}};
    kinds["jpeg"] = {{"quality", arr(kJpegQuality)}};

    const json catalog = {{"version", kCatalogVersion},
                          {"base_side", kBaseSide},
                          {"severities", kSeverityCount},
                          {"kinds", kinds}};
    return catalog.dump(2);
}

} // namespace unadv::corr
