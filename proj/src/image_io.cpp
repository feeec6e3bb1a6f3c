#include "unadv/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace unadv::img {

namespace {

struct HW {
    int h, w;
    const Tensor* t;
};

HW as_image(const Tensor& image) {
    const auto& s = image.shape();
    if (s.size() == 3 && s[2] == 3) return {s[0], s[1], &image};
    if (s.size() == 4 && s[0] == 1 && s[3] == 3) return {s[1], s[2], &image};
    throw std::invalid_argument("expected an (H,W,3) or (1,H,W,3) image, got " + image.shape_str());
}

uint8_t to_byte(real v) {
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    return static_cast<uint8_t>(std::lround(v * 255.0));
}

int next_token(std::istream& in) {
    // Skips whitespace and '#' comments, then parses a non-negative integer.
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = in.get();
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) throw std::runtime_error("read_ppm: malformed header");
    long v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        if (v > 1 << 20) throw std::runtime_error("read_ppm: header value out of range");
        c = in.get();
    }
    if (c != EOF) in.unget();
    return static_cast<int>(v);
}

} // namespace

void write_ppm(const std::string& path, const Tensor& image) {
    HW im = as_image(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open " + path);
    out << "P6\n" << im.w << " " << im.h << "\n255\n";
    std::vector<uint8_t> bytes;
    bytes.reserve(static_cast<size_t>(im.h) * im.w * 3);
    for (int i = 0; i < im.t->size(); ++i) bytes.push_back(to_byte((*im.t)[i]));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write_ppm: write failed for " + path);
}

Tensor read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ppm: cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '6') throw std::runtime_error("read_ppm: not a P6 file: " + path);
    int w = next_token(in);
    int h = next_token(in);
    int maxval = next_token(in);
    if (maxval != 255) throw std::runtime_error("read_ppm: unsupported maxval " + std::to_string(maxval));
    in.get(); // single whitespace byte after maxval
    std::vector<uint8_t> bytes(static_cast<size_t>(h) * w * 3);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw std::runtime_error("read_ppm: truncated pixel data in " + path);
    Tensor t({h, w, 3});
    for (int i = 0; i < t.size(); ++i) t[i] = static_cast<real>(bytes[static_cast<size_t>(i)]) / 255.0;
    return t;
}

Tensor quantize8(const Tensor& image) {
    Tensor q = image;
    for (int i = 0; i < q.size(); ++i) q[i] = static_cast<real>(to_byte(q[i])) / 255.0;
    return q;
}

Tensor resize_area(const Tensor& image, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("resize_area: output size must be >= 1, got " +
                                    std::to_string(out_h) + "x" + std::to_string(out_w));
    HW im = as_image(image);
    Tensor out({out_h, out_w, 3});
    const real sy = static_cast<real>(im.h) / out_h;
    const real sx = static_cast<real>(im.w) / out_w;
    const real inv = 1.0 / (sy * sx);
    for (int i = 0; i < out_h; ++i) {
        const real y0 = i * sy, y1 = (i + 1) * sy;
        const int r0 = std::max(0, static_cast<int>(std::floor(y0)));
        const int r1 = std::min(im.h, static_cast<int>(std::ceil(y1)));
        for (int j = 0; j < out_w; ++j) {
            const real x0 = j * sx, x1 = (j + 1) * sx;
            const int c0 = std::max(0, static_cast<int>(std::floor(x0)));
            const int c1 = std::min(im.w, static_cast<int>(std::ceil(x1)));
            real acc[3] = {0.0, 0.0, 0.0};
            for (int r = r0; r < r1; ++r) {
                const real wy = std::min<real>(r + 1, y1) - std::max<real>(r, y0);
                for (int c = c0; c < c1; ++c) {
                    const real w = wy * (std::min<real>(c + 1, x1) - std::max<real>(c, x0));
                    const real* px = im.t->data() + (static_cast<int64_t>(r) * im.w + c) * 3;
                    for (int ch = 0; ch < 3; ++ch) acc[ch] += w * px[ch];
                }
            }
            real* dst = out.data() + (static_cast<int64_t>(i) * out_w + j) * 3;
            for (int ch = 0; ch < 3; ++ch) dst[ch] = acc[ch] * inv;
        }
    }
    return out;
}

} // namespace unadv::img
