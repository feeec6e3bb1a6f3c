#include "unadv/jpeg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>

namespace unadv::jpeg {

namespace {

const int kZigzag[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  12, 19, 26, 33, 40, 48,
    41, 34, 27, 20, 13, 6,  7,  14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23,
    30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

const uint8_t kQuantLum[64] = {16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
                               14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
                               18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
                               49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

const uint8_t kQuantChr[64] = {17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
                               24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
                               99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
                               99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

// Standard Huffman table specs: counts per code length 1..16, then symbols.
struct HuffSpec {
    uint8_t bits[16];
    std::vector<uint8_t> vals;
};

const HuffSpec kDcLum = {{0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                         {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};

const HuffSpec kDcChr = {{0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
                         {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};

const HuffSpec kAcLum = {
    {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
    {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61,
     0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52,
     0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25,
     0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
     0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64,
     0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83,
     0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
     0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
     0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3,
     0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8,
     0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};

const HuffSpec kAcChr = {
    {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
    {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61,
     0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33,
     0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18,
     0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44,
     0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63,
     0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a,
     0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97,
     0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4,
     0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca,
     0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7,
     0xe8, 0xe9, 0xea, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};

// Canonical code assignment shared by encoder and decoder.
struct HuffCodes {
    uint16_t code[256];
    uint8_t len[256];

    explicit HuffCodes(const HuffSpec& spec) {
        std::memset(len, 0, sizeof len);
        uint16_t next = 0;
        size_t k = 0;
        for (int l = 1; l <= 16; ++l) {
            for (int i = 0; i < spec.bits[l - 1]; ++i, ++k) {
                code[spec.vals[k]] = next++;
                len[spec.vals[k]] = static_cast<uint8_t>(l);
            }
            next = static_cast<uint16_t>(next << 1);
        }
    }
};

struct BitWriter {
    std::vector<uint8_t>& out;
    uint32_t acc = 0;
    int filled = 0;

    explicit BitWriter(std::vector<uint8_t>& o) : out(o) {}

    void put(uint32_t bits, int n) {
        acc = (acc << n) | (bits & ((1u << n) - 1));
        filled += n;
        while (filled >= 8) {
            const uint8_t b = static_cast<uint8_t>((acc >> (filled - 8)) & 0xff);
            out.push_back(b);
            if (b == 0xff) out.push_back(0x00); // byte stuffing
            filled -= 8;
        }
    }

    void pad() {
        if (filled > 0) put(0xff, 8 - filled); // pad with 1 bits
    }
};

int bit_size(int v) {
    int a = std::abs(v), n = 0;
    while (a) {
        ++n;
        a >>= 1;
    }
    return n;
}

void emit_coded(BitWriter& bw, const HuffCodes& h, int symbol) {
    if (h.len[symbol] == 0) throw std::logic_error("jpeg: symbol without a code");
    bw.put(h.code[symbol], h.len[symbol]);
}

void emit_value(BitWriter& bw, int v, int size) {
    if (size == 0) return;
    bw.put(static_cast<uint32_t>(v >= 0 ? v : v - 1 + (1 << size)), size);
}

// Separable 1-D DCT-II/III on rows then columns, with the JPEG scaling
// (result of fdct is 1/4 C(u)C(v) sums).
struct CosTable {
    real c[8][8]; // c[u][x] = C(u)/2 * cos((2x+1) u pi / 16)
    CosTable() {
        const real pi = 3.14159265358979323846;
        for (int u = 0; u < 8; ++u)
            for (int x = 0; x < 8; ++x)
                c[u][x] = (u == 0 ? std::sqrt(0.5) : 1.0) * 0.5 *
                          std::cos((2 * x + 1) * u * pi / 16.0);
    }
};

const CosTable& cos_table() {
    static const CosTable t;
    return t;
}

} // namespace

void fdct8x8(real block[64]) {
    const CosTable& t = cos_table();
    real tmp[64];
    for (int y = 0; y < 8; ++y)
        for (int u = 0; u < 8; ++u) {
            real s = 0.0;
            for (int x = 0; x < 8; ++x) s += block[y * 8 + x] * t.c[u][x];
            tmp[y * 8 + u] = s;
        }
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            real s = 0.0;
            for (int y = 0; y < 8; ++y) s += tmp[y * 8 + u] * t.c[v][y];
            block[v * 8 + u] = s;
        }
}

void idct8x8(real block[64]) {
    const CosTable& t = cos_table();
    real tmp[64];
    for (int v = 0; v < 8; ++v)
        for (int x = 0; x < 8; ++x) {
            real s = 0.0;
            for (int u = 0; u < 8; ++u) s += block[v * 8 + u] * t.c[u][x];
            tmp[v * 8 + x] = s;
        }
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            real s = 0.0;
            for (int v = 0; v < 8; ++v) s += tmp[v * 8 + x] * t.c[v][y];
            block[y * 8 + x] = s;
        }
}

namespace {

void scaled_quant(const uint8_t* base, int quality, uint16_t* out) {
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    for (int i = 0; i < 64; ++i) {
        int q = (base[i] * scale + 50) / 100;
        out[i] = static_cast<uint16_t>(std::clamp(q, 1, 255));
    }
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xff));
}

void put_marker(std::vector<uint8_t>& out, uint8_t m) {
    out.push_back(0xff);
    out.push_back(m);
}

struct Plane {
    int h = 0, w = 0;
    std::vector<real> v;
    real at(int y, int x) const {
        return v[static_cast<size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
    }
};

void encode_block(BitWriter& bw, const Plane& p, int by, int bx, const uint16_t* q, int& dc_pred,
                  const HuffCodes& dc, const HuffCodes& ac) {
    real block[64];
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) block[y * 8 + x] = p.at(by + y, bx + x) - 128.0;
    fdct8x8(block);
    int coef[64];
    for (int i = 0; i < 64; ++i)
        coef[i] = static_cast<int>(std::lround(block[kZigzag[i]] / q[kZigzag[i]]));

    const int diff = coef[0] - dc_pred;
    dc_pred = coef[0];
    const int dsize = bit_size(diff);
    emit_coded(bw, dc, dsize);
    emit_value(bw, diff, dsize);

    int run = 0;
    for (int i = 1; i < 64; ++i) {
        if (coef[i] == 0) {
            ++run;
            continue;
        }
        while (run >= 16) {
            emit_coded(bw, ac, 0xf0); // ZRL
            run -= 16;
        }
        const int size = bit_size(coef[i]);
        emit_coded(bw, ac, (run << 4) | size);
        emit_value(bw, coef[i], size);
        run = 0;
    }
    if (run > 0) emit_coded(bw, ac, 0x00); // EOB
}

} // namespace

std::vector<uint8_t> encode(const Tensor& image, int quality) {
    const auto& s = image.shape();
    int h = 0, w = 0;
    const real* px = image.data();
    if (s.size() == 3 && s[2] == 3) {
        h = s[0];
        w = s[1];
    } else if (s.size() == 4 && s[0] == 1 && s[3] == 3) {
        h = s[1];
        w = s[2];
    } else {
        throw std::invalid_argument("jpeg::encode: expected (H,W,3) or (1,H,W,3), got " +
                                    image.shape_str());
    }
    if (quality < 1 || quality > 100)
        throw std::invalid_argument("jpeg::encode: quality must be in [1,100], got " +
                                    std::to_string(quality));
    if (h < 1 || w < 1 || h > 65535 || w > 65535)
        throw std::invalid_argument("jpeg::encode: image sides must be in [1,65535]");

    Plane yp{h, w, std::vector<real>(static_cast<size_t>(h) * w)};
    Plane cb = yp, cr = yp;
    for (int64_t i = 0; i < static_cast<int64_t>(h) * w; ++i) {
        const real r = std::clamp(px[i * 3 + 0], 0.0, 1.0) * 255.0;
        const real g = std::clamp(px[i * 3 + 1], 0.0, 1.0) * 255.0;
        const real b = std::clamp(px[i * 3 + 2], 0.0, 1.0) * 255.0;
        yp.v[static_cast<size_t>(i)] = 0.299 * r + 0.587 * g + 0.114 * b;
        cb.v[static_cast<size_t>(i)] = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
        cr.v[static_cast<size_t>(i)] = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
    }

    uint16_t qlum[64], qchr[64];
    scaled_quant(kQuantLum, quality, qlum);
    scaled_quant(kQuantChr, quality, qchr);

    std::vector<uint8_t> out;
    put_marker(out, 0xd8); // SOI

    put_marker(out, 0xdb); // DQT, both tables
    put_u16(out, 2 + 2 * 65);
    for (int t = 0; t < 2; ++t) {
        out.push_back(static_cast<uint8_t>(t)); // Pq=0, Tq=t
        const uint16_t* q = t == 0 ? qlum : qchr;
        for (int i = 0; i < 64; ++i) out.push_back(static_cast<uint8_t>(q[kZigzag[i]]));
    }

    put_marker(out, 0xc0); // SOF0
    put_u16(out, 17);
    out.push_back(8);
    put_u16(out, static_cast<uint16_t>(h));
    put_u16(out, static_cast<uint16_t>(w));
    out.push_back(3);
    for (int c = 0; c < 3; ++c) {
        out.push_back(static_cast<uint8_t>(c + 1)); // component id
        out.push_back(0x11);                        // 1x1 sampling: 4:4:4
        out.push_back(c == 0 ? 0 : 1);              // quant table
    }

    put_marker(out, 0xc4); // DHT, all four tables
    {
        const HuffSpec* specs[4] = {&kDcLum, &kAcLum, &kDcChr, &kAcChr};
        const uint8_t ids[4] = {0x00, 0x10, 0x01, 0x11};
        uint16_t len = 2;
        for (int t = 0; t < 4; ++t)
            len = static_cast<uint16_t>(len + 1 + 16 + specs[t]->vals.size());
        put_u16(out, len);
        for (int t = 0; t < 4; ++t) {
            out.push_back(ids[t]);
            for (int l = 0; l < 16; ++l) out.push_back(specs[t]->bits[l]);
            for (uint8_t v : specs[t]->vals) out.push_back(v);
        }
    }

    put_marker(out, 0xda); // SOS
    put_u16(out, 12);
    out.push_back(3);
    for (int c = 0; c < 3; ++c) {
        out.push_back(static_cast<uint8_t>(c + 1));
        out.push_back(c == 0 ? 0x00 : 0x11); // DC/AC table ids
    }
    out.push_back(0);    // Ss
    out.push_back(63);   // Se
    out.push_back(0);    // Ah/Al

    const HuffCodes dc_lum(kDcLum), ac_lum(kAcLum), dc_chr(kDcChr), ac_chr(kAcChr);
    BitWriter bw(out);
    const int by = (h + 7) / 8, bx = (w + 7) / 8;
    int pred[3] = {0, 0, 0};
    for (int my = 0; my < by; ++my)
        for (int mx = 0; mx < bx; ++mx) {
            encode_block(bw, yp, my * 8, mx * 8, qlum, pred[0], dc_lum, ac_lum);
            encode_block(bw, cb, my * 8, mx * 8, qchr, pred[1], dc_chr, ac_chr);
            encode_block(bw, cr, my * 8, mx * 8, qchr, pred[2], dc_chr, ac_chr);
        }
    bw.pad();

    put_marker(out, 0xd9); // EOI
    return out;
}

namespace {

struct HuffDecoder {
    // Standard mincode/maxcode/valptr decoding tables.
    int32_t mincode[17];
    int32_t maxcode[17];
    int valptr[17];
    std::vector<uint8_t> vals;
    bool present = false;

    void build(const uint8_t* bits, std::vector<uint8_t> values) {
        vals = std::move(values);
        int32_t code = 0;
        int k = 0;
        for (int l = 1; l <= 16; ++l) {
            valptr[l] = k;
            mincode[l] = code;
            code += bits[l - 1];
            k += bits[l - 1];
            maxcode[l] = bits[l - 1] ? code - 1 : -1;
            code <<= 1;
        }
        present = true;
    }
};

struct ByteReader {
    const std::vector<uint8_t>& d;
    size_t pos = 0;

    explicit ByteReader(const std::vector<uint8_t>& bytes) : d(bytes) {}

    uint8_t u8() {
        if (pos >= d.size()) throw std::runtime_error("jpeg::decode: truncated stream");
        return d[pos++];
    }
    uint16_t u16() {
        const uint16_t hi = u8();
        return static_cast<uint16_t>((hi << 8) | u8());
    }
    void skip(size_t n) {
        if (pos + n > d.size()) throw std::runtime_error("jpeg::decode: truncated segment");
        pos += n;
    }
};

struct BitReader {
    ByteReader& br;
    uint32_t acc = 0;
    int have = 0;

    explicit BitReader(ByteReader& b) : br(b) {}

    int bit() {
        if (have == 0) {
            const uint8_t b = br.u8();
            if (b == 0xff) {
                const uint8_t next = br.u8();
                if (next != 0x00) // any real marker: the scan is over too soon
                    throw std::runtime_error("jpeg::decode: entropy data ended early");
            }
            acc = b;
            have = 8;
        }
        --have;
        return (acc >> have) & 1;
    }

    int bits(int n) {
        int v = 0;
        for (int i = 0; i < n; ++i) v = (v << 1) | bit();
        return v;
    }
};

int huff_decode(BitReader& br, const HuffDecoder& h) {
    int32_t code = br.bit();
    for (int l = 1; l <= 16; ++l) {
        if (h.maxcode[l] >= 0 && code <= h.maxcode[l] && code >= h.mincode[l])
            return h.vals[static_cast<size_t>(h.valptr[l] + code - h.mincode[l])];
        code = (code << 1) | br.bit();
    }
    throw std::runtime_error("jpeg::decode: invalid Huffman code");
}

int extend(int v, int size) { return v < (1 << (size - 1)) ? v - (1 << size) + 1 : v; }

} // namespace

Tensor decode(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes);
    if (r.u8() != 0xff || r.u8() != 0xd8) throw std::runtime_error("jpeg::decode: missing SOI");

    uint16_t qt[4][64];
    bool has_qt[4] = {false, false, false, false};
    HuffDecoder dc_tab[4], ac_tab[4];
    int h = -1, w = -1;
    struct Comp {
        int id = 0, tq = 0, td = 0, ta = 0;
    };
    Comp comps[3];
    bool have_frame = false;

    auto planes = std::vector<std::vector<real>>();

    while (true) {
        uint8_t m = r.u8();
        if (m != 0xff) throw std::runtime_error("jpeg::decode: expected a marker");
        while (m == 0xff) m = r.u8(); // optional fill bytes
        if (m == 0xd9) break;        // EOI

        if (m == 0xdb) { // DQT
            int len = r.u16() - 2;
            while (len > 0) {
                const uint8_t pq_tq = r.u8();
                const int pq = pq_tq >> 4, tq = pq_tq & 0x0f;
                if (tq > 3) throw std::runtime_error("jpeg::decode: bad quant table id");
                for (int i = 0; i < 64; ++i)
                    qt[tq][kZigzag[i]] = pq ? r.u16() : r.u8();
                has_qt[tq] = true;
                len -= 1 + (pq ? 128 : 64);
            }
        } else if (m == 0xc4) { // DHT
            int len = r.u16() - 2;
            while (len > 0) {
                const uint8_t tc_th = r.u8();
                const int tc = tc_th >> 4, th = tc_th & 0x0f;
                if (tc > 1 || th > 3) throw std::runtime_error("jpeg::decode: bad Huffman id");
                uint8_t bits[16];
                int total = 0;
                for (int i = 0; i < 16; ++i) total += bits[i] = r.u8();
                std::vector<uint8_t> vals(static_cast<size_t>(total));
                for (int i = 0; i < total; ++i) vals[static_cast<size_t>(i)] = r.u8();
                (tc == 0 ? dc_tab[th] : ac_tab[th]).build(bits, std::move(vals));
                len -= 1 + 16 + total;
            }
        } else if (m == 0xc0) { // SOF0
            r.u16();
            if (r.u8() != 8) throw std::runtime_error("jpeg::decode: only 8-bit precision supported");
            h = r.u16();
            w = r.u16();
            if (h < 1 || w < 1) throw std::runtime_error("jpeg::decode: empty frame");
            if (r.u8() != 3) throw std::runtime_error("jpeg::decode: only 3-component images supported");
            for (auto& c : comps) {
                c.id = r.u8();
                const uint8_t hv = r.u8();
                if (hv != 0x11)
                    throw std::runtime_error("jpeg::decode: only 4:4:4 sampling supported");
                c.tq = r.u8();
            }
            have_frame = true;
        } else if (m == 0xc2 || (m >= 0xc1 && m <= 0xcf && m != 0xc4 && m != 0xc8 && m != 0xcc)) {
            throw std::runtime_error("jpeg::decode: only baseline (SOF0) streams supported");
        } else if (m == 0xdd) { // DRI
            r.u16();
            if (r.u16() != 0)
                throw std::runtime_error("jpeg::decode: restart intervals not supported");
        } else if (m == 0xda) { // SOS
            if (!have_frame) throw std::runtime_error("jpeg::decode: scan before frame header");
            r.u16();
            const int ns = r.u8();
            if (ns != 3) throw std::runtime_error("jpeg::decode: expected a 3-component scan");
            for (int i = 0; i < ns; ++i) {
                const int id = r.u8();
                const uint8_t tt = r.u8();
                for (auto& c : comps)
                    if (c.id == id) {
                        c.td = tt >> 4;
                        c.ta = tt & 0x0f;
                    }
            }
            r.skip(3); // Ss, Se, AhAl

            for (const auto& c : comps) {
                if (!has_qt[c.tq]) throw std::runtime_error("jpeg::decode: missing quant table");
                if (!dc_tab[c.td].present || !ac_tab[c.ta].present)
                    throw std::runtime_error("jpeg::decode: missing Huffman table");
            }

            const int bh = (h + 7) / 8, bw = (w + 7) / 8;
            planes.assign(3, std::vector<real>(static_cast<size_t>(bh) * 8 * bw * 8, 0.0));
            BitReader bits(r);
            int pred[3] = {0, 0, 0};
            for (int my = 0; my < bh; ++my)
                for (int mx = 0; mx < bw; ++mx)
                    for (int ci = 0; ci < 3; ++ci) {
                        const Comp& c = comps[ci];
                        int zz[64] = {0};
                        const int dsize = huff_decode(bits, dc_tab[c.td]);
                        if (dsize > 11) throw std::runtime_error("jpeg::decode: bad DC size");
                        const int diff = dsize ? extend(bits.bits(dsize), dsize) : 0;
                        pred[ci] += diff;
                        zz[0] = pred[ci];
                        for (int k = 1; k < 64;) {
                            const int rs = huff_decode(bits, ac_tab[c.ta]);
                            const int run = rs >> 4, size = rs & 0x0f;
                            if (size == 0) {
                                if (run == 15) {
                                    k += 16;
                                    continue;
                                }
                                break; // EOB
                            }
                            k += run;
                            if (k > 63) throw std::runtime_error("jpeg::decode: AC run overflow");
                            zz[k] = extend(bits.bits(size), size);
                            ++k;
                        }
                        real block[64];
                        for (int i = 0; i < 64; ++i)
                            block[kZigzag[i]] = static_cast<real>(zz[i]) * qt[c.tq][kZigzag[i]];
                        idct8x8(block);
                        real* plane = planes[static_cast<size_t>(ci)].data();
                        for (int y = 0; y < 8; ++y)
                            for (int x = 0; x < 8; ++x)
                                plane[(static_cast<size_t>(my) * 8 + y) * (bw * 8) + mx * 8 + x] =
                                    block[y * 8 + x] + 128.0;
                    }
        } else if ((m >= 0xe0 && m <= 0xef) || m == 0xfe) { // APPn / COM
            const uint16_t len = r.u16();
            if (len < 2) throw std::runtime_error("jpeg::decode: bad segment length");
            r.skip(static_cast<size_t>(len) - 2);
        } else {
            char buf[8];
            std::snprintf(buf, sizeof buf, "0x%02x", m);
            throw std::runtime_error(std::string("jpeg::decode: unsupported marker ") + buf);
        }
    }

    if (!have_frame || planes.empty())
        throw std::runtime_error("jpeg::decode: no image data");

    const int stride = (w + 7) / 8 * 8;
    Tensor out({h, w, 3});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * stride + x;
            const real Y = planes[0][i];
            const real Cb = planes[1][i] - 128.0;
            const real Cr = planes[2][i] - 128.0;
            real* px = out.data() + (static_cast<int64_t>(y) * w + x) * 3;
            px[0] = std::clamp((Y + 1.402 * Cr) / 255.0, 0.0, 1.0);
            px[1] = std::clamp((Y - 0.344136 * Cb - 0.714136 * Cr) / 255.0, 0.0, 1.0);
            px[2] = std::clamp((Y + 1.772 * Cb) / 255.0, 0.0, 1.0);
        }
    return out;
}

} // namespace unadv::jpeg
