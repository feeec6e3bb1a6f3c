#include "unadv/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "unadv/rng.hpp"

namespace unadv::data {

const std::vector<std::string> kShapeNames = {"triangle", "square", "pentagon", "hexagon",
                                              "circle",   "star",   "cross",   "ring"};

namespace {

struct Pt {
    double x, y;
};

// Even-odd ray cast; handles the non-convex star.
bool inside_polygon(const std::vector<Pt>& poly, double px, double py) {
    bool in = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Pt& a = poly[i];
        const Pt& b = poly[j];
        if ((a.y > py) != (b.y > py) && px < (b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x)
            in = !in;
    }
    return in;
}

std::vector<Pt> regular_polygon(int k, double r) {
    std::vector<Pt> v;
    v.reserve(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double a = -M_PI / 2 + 2 * M_PI * i / k;
        v.push_back({r * std::cos(a), r * std::sin(a)});
    }
    return v;
}

std::vector<Pt> star_polygon() {
    std::vector<Pt> v;
    for (int i = 0; i < 10; ++i) {
        const double a = -M_PI / 2 + M_PI * i / 5;
        const double r = (i % 2 == 0) ? 1.0 : 0.45;
        v.push_back({r * std::cos(a), r * std::sin(a)});
    }
    return v;
}

// Unit-radius silhouettes in the shape's local frame.
bool inside_shape(int label, double x, double y) {
    switch (label) {
    case 0: return inside_polygon(regular_polygon(3, 1.0), x, y);
    case 1: return inside_polygon(regular_polygon(4, 1.0), x, y);
    case 2: return inside_polygon(regular_polygon(5, 1.0), x, y);
    case 3: return inside_polygon(regular_polygon(6, 1.0), x, y);
    case 4: return x * x + y * y <= 1.0;
    case 5: return inside_polygon(star_polygon(), x, y);
    case 6: return (std::abs(x) <= 0.3 && std::abs(y) <= 1.0) ||
                   (std::abs(y) <= 0.3 && std::abs(x) <= 1.0);
    case 7: {
        const double d2 = x * x + y * y;
        return d2 <= 1.0 && d2 >= 0.36;
    }
    default: throw std::invalid_argument("inside_shape: label " + std::to_string(label));
    }
}

constexpr int kSS = 4; // supersampling factor

} // namespace

Tensor render_shape_image(int label, int size, uint64_t sample_seed) {
    if (label < 0 || label >= static_cast<int>(kShapeNames.size()))
        throw std::invalid_argument("render_shape_image: label out of range");
    Rng rng(sample_seed);
    const int ss = size * kSS;

    const double bg_r = rng.uniform(0.05, 0.45);
    const double bg_g = rng.uniform(0.05, 0.45);
    const double bg_b = rng.uniform(0.05, 0.45);
    Tensor canvas({1, ss, ss, 3});
    for (int y = 0; y < ss; ++y)
        for (int x = 0; x < ss; ++x) {
            canvas.at(0, y, x, 0) = bg_r;
            canvas.at(0, y, x, 1) = bg_g;
            canvas.at(0, y, x, 2) = bg_b;
        }

    // Muted clutter boxes; the shape fill below is strictly brighter, so
    // clutter distracts without ever mimicking a silhouette.
    const int n_clutter = 2 + static_cast<int>(rng.below(4));
    for (int i = 0; i < n_clutter; ++i) {
        const double cx = rng.uniform(0.0, 1.0) * ss;
        const double cy = rng.uniform(0.0, 1.0) * ss;
        const double hw = rng.uniform(0.03, 0.12) * ss;
        const double hh = rng.uniform(0.03, 0.12) * ss;
        const double cr = rng.uniform(0.05, 0.45);
        const double cg = rng.uniform(0.05, 0.45);
        const double cb = rng.uniform(0.05, 0.45);
        const int x0 = std::max(0, static_cast<int>(cx - hw));
        const int x1 = std::min(ss - 1, static_cast<int>(cx + hw));
        const int y0 = std::max(0, static_cast<int>(cy - hh));
        const int y1 = std::min(ss - 1, static_cast<int>(cy + hh));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                canvas.at(0, y, x, 0) = cr;
                canvas.at(0, y, x, 1) = cg;
                canvas.at(0, y, x, 2) = cb;
            }
    }

    const double shape_cx = (0.5 + rng.uniform(-0.09, 0.09)) * ss;
    const double shape_cy = (0.5 + rng.uniform(-0.09, 0.09)) * ss;
    const double radius = rng.uniform(0.28, 0.40) * ss;
    const double theta = rng.uniform(-0.6, 0.6); // pose jitter, not full spins
    const double fill_r = rng.uniform(0.55, 0.95);
    const double fill_g = rng.uniform(0.55, 0.95);
    const double fill_b = rng.uniform(0.55, 0.95);

    const double ct = std::cos(-theta), st = std::sin(-theta);
    for (int y = 0; y < ss; ++y)
        for (int x = 0; x < ss; ++x) {
            const double dx = (x + 0.5 - shape_cx) / radius;
            const double dy = (y + 0.5 - shape_cy) / radius;
            const double lx = ct * dx - st * dy;
            const double ly = st * dx + ct * dy;
            if (inside_shape(label, lx, ly)) {
                canvas.at(0, y, x, 0) = fill_r;
                canvas.at(0, y, x, 1) = fill_g;
                canvas.at(0, y, x, 2) = fill_b;
            }
        }

    Tensor out({1, size, size, 3});
    const double inv = 1.0 / (kSS * kSS);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int sy = 0; sy < kSS; ++sy)
                    for (int sx = 0; sx < kSS; ++sx)
                        acc += canvas.at(0, y * kSS + sy, x * kSS + sx, c);
                out.at(0, y, x, c) = acc * inv;
            }

    for (int64_t i = 0; i < out.size(); ++i) out[i] += rng.normal(0.0, 0.01);
    out.clamp01();
    return out;
}

Dataset gen_shapes_dataset(int k, int samples_per_class, int size, uint64_t seed) {
    if (k < 2 || k > static_cast<int>(kShapeNames.size()))
        throw std::invalid_argument("gen_shapes_dataset: k must be in [2,8], got " +
                                    std::to_string(k));
    if (samples_per_class < 1)
        throw std::invalid_argument("gen_shapes_dataset: samples_per_class must be positive");
    if (size < 8)
        throw std::invalid_argument("gen_shapes_dataset: size must be at least 8, got " +
                                    std::to_string(size));

    Dataset d;
    d.num_classes = k;
    d.class_names.assign(kShapeNames.begin(), kShapeNames.begin() + k);

    const int n_train = k * samples_per_class;
    const int per_class_test = std::max(1, samples_per_class / 5);
    const int n_test = k * per_class_test;

    d.train_images = Tensor({n_train, size, size, 3});
    d.train_labels.resize(static_cast<size_t>(n_train));
    for (int i = 0; i < n_train; ++i) {
        const int label = i % k;
        d.train_labels[static_cast<size_t>(i)] = label;
        d.train_images.set_batch(
            i, render_shape_image(label, size, fan_seed(seed, "shapes-train", uint64_t(i))));
    }

    d.test_images = Tensor({n_test, size, size, 3});
    d.test_labels.resize(static_cast<size_t>(n_test));
    for (int i = 0; i < n_test; ++i) {
        const int label = i % k;
        d.test_labels[static_cast<size_t>(i)] = label;
        d.test_images.set_batch(
            i, render_shape_image(label, size, fan_seed(seed, "shapes-test", uint64_t(i))));
    }
    return d;
}

namespace {

constexpr int kCifarSide = 32;
constexpr int kCifarRecord = 1 + kCifarSide * kCifarSide * 3; // 3073
constexpr int kCifarBatchRecords = 10000;

std::vector<unsigned char> read_all_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f.seekg(0, std::ios::end);
    const std::streamoff len = f.tellg();
    f.seekg(0, std::ios::beg);
    std::vector<unsigned char> bytes(static_cast<size_t>(len));
    f.read(reinterpret_cast<char*>(bytes.data()), len);
    if (!f) throw std::runtime_error("short read from " + path);
    return bytes;
}

} // namespace

void parse_cifar_batch(const std::string& path, Tensor& images, std::vector<int>& labels) {
    const std::vector<unsigned char> bytes = read_all_bytes(path);
    if (bytes.size() % kCifarRecord != 0) {
        const size_t frag = (bytes.size() / kCifarRecord) * kCifarRecord;
        throw std::runtime_error(path + ": " + std::to_string(bytes.size()) +
                                 " bytes is not a multiple of the 3073-byte record; trailing " +
                                 "fragment begins at byte offset " + std::to_string(frag));
    }
    const int n = static_cast<int>(bytes.size() / kCifarRecord);
    images = Tensor({n, kCifarSide, kCifarSide, 3});
    labels.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const size_t off = static_cast<size_t>(i) * kCifarRecord;
        const int label = bytes[off];
        if (label > 9)
            throw std::runtime_error(path + ": invalid label " + std::to_string(label) +
                                     " at byte offset " + std::to_string(off));
        labels[static_cast<size_t>(i)] = label;
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < kCifarSide; ++y)
                for (int x = 0; x < kCifarSide; ++x)
                    images.at(i, y, x, c) =
                        bytes[off + 1 + static_cast<size_t>(c) * 1024 +
                              static_cast<size_t>(y) * kCifarSide + static_cast<size_t>(x)] /
                        255.0;
    }
}

Dataset load_cifar10(const std::string& dir) {
    static const char* kTrain[] = {"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin",
                                   "data_batch_4.bin", "data_batch_5.bin"};
    Dataset d;
    d.num_classes = 10;
    d.class_names = {"airplane", "automobile", "bird",  "cat",  "deer",
                     "dog",      "frog",       "horse", "ship", "truck"};

    auto require_full = [](const std::string& path, const Tensor& images) {
        if (images.dim(0) != kCifarBatchRecords)
            throw std::runtime_error(path + ": expected " + std::to_string(kCifarBatchRecords) +
                                     " records (" +
                                     std::to_string(int64_t(kCifarBatchRecords) * kCifarRecord) +
                                     " bytes), found " + std::to_string(images.dim(0)));
    };

    d.train_images = Tensor({5 * kCifarBatchRecords, kCifarSide, kCifarSide, 3});
    d.train_labels.reserve(5 * kCifarBatchRecords);
    for (int b = 0; b < 5; ++b) {
        const std::string path = dir + "/" + kTrain[b];
        Tensor images;
        std::vector<int> labels;
        parse_cifar_batch(path, images, labels);
        require_full(path, images);
        for (int i = 0; i < kCifarBatchRecords; ++i)
            d.train_images.set_batch(b * kCifarBatchRecords + i, images.slice_batch(i));
        d.train_labels.insert(d.train_labels.end(), labels.begin(), labels.end());
    }
    const std::string test_path = dir + "/test_batch.bin";
    parse_cifar_batch(test_path, d.test_images, d.test_labels);
    require_full(test_path, d.test_images);
    return d;
}

void export_cifar_batch(const std::string& path, const Tensor& images,
                        const std::vector<int>& labels) {
    if (images.rank() != 4 || images.dim(1) != kCifarSide || images.dim(2) != kCifarSide ||
        images.dim(3) != 3)
        throw std::invalid_argument("export_cifar_batch: images must be (N,32,32,3), got " +
                                    images.shape_str());
    if (static_cast<size_t>(images.dim(0)) != labels.size())
        throw std::invalid_argument("export_cifar_batch: image/label count mismatch");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    for (int i = 0; i < images.dim(0); ++i) {
        const int label = labels[static_cast<size_t>(i)];
        if (label < 0 || label > 9)
            throw std::invalid_argument("export_cifar_batch: label " + std::to_string(label));
        f.put(static_cast<char>(label));
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < kCifarSide; ++y)
                for (int x = 0; x < kCifarSide; ++x) {
                    const double v = images.at(i, y, x, c);
                    const int byte = static_cast<int>(std::lround(
                        std::min(1.0, std::max(0.0, v)) * 255.0));
                    f.put(static_cast<char>(byte));
                }
    }
    if (!f) throw std::runtime_error("write failed for " + path);
}

} // namespace unadv::data
