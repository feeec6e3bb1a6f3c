#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "helpers.hpp"
#include "unadv/dataset.hpp"
#include "unadv/model.hpp"
#include "unadv/rng.hpp"

using namespace unadv;
using model::Head;
using model::ModelConfig;
using model::ModelParams;
using model::TrainConfig;
using testutil::bitwise_equal;

namespace {

ModelConfig tiny_config(int outputs) {
    ModelConfig mc;
    mc.input_h = mc.input_w = 16;
    mc.channels = {8, 16};
    mc.outputs = outputs;
    return mc;
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
    auto ta = a.tensors(), tb = b.tensors();
    if (ta.size() != tb.size()) return false;
    for (size_t i = 0; i < ta.size(); ++i)
        if (!bitwise_equal(*ta[i], *tb[i])) return false;
    return true;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("default architecture stays desk-sized") {
    ModelConfig mc; // 32x32x3, {16,32,64}, 10 outputs
    ModelParams p = model::init_model(mc, 0);
    CHECK(p.parameter_count() == 24234);
    CHECK(p.parameter_count() < 200000);
    CHECK(p.conv_w[0].shape() == std::vector<int>{16, 3, 3, 3});
    CHECK(p.head_w.shape() == std::vector<int>{64, 10});
}

TEST_CASE("initialization is seeded") {
    ModelConfig mc = tiny_config(4);
    CHECK(params_equal(model::init_model(mc, 11), model::init_model(mc, 11)));
    CHECK_FALSE(params_equal(model::init_model(mc, 11), model::init_model(mc, 12)));
}

TEST_CASE("config validation") {
    ModelConfig mc = tiny_config(4);
    mc.kernel = 4;
    CHECK_THROWS_AS(model::init_model(mc, 0), std::invalid_argument);
    mc = tiny_config(4);
    mc.input_h = 18; // not divisible by 4 for two pools
    CHECK_THROWS_AS(model::init_model(mc, 0), std::invalid_argument);
    mc = tiny_config(0);
    CHECK_THROWS_AS(model::init_model(mc, 0), std::invalid_argument);
}

TEST_CASE("forward is pure and shape-correct") {
    ModelConfig mc = tiny_config(5);
    ModelParams p = model::init_model(mc, 3);
    Rng rng(4);
    Tensor x = testutil::random_tensor({2, 16, 16, 3}, rng, 0.0, 1.0);
    const uint64_t before = model::weight_digest(p);
    Tensor a = model::forward_logits(p, x);
    Tensor b = model::forward_logits(p, x);
    CHECK(a.shape() == std::vector<int>{2, 5});
    CHECK(bitwise_equal(a, b));
    CHECK(model::weight_digest(p) == before);
}

TEST_CASE("digest reacts to any weight change") {
    ModelParams p = model::init_model(tiny_config(3), 5);
    const uint64_t d0 = model::weight_digest(p);
    p.head_b[0] += 1e-12;
    CHECK(model::weight_digest(p) != d0);
}

TEST_CASE("one-sample memorization drives loss to zero") {
    ModelConfig mc = tiny_config(4);
    data::Dataset d;
    d.num_classes = 4;
    Rng rng(6);
    d.train_images = testutil::random_tensor({1, 16, 16, 3}, rng, 0.0, 1.0);
    d.train_labels = {2};
    d.test_images = d.train_images;
    d.test_labels = d.train_labels;

    TrainConfig tc;
    tc.batch_size = 1;
    tc.epochs = 80;
    tc.weight_decay = 0.0;
    tc.seed = 1;
    std::vector<model::EpochLog> log;
    ModelParams p = model::train_classifier(d, mc, tc, &log);
    REQUIRE(log.size() == 80);
    CHECK(log.back().loss < 0.01);
    CHECK(model::accuracy(p, d.test_images, d.test_labels) == 1.0);
}

TEST_CASE("shuffled labels train to chance accuracy") {
    data::Dataset d = data::gen_shapes_dataset(4, 50, 16, 21);
    Rng label_rng(77);
    for (int& y : d.train_labels) y = static_cast<int>(label_rng.below(4));

    ModelConfig mc = tiny_config(4);
    TrainConfig tc;
    tc.batch_size = 32;
    tc.epochs = 5;
    tc.seed = 2;
    ModelParams p = model::train_classifier(d, mc, tc);

    // Fresh labels drawn independently of anything the model saw.
    std::vector<int> fresh(static_cast<size_t>(d.train_count()));
    for (int& y : fresh) y = static_cast<int>(label_rng.below(4));
    const real acc = model::accuracy(p, d.train_images, fresh);
    CHECK(acc > 0.15);
    CHECK(acc < 0.35);
}

TEST_CASE("real labels train well above chance") {
    data::Dataset d = data::gen_shapes_dataset(3, 100, 32, 22);
    ModelConfig mc;
    mc.channels = {8, 16};
    mc.outputs = 3;
    TrainConfig tc;
    tc.batch_size = 32;
    tc.epochs = 25;
    tc.seed = 3;
    ModelParams p = model::train_classifier(d, mc, tc);
    CHECK(model::accuracy(p, d.test_images, d.test_labels) > 0.5); // chance is 1/3
}

TEST_CASE("training is bit-deterministic") {
    data::Dataset d = data::gen_shapes_dataset(3, 10, 16, 23);
    ModelConfig mc = tiny_config(3);
    TrainConfig tc;
    tc.batch_size = 16;
    tc.epochs = 2;
    tc.seed = 4;
    ModelParams a = model::train_classifier(d, mc, tc);
    ModelParams b = model::train_classifier(d, mc, tc);
    CHECK(params_equal(a, b));
    CHECK(model::weight_digest(a) == model::weight_digest(b));
}

TEST_CASE("training rejects bad input") {
    ModelConfig mc = tiny_config(3);
    TrainConfig tc;
    data::Dataset empty;
    CHECK_THROWS_AS(model::train_classifier(empty, mc, tc), std::invalid_argument);

    data::Dataset bad = data::gen_shapes_dataset(3, 2, 16, 0);
    bad.train_labels[0] = 7; // outside [0,3)
    CHECK_THROWS_AS(model::train_classifier(bad, mc, tc), std::invalid_argument);

    ModelConfig reg = tiny_config(2);
    reg.head = Head::regression;
    CHECK_THROWS_AS(model::train_classifier(bad, reg, tc), std::invalid_argument);
}

TEST_CASE("regression head learns a linear-ish target") {
    // Targets = mean brightness in two halves; easy enough for a tiny net.
    Rng rng(31);
    const int n = 40;
    Tensor images = testutil::random_tensor({n, 16, 16, 3}, rng, 0.0, 1.0);
    Tensor targets({n, 2});
    for (int i = 0; i < n; ++i) {
        double left = 0.0, right = 0.0;
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                for (int c = 0; c < 3; ++c)
                    (x < 8 ? left : right) += images.at(i, y, x, c);
        targets.at(i, 0) = left / (16 * 8 * 3);
        targets.at(i, 1) = right / (16 * 8 * 3);
    }
    ModelConfig mc = tiny_config(2);
    mc.head = Head::regression;
    TrainConfig tc;
    tc.batch_size = 20;
    tc.epochs = 60;
    tc.learning_rate = 0.05;
    tc.weight_decay = 0.0;
    tc.seed = 5;
    std::vector<model::EpochLog> log;
    model::train_regressor(images, targets, mc, tc, &log);
    CHECK(log.back().loss < log.front().loss * 0.5);
    CHECK(log.back().loss < 0.01);
}

TEST_CASE("checkpoint round trip preserves float32 weights") {
    auto dir = std::filesystem::temp_directory_path() / "unadv_model_tests";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "model.ckpt").string();

    ModelConfig mc = tiny_config(5);
    ModelParams p = model::init_model(mc, 9);
    model::save_checkpoint(p, path);
    ModelParams q = model::load_checkpoint(path);

    CHECK(q.config.input_h == 16);
    CHECK(q.config.channels == std::vector<int>{8, 16});
    CHECK(q.config.outputs == 5);
    CHECK(q.config.head == Head::classification);

    auto tp = p.tensors();
    auto tq = q.tensors();
    REQUIRE(tp.size() == tq.size());
    for (size_t i = 0; i < tp.size(); ++i) {
        REQUIRE(tp[i]->same_shape(*tq[i]));
        for (int64_t j = 0; j < tp[i]->size(); ++j)
            CHECK((*tq[i])[j] == static_cast<double>(static_cast<float>((*tp[i])[j])));
    }

    // Saving the loaded model reproduces the same file bytes.
    const std::string path2 = (dir / "model2.ckpt").string();
    model::save_checkpoint(q, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("checkpoint loader rejects corrupt files") {
    auto dir = std::filesystem::temp_directory_path() / "unadv_model_tests";
    std::filesystem::create_directories(dir);

    const std::string bad_magic = (dir / "bad_magic.ckpt").string();
    {
        std::ofstream f(bad_magic, std::ios::binary);
        f << "NOTACKPTxxxxxxxxxxxxxxxx";
    }
    CHECK_THROWS_AS(model::load_checkpoint(bad_magic), std::runtime_error);

    const std::string good = (dir / "good.ckpt").string();
    ModelParams p = model::init_model(tiny_config(3), 1);
    model::save_checkpoint(p, good);

    const std::string truncated = (dir / "trunc.ckpt").string();
    {
        std::ifstream in(good, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out(truncated, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(model::load_checkpoint(truncated), std::runtime_error);

    const std::string padded = (dir / "padded.ckpt").string();
    {
        std::ifstream in(good, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        bytes += "extra";
        std::ofstream out(padded, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_AS(model::load_checkpoint(padded), std::runtime_error);

    CHECK_THROWS_AS(model::load_checkpoint((dir / "missing.ckpt").string()), std::runtime_error);
}

} // TEST_SUITE
