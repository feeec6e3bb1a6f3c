// Times the serial reference kernels against their OpenMP twins and checks
// they agree bitwise. `--smoke` runs tiny shapes once (used by ctest);
// `--reps N` and `--batch N` tune the measurement.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "unadv/kernels.hpp"
#include "unadv/rng.hpp"
#include "unadv/tensor.hpp"

using namespace unadv;

namespace {

Tensor randu(std::vector<int> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
}

double time_best(int reps, const std::function<void()>& fn) {
    double best = 1e99;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

bool equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (int64_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

struct Case {
    std::string name;
    std::function<void(Tensor&)> serial_fn;
    std::function<void(Tensor&)> omp_fn;
    std::vector<int> out_shape;
};

} // namespace

int main(int argc, char** argv) {
    bool smoke = false;
    int reps = 5, batch = 32, side = 32, cin = 16, cout = 32;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--smoke") {
            smoke = true;
        } else if (arg == "--reps" && i + 1 < argc) {
            reps = std::atoi(argv[++i]);
        } else if (arg == "--batch" && i + 1 < argc) {
            batch = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: bench_kernels [--smoke] [--reps N] [--batch N]\n");
            return 2;
        }
    }
    if (smoke) {
        reps = 1;
        batch = 4;
        side = 8;
        cin = 4;
        cout = 8;
    }

    Rng rng(1234);
    const Tensor x = randu({batch, side, side, cin}, rng);
    const Tensor w = randu({cout, 3, 3, cin}, rng);
    const Tensor b = randu({cout}, rng);
    const Tensor dout = randu({batch, side, side, cout}, rng);
    const Tensor pooled_in = randu({batch, side, side, cin}, rng);
    const int flat = side * side * cin;
    const Tensor xf = randu({batch, flat}, rng);
    const Tensor wf = randu({flat, cout}, rng);
    const Tensor bf = randu({cout}, rng);

    std::vector<Case> cases;
    cases.push_back({"conv2d_forward",
                     [&](Tensor& out) { kernels::serial::conv2d_forward(x, w, b, 1, out); },
                     [&](Tensor& out) { kernels::omp::conv2d_forward(x, w, b, 1, out); },
                     {batch, side, side, cout}});
    cases.push_back({"conv2d_backward_input",
                     [&](Tensor& out) { kernels::serial::conv2d_backward_input(w, dout, 1, out); },
                     [&](Tensor& out) { kernels::omp::conv2d_backward_input(w, dout, 1, out); },
                     {batch, side, side, cin}});
    cases.push_back({"avgpool2_forward",
                     [&](Tensor& out) { kernels::serial::avgpool2_forward(pooled_in, out); },
                     [&](Tensor& out) { kernels::omp::avgpool2_forward(pooled_in, out); },
                     {batch, side / 2, side / 2, cin}});
    cases.push_back({"dense_forward",
                     [&](Tensor& out) { kernels::serial::dense_forward(xf, wf, bf, out); },
                     [&](Tensor& out) { kernels::omp::dense_forward(xf, wf, bf, out); },
                     {batch, cout}});

    std::printf("kernel                    serial ms      omp ms    speedup  bitwise\n");
    bool all_equal = true;
    for (const Case& c : cases) {
        Tensor out_serial(c.out_shape), out_omp(c.out_shape);
        const double ts = time_best(reps, [&] { c.serial_fn(out_serial); });
        const double to = time_best(reps, [&] { c.omp_fn(out_omp); });
        const bool same = equal(out_serial, out_omp);
        all_equal = all_equal && same;
        std::printf("%-24s %10.3f  %10.3f  %8.2fx  %s\n", c.name.c_str(), ts, to,
                    to > 0 ? ts / to : 0.0, same ? "yes" : "NO");
    }
    {
        // conv2d_backward_params has two outputs; check it separately.
        Tensor dws(w.shape()), dbs(b.shape()), dwo(w.shape()), dbo(b.shape());
        const double ts = time_best(reps, [&] {
            kernels::serial::conv2d_backward_params(x, dout, 1, dws, dbs);
        });
        const double to = time_best(reps, [&] {
            kernels::omp::conv2d_backward_params(x, dout, 1, dwo, dbo);
        });
        const bool same = equal(dws, dwo) && equal(dbs, dbo);
        all_equal = all_equal && same;
        std::printf("%-24s %10.3f  %10.3f  %8.2fx  %s\n", "conv2d_backward_params", ts, to,
                    to > 0 ? ts / to : 0.0, same ? "yes" : "NO");
    }
    if (!all_equal) {
        std::fprintf(stderr, "serial and omp kernels disagree\n");
        return 1;
    }
    return 0;
}
