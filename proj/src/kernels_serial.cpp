#include "unadv/kernels.hpp"
#include "unadv/parallel.hpp"
#include "kernels_detail.hpp"

#include <stdexcept>

namespace unadv::kernels {

void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& b, int pad) {
    if (x.rank() != 4 || w.rank() != 4 || b.rank() != 1)
        throw std::invalid_argument("conv2d: ranks must be x=4 w=4 b=1");
    if (w.dim(3) != x.dim(3))
        throw std::invalid_argument("conv2d: input channels " + x.shape_str() +
                                    " do not match weights " + w.shape_str());
    if (w.dim(0) != b.dim(0))
        throw std::invalid_argument("conv2d: bias " + b.shape_str() + " does not match weights " +
                                    w.shape_str());
    if (w.dim(1) != w.dim(2)) throw std::invalid_argument("conv2d: kernel must be square");
    if (pad < 0) throw std::invalid_argument("conv2d: negative padding");
}

namespace serial {

void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int pad, Tensor& out) {
    check_conv_shapes(x, w, b, pad);
    const int B = x.dim(0), H = x.dim(1);
    const int K = w.dim(1);
    const int OH = H + 2 * pad - K + 1, OW = x.dim(2) + 2 * pad - K + 1;
    out = Tensor({B, OH, OW, w.dim(0)});
    for (int bi = 0; bi < B; ++bi)
        for (int oy = 0; oy < OH; ++oy) detail::conv2d_forward_row(x, w, b, pad, out, bi, oy);
}

void conv2d_backward_input(const Tensor& w, const Tensor& dout, int pad, Tensor& dx) {
    const int B = dout.dim(0), OH = dout.dim(1), OW = dout.dim(2);
    const int K = w.dim(1), IC = w.dim(3);
    const int H = OH + K - 1 - 2 * pad, W = OW + K - 1 - 2 * pad;
    dx = Tensor({B, H, W, IC});
    for (int bi = 0; bi < B; ++bi)
        for (int iy = 0; iy < H; ++iy) detail::conv2d_backward_input_row(w, dout, pad, dx, bi, iy);
}

void conv2d_backward_params(const Tensor& x, const Tensor& dout, int pad, Tensor& dw, Tensor& db) {
    const int IC = x.dim(3), OC = dout.dim(3);
    const int K = x.dim(1) + 2 * pad - dout.dim(1) + 1;
    dw = Tensor({OC, K, K, IC});
    db = Tensor({OC});
    for (int oc = 0; oc < OC; ++oc) detail::conv2d_backward_params_oc(x, dout, pad, dw, db, oc);
}

void avgpool2_forward(const Tensor& x, Tensor& out) {
    const int B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
    if (H % 2 || W % 2) throw std::invalid_argument("avgpool2: odd spatial size " + x.shape_str());
    out = Tensor({B, H / 2, W / 2, C});
    for (int bi = 0; bi < B; ++bi)
        for (int y = 0; y < H / 2; ++y)
            for (int xx = 0; xx < W / 2; ++xx)
                for (int c = 0; c < C; ++c)
                    out.at(bi, y, xx, c) = 0.25 * (x.at(bi, 2 * y, 2 * xx, c) +
                                                   x.at(bi, 2 * y, 2 * xx + 1, c) +
                                                   x.at(bi, 2 * y + 1, 2 * xx, c) +
                                                   x.at(bi, 2 * y + 1, 2 * xx + 1, c));
}

void avgpool2_backward(const Tensor& dout, Tensor& dx) {
    const int B = dout.dim(0), OH = dout.dim(1), OW = dout.dim(2), C = dout.dim(3);
    dx = Tensor({B, OH * 2, OW * 2, C});
    for (int bi = 0; bi < B; ++bi)
        for (int y = 0; y < OH * 2; ++y)
            for (int xx = 0; xx < OW * 2; ++xx)
                for (int c = 0; c < C; ++c)
                    dx.at(bi, y, xx, c) = 0.25 * dout.at(bi, y / 2, xx / 2, c);
}

void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out) {
    const int B = x.dim(0), D = x.dim(1), K = w.dim(1);
    if (w.dim(0) != D)
        throw std::invalid_argument("dense: input " + x.shape_str() + " does not match weights " +
                                    w.shape_str());
    out = Tensor({B, K});
    for (int bi = 0; bi < B; ++bi) {
        real* o = &out.at(bi, 0);
        for (int k = 0; k < K; ++k) o[k] = b[k];
        for (int d = 0; d < D; ++d) {
            const real xv = x.at(bi, d);
            const real* wp = &w.at(d, 0);
            for (int k = 0; k < K; ++k) o[k] += xv * wp[k];
        }
    }
}

void dense_backward(const Tensor& x, const Tensor& w, const Tensor& dout,
                    Tensor& dx, Tensor& dw, Tensor& db) {
    const int B = x.dim(0), D = x.dim(1), K = w.dim(1);
    dx = Tensor({B, D});
    dw = Tensor({D, K});
    db = Tensor({K});
    for (int bi = 0; bi < B; ++bi)
        for (int d = 0; d < D; ++d) {
            real acc = 0.0;
            const real* wp = &w.at(d, 0);
            const real* gp = &dout.at(bi, 0);
            for (int k = 0; k < K; ++k) acc += gp[k] * wp[k];
            dx.at(bi, d) = acc;
        }
    for (int d = 0; d < D; ++d) {
        real* dwp = &dw.at(d, 0);
        for (int bi = 0; bi < B; ++bi) {
            const real xv = x.at(bi, d);
            const real* gp = &dout.at(bi, 0);
            for (int k = 0; k < K; ++k) dwp[k] += xv * gp[k];
        }
    }
    for (int k = 0; k < K; ++k) {
        real acc = 0.0;
        for (int bi = 0; bi < B; ++bi) acc += dout.at(bi, k);
        db[k] = acc;
    }
}

} // namespace serial

// Dispatchers.
void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int pad, Tensor& out) {
    parallel::enabled() ? omp::conv2d_forward(x, w, b, pad, out)
                        : serial::conv2d_forward(x, w, b, pad, out);
}
void conv2d_backward_input(const Tensor& w, const Tensor& dout, int pad, Tensor& dx) {
    parallel::enabled() ? omp::conv2d_backward_input(w, dout, pad, dx)
                        : serial::conv2d_backward_input(w, dout, pad, dx);
}
void conv2d_backward_params(const Tensor& x, const Tensor& dout, int pad, Tensor& dw, Tensor& db) {
    parallel::enabled() ? omp::conv2d_backward_params(x, dout, pad, dw, db)
                        : serial::conv2d_backward_params(x, dout, pad, dw, db);
}
void avgpool2_forward(const Tensor& x, Tensor& out) {
    parallel::enabled() ? omp::avgpool2_forward(x, out) : serial::avgpool2_forward(x, out);
}
void avgpool2_backward(const Tensor& dout, Tensor& dx) {
    parallel::enabled() ? omp::avgpool2_backward(dout, dx) : serial::avgpool2_backward(dout, dx);
}
void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out) {
    parallel::enabled() ? omp::dense_forward(x, w, b, out) : serial::dense_forward(x, w, b, out);
}
void dense_backward(const Tensor& x, const Tensor& w, const Tensor& dout,
                    Tensor& dx, Tensor& dw, Tensor& db) {
    parallel::enabled() ? omp::dense_backward(x, w, dout, dx, dw, db)
                        : serial::dense_backward(x, w, dout, dx, dw, db);
}

} // namespace unadv::kernels
