#ifndef UNADV_KERNELS_DETAIL_HPP
#define UNADV_KERNELS_DETAIL_HPP

#include "unadv/tensor.hpp"

// Row/slice bodies shared by the serial and OpenMP kernel variants. One call
// fills one independent output slice; accumulation order per element is fixed
// by the loop structure, so both variants agree bitwise.

namespace unadv::kernels::detail {

inline void conv2d_forward_row(const Tensor& x, const Tensor& w, const Tensor& b, int pad,
                               Tensor& out, int bi, int oy) {
    const int H = x.dim(1), W = x.dim(2), IC = x.dim(3);
    const int OC = w.dim(0), K = w.dim(1);
    const int OW = out.dim(2);
    const real* wd = w.data();
    for (int ox = 0; ox < OW; ++ox) {
        real* o = &out.at(bi, oy, ox, 0);
        for (int oc = 0; oc < OC; ++oc) o[oc] = b[oc];
        for (int ky = 0; ky < K; ++ky) {
            const int iy = oy + ky - pad;
            if (iy < 0 || iy >= H) continue;
            for (int kx = 0; kx < K; ++kx) {
                const int ix = ox + kx - pad;
                if (ix < 0 || ix >= W) continue;
                const real* xp = &x.at(bi, iy, ix, 0);
                for (int oc = 0; oc < OC; ++oc) {
                    const real* wp = wd + ((static_cast<int64_t>(oc) * K + ky) * K + kx) * IC;
                    real acc = 0.0;
                    for (int ic = 0; ic < IC; ++ic) acc += xp[ic] * wp[ic];
                    o[oc] += acc;
                }
            }
        }
    }
}

inline void conv2d_backward_input_row(const Tensor& w, const Tensor& dout, int pad, Tensor& dx,
                                      int bi, int iy) {
    const int OH = dout.dim(1), OW = dout.dim(2), OC = dout.dim(3);
    const int K = w.dim(1), IC = w.dim(3);
    const int W = dx.dim(2);
    const real* wd = w.data();
    for (int ix = 0; ix < W; ++ix) {
        real* dxp = &dx.at(bi, iy, ix, 0);
        for (int ic = 0; ic < IC; ++ic) dxp[ic] = 0.0;
        for (int ky = 0; ky < K; ++ky) {
            const int oy = iy - ky + pad;
            if (oy < 0 || oy >= OH) continue;
            for (int kx = 0; kx < K; ++kx) {
                const int ox = ix - kx + pad;
                if (ox < 0 || ox >= OW) continue;
                const real* gp = &dout.at(bi, oy, ox, 0);
                for (int oc = 0; oc < OC; ++oc) {
                    const real g = gp[oc];
                    const real* wp = wd + ((static_cast<int64_t>(oc) * K + ky) * K + kx) * IC;
                    for (int ic = 0; ic < IC; ++ic) dxp[ic] += g * wp[ic];
                }
            }
        }
    }
}

inline void conv2d_backward_params_oc(const Tensor& x, const Tensor& dout, int pad,
                                      Tensor& dw, Tensor& db, int oc) {
    const int B = x.dim(0), H = x.dim(1), W = x.dim(2), IC = x.dim(3);
    const int OH = dout.dim(1), OW = dout.dim(2);
    const int K = dw.dim(1);
    real bacc = 0.0;
    real* dwoc = dw.data() + static_cast<int64_t>(oc) * K * K * IC;
    for (int bi = 0; bi < B; ++bi)
        for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox) {
                const real g = dout.at(bi, oy, ox, oc);
                bacc += g;
                if (g == 0.0) continue;
                for (int ky = 0; ky < K; ++ky) {
                    const int iy = oy + ky - pad;
                    if (iy < 0 || iy >= H) continue;
                    for (int kx = 0; kx < K; ++kx) {
                        const int ix = ox + kx - pad;
                        if (ix < 0 || ix >= W) continue;
                        const real* xp = &x.at(bi, iy, ix, 0);
                        real* dwp = dwoc + (static_cast<int64_t>(ky) * K + kx) * IC;
                        for (int ic = 0; ic < IC; ++ic) dwp[ic] += g * xp[ic];
                    }
                }
            }
    db[oc] = bacc;
}

} // namespace unadv::kernels::detail

#endif
