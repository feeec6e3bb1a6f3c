#ifndef UNADV_KERNELS_HPP
#define UNADV_KERNELS_HPP

#include "unadv/tensor.hpp"

// Numeric kernels behind the autodiff ops. Every kernel exists twice: a
// serial reference (kernels_serial.cpp) and an OpenMP version
// (kernels_omp.cpp). Both are gather-style -- each output element is written
// by exactly one loop iteration and accumulated in a fixed order -- so the
// results are bit-identical regardless of thread count. The undecorated
// names dispatch on unadv::parallel::enabled().
//
// Layouts: images (B,H,W,C); conv weights (OC,K,K,IC); dense inputs (B,D),
// dense weights (D,K). Convolutions are stride 1 with zero padding `pad`.

namespace unadv::kernels {

void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int pad, Tensor& out);
void conv2d_backward_input(const Tensor& w, const Tensor& dout, int pad, Tensor& dx);
void conv2d_backward_params(const Tensor& x, const Tensor& dout, int pad, Tensor& dw, Tensor& db);

void avgpool2_forward(const Tensor& x, Tensor& out);
void avgpool2_backward(const Tensor& dout, Tensor& dx);

void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out);
void dense_backward(const Tensor& x, const Tensor& w, const Tensor& dout,
                    Tensor& dx, Tensor& dw, Tensor& db);

namespace serial {
void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int pad, Tensor& out);
void conv2d_backward_input(const Tensor& w, const Tensor& dout, int pad, Tensor& dx);
void conv2d_backward_params(const Tensor& x, const Tensor& dout, int pad, Tensor& dw, Tensor& db);
void avgpool2_forward(const Tensor& x, Tensor& out);
void avgpool2_backward(const Tensor& dout, Tensor& dx);
void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out);
void dense_backward(const Tensor& x, const Tensor& w, const Tensor& dout,
                    Tensor& dx, Tensor& dw, Tensor& db);
} // namespace serial

namespace omp {
void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int pad, Tensor& out);
void conv2d_backward_input(const Tensor& w, const Tensor& dout, int pad, Tensor& dx);
void conv2d_backward_params(const Tensor& x, const Tensor& dout, int pad, Tensor& dw, Tensor& db);
void avgpool2_forward(const Tensor& x, Tensor& out);
void avgpool2_backward(const Tensor& dout, Tensor& dx);
void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out);
void dense_backward(const Tensor& x, const Tensor& w, const Tensor& dout,
                    Tensor& dx, Tensor& dw, Tensor& db);
} // namespace omp

// Shared shape checks; throw std::invalid_argument on mismatch.
void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& b, int pad);

} // namespace unadv::kernels

#endif
