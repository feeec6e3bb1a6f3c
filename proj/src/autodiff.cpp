#include "unadv/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "unadv/kernels.hpp"

namespace unadv::ad {

int Tape::check(Ref r) const {
    if (r.id < 0 || r.id >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("Tape: ref " + std::to_string(r.id) + " is not in this graph");
    return r.id;
}

Tape::Ref Tape::push(Tensor value, bool needs_grad, bool is_leaf, BackwardFn fn) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.is_leaf = is_leaf;
    n.backward = std::move(fn);
    if (needs_grad) n.grad = Tensor(n.value.shape());
    nodes_.push_back(std::move(n));
    return Ref{static_cast<int>(nodes_.size()) - 1};
}

bool Tape::any_tracked(std::initializer_list<Ref> rs) const {
    for (Ref r : rs)
        if (r.valid() && node(r).needs_grad) return true;
    return false;
}

void Tape::accumulate(Ref r, const Tensor& g) {
    Node& n = nodes_[static_cast<size_t>(check(r))];
    if (!n.needs_grad) return;
    require_same_shape(n.grad, g, "accumulate");
    for (int64_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

const Tensor& Tape::grad(Ref r) const {
    const Node& n = node(r);
    if (!n.needs_grad)
        throw std::invalid_argument("Tape: node " + std::to_string(r.id) +
                                    " has no gradient storage");
    return n.grad;
}

Tape::Ref Tape::input(Tensor value, bool requires_grad) {
    return push(std::move(value), requires_grad, true, nullptr);
}

Tape::Ref Tape::conv2d(Ref x, Ref w, Ref b, int pad) {
    Tensor out;
    kernels::conv2d_forward(value(x), value(w), value(b), pad, out);
    const bool ng = any_tracked({x, w, b});
    return push(std::move(out), ng, false, [x, w, b, pad](Tape& t, const Tensor& g) {
        if (t.node(x).needs_grad) {
            Tensor dx;
            kernels::conv2d_backward_input(t.value(w), g, pad, dx);
            t.accumulate(x, dx);
        }
        if (t.node(w).needs_grad || t.node(b).needs_grad) {
            Tensor dw, db;
            kernels::conv2d_backward_params(t.value(x), g, pad, dw, db);
            t.accumulate(w, dw);
            t.accumulate(b, db);
        }
    });
}

Tape::Ref Tape::relu(Ref x) {
    Tensor out = value(x);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = std::max(real(0), out[i]);
    return push(std::move(out), any_tracked({x}), false, [x](Tape& t, const Tensor& g) {
        const Tensor& v = t.value(x);
        Tensor dx(v.shape());
        for (int64_t i = 0; i < v.size(); ++i) dx[i] = v[i] > 0 ? g[i] : real(0);
        t.accumulate(x, dx);
    });
}

Tape::Ref Tape::avgpool2(Ref x) {
    Tensor out;
    kernels::avgpool2_forward(value(x), out);
    return push(std::move(out), any_tracked({x}), false, [x](Tape& t, const Tensor& g) {
        Tensor dx;
        kernels::avgpool2_backward(g, dx);
        t.accumulate(x, dx);
    });
}

Tape::Ref Tape::global_avgpool(Ref x) {
    const Tensor& v = value(x);
    if (v.rank() != 4) throw std::invalid_argument("global_avgpool: rank-4 input required");
    const int B = v.dim(0), H = v.dim(1), W = v.dim(2), C = v.dim(3);
    Tensor out({B, C});
    for (int bi = 0; bi < B; ++bi)
        for (int y = 0; y < H; ++y)
            for (int xx = 0; xx < W; ++xx)
                for (int c = 0; c < C; ++c) out.at(bi, c) += v.at(bi, y, xx, c);
    const real inv = real(1) / (static_cast<real>(H) * W);
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= inv;
    return push(std::move(out), any_tracked({x}), false, [x, H, W, C, B](Tape& t, const Tensor& g) {
        Tensor dx({B, H, W, C});
        const real inv = real(1) / (static_cast<real>(H) * W);
        for (int bi = 0; bi < B; ++bi)
            for (int y = 0; y < H; ++y)
                for (int xx = 0; xx < W; ++xx)
                    for (int c = 0; c < C; ++c) dx.at(bi, y, xx, c) = g.at(bi, c) * inv;
        t.accumulate(x, dx);
    });
}

Tape::Ref Tape::dense(Ref x, Ref w, Ref b) {
    Tensor out;
    kernels::dense_forward(value(x), value(w), value(b), out);
    return push(std::move(out), any_tracked({x, w, b}), false, [x, w, b](Tape& t, const Tensor& g) {
        Tensor dx, dw, db;
        kernels::dense_backward(t.value(x), t.value(w), g, dx, dw, db);
        t.accumulate(x, dx);
        t.accumulate(w, dw);
        t.accumulate(b, db);
    });
}

Tape::Ref Tape::cross_entropy(Ref logits, const std::vector<int>& labels) {
    const Tensor& l = value(logits);
    if (l.rank() != 2) throw std::invalid_argument("cross_entropy: logits must be (B,K)");
    const int B = l.dim(0), K = l.dim(1);
    if (static_cast<int>(labels.size()) != B)
        throw std::invalid_argument("cross_entropy: batch " + std::to_string(B) + " vs " +
                                    std::to_string(labels.size()) + " labels");
    for (int y : labels)
        if (y < 0 || y >= K)
            throw std::invalid_argument("cross_entropy: label " + std::to_string(y) +
                                        " outside [0," + std::to_string(K) + ")");
    // Row-max stabilized log-softmax.
    Tensor probs({B, K});
    real loss = 0.0;
    for (int bi = 0; bi < B; ++bi) {
        real mx = l.at(bi, 0);
        for (int k = 1; k < K; ++k) mx = std::max(mx, l.at(bi, k));
        real denom = 0.0;
        for (int k = 0; k < K; ++k) denom += std::exp(l.at(bi, k) - mx);
        const real log_denom = std::log(denom);
        for (int k = 0; k < K; ++k) probs.at(bi, k) = std::exp(l.at(bi, k) - mx) / denom;
        loss += log_denom - (l.at(bi, labels[static_cast<size_t>(bi)]) - mx);
    }
    Tensor out({1});
    out[0] = loss / B;
    return push(std::move(out), any_tracked({logits}), false,
                [logits, labels, probs = std::move(probs), B, K](Tape& t, const Tensor& g) {
                    Tensor dl({B, K});
                    const real s = g[0] / B;
                    for (int bi = 0; bi < B; ++bi)
                        for (int k = 0; k < K; ++k)
                            dl.at(bi, k) =
                                s * (probs.at(bi, k) -
                                     (k == labels[static_cast<size_t>(bi)] ? real(1) : real(0)));
                    t.accumulate(logits, dl);
                });
}

Tape::Ref Tape::mse(Ref pred, const Tensor& target) {
    const Tensor& p = value(pred);
    require_same_shape(p, target, "mse");
    const int64_t n = p.size();
    real loss = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const real d = p[i] - target[i];
        loss += d * d;
    }
    Tensor out({1});
    out[0] = loss / static_cast<real>(n);
    return push(std::move(out), any_tracked({pred}), false,
                [pred, target, n](Tape& t, const Tensor& g) {
                    const Tensor& p = t.value(pred);
                    Tensor dp(p.shape());
                    const real s = g[0] * real(2) / static_cast<real>(n);
                    for (int64_t i = 0; i < n; ++i) dp[i] = s * (p[i] - target[i]);
                    t.accumulate(pred, dp);
                });
}

Tape::Ref Tape::add(Ref a, Ref b) {
    require_same_shape(value(a), value(b), "add");
    Tensor out = value(a);
    const Tensor& vb = value(b);
    for (int64_t i = 0; i < out.size(); ++i) out[i] += vb[i];
    return push(std::move(out), any_tracked({a, b}), false, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Tape::Ref Tape::sub(Ref a, Ref b) {
    require_same_shape(value(a), value(b), "sub");
    Tensor out = value(a);
    const Tensor& vb = value(b);
    for (int64_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
    return push(std::move(out), any_tracked({a, b}), false, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        Tensor neg = g;
        for (int64_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
        t.accumulate(b, neg);
    });
}

Tape::Ref Tape::mul(Ref a, Ref b) {
    require_same_shape(value(a), value(b), "mul");
    Tensor out = value(a);
    const Tensor& vb = value(b);
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
    return push(std::move(out), any_tracked({a, b}), false, [a, b](Tape& t, const Tensor& g) {
        const Tensor& va = t.value(a);
        const Tensor& vb = t.value(b);
        Tensor da(va.shape()), db(vb.shape());
        for (int64_t i = 0; i < g.size(); ++i) {
            da[i] = g[i] * vb[i];
            db[i] = g[i] * va[i];
        }
        t.accumulate(a, da);
        t.accumulate(b, db);
    });
}

Tape::Ref Tape::scale(Ref a, real s) {
    Tensor out = value(a);
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= s;
    return push(std::move(out), any_tracked({a}), false, [a, s](Tape& t, const Tensor& g) {
        Tensor da = g;
        for (int64_t i = 0; i < da.size(); ++i) da[i] *= s;
        t.accumulate(a, da);
    });
}

Tape::Ref Tape::sum(Ref a) {
    const Tensor& v = value(a);
    Tensor out({1});
    for (int64_t i = 0; i < v.size(); ++i) out[0] += v[i];
    return push(std::move(out), any_tracked({a}), false, [a](Tape& t, const Tensor& g) {
        Tensor da(t.value(a).shape(), g[0]);
        t.accumulate(a, da);
    });
}

Tape::Ref Tape::custom(Tensor value, const std::vector<Ref>& inputs, BackwardFn backward) {
    bool ng = false;
    for (Ref r : inputs) ng = ng || node(r).needs_grad;
    return push(std::move(value), ng, false, ng ? std::move(backward) : BackwardFn{});
}

void Tape::backward(Ref loss) {
    const int id = check(loss);
    if (nodes_[static_cast<size_t>(id)].value.size() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got " +
                                    nodes_[static_cast<size_t>(id)].value.shape_str());
    if (ran_backward_) throw std::logic_error("backward: tape already consumed");
    ran_backward_ = true;
    if (!nodes_[static_cast<size_t>(id)].needs_grad) return; // nothing to differentiate
    nodes_[static_cast<size_t>(id)].grad[0] = 1.0;
    for (int i = id; i >= 0; --i) {
        Node& n = nodes_[static_cast<size_t>(i)];
        if (n.needs_grad && n.backward) n.backward(*this, n.grad);
    }
}

std::vector<Tensor> Tape::backward(Ref loss, const std::vector<Ref>& wrt) {
    for (Ref r : wrt) {
        const Node& n = node(r);
        if (!n.is_leaf)
            throw std::invalid_argument("backward: ref " + std::to_string(r.id) +
                                        " is not a leaf");
        if (!n.needs_grad)
            throw std::invalid_argument("backward: leaf " + std::to_string(r.id) +
                                        " was created without gradient tracking");
    }
    backward(loss);
    std::vector<Tensor> out;
    out.reserve(wrt.size());
    for (Ref r : wrt) out.push_back(node(r).grad);
    return out;
}

} // namespace unadv::ad
