#ifndef UNADV_AUTODIFF_HPP
#define UNADV_AUTODIFF_HPP

#include <functional>
#include <vector>

#include "unadv/tensor.hpp"

namespace unadv::ad {

// Reverse-mode tape. Ops evaluate eagerly and record a backward closure;
// backward() replays the closures in reverse creation order. Gradients are
// tracked only for nodes that (transitively) depend on a leaf created with
// requires_grad, so frozen weights cost nothing.
//
// Refs are tape-local handles; using a Ref on a different tape is undefined
// (ids are range-checked, nothing more).
class Tape {
public:
    struct Ref {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

    // Leaves.
    Ref input(Tensor value, bool requires_grad = false);

    // Network ops. Shapes: x (B,H,W,C); conv weights (OC,K,K,IC); dense
    // x (B,D), w (D,K). Convolutions are stride 1 with zero padding `pad`.
    Ref conv2d(Ref x, Ref w, Ref b, int pad);
    Ref relu(Ref x);
    Ref avgpool2(Ref x);
    Ref global_avgpool(Ref x); // (B,H,W,C) -> (B,C)
    Ref dense(Ref x, Ref w, Ref b);

    // Losses; scalar (shape {1}) outputs averaged over the batch.
    Ref cross_entropy(Ref logits, const std::vector<int>& labels);
    Ref mse(Ref pred, const Tensor& target);

    // Elementwise / reduction helpers.
    Ref add(Ref a, Ref b);
    Ref sub(Ref a, Ref b);
    Ref mul(Ref a, Ref b);
    Ref scale(Ref a, real s);
    Ref sum(Ref a); // scalar

    // Extension point for ops defined in other modules (warping, texture
    // lookup). `backward` receives the node's output gradient and must push
    // contributions to the inputs via accumulate().
    Ref custom(Tensor value, const std::vector<Ref>& inputs, BackwardFn backward);

    // Runs reverse accumulation from a scalar loss. One call per tape.
    void backward(Ref loss);

    // As above, but validates the requested leaves first and returns their
    // gradients in order. Throws if a ref is not a gradient-tracked leaf of
    // this tape.
    std::vector<Tensor> backward(Ref loss, const std::vector<Ref>& wrt);

    const Tensor& value(Ref r) const { return node(r).value; }
    Tensor& mutable_value(Ref r) { return nodes_[check(r)].value; }
    const Tensor& grad(Ref r) const;
    bool tracks_grad(Ref r) const { return node(r).needs_grad; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // For backward closures: adds g into r's gradient if tracked.
    void accumulate(Ref r, const Tensor& g);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        bool is_leaf = false;
        BackwardFn backward;
    };

    int check(Ref r) const;
    const Node& node(Ref r) const { return nodes_[static_cast<size_t>(check(r))]; }
    Ref push(Tensor value, bool needs_grad, bool is_leaf, BackwardFn fn);
    bool any_tracked(std::initializer_list<Ref> rs) const;

    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

} // namespace unadv::ad

#endif
