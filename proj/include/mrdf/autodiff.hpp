#pragma once

#include <functional>
#include <vector>

#include "mrdf/rng.hpp"
#include "mrdf/types.hpp"

namespace mrdf::ad {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid for the tape's lifetime.
class Var {
public:
    Var() = default;
    Var(Tape* tape, int index) : tape_(tape), index_(index) {}

    const Mat& value() const;
    Mat grad() const; // zeros if no gradient reached this node
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    double scalar() const { return value()(0, 0); }

    Tape* tape() const { return tape_; }
    int index() const { return index_; }
    bool valid() const { return tape_ != nullptr; }

private:
    Tape* tape_ = nullptr;
    int index_ = -1;
};

// Reverse-mode tape over dense double matrices. Nodes are appended in forward
// order; backward() walks them once in reverse. One backward pass per tape.
class Tape {
public:
    Var leaf(Mat value, bool requires_grad = false);
    Var constant(Mat value) { return leaf(std::move(value), false); }
    Var scalar(double v) { return constant(Mat::Constant(1, 1, v)); }

    // Seeds d(root)/d(root) = 1 and accumulates gradients into every node
    // reachable backward from root. root must be 1x1.
    void backward(const Var& root);

    std::size_t size() const { return nodes_.size(); }

    // --- internals used by op implementations ---
    using BackpropFn = std::function<void(const Mat& out_grad)>;
    Var make(Mat value, bool needs_grad, BackpropFn backprop);
    bool needs_grad(const Var& v) const;
    void accumulate(int index, const Mat& g);
    const Mat& val(int index) const;
    Mat grad_of(const Var& v) const;

private:
    struct Node {
        Mat value;
        Mat grad;
        bool grad_set = false;
        bool needs_grad = false;
        BackpropFn backprop;
    };
    std::vector<Node> nodes_;
    bool backward_done_ = false;

    friend class Var;
};

// ---------------------------------------------------------------------------
// Elementwise and linear-algebra ops
// ---------------------------------------------------------------------------

Var add(Var a, Var b);              // same shape
Var add_rowvec(Var a, Var row);     // broadcast [1 x C] over rows
Var sub(Var a, Var b);
Var neg(Var a);
Var mul(Var a, Var b);              // Hadamard
Var scalar_mul(Var a, double s);
Var scalar_add(Var a, double s);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var relu(Var a);
Var gelu(Var a);                    // exact erf form
Var row_softmax(Var a);
Var log_softmax_rows(Var a);
Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-5);

// ---------------------------------------------------------------------------
// Reductions, shape ops
// ---------------------------------------------------------------------------

Var mean_rows(Var a);               // [R x C] -> [1 x C]
Var mean_all(Var a);                // -> [1 x 1]
Var sum_all(Var a);                 // -> [1 x 1]
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index len);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index len);

// ---------------------------------------------------------------------------
// Similarity ops (zero-norm rows map to 0 with zero gradient)
// ---------------------------------------------------------------------------

Var row_normalize(Var a);           // rows scaled to unit L2 norm
Var cosine_rows(Var a, Var b);      // [R x D], [R x D] -> [R x 1]

// Inverted dropout; identity when !training or p == 0.
Var dropout(Var a, double p, Rng& rng, bool training);

} // namespace mrdf::ad
