#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "hsfuse/dense.hpp"

namespace hsfuse::ad {

// Reverse-mode automatic differentiation over DenseArray values.
//
// Every operation returns a shared node holding the forward value. When at
// least one input carries requires_grad, the node also records its inputs
// and a closure that scatters the node's gradient into them; otherwise the
// node is a plain value and the graph is not grown (this is the inference
// path). backward() walks the recorded graph once in reverse topological
// order, so gradients of leaves used several times accumulate.
//
// Graph construction and backward are single-threaded; all kernels use a
// fixed accumulation order, so results are bitwise reproducible.

struct Node;
using DiffValue = std::shared_ptr<Node>;

struct Node {
    DenseArray value;
    bool requires_grad = false;
    std::vector<DiffValue> parents;
    std::function<void(Node&)> backprop;  // scatter this->grad into parents

    DenseArray& grad_ref();  // allocated (zero) on first use
    bool has_grad() const { return !grad_storage_.data.empty(); }
    void zero_grad();

  private:
    DenseArray grad_storage_;
};

/// Trainable leaf.
DiffValue leaf(DenseArray v);
/// Non-trainable value; never accumulates a gradient.
DiffValue constant(DenseArray v);

// ---- elementwise and reduction ops ----

DiffValue add(const DiffValue& a, const DiffValue& b);
DiffValue scale(const DiffValue& a, double factor);
DiffValue mul(const DiffValue& a, const DiffValue& b);
DiffValue sum_all(const DiffValue& a);

/// max(x, slope*x); the derivative at exactly 0 uses the slope.
DiffValue leaky_relu(const DiffValue& x, double slope);

/// min(max(x,0),1); gradient passes where 0 <= x <= 1 inclusive.
DiffValue clamp01(const DiffValue& x);

/// Sum of |a - b| over all elements; d/da is sign(a-b) with sign(0)=0.
DiffValue l1_loss(const DiffValue& a, const DiffValue& b);

// ---- shape and wiring ops ----

/// Concatenates 1-D vectors end to end, or 2-D matrices along rows
/// (matrices must agree on the column count).
DiffValue concat(const std::vector<DiffValue>& xs);

DiffValue reshape(const DiffValue& x, std::vector<std::size_t> new_shape);

/// Drops margin rows/columns from each band of a [B,H,W] array.
DiffValue crop2d(const DiffValue& x, std::size_t top, std::size_t bottom, std::size_t left,
                 std::size_t right);

// ---- linear algebra ----

/// [m,k] x [k,n] -> [m,n]
DiffValue matmul(const DiffValue& a, const DiffValue& b);

/// W*x + b. x may be a vector [n_in] or a matrix [n_in,P] whose columns are
/// independent samples; b is added to every column.
DiffValue fully_connected(const DiffValue& x, const DiffValue& W, const DiffValue& b);

// ---- spatial ops on [B,H,W] arrays ----

/// Correlates every band with the kernel under the shared mirror padding.
/// Gradients flow to both the image and the kernel.
DiffValue conv2d_perband(const DiffValue& x, const DiffValue& kernel);

/// out(b,i,j) = x(b, r*i+offset, r*j+offset); H and W must be multiples of r.
DiffValue subsample(const DiffValue& x, std::size_t r, std::size_t offset);

/// Backpropagates from root (seeded with ones) through the recorded graph,
/// visiting each node exactly once.
void backward(const DiffValue& root);

namespace testhooks {
// Multiplier applied inside leaky_relu's backward rule. Kept at 1.0 except
// by the gradcheck negative control.
extern double leaky_grad_scale;
}  // namespace testhooks

}  // namespace hsfuse::ad
