#include "hsfuse/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "hsfuse/spatial.hpp"

namespace hsfuse::ad {

namespace testhooks {
double leaky_grad_scale = 1.0;
}

DenseArray& Node::grad_ref() {
    if (grad_storage_.data.empty()) grad_storage_ = DenseArray(value.shape);
    return grad_storage_;
}

void Node::zero_grad() {
    if (!grad_storage_.data.empty()) grad_storage_.fill(0.0);
}

DiffValue leaf(DenseArray v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = true;
    return n;
}

DiffValue constant(DenseArray v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    return n;
}

namespace {

DiffValue make_op(DenseArray value, std::vector<DiffValue> inputs,
                  std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    for (const auto& in : inputs)
        if (in->requires_grad) n->requires_grad = true;
    if (n->requires_grad) {
        n->parents = std::move(inputs);
        n->backprop = std::move(backprop);
    }
    return n;
}

void require_same_shape(const DiffValue& a, const DiffValue& b, const char* op) {
    if (!a->value.same_shape(b->value))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_string(a->value.shape) + " vs " +
                                    shape_string(b->value.shape));
}

}  // namespace

DiffValue add(const DiffValue& a, const DiffValue& b) {
    require_same_shape(a, b, "add");
    DenseArray out(a->value.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& self) {
        const DenseArray& g = self.grad_ref();
        if (a->requires_grad) {
            DenseArray& ga = a->grad_ref();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (b->requires_grad) {
            DenseArray& gb = b->grad_ref();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        }
    });
}

DiffValue scale(const DiffValue& a, double factor) {
    DenseArray out(a->value.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * a->value[i];
    return make_op(std::move(out), {a}, [a, factor](Node& self) {
        const DenseArray& g = self.grad_ref();
        DenseArray& ga = a->grad_ref();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
    });
}

DiffValue mul(const DiffValue& a, const DiffValue& b) {
    require_same_shape(a, b, "mul");
    DenseArray out(a->value.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& self) {
        const DenseArray& g = self.grad_ref();
        if (a->requires_grad) {
            DenseArray& ga = a->grad_ref();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b->value[i];
        }
        if (b->requires_grad) {
            DenseArray& gb = b->grad_ref();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a->value[i];
        }
    });
}

DiffValue sum_all(const DiffValue& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a->value.size(); ++i) acc += a->value[i];
    return make_op(DenseArray::scalar(acc), {a}, [a](Node& self) {
        const double g = self.grad_ref()[0];
        DenseArray& ga = a->grad_ref();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
}

DiffValue leaky_relu(const DiffValue& x, double slope) {
    if (!(slope > 0.0 && slope < 1.0))
        throw std::invalid_argument("leaky_relu: slope must lie in (0,1)");
    DenseArray out(x->value.shape);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = x->value[i];
        out[i] = v > 0.0 ? v : slope * v;
    }
    return make_op(std::move(out), {x}, [x, slope](Node& self) {
        const DenseArray& g = self.grad_ref();
        DenseArray& gx = x->grad_ref();
        const double hook = testhooks::leaky_grad_scale;
        for (std::size_t i = 0; i < g.size(); ++i)
            gx[i] += hook * g[i] * (x->value[i] > 0.0 ? 1.0 : slope);
    });
}

DiffValue clamp01(const DiffValue& x) {
    DenseArray out(x->value.shape);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::min(std::max(x->value[i], 0.0), 1.0);
    return make_op(std::move(out), {x}, [x](Node& self) {
        const DenseArray& g = self.grad_ref();
        DenseArray& gx = x->grad_ref();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = x->value[i];
            if (v >= 0.0 && v <= 1.0) gx[i] += g[i];
        }
    });
}

DiffValue l1_loss(const DiffValue& a, const DiffValue& b) {
    require_same_shape(a, b, "l1_loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < a->value.size(); ++i) acc += std::fabs(a->value[i] - b->value[i]);
    return make_op(DenseArray::scalar(acc), {a, b}, [a, b](Node& self) {
        const double g = self.grad_ref()[0];
        for (std::size_t i = 0; i < a->value.size(); ++i) {
            const double d = a->value[i] - b->value[i];
            const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            if (a->requires_grad) a->grad_ref()[i] += g * s;
            if (b->requires_grad) b->grad_ref()[i] -= g * s;
        }
    });
}

DiffValue concat(const std::vector<DiffValue>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat: empty input list");
    const std::size_t rank = xs.front()->value.rank();
    if (rank != 1 && rank != 2)
        throw std::invalid_argument("concat: inputs must be vectors or matrices");
    std::size_t cols = rank == 2 ? xs.front()->value.dim(1) : 1;
    std::size_t rows = 0;
    for (const auto& x : xs) {
        if (x->value.rank() != rank)
            throw std::invalid_argument("concat: mixed ranks");
        if (rank == 2 && x->value.dim(1) != cols)
            throw std::invalid_argument("concat: column count mismatch");
        rows += x->value.dim(0);
    }
    DenseArray out(rank == 1 ? std::vector<std::size_t>{rows}
                             : std::vector<std::size_t>{rows, cols});
    std::size_t at = 0;
    for (const auto& x : xs) {
        for (std::size_t i = 0; i < x->value.size(); ++i) out[at + i] = x->value[i];
        at += x->value.size();
    }
    return make_op(std::move(out), xs, [xs](Node& self) {
        const DenseArray& g = self.grad_ref();
        std::size_t at = 0;
        for (const auto& x : xs) {
            if (x->requires_grad) {
                DenseArray& gx = x->grad_ref();
                for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[at + i];
            }
            at += x->value.size();
        }
    });
}

DiffValue reshape(const DiffValue& x, std::vector<std::size_t> new_shape) {
    if (shape_product(new_shape) != x->value.size())
        throw std::invalid_argument("reshape: element count mismatch");
    DenseArray out(std::move(new_shape), x->value.data);
    return make_op(std::move(out), {x}, [x](Node& self) {
        const DenseArray& g = self.grad_ref();
        DenseArray& gx = x->grad_ref();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
}

DiffValue crop2d(const DiffValue& x, std::size_t top, std::size_t bottom, std::size_t left,
                 std::size_t right) {
    if (x->value.rank() != 3) throw std::invalid_argument("crop2d: expected [B,H,W]");
    const std::size_t B = x->value.dim(0), H = x->value.dim(1), W = x->value.dim(2);
    if (top + bottom >= H || left + right >= W)
        throw std::invalid_argument("crop2d: margins remove the whole image");
    const std::size_t h = H - top - bottom, w = W - left - right;
    DenseArray out({B, h, w});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                out[(b * h + i) * w + j] = x->value[(b * H + top + i) * W + left + j];
    return make_op(std::move(out), {x}, [x, top, left, B, H, W, h, w](Node& self) {
        const DenseArray& g = self.grad_ref();
        DenseArray& gx = x->grad_ref();
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    gx[(b * H + top + i) * W + left + j] += g[(b * h + i) * w + j];
    });
}

DiffValue matmul(const DiffValue& a, const DiffValue& b) {
    if (a->value.rank() != 2 || b->value.rank() != 2 || a->value.dim(1) != b->value.dim(0))
        throw std::invalid_argument("matmul: dimension mismatch " + shape_string(a->value.shape) +
                                    " * " + shape_string(b->value.shape));
    DenseArray out({a->value.dim(0), b->value.dim(1)});
    gemm_acc(out, a->value, b->value);
    return make_op(std::move(out), {a, b}, [a, b](Node& self) {
        const DenseArray& g = self.grad_ref();
        if (a->requires_grad) gemm_a_bt_acc(a->grad_ref(), g, b->value);
        if (b->requires_grad) gemm_at_b_acc(b->grad_ref(), a->value, g);
    });
}

DiffValue fully_connected(const DiffValue& x, const DiffValue& W, const DiffValue& b) {
    if (W->value.rank() != 2) throw std::invalid_argument("fully_connected: W must be a matrix");
    const std::size_t n_out = W->value.dim(0), n_in = W->value.dim(1);
    const bool vector_input = x->value.rank() == 1;
    if (!vector_input && x->value.rank() != 2)
        throw std::invalid_argument("fully_connected: x must be a vector or matrix");
    const std::size_t in_rows = x->value.dim(0);
    const std::size_t cols = vector_input ? 1 : x->value.dim(1);
    if (in_rows != n_in || b->value.rank() != 1 || b->value.dim(0) != n_out)
        throw std::invalid_argument("fully_connected: dimension mismatch W" +
                                    shape_string(W->value.shape) + " x" +
                                    shape_string(x->value.shape) + " b" +
                                    shape_string(b->value.shape));

    DenseArray xm({n_in, cols}, x->value.data);
    DenseArray out({n_out, cols});
    for (std::size_t i = 0; i < n_out; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = b->value[i];
    gemm_acc(out, W->value, xm);
    if (vector_input) out.shape = {n_out};

    return make_op(std::move(out), {x, W, b}, [x, W, b, n_in, n_out, cols](Node& self) {
        DenseArray g({n_out, cols}, self.grad_ref().data);
        if (W->requires_grad) {
            DenseArray xm({n_in, cols}, x->value.data);
            gemm_a_bt_acc(W->grad_ref(), g, xm);
        }
        if (b->requires_grad) {
            DenseArray& gb = b->grad_ref();
            for (std::size_t i = 0; i < n_out; ++i)
                for (std::size_t j = 0; j < cols; ++j) gb[i] += g[i * cols + j];
        }
        if (x->requires_grad) {
            DenseArray& acc = x->grad_ref();
            if (acc.rank() == 2) {
                gemm_at_b_acc(acc, W->value, g);
            } else {
                DenseArray gx({n_in, cols});
                gemm_at_b_acc(gx, W->value, g);
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += gx[i];
            }
        }
    });
}

DiffValue conv2d_perband(const DiffValue& x, const DiffValue& kernel) {
    if (x->value.rank() != 3) throw std::invalid_argument("conv2d_perband: expected [B,H,W]");
    if (kernel->value.rank() != 2 || kernel->value.dim(0) != kernel->value.dim(1))
        throw std::invalid_argument("conv2d_perband: kernel must be square");
    const std::size_t B = x->value.dim(0), H = x->value.dim(1), W = x->value.dim(2);
    const std::size_t k = kernel->value.dim(0);
    if (k % 2 == 0) throw std::invalid_argument("conv2d_perband: kernel size must be odd");
    if (k > H || k > W)
        throw std::invalid_argument("conv2d_perband: kernel larger than image");

    DenseArray out({B, H, W});
    const auto rows = spatial::make_reflect_table(H, k);
    const auto cols = spatial::make_reflect_table(W, k);
    for (std::size_t b = 0; b < B; ++b)
        spatial::correlate2d_symmetric(x->value.data.data() + b * H * W, H, W,
                                       kernel->value.data.data(), k,
                                       out.data.data() + b * H * W, rows.data(), cols.data());

    return make_op(std::move(out), {x, kernel}, [x, kernel, B, H, W, k](Node& self) {
        const DenseArray& g = self.grad_ref();
        const auto rows = spatial::make_reflect_table(H, k);
        const auto colsT = spatial::make_reflect_table(W, k);
        const bool need_x = x->requires_grad;
        const bool need_k = kernel->requires_grad;
        DenseArray* gx = need_x ? &x->grad_ref() : nullptr;
        DenseArray* gk = need_k ? &kernel->grad_ref() : nullptr;
        for (std::size_t b = 0; b < B; ++b) {
            const double* xb = x->value.data.data() + b * H * W;
            const double* gb = g.data.data() + b * H * W;
            for (std::size_t i = 0; i < H; ++i) {
                for (std::size_t j = 0; j < W; ++j) {
                    const double go = gb[i * W + j];
                    if (go == 0.0) continue;
                    for (std::size_t u = 0; u < k; ++u) {
                        const std::size_t si = rows[i * k + u];
                        for (std::size_t v = 0; v < k; ++v) {
                            const std::size_t sj = colsT[j * k + v];
                            if (need_x)
                                gx->data[b * H * W + si * W + sj] +=
                                    kernel->value[u * k + v] * go;
                            if (need_k) gk->data[u * k + v] += xb[si * W + sj] * go;
                        }
                    }
                }
            }
        }
    });
}

DiffValue subsample(const DiffValue& x, std::size_t r, std::size_t offset) {
    if (x->value.rank() != 3) throw std::invalid_argument("subsample: expected [B,H,W]");
    if (r < 1) throw std::invalid_argument("subsample: ratio must be >= 1");
    if (offset >= r) throw std::invalid_argument("subsample: offset must satisfy 0 <= offset < r");
    const std::size_t B = x->value.dim(0), H = x->value.dim(1), W = x->value.dim(2);
    if (H % r != 0 || W % r != 0)
        throw std::invalid_argument("subsample: dimensions not divisible by ratio");
    const std::size_t h = H / r, w = W / r;
    DenseArray out({B, h, w});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                out[(b * h + i) * w + j] = x->value[(b * H + r * i + offset) * W + r * j + offset];
    return make_op(std::move(out), {x}, [x, r, offset, B, H, W, h, w](Node& self) {
        const DenseArray& g = self.grad_ref();
        DenseArray& gx = x->grad_ref();
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    gx[(b * H + r * i + offset) * W + r * j + offset] += g[(b * h + i) * w + j];
    });
}

void backward(const DiffValue& root) {
    // Reverse topological order: DFS post-order over parents, then walk the
    // list backwards so every consumer runs before its inputs.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (parent->requires_grad && seen.insert(parent).second)
                stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    DenseArray& seedg = root->grad_ref();
    for (std::size_t i = 0; i < seedg.size(); ++i) seedg[i] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

}  // namespace hsfuse::ad
