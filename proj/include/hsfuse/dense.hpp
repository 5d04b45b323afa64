#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hsfuse::ad {

/// Flat row-major array of doubles with an explicit shape.
struct DenseArray {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    DenseArray() = default;
    explicit DenseArray(std::vector<std::size_t> s);
    DenseArray(std::vector<std::size_t> s, std::vector<double> values);

    static DenseArray scalar(double v);
    static DenseArray zeros_like(const DenseArray& other);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape[i]; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const DenseArray& other) const { return shape == other.shape; }
    bool all_finite() const;
    void fill(double v);
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

// Dense matrix products with fixed (deterministic) accumulation order.
// All operands are row-major; C is accumulated into, not overwritten.

/// C[m,n] += A[m,k] * B[k,n]
void gemm_acc(DenseArray& C, const DenseArray& A, const DenseArray& B);
/// C[k,n] += A[m,k]^T * B[m,n]
void gemm_at_b_acc(DenseArray& C, const DenseArray& A, const DenseArray& B);
/// C[m,k] += A[m,n] * B[k,n]^T
void gemm_a_bt_acc(DenseArray& C, const DenseArray& A, const DenseArray& B);

}  // namespace hsfuse::ad
