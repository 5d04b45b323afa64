#include "hsfuse/dense.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hsfuse::ad {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

DenseArray::DenseArray(std::vector<std::size_t> s)
    : shape(std::move(s)), data(shape_product(shape), 0.0) {}

DenseArray::DenseArray(std::vector<std::size_t> s, std::vector<double> values)
    : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != shape_product(shape))
        throw std::invalid_argument("DenseArray: data length " + std::to_string(data.size()) +
                                    " does not match shape " + shape_string(shape));
}

DenseArray DenseArray::scalar(double v) { return DenseArray({1}, {v}); }

DenseArray DenseArray::zeros_like(const DenseArray& other) { return DenseArray(other.shape); }

bool DenseArray::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void DenseArray::fill(double v) {
    for (double& x : data) x = v;
}

namespace {

void check_mat(const DenseArray& a, const char* name) {
    if (a.rank() != 2)
        throw std::invalid_argument(std::string("gemm: ") + name + " is not a matrix, shape " +
                                    shape_string(a.shape));
}

}  // namespace

void gemm_acc(DenseArray& C, const DenseArray& A, const DenseArray& B) {
    check_mat(A, "A");
    check_mat(B, "B");
    const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
    if (B.dim(0) != k || C.dim(0) != m || C.dim(1) != n)
        throw std::invalid_argument("gemm: dimension mismatch " + shape_string(A.shape) + " * " +
                                    shape_string(B.shape) + " -> " + shape_string(C.shape));
    const double* a = A.data.data();
    const double* b = B.data.data();
    double* c = C.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a[i * k + p];
            const double* brow = b + p * n;
            double* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void gemm_at_b_acc(DenseArray& C, const DenseArray& A, const DenseArray& B) {
    check_mat(A, "A");
    check_mat(B, "B");
    const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
    if (B.dim(0) != m || C.dim(0) != k || C.dim(1) != n)
        throw std::invalid_argument("gemm_at_b: dimension mismatch");
    const double* a = A.data.data();
    const double* b = B.data.data();
    double* c = C.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a[i * k + p];
            const double* brow = b + i * n;
            double* crow = c + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void gemm_a_bt_acc(DenseArray& C, const DenseArray& A, const DenseArray& B) {
    check_mat(A, "A");
    check_mat(B, "B");
    const std::size_t m = A.dim(0), n = A.dim(1), k = B.dim(0);
    if (B.dim(1) != n || C.dim(0) != m || C.dim(1) != k)
        throw std::invalid_argument("gemm_a_bt: dimension mismatch");
    const double* a = A.data.data();
    const double* b = B.data.data();
    double* c = C.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double* arow = a + i * n;
            const double* brow = b + p * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
            c[i * k + p] += acc;
        }
    }
}

}  // namespace hsfuse::ad
