#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace infdds {

/// Dense row-major matrix of doubles. All math in this project runs through
/// this type; 64-bit everywhere so runs reproduce bit-exactly.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(size_t i, size_t j) { return data[i * cols + j]; }
    double operator()(size_t i, size_t j) const { return data[i * cols + j]; }

    std::span<double> row(size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(size_t i) const { return {data.data() + i * cols, cols}; }

    size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    static Matrix zeros(size_t r, size_t c) { return Matrix(r, c); }
};

bool all_finite(const Matrix& m);

// Throws std::runtime_error naming `what` if m holds a NaN/Inf.
void require_finite(const Matrix& m, const std::string& what);

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// a += s * b (shapes must match)
void add_scaled(Matrix& a, const Matrix& b, double s);
void scale(Matrix& a, double s);
Matrix sub(const Matrix& a, const Matrix& b);

double dot_flat(const Matrix& a, const Matrix& b);
double norm_flat(const Matrix& m);

// Flattened views over a set of tensors (used by finite differences and
// the gradient-alignment baseline).
std::vector<double> flatten(std::span<const Matrix> ms);
void unflatten(std::span<const double> flat, std::span<Matrix> ms);

double dot_flat_set(std::span<const Matrix> a, std::span<const Matrix> b);
double norm_flat_set(std::span<const Matrix> ms);

}  // namespace infdds
