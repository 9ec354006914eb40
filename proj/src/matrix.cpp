#include "infdds/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace infdds {

bool all_finite(const Matrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_finite(const Matrix& m, const std::string& what) {
    if (!all_finite(m)) {
        throw std::runtime_error("non-finite values in " + what);
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
    Matrix c(a.rows, b.cols);
    for (size_t i = 0; i < a.rows; ++i) {
        for (size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: shape mismatch");
    Matrix c(a.rows, b.rows);
    for (size_t i = 0; i < a.rows; ++i) {
        for (size_t j = 0; j < b.rows; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
            c(i, j) = s;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: shape mismatch");
    Matrix c(a.cols, b.cols);
    for (size_t k = 0; k < a.rows; ++k) {
        for (size_t i = 0; i < a.cols; ++i) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            for (size_t j = 0; j < b.cols; ++j) c(i, j) += aki * b(k, j);
        }
    }
    return c;
}

void add_scaled(Matrix& a, const Matrix& b, double s) {
    if (!a.same_shape(b)) throw std::invalid_argument("add_scaled: shape mismatch");
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += s * b.data[i];
}

void scale(Matrix& a, double s) {
    for (double& v : a.data) v *= s;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("sub: shape mismatch");
    Matrix c(a.rows, a.cols);
    for (size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] - b.data[i];
    return c;
}

double dot_flat(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("dot_flat: shape mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

double norm_flat(const Matrix& m) { return std::sqrt(dot_flat(m, m)); }

std::vector<double> flatten(std::span<const Matrix> ms) {
    std::vector<double> out;
    size_t n = 0;
    for (const auto& m : ms) n += m.size();
    out.reserve(n);
    for (const auto& m : ms) out.insert(out.end(), m.data.begin(), m.data.end());
    return out;
}

void unflatten(std::span<const double> flat, std::span<Matrix> ms) {
    size_t off = 0;
    for (auto& m : ms) {
        if (off + m.size() > flat.size()) throw std::invalid_argument("unflatten: size mismatch");
        std::copy(flat.begin() + off, flat.begin() + off + m.size(), m.data.begin());
        off += m.size();
    }
    if (off != flat.size()) throw std::invalid_argument("unflatten: size mismatch");
}

double dot_flat_set(std::span<const Matrix> a, std::span<const Matrix> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot_flat_set: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += dot_flat(a[i], b[i]);
    return s;
}

double norm_flat_set(std::span<const Matrix> ms) {
    double s = 0.0;
    for (const auto& m : ms) s += dot_flat(m, m);
    return std::sqrt(s);
}

}  // namespace infdds
