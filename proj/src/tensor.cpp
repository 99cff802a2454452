#include "mahgcn/tensor.hpp"

#include <cmath>

namespace mahgcn {

Tensor2D Tensor2D::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    int r = static_cast<int>(rows.size());
    int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    Tensor2D t(r, c);
    int i = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != c)
            throw ShapeError("Tensor2D::from_rows: ragged rows");
        int j = 0;
        for (double v : row) t(i, j++) = v;
        ++i;
    }
    return t;
}

Tensor2D Tensor2D::column(std::span<const double> v) {
    Tensor2D t(static_cast<int>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) t(static_cast<int>(i), 0) = v[i];
    return t;
}

bool Tensor2D::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: shape mismatch " + a.shape_str() + " * " + b.shape_str());
    Tensor2D c(a.rows(), b.cols(), 0.0);
    // (i,k,j) loop order keeps the inner access contiguous for row-major data.
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Tensor2D transpose(const Tensor2D& x) {
    Tensor2D t(x.cols(), x.rows());
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) t(j, i) = x(i, j);
    return t;
}

void ensure_finite(const Tensor2D& t, const char* where) {
    if (!t.all_finite())
        throw NumericError(std::string(where) + ": non-finite value in " + t.shape_str() + " tensor");
}

}  // namespace mahgcn
