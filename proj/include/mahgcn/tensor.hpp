#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "mahgcn/common.hpp"

namespace mahgcn {

// Dense row-major matrix of doubles. The one numeric carrier used for FCNs,
// features, weights and gradients alike. Values are immutable once handed to
// a GradTape; mutation happens only on owned copies (optimizer state etc).
class Tensor2D {
public:
    Tensor2D() = default;

    Tensor2D(int rows, int cols, double fill = 0.0) : rows_(rows), cols_(cols) {
        if (rows <= 0 || cols <= 0)
            throw ShapeError("Tensor2D: dimensions must be positive, got " + shape_str(rows, cols));
        data_.assign(static_cast<std::size_t>(rows) * cols, fill);
    }

    static Tensor2D identity(int n) {
        Tensor2D t(n, n, 0.0);
        for (int i = 0; i < n; ++i) t(i, i) = 1.0;
        return t;
    }

    static Tensor2D from_rows(std::initializer_list<std::initializer_list<double>> rows);

    // Column vector from a flat list.
    static Tensor2D column(std::span<const double> v);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }
    std::size_t size() const { return data_.size(); }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const Tensor2D& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_str() const { return shape_str(rows_, cols_); }

    bool all_finite() const;

    static std::string shape_str(int r, int c) {
        return std::to_string(r) + "x" + std::to_string(c);
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Value-level kernels shared by the tape and by plain (non-differentiated) callers.
Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);
Tensor2D transpose(const Tensor2D& x);

// Throws NumericError naming `where` if any element is NaN or infinite.
void ensure_finite(const Tensor2D& t, const char* where);

}  // namespace mahgcn
