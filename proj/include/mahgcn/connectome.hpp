#pragma once

#include <string>
#include <vector>

#include "mahgcn/common.hpp"
#include "mahgcn/tensor.hpp"

namespace mahgcn::connectome {

// How degrees are accumulated when normalizing an adjacency that may carry
// negative correlation weights. `raw` sums signed entries and refuses
// near-zero degrees; `absolute` sums magnitudes and is always positive.
enum class DegreeMode { raw, absolute };

struct RoiTimeSeries {
    Tensor2D values;  // timepoints x rois
    int timepoints() const { return values.rows(); }
    int rois() const { return values.cols(); }
};

struct FcnMatrix {
    int scale = 0;     // ROI count R
    Tensor2D values;   // R x R Pearson coefficients
};

// Ordered per-subject FCNs, one per atlas scale, node counts strictly descending.
struct ScaleStack {
    std::vector<int> scales;
    std::vector<FcnMatrix> fcns;

    void validate() const;
};

struct PearsonResult {
    FcnMatrix fcn;
    std::vector<int> zero_variance_rois;  // warning, not an error
};

// Pairwise Pearson correlation across ROI columns. Zero-variance ROIs get 0
// off-diagonal and 1 on the diagonal and are reported back to the caller.
PearsonResult pearson_fcn(const RoiTimeSeries& ts);

// S = D~^{-1/2} (A + I) D~^{-1/2} with D~ the degree matrix of A + I.
Tensor2D normalize_adjacency(const Tensor2D& a, DegreeMode mode = DegreeMode::raw);
Tensor2D normalize_adjacency(const FcnMatrix& a, DegreeMode mode = DegreeMode::raw);

// L = I - D^{-1/2} A D^{-1/2}, degrees taken from A itself (no self-loop).
Tensor2D laplacian(const Tensor2D& a);
Tensor2D laplacian(const FcnMatrix& a);

}  // namespace mahgcn::connectome
