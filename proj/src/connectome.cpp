#include "mahgcn/connectome.hpp"

#include <algorithm>
#include <cmath>

namespace mahgcn::connectome {

namespace {

constexpr double kDegreeFloor = 1e-6;

void check_square_symmetric(const Tensor2D& a, const char* who) {
    if (a.rows() != a.cols())
        throw ShapeError(std::string(who) + ": matrix must be square, got " + a.shape_str());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j)
            if (std::fabs(a(i, j) - a(j, i)) > 1e-12)
                throw DataError(std::string(who) + ": matrix not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
}

}  // namespace

void ScaleStack::validate() const {
    if (scales.empty()) throw ConfigError("ScaleStack: needs at least one scale");
    if (scales.size() != fcns.size())
        throw DataError("ScaleStack: " + std::to_string(fcns.size()) + " FCNs for " +
                        std::to_string(scales.size()) + " scales");
    for (std::size_t k = 0; k < scales.size(); ++k) {
        if (k > 0 && scales[k] >= scales[k - 1])
            throw ConfigError("ScaleStack: scales must be strictly descending");
        if (fcns[k].scale != scales[k] || fcns[k].values.rows() != scales[k] ||
            fcns[k].values.cols() != scales[k])
            throw DataError("ScaleStack: FCN " + std::to_string(k) + " does not match scale " +
                            std::to_string(scales[k]));
    }
}

PearsonResult pearson_fcn(const RoiTimeSeries& ts) {
    int t = ts.timepoints();
    int r = ts.rois();
    if (t < 3) throw DataError("pearson_fcn: need at least 3 timepoints, got " + std::to_string(t));
    if (!ts.values.all_finite()) throw DataError("pearson_fcn: non-finite input value");

    // center columns once
    Tensor2D centered(t, r);
    for (int j = 0; j < r; ++j) {
        double mean = 0.0;
        for (int i = 0; i < t; ++i) mean += ts.values(i, j);
        mean /= t;
        for (int i = 0; i < t; ++i) centered(i, j) = ts.values(i, j) - mean;
    }
    std::vector<double> ss(static_cast<std::size_t>(r), 0.0);
    PearsonResult res;
    for (int j = 0; j < r; ++j) {
        double s = 0.0;
        for (int i = 0; i < t; ++i) s += centered(i, j) * centered(i, j);
        ss[static_cast<std::size_t>(j)] = s;
        if (s <= 0.0) res.zero_variance_rois.push_back(j);
    }

    Tensor2D fcn(r, r, 0.0);
    for (int i = 0; i < r; ++i) {
        fcn(i, i) = 1.0;
        if (ss[static_cast<std::size_t>(i)] <= 0.0) continue;
        for (int j = i + 1; j < r; ++j) {
            if (ss[static_cast<std::size_t>(j)] <= 0.0) continue;
            double dot = 0.0;
            for (int k = 0; k < t; ++k) dot += centered(k, i) * centered(k, j);
            double v = dot / std::sqrt(ss[static_cast<std::size_t>(i)] * ss[static_cast<std::size_t>(j)]);
            v = std::clamp(v, -1.0, 1.0);
            fcn(i, j) = v;
            fcn(j, i) = v;  // mirrored, so symmetry is exact
        }
    }
    res.fcn.scale = r;
    res.fcn.values = std::move(fcn);
    return res;
}

Tensor2D normalize_adjacency(const Tensor2D& a, DegreeMode mode) {
    check_square_symmetric(a, "normalize_adjacency");
    int r = a.rows();
    std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        double d = 0.0;
        for (int j = 0; j < r; ++j) {
            double v = a(i, j) + (i == j ? 1.0 : 0.0);
            d += mode == DegreeMode::absolute ? std::fabs(v) : v;
        }
        if (d <= kDegreeFloor)
            throw DataError("normalize_adjacency: degenerate degree " + std::to_string(d) +
                            " at node " + std::to_string(i));
        inv_sqrt_deg[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(d);
    }
    Tensor2D s(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            double v = a(i, j) + (i == j ? 1.0 : 0.0);
            s(i, j) = v * inv_sqrt_deg[static_cast<std::size_t>(i)] * inv_sqrt_deg[static_cast<std::size_t>(j)];
        }
    return s;
}

Tensor2D normalize_adjacency(const FcnMatrix& a, DegreeMode mode) {
    return normalize_adjacency(a.values, mode);
}

Tensor2D laplacian(const Tensor2D& a) {
    check_square_symmetric(a, "laplacian");
    int r = a.rows();
    std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        double d = 0.0;
        for (int j = 0; j < r; ++j) d += a(i, j);
        if (d <= kDegreeFloor)
            throw DataError("laplacian: degenerate degree " + std::to_string(d) + " at node " +
                            std::to_string(i));
        inv_sqrt_deg[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(d);
    }
    Tensor2D l(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            double norm = a(i, j) * inv_sqrt_deg[static_cast<std::size_t>(i)] * inv_sqrt_deg[static_cast<std::size_t>(j)];
            l(i, j) = (i == j ? 1.0 : 0.0) - norm;
        }
    return l;
}

Tensor2D laplacian(const FcnMatrix& a) { return laplacian(a.values); }

}  // namespace mahgcn::connectome
