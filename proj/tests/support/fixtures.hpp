#pragma once

// Shared fixture builders for model/training/explain tests.

#include <vector>

#include "mahgcn/atlas.hpp"
#include "mahgcn/connectome.hpp"
#include "mahgcn/rng.hpp"
#include "mahgcn/tensor.hpp"

namespace fixtures {

// Proportionally nested fine->coarse assignment (parent(i) = i*coarse/fine),
// the same rule the synthetic generator uses.
inline mahgcn::atlas::MappingMatrix nested_mapping(int fine, int coarse) {
    mahgcn::atlas::MappingMatrix m;
    m.fine_scale = fine;
    m.coarse_scale = coarse;
    m.th = 0.0;
    m.m = mahgcn::Tensor2D(fine, coarse, 0.0);
    m.groups.assign(static_cast<std::size_t>(coarse), {});
    for (int i = 0; i < fine; ++i) {
        int j = static_cast<int>(static_cast<long long>(i) * coarse / fine);
        m.m(i, j) = 1.0;
        m.groups[static_cast<std::size_t>(j)].push_back(i);
    }
    return m;
}

inline std::vector<mahgcn::atlas::MappingMatrix> nested_maps(const std::vector<int>& scales) {
    std::vector<mahgcn::atlas::MappingMatrix> maps;
    for (std::size_t k = 0; k + 1 < scales.size(); ++k)
        maps.push_back(nested_mapping(scales[k], scales[k + 1]));
    return maps;
}

// Symmetric matrix with unit diagonal and mildly signed off-diagonal weights;
// raw degrees stay safely positive.
inline mahgcn::connectome::FcnMatrix random_fcn(int scale, mahgcn::Rng& rng) {
    mahgcn::connectome::FcnMatrix f;
    f.scale = scale;
    f.values = mahgcn::Tensor2D(scale, scale, 0.0);
    for (int i = 0; i < scale; ++i) {
        f.values(i, i) = 1.0;
        for (int j = i + 1; j < scale; ++j) {
            double v = rng.uniform(-0.2, 0.8);
            f.values(i, j) = v;
            f.values(j, i) = v;
        }
    }
    return f;
}

inline mahgcn::connectome::ScaleStack random_stack(const std::vector<int>& scales,
                                                   mahgcn::Rng& rng) {
    mahgcn::connectome::ScaleStack st;
    st.scales = scales;
    for (int s : scales) st.fcns.push_back(random_fcn(s, rng));
    return st;
}

}  // namespace fixtures
