#include "mahgcn/atlas.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

namespace mahgcn::atlas {

void LabelVolume::validate() const {
    if (scale <= 0) throw DataError("LabelVolume: scale must be positive");
    if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0)
        throw DataError("LabelVolume: grid dims must be positive");
    std::vector<bool> seen(static_cast<std::size_t>(scale), false);
    std::unordered_map<std::uint64_t, int> coords;
    coords.reserve(voxels.size());
    for (const Voxel& v : voxels) {
        if (v.label < 1 || v.label > scale)
            throw DataError("LabelVolume: label " + std::to_string(v.label) +
                            " outside 1.." + std::to_string(scale));
        if (v.x < 0 || v.x >= dims[0] || v.y < 0 || v.y >= dims[1] || v.z < 0 || v.z >= dims[2])
            throw DataError("LabelVolume: voxel coordinate off the grid");
        std::uint64_t key = static_cast<std::uint64_t>(v.x) +
                            static_cast<std::uint64_t>(dims[0]) *
                                (static_cast<std::uint64_t>(v.y) +
                                 static_cast<std::uint64_t>(dims[1]) * static_cast<std::uint64_t>(v.z));
        if (!coords.emplace(key, v.label).second)
            throw DataError("LabelVolume: duplicate voxel coordinate (" + std::to_string(v.x) +
                            "," + std::to_string(v.y) + "," + std::to_string(v.z) + ")");
        seen[static_cast<std::size_t>(v.label - 1)] = true;
    }
    for (int r = 0; r < scale; ++r)
        if (!seen[static_cast<std::size_t>(r)])
            throw DataError("LabelVolume: ROI " + std::to_string(r + 1) + " has no voxels");
}

OverlapTable compute_overlap(const LabelVolume& fine, const LabelVolume& coarse) {
    if (fine.dims != coarse.dims)
        throw DataError("compute_overlap: grid dims differ between scales " +
                        std::to_string(fine.scale) + " and " + std::to_string(coarse.scale));

    auto key_of = [&](const LabelVolume::Voxel& v) {
        return static_cast<std::uint64_t>(v.x) +
               static_cast<std::uint64_t>(fine.dims[0]) *
                   (static_cast<std::uint64_t>(v.y) +
                    static_cast<std::uint64_t>(fine.dims[1]) * static_cast<std::uint64_t>(v.z));
    };

    std::unordered_map<std::uint64_t, int> coarse_label;
    coarse_label.reserve(coarse.voxels.size());
    for (const auto& v : coarse.voxels) coarse_label.emplace(key_of(v), v.label);

    OverlapTable t;
    t.fine_scale = fine.scale;
    t.coarse_scale = coarse.scale;
    t.fine_totals.assign(static_cast<std::size_t>(fine.scale), 0);
    // dense counts keyed by (fine-1, coarse-1); scales are small enough
    std::vector<long long> counts(static_cast<std::size_t>(fine.scale) * coarse.scale, 0);
    for (const auto& v : fine.voxels) {
        ++t.fine_totals[static_cast<std::size_t>(v.label - 1)];
        auto it = coarse_label.find(key_of(v));
        if (it == coarse_label.end()) continue;
        ++counts[static_cast<std::size_t>(v.label - 1) * coarse.scale + (it->second - 1)];
    }
    for (int i = 0; i < fine.scale; ++i)
        for (int j = 0; j < coarse.scale; ++j) {
            long long c = counts[static_cast<std::size_t>(i) * coarse.scale + j];
            if (c > 0) t.rows.push_back({i + 1, j + 1, c});
        }
    return t;
}

MappingMatrix mapping_matrix(const OverlapTable& t, double th) {
    if (th < 0.0 || th >= 1.0)
        throw ConfigError("mapping_matrix: th must lie in [0, 1), got " + std::to_string(th));
    for (std::size_t i = 0; i < t.fine_totals.size(); ++i)
        if (t.fine_totals[i] < 1)
            throw DataError("mapping_matrix: fine ROI " + std::to_string(i + 1) +
                            " has no voxels");

    MappingMatrix mm;
    mm.fine_scale = t.fine_scale;
    mm.coarse_scale = t.coarse_scale;
    mm.th = th;
    mm.m = Tensor2D(t.fine_scale, t.coarse_scale, 0.0);
    for (const auto& row : t.rows) {
        double rho = static_cast<double>(row.overlap) /
                     static_cast<double>(t.fine_totals[static_cast<std::size_t>(row.fine - 1)]);
        if (rho > th) mm.m(row.fine - 1, row.coarse - 1) = 1.0;  // strict inequality
    }
    mm.groups.assign(static_cast<std::size_t>(t.coarse_scale), {});
    for (int i = 0; i < t.fine_scale; ++i) {
        bool any = false;
        for (int j = 0; j < t.coarse_scale; ++j)
            if (mm.m(i, j) == 1.0) {
                mm.groups[static_cast<std::size_t>(j)].push_back(i);
                any = true;
            }
        if (!any) mm.zero_rows.push_back(i + 1);
    }
    return mm;
}

namespace {

void check_pool_shapes(const MappingMatrix& m, const Tensor2D& h, PoolScheme scheme) {
    if (h.rows() != m.m.rows())
        throw ShapeError("pool: features have " + std::to_string(h.rows()) +
                         " rows but mapping expects " + std::to_string(m.m.rows()));
    if (scheme != PoolScheme::sum)
        for (std::size_t j = 0; j < m.groups.size(); ++j)
            if (m.groups[j].empty())
                throw DataError("pool: coarse ROI " + std::to_string(j + 1) +
                                " has no assigned fine ROI (cannot " +
                                (scheme == PoolScheme::average ? std::string("average")
                                                               : std::string("max")) +
                                ")");
}

}  // namespace

Tensor2D pool(const MappingMatrix& m, const Tensor2D& h, PoolScheme scheme) {
    check_pool_shapes(m, h, scheme);
    int p = m.coarse_scale;
    int ch = h.cols();
    Tensor2D out(p, ch, 0.0);
    for (int j = 0; j < p; ++j) {
        const auto& members = m.groups[static_cast<std::size_t>(j)];
        for (int c = 0; c < ch; ++c) {
            switch (scheme) {
                case PoolScheme::sum: {
                    double acc = 0.0;
                    for (int i : members) acc += h(i, c);
                    out(j, c) = acc;
                    break;
                }
                case PoolScheme::average: {
                    double acc = 0.0;
                    for (int i : members) acc += h(i, c);
                    out(j, c) = acc / static_cast<double>(members.size());
                    break;
                }
                case PoolScheme::max: {
                    double best = h(members.front(), c);
                    for (int i : members)
                        if (h(i, c) > best) best = h(i, c);
                    out(j, c) = best;
                    break;
                }
            }
        }
    }
    return out;
}

ValueId pool(GradTape& tape, const MappingMatrix& m, ValueId h, PoolScheme scheme) {
    const Tensor2D& hv = tape.value(h);
    check_pool_shapes(m, hv, scheme);
    int p = m.coarse_scale;
    int ch = hv.cols();

    if (scheme == PoolScheme::max) {
        // argmax per (coarse, channel); ties go to the lowest fine index so
        // gradients stay deterministic
        std::vector<int> argmax(static_cast<std::size_t>(p) * ch);
        for (int j = 0; j < p; ++j) {
            const auto& members = m.groups[static_cast<std::size_t>(j)];
            for (int c = 0; c < ch; ++c) {
                int best = members.front();
                for (int i : members)
                    if (hv(i, c) > hv(best, c)) best = i;
                argmax[static_cast<std::size_t>(j) * ch + c] = best;
            }
        }
        return tape.gather(h, p, argmax);
    }

    // sum and average share the value kernel; backward scatters g (or g/count)
    // back onto the group members
    return tape.linear_pool(h, pool(m, hv, scheme), m.groups,
                            scheme == PoolScheme::average);
}

AtlasReport validate_atlas_set(const std::vector<LabelVolume>& volumes, double th,
                               const std::vector<std::pair<int, int>>& extra_pairs) {
    for (std::size_t k = 1; k < volumes.size(); ++k)
        if (volumes[k].scale >= volumes[k - 1].scale)
            throw ConfigError("validate_atlas_set: scales must be strictly descending");

    auto report_pair = [&](const LabelVolume& fine, const LabelVolume& coarse) {
        OverlapTable t = compute_overlap(fine, coarse);
        MappingMatrix mm = mapping_matrix(t, th);
        PairReport r;
        r.fine_scale = fine.scale;
        r.coarse_scale = coarse.scale;
        r.zero_rows = static_cast<int>(mm.zero_rows.size());
        long long covered = 0, total = 0;
        for (const auto& row : t.rows) covered += row.overlap;
        for (long long ft : t.fine_totals) total += ft;
        r.coverage = total > 0 ? static_cast<double>(covered) / static_cast<double>(total) : 0.0;
        for (int i = 0; i < mm.fine_scale; ++i) {
            int parents = 0;
            for (int j = 0; j < mm.coarse_scale; ++j)
                if (mm.m(i, j) == 1.0) ++parents;
            if (parents > 1) ++r.multi_parent_rois;
        }
        return r;
    };

    AtlasReport rep;
    for (std::size_t k = 0; k + 1 < volumes.size(); ++k)
        rep.pairs.push_back(report_pair(volumes[k], volumes[k + 1]));
    for (const auto& [fi, ci] : extra_pairs) {
        if (fi < 0 || ci < 0 || fi >= static_cast<int>(volumes.size()) ||
            ci >= static_cast<int>(volumes.size()) || fi >= ci)
            throw ConfigError("validate_atlas_set: bad extra pair (" + std::to_string(fi) + "," +
                              std::to_string(ci) + ")");
        rep.pairs.push_back(report_pair(volumes[static_cast<std::size_t>(fi)],
                                        volumes[static_cast<std::size_t>(ci)]));
    }
    return rep;
}

}  // namespace mahgcn::atlas
