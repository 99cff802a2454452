#pragma once

#include <array>
#include <string>
#include <vector>

#include "mahgcn/common.hpp"
#include "mahgcn/tape.hpp"
#include "mahgcn/tensor.hpp"

namespace mahgcn::atlas {

enum class PoolScheme { sum, average, max };

// Voxel-level parcellation at one scale: integer grid coordinates, labels in 1..scale.
struct LabelVolume {
    int scale = 0;
    std::array<int, 3> dims{0, 0, 0};
    struct Voxel {
        int x, y, z, label;
    };
    std::vector<Voxel> voxels;

    // labels in range, every ROI populated, coordinates unique
    void validate() const;
};

// Voxel overlap counts between a fine and a coarse parcellation.
struct OverlapTable {
    int fine_scale = 0;
    int coarse_scale = 0;
    struct Row {
        int fine, coarse;       // 1-based ROI ids
        long long overlap;      // shared voxel count, >= 1 per stored row
    };
    std::vector<Row> rows;
    std::vector<long long> fine_totals;  // indexed by fine ROI - 1
};

// Binary fine-to-coarse assignment matrix: M(i,j) = 1 iff the overlap ratio
// of fine ROI i with coarse ROI j strictly exceeds the threshold.
struct MappingMatrix {
    int fine_scale = 0;
    int coarse_scale = 0;
    double th = 0.0;
    Tensor2D m;                       // fine_scale x coarse_scale of {0,1}
    std::vector<int> zero_rows;       // fine ROIs that map nowhere (warning)
    std::vector<std::vector<int>> groups;  // per coarse ROI: member fine rows (0-based)
};

// Per-scale assignment of ROIs to the seven resting-state networks.
struct RsnTable {
    int scale = 0;
    std::vector<int> roi_to_rsn;  // index roi-1 -> rsn id in 1..7
};

inline constexpr std::array<const char*, 7> kRsnNames = {"DMN", "FP",  "LIM", "SAL",
                                                         "ATT", "SM", "VIS"};

OverlapTable compute_overlap(const LabelVolume& fine, const LabelVolume& coarse);

MappingMatrix mapping_matrix(const OverlapTable& t, double th);

// Pool fine node features (rows of h) into coarse nodes. Average and max
// refuse coarse ROIs with no assigned fine ROI.
Tensor2D pool(const MappingMatrix& m, const Tensor2D& h, PoolScheme scheme);

// Tape-recorded variant; max pooling routes its gradient to the argmax
// member, ties broken toward the lowest fine index.
ValueId pool(GradTape& tape, const MappingMatrix& m, ValueId h, PoolScheme scheme);

struct PairReport {
    int fine_scale = 0;
    int coarse_scale = 0;
    int zero_rows = 0;           // fine ROIs with no parent at th
    int multi_parent_rois = 0;   // fine ROIs with > 1 parent at th
    double coverage = 0.0;       // overlapped voxels / total fine voxels
};

struct AtlasReport {
    std::vector<PairReport> pairs;
};

// Hierarchy sanity report over adjacent scale pairs, plus any extra
// (fine_index, coarse_index) pairs into `volumes` the caller asks for.
AtlasReport validate_atlas_set(const std::vector<LabelVolume>& volumes, double th,
                               const std::vector<std::pair<int, int>>& extra_pairs = {});

}  // namespace mahgcn::atlas
