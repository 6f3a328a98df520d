/*
 * Copyright 2026 The Hemlet Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hemlet/hwconfig.hpp"
#include "hemlet/matrix.hpp"
#include "hemlet/workload.hpp"

namespace hemlet::glp {

/// A bundle of up to M same-shape, never-concurrent static layers whose
/// columns interleave into one augmented weight matrix.
struct LayerSet {
    std::vector<int> members;  // static layer ids, slot order
    int capacity = 0;          // M
    int origin_stage = 1;      // 1..4 construction stage that created the set
};

struct StageTally {
    int sets = 0;
    int layers = 0;
};

/// Output of the four-stage construction plus the leftover baseline set.
struct LayerSetPlan {
    std::vector<LayerSet> glp_sets;
    std::vector<int> baseline;  // static layer ids mapped layer-wise
    int set_capacity = 0;       // M
    int slack_count = 0;        // z per Stage-1 collection
    int mha_remainder = 0;      // R per MHA type entering Stage 3
    int mha_full_sets_per_type = 0;  // p
    int mha_leftover_per_type = 0;   // q
    std::array<StageTally, 5> stage{};  // index 1..4

    std::int64_t placed_layers() const;
};

/// Four-stage GLP_LayerSet construction. Degenerate inputs yield valid,
/// possibly all-baseline, plans; never throws on shape-valid graphs.
LayerSetPlan build_layersets(const workload::LayerGraph& graph, int set_capacity);

/// Plan with every static layer in the baseline set (layer-wise mapping).
LayerSetPlan layerwise_plan(const workload::LayerGraph& graph);

/// Column interleave of x same-shape matrices: augmented column j*x + i is
/// column j of member i (members cycle fastest).
template <typename T>
Mat<T> interleave(const std::vector<Mat<T>>& members);

extern template Mat<float> interleave<float>(const std::vector<Mat<float>>&);
extern template Mat<double> interleave<double>(const std::vector<Mat<double>>&);

/// Physical coordinate of one logical weight column.
struct ColumnPlacement {
    int chiplet = 0;
    int pe = 0;
    int subarray = 0;  // index within the chiplet
    int group = 0;     // logical group within the subarray
    int slot = 0;      // slot within the group, 0..M-1
    int row_tiles = 1; // vertical splits stacked on consecutive subarrays
};

/// One placed augmented matrix (a GLP set) or one layer-wise baseline
/// layer. A slab is the column-window footprint: `row_tiles` consecutive
/// subarrays holding `cols_per_subarray` logical column positions.
struct UnitPlacement {
    bool is_glp = false;
    std::vector<int> members;  // slot order; single element for baseline units
    int rows = 0;
    int member_cols = 0;
    int positions = 0;   // capacity * member_cols for GLP (empty slots zeroed), cols otherwise
    int row_tiles = 1;
    struct Slab {
        int chiplet = 0;
        int sa_begin = 0;  // first of row_tiles consecutive subarrays
    };
    std::vector<Slab> slabs;
};

struct MappingPlan {
    int set_capacity = 0;        // M
    int replication = 1;         // physical columns per logical column
    int cols_per_subarray = 0;   // logical columns = sa_cols / replication
    int groups_per_subarray = 0; // logical groups = cols_per_subarray / M
    int sa_per_pe = 0;
    int sa_rows = 0;
    std::vector<UnitPlacement> units;
    std::vector<int> unit_of_layer;  // static layer id -> unit index
    std::vector<int> slot_of_layer;  // slot inside the unit (0 for baseline)
    std::int64_t cells_used = 0;     // physical cells holding weight bits
    std::int64_t cells_allocated = 0;

    /// Coordinates of row-tile 0 of a logical column; tiles t > 0 sit at
    /// subarray + t within the same slab.
    ColumnPlacement placement_of(int layer, int col) const;
};

/// Greedy in-order placement: GLP sets first, then baseline layers;
/// row-tiled slabs never straddle a chiplet. Throws CapacityError naming
/// the first unplaced layer.
MappingPlan place(const LayerSetPlan& plan, const workload::LayerGraph& graph,
                  const hw::SystemConfig& cfg);

struct LayerMapStats {
    int layer = 0;
    int groups_active = 0;        // physical groups holding >= 1 column (all row tiles)
    int serialization_degree = 0; // max columns of this layer in any single group
    int subarrays = 0;
    std::string label;
};

struct MappingStats {
    std::vector<LayerMapStats> per_layer;
    std::int64_t cells_used = 0;
    std::int64_t cells_wasted = 0;
    std::array<StageTally, 5> stage{};
    double mean_serialization_degree = 0.0;
};

MappingStats mapping_stats(const MappingPlan& plan, const workload::LayerGraph& graph,
                           const LayerSetPlan& sets);

/// JSON renderings for the map subcommand and for inspection.
std::string layerset_plan_to_json(const LayerSetPlan& plan, const workload::LayerGraph& graph);
std::string mapping_plan_to_json(const MappingPlan& plan, const workload::LayerGraph& graph);

}  // namespace hemlet::glp
