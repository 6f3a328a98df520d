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

#include "hemlet/glp_mapper.hpp"

#include <algorithm>
#include <json.hpp>

namespace hemlet::glp {

using workload::LayerGraph;
using workload::LayerKind;

std::int64_t LayerSetPlan::placed_layers() const {
    std::int64_t n = baseline.size();
    for (const auto& s : glp_sets) n += s.members.size();
    return n;
}

namespace {

// Tie-break order used everywhere a choice exists: ascending
// (block_index, kind, sub_index).
bool layer_order(const workload::StaticLayer& a, const workload::StaticLayer& b) {
    if (a.block != b.block) return a.block < b.block;
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.sub < b.sub;
}

}  // namespace

LayerSetPlan build_layersets(const LayerGraph& graph, int set_capacity) {
    if (set_capacity < 1) throw ConfigError("glp: set capacity M must be >= 1");
    const int M = set_capacity;
    const int N = graph.spec.blocks;
    const int k = graph.spec.ffn_splits();

    LayerSetPlan plan;
    plan.set_capacity = M;

    // Stage 1: per FFN split index i, collect {W1_i^b, W2_i^b} across all
    // blocks (2N layers, cross-block dependent) and chunk into ceil(2N/M)
    // sets.
    const int sets_per_collection = (2 * N + M - 1) / M;
    std::vector<int> slack_set_ids;  // last set of each collection when underfull
    for (int i = 0; i < k; ++i) {
        std::vector<int> collection;
        for (int b = 0; b < N; ++b) {
            collection.push_back(graph.static_index(b, LayerKind::W1Sub, i));
            collection.push_back(graph.static_index(b, LayerKind::W2Sub, i));
        }
        for (int s = 0; s < sets_per_collection; ++s) {
            LayerSet set;
            set.capacity = M;
            set.origin_stage = 1;
            for (int j = s * M; j < std::min<int>((s + 1) * M, collection.size()); ++j)
                set.members.push_back(collection[j]);
            plan.glp_sets.push_back(std::move(set));
            plan.stage[1].layers += static_cast<int>(plan.glp_sets.back().members.size());
        }
        plan.stage[1].sets += sets_per_collection;
        if ((2 * N) % M != 0)
            slack_set_ids.push_back(static_cast<int>(plan.glp_sets.size()) - 1);
    }
    plan.slack_count = M * sets_per_collection - 2 * N;

    // Stage 2: skipped when M divides 2N. Otherwise fill
    // min(z * ceil(k/4), N) whole {WQ, WK, WV, WO} quadruples into the
    // slack, each quadruple spread over four distinct sets so concurrent
    // QKV layers never share a set. Quadruples are consumed in ascending
    // block order; when fewer than four slack-bearing sets remain the
    // quadruple (and all later ones) forwards to Stage 3.
    int quads_filled = 0;
    if (plan.slack_count > 0) {
        const int z = plan.slack_count;
        const int quota = std::min(z * ((k + 3) / 4), N);
        std::vector<std::pair<int, int>> slack;  // (set id, remaining slots)
        for (int id : slack_set_ids)
            slack.emplace_back(id, M - static_cast<int>(plan.glp_sets[id].members.size()));
        const LayerKind quad[4] = {LayerKind::WQ, LayerKind::WK, LayerKind::WV, LayerKind::WO};
        for (int b = 0; b < quota; ++b) {
            std::vector<int> open;
            for (int s = 0; s < static_cast<int>(slack.size()); ++s)
                if (slack[s].second > 0) open.push_back(s);
            if (static_cast<int>(open.size()) < 4) break;
            std::stable_sort(open.begin(), open.end(), [&](int a, int c) {
                return slack[a].second > slack[c].second;
            });
            for (int q = 0; q < 4; ++q) {
                auto& [set_id, left] = slack[open[q]];
                plan.glp_sets[set_id].members.push_back(graph.static_index(b, quad[q], -1));
                --left;
                ++plan.stage[2].layers;
            }
            ++quads_filled;
        }
    }

    // Stage 3: per MHA type, R layers remain; (p, q) = divmod(R, M).
    const int R = N - quads_filled;
    plan.mha_remainder = R;
    plan.mha_full_sets_per_type = R / M;
    plan.mha_leftover_per_type = R % M;
    const int p = plan.mha_full_sets_per_type;
    const int q = plan.mha_leftover_per_type;
    const LayerKind types[4] = {LayerKind::WQ, LayerKind::WK, LayerKind::WV, LayerKind::WO};

    std::vector<int> residuals;
    std::vector<int> qkv_leftover_sets;  // ids of the 3M=4N branch sets
    for (int t = 0; t < 4; ++t) {
        int b = quads_filled;  // first block whose layer of this type is unplaced
        for (int s = 0; s < p; ++s) {
            LayerSet set;
            set.capacity = M;
            set.origin_stage = 3;
            for (int j = 0; j < M; ++j) set.members.push_back(graph.static_index(b++, types[t], -1));
            plan.stage[3].layers += M;
            ++plan.stage[3].sets;
            plan.glp_sets.push_back(std::move(set));
        }
        if (q > 0) {
            if (3 * M == 4 * N && t < 3) {
                // Single-type sets for the WQ/WK/WV leftovers; WO leftovers
                // are folded in below.
                LayerSet set;
                set.capacity = M;
                set.origin_stage = 3;
                for (int j = 0; j < q; ++j) set.members.push_back(graph.static_index(b++, types[t], -1));
                plan.stage[3].layers += q;
                ++plan.stage[3].sets;
                qkv_leftover_sets.push_back(static_cast<int>(plan.glp_sets.size()));
                plan.glp_sets.push_back(std::move(set));
            } else if (3 * M == 4 * N && t == 3) {
                // Round-robin the q WO leftovers over the three WQ/WK/WV
                // leftover sets; earlier sets receive the extras.
                for (int j = 0; j < q; ++j) {
                    plan.glp_sets[qkv_leftover_sets[j % 3]].members.push_back(
                        graph.static_index(b++, types[t], -1));
                    ++plan.stage[3].layers;
                }
            } else {
                for (int j = 0; j < q; ++j) residuals.push_back(graph.static_index(b++, types[t], -1));
            }
        }
    }

    // Stage 4: everything unplaced becomes the Baseline_LayerSet.
    std::stable_sort(residuals.begin(), residuals.end(), [&](int a, int b) {
        return layer_order(graph.statics[a], graph.statics[b]);
    });
    plan.baseline = std::move(residuals);
    plan.stage[4].layers = static_cast<int>(plan.baseline.size());
    return plan;
}

LayerSetPlan layerwise_plan(const LayerGraph& graph) {
    LayerSetPlan plan;
    plan.set_capacity = 1;
    plan.baseline.resize(graph.statics.size());
    for (int i = 0; i < static_cast<int>(graph.statics.size()); ++i) plan.baseline[i] = i;
    std::stable_sort(plan.baseline.begin(), plan.baseline.end(), [&](int a, int b) {
        return layer_order(graph.statics[a], graph.statics[b]);
    });
    plan.stage[4].layers = static_cast<int>(plan.baseline.size());
    return plan;
}

template <typename T>
Mat<T> interleave(const std::vector<Mat<T>>& members) {
    if (members.empty()) throw ConfigError("interleave: needs at least one matrix");
    const int x = static_cast<int>(members.size());
    const int rows = members[0].rows;
    const int cols = members[0].cols;
    for (const auto& m : members)
        if (!m.same_shape(members[0])) throw ConfigError("interleave: member shapes differ");

    Mat<T> aug(rows, x * cols);
    for (int i = 0; i < x; ++i)
        for (int j = 0; j < cols; ++j)
            for (int r = 0; r < rows; ++r) aug(r, j * x + i) = members[i](r, j);
    return aug;
}

template Mat<float> interleave<float>(const std::vector<Mat<float>>&);
template Mat<double> interleave<double>(const std::vector<Mat<double>>&);

MappingPlan place(const LayerSetPlan& sets, const LayerGraph& graph, const hw::SystemConfig& cfg) {
    const auto& acim = cfg.acim;
    const int M = acim.group_size;
    const int r = hw::bit_slices(acim, graph.spec.weight_bits);
    if (acim.sa_cols % (M * r) != 0)
        throw ConfigError("acim.sa_cols: not divisible by group_size * bit-slice count; "
                          "slot arithmetic would be non-uniform");

    MappingPlan plan;
    plan.set_capacity = M;
    plan.replication = r;
    plan.cols_per_subarray = acim.sa_cols / r;
    plan.groups_per_subarray = plan.cols_per_subarray / M;
    plan.sa_per_pe = acim.sa_per_pe;
    plan.sa_rows = acim.sa_rows;
    plan.unit_of_layer.assign(graph.statics.size(), -1);
    plan.slot_of_layer.assign(graph.statics.size(), 0);

    const std::int64_t sa_cells = static_cast<std::int64_t>(acim.sa_rows) * acim.sa_cols;
    const int sa_per_chiplet = static_cast<int>(acim.subarrays_per_chiplet());
    int chiplet = 0;
    int sa_cursor = 0;
    std::int64_t skipped_cells = 0;

    auto place_unit = [&](UnitPlacement unit, const std::string& first_label) {
        const int tiles = (unit.rows + acim.sa_rows - 1) / acim.sa_rows;
        unit.row_tiles = tiles;
        const int n_slabs = (unit.positions + plan.cols_per_subarray - 1) / plan.cols_per_subarray;
        for (int s = 0; s < n_slabs; ++s) {
            if (sa_cursor + tiles > sa_per_chiplet) {
                skipped_cells += static_cast<std::int64_t>(sa_per_chiplet - sa_cursor) * sa_cells;
                ++chiplet;
                sa_cursor = 0;
                if (tiles > sa_per_chiplet)
                    throw CapacityError("layer " + first_label + ": " + std::to_string(tiles) +
                                        " row tiles exceed one chiplet's subarrays");
            }
            if (chiplet >= cfg.n_acim_chiplets)
                throw CapacityError("ACIM capacity exhausted at layer " + first_label + " (chiplet " +
                                    std::to_string(chiplet) + " of " +
                                    std::to_string(cfg.n_acim_chiplets) + ")");
            unit.slabs.push_back({chiplet, sa_cursor});
            sa_cursor += tiles;
        }
        plan.cells_allocated += static_cast<std::int64_t>(n_slabs) * tiles * sa_cells;
        const int unit_id = static_cast<int>(plan.units.size());
        for (int slot = 0; slot < static_cast<int>(unit.members.size()); ++slot) {
            const int layer = unit.members[slot];
            plan.unit_of_layer[layer] = unit_id;
            plan.slot_of_layer[layer] = slot;
            plan.cells_used += static_cast<std::int64_t>(graph.statics[layer].rows) *
                               graph.statics[layer].cols * r;
        }
        plan.units.push_back(std::move(unit));
    };

    for (const auto& set : sets.glp_sets) {
        if (set.members.empty()) continue;
        UnitPlacement unit;
        unit.is_glp = true;
        unit.members = set.members;
        unit.rows = graph.statics[set.members[0]].rows;
        unit.member_cols = graph.statics[set.members[0]].cols;
        for (int m : set.members) {
            const auto& l = graph.statics[m];
            if (l.rows != unit.rows || l.cols != unit.member_cols)
                throw InternalError("GLP set member shapes differ at layer " + l.label());
        }
        // Unfilled slots stay as zeroed columns; position stride is always M.
        unit.positions = M * unit.member_cols;
        place_unit(std::move(unit), graph.statics[set.members[0]].label());
    }
    for (int layer : sets.baseline) {
        UnitPlacement unit;
        unit.is_glp = false;
        unit.members = {layer};
        unit.rows = graph.statics[layer].rows;
        unit.member_cols = graph.statics[layer].cols;
        unit.positions = unit.member_cols;
        place_unit(std::move(unit), graph.statics[layer].label());
    }
    plan.cells_allocated += skipped_cells;
    return plan;
}

ColumnPlacement MappingPlan::placement_of(int layer, int col) const {
    if (layer < 0 || layer >= static_cast<int>(unit_of_layer.size()) || unit_of_layer[layer] < 0)
        throw InternalError("placement_of: layer not placed");
    const auto& unit = units[unit_of_layer[layer]];
    if (col < 0 || col >= unit.member_cols) throw InternalError("placement_of: column out of range");
    const int position = unit.is_glp ? col * set_capacity + slot_of_layer[layer] : col;
    const int slab_idx = position / cols_per_subarray;
    const int within = position % cols_per_subarray;
    const auto& slab = unit.slabs[slab_idx];
    ColumnPlacement cp;
    cp.chiplet = slab.chiplet;
    cp.subarray = slab.sa_begin;
    cp.pe = slab.sa_begin / sa_per_pe;
    cp.group = within / set_capacity;
    cp.slot = within % set_capacity;
    cp.row_tiles = unit.row_tiles;
    return cp;
}

MappingStats mapping_stats(const MappingPlan& plan, const LayerGraph& graph,
                           const LayerSetPlan& sets) {
    MappingStats stats;
    stats.stage = sets.stage;
    stats.cells_used = plan.cells_used;
    stats.cells_wasted = plan.cells_allocated - plan.cells_used;

    double degree_sum = 0.0;
    for (int layer = 0; layer < static_cast<int>(graph.statics.size()); ++layer) {
        const int unit_id = plan.unit_of_layer[layer];
        if (unit_id < 0) continue;
        const auto& unit = plan.units[unit_id];
        LayerMapStats ls;
        ls.layer = layer;
        ls.label = graph.statics[layer].label();
        const int cols = unit.member_cols;
        const int M = plan.set_capacity;
        if (unit.is_glp) {
            // One slot per group: interleaving puts column j at group j.
            ls.serialization_degree = cols > 0 ? 1 : 0;
            ls.groups_active = cols * unit.row_tiles;
        } else {
            ls.serialization_degree = std::min(M, cols);
            ls.groups_active = ((cols + M - 1) / M) * unit.row_tiles;
        }
        ls.subarrays = static_cast<int>(unit.slabs.size()) * unit.row_tiles;
        degree_sum += ls.serialization_degree;
        stats.per_layer.push_back(std::move(ls));
    }
    if (!stats.per_layer.empty())
        stats.mean_serialization_degree = degree_sum / static_cast<double>(stats.per_layer.size());
    return stats;
}

std::string layerset_plan_to_json(const LayerSetPlan& plan, const LayerGraph& graph) {
    nlohmann::ordered_json j;
    j["set_capacity"] = plan.set_capacity;
    j["slack_count"] = plan.slack_count;
    j["mha_remainder"] = plan.mha_remainder;
    j["mha_full_sets_per_type"] = plan.mha_full_sets_per_type;
    j["mha_leftover_per_type"] = plan.mha_leftover_per_type;
    for (int s = 1; s <= 4; ++s) {
        j["stage_counts"][std::to_string(s)]["sets"] = plan.stage[s].sets;
        j["stage_counts"][std::to_string(s)]["layers"] = plan.stage[s].layers;
    }
    j["glp_sets"] = nlohmann::ordered_json::array();
    for (const auto& set : plan.glp_sets) {
        nlohmann::ordered_json js;
        js["origin_stage"] = set.origin_stage;
        js["capacity"] = set.capacity;
        js["members"] = nlohmann::ordered_json::array();
        for (int m : set.members) js["members"].push_back(graph.statics[m].label());
        j["glp_sets"].push_back(std::move(js));
    }
    j["baseline"] = nlohmann::ordered_json::array();
    for (int m : plan.baseline) j["baseline"].push_back(graph.statics[m].label());
    return j.dump(2);
}

std::string mapping_plan_to_json(const MappingPlan& plan, const LayerGraph& graph) {
    nlohmann::ordered_json j;
    j["set_capacity"] = plan.set_capacity;
    j["bit_slice_replication"] = plan.replication;
    j["cols_per_subarray"] = plan.cols_per_subarray;
    j["groups_per_subarray"] = plan.groups_per_subarray;
    j["cells_used"] = plan.cells_used;
    j["cells_allocated"] = plan.cells_allocated;
    j["units"] = nlohmann::ordered_json::array();
    for (const auto& u : plan.units) {
        nlohmann::ordered_json ju;
        ju["glp"] = u.is_glp;
        ju["rows"] = u.rows;
        ju["member_cols"] = u.member_cols;
        ju["row_tiles"] = u.row_tiles;
        ju["members"] = nlohmann::ordered_json::array();
        for (int m : u.members) ju["members"].push_back(graph.statics[m].label());
        ju["slabs"] = nlohmann::ordered_json::array();
        for (const auto& s : u.slabs)
            ju["slabs"].push_back({{"chiplet", s.chiplet}, {"sa_begin", s.sa_begin}});
        j["units"].push_back(std::move(ju));
    }
    return j.dump(2);
}

}  // namespace hemlet::glp
