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

#include "hemlet/engine.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <ostream>

#include "hemlet/nop.hpp"
#include "hemlet/numerics.hpp"

namespace hemlet::engine {

const char* mode_name(DataflowMode m) {
    switch (m) {
        case DataflowMode::Native: return "native";
        case DataflowMode::Pipelined: return "pipelined";
        case DataflowMode::Hemlet: return "hemlet";
    }
    return "?";
}

const char* mapping_name(MappingKind m) {
    return m == MappingKind::LayerWise ? "layerwise" : "glp";
}

DataflowMode parse_mode(const std::string& s) {
    if (s == "native") return DataflowMode::Native;
    if (s == "pipelined") return DataflowMode::Pipelined;
    if (s == "hemlet") return DataflowMode::Hemlet;
    throw ConfigError("unknown dataflow mode: " + s);
}

MappingKind parse_mapping(const std::string& s) {
    if (s == "layerwise") return MappingKind::LayerWise;
    if (s == "glp") return MappingKind::Glp;
    throw ConfigError("unknown mapping kind: " + s);
}

namespace {

std::int64_t to_ps(double ns) { return std::llround(ns * 1000.0); }

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

/// What one chiplet holds of one static layer.
struct LayerShare {
    int chiplet = 0;
    std::int64_t cols = 0;  // logical columns
    int degree = 0;         // max columns in any single group
    int slabs = 0;          // slabs with at least one column
    std::vector<std::pair<int, int>> col_intervals;  // [lo, hi) logical column ranges
};

struct LayerInfo {
    std::vector<LayerShare> shares;  // ascending chiplet id
    int row_tiles = 1;
    std::int64_t rows = 0;
    std::int64_t cols = 0;
};

LayerInfo layer_info(const glp::MappingPlan& plan, const workload::LayerGraph& g, int layer) {
    const int unit_id = plan.unit_of_layer.at(layer);
    if (unit_id < 0) throw InternalError("layer not placed: " + g.statics[layer].label());
    const auto& unit = plan.units[unit_id];
    const int M = plan.set_capacity;
    const int cps = plan.cols_per_subarray;
    const int slot = plan.slot_of_layer[layer];

    LayerInfo info;
    info.row_tiles = unit.row_tiles;
    info.rows = unit.rows;
    info.cols = unit.member_cols;

    LayerShare* cur = nullptr;
    for (int s = 0; s < static_cast<int>(unit.slabs.size()); ++s) {
        const int w0 = s * cps;
        const int w1 = std::min((s + 1) * cps, unit.positions);
        int j_lo = 0, j_hi = 0;  // [j_lo, j_hi)
        int deg = 0;
        if (unit.is_glp) {
            // Positions of this member are slot, M + slot, 2M + slot, ...
            j_lo = (w0 - slot + M - 1) / M;
            j_hi = std::min((w1 - 1 - slot) / M + 1, unit.member_cols);
            deg = j_hi > j_lo ? 1 : 0;
        } else {
            j_lo = w0;
            j_hi = std::min(w1, unit.member_cols);
            deg = std::min<int>(M, std::max(0, j_hi - j_lo));
        }
        const int count = std::max(0, j_hi - j_lo);
        if (count == 0) continue;
        const int chip = unit.slabs[s].chiplet;
        if (cur == nullptr || cur->chiplet != chip) {
            info.shares.push_back({chip, 0, 0, 0, {}});
            cur = &info.shares.back();
        }
        cur->cols += count;
        cur->degree = std::max(cur->degree, deg);
        cur->slabs += 1;
        if (!cur->col_intervals.empty() && cur->col_intervals.back().second == j_lo)
            cur->col_intervals.back().second = j_hi;  // merge adjacent ranges
        else
            cur->col_intervals.emplace_back(j_lo, j_hi);
    }
    return info;
}

}  // namespace

AcimLayerCost acim_layer_latency(int layer, const glp::MappingPlan& plan,
                                 const workload::LayerGraph& graph, const hw::AcimConfig& acim,
                                 int tokens) {
    const LayerInfo info = layer_info(plan, graph, layer);
    const int ab = graph.spec.act_bits;
    const int r = plan.replication;
    const std::int64_t t_row = to_ps(acim.t_row_ns);
    const std::int64_t t_adc = to_ps(acim.t_adc_ns);

    AcimLayerCost cost;
    for (const auto& sh : info.shares) {
        const std::int64_t lat = static_cast<std::int64_t>(ab) * (t_row + sh.degree * t_adc) * tokens;
        cost.latency_ps = std::max(cost.latency_ps, lat);
        cost.degree = std::max(cost.degree, sh.degree);
        cost.conversions += sh.cols * r * ab * tokens;
        cost.cell_activations += info.rows * sh.cols * r * ab * tokens;
    }
    cost.energy_pj = static_cast<double>(cost.conversions) * acim.e_adc_pj +
                     static_cast<double>(cost.cell_activations) * acim.e_mac_row_pj;
    return cost;
}

DcimOpCost dcim_op_latency(const workload::DynamicOp& op, const workload::ViTModelSpec& spec,
                           const hw::DcimConfig& dcim, int block_tokens) {
    const std::int64_t L = spec.seq_len;
    const std::int64_t dh = spec.head_dim();
    const int ab = spec.act_bits;
    const std::int64_t bl_nominal = std::min<std::int64_t>(block_tokens, L);
    const std::int64_t n_b = ceil_div(L, bl_nominal);
    const std::int64_t t_write = to_ps(dcim.t_write_ns);
    const std::int64_t t_cycle = to_ps(dcim.t_cycle_ns);

    DcimOpCost cost;
    for (std::int64_t i = 0; i < n_b; ++i) {
        const std::int64_t bl = (i == n_b - 1) ? L - i * bl_nominal : bl_nominal;
        std::int64_t rows_w;
        if (op.kind == workload::DynKind::QKT) {
            // Q block stationary (d_h x bl weight tile), K rows streamed.
            rows_w = dh * ceil_div(bl, dcim.sa_cols);
        } else {
            // V block stationary (bl x d_h), P'' rows streamed.
            rows_w = bl * ceil_div(dh, dcim.sa_cols);
        }
        cost.write_rows += rows_w;
        cost.write_ps += rows_w * t_write;
        cost.latency_ps += rows_w * t_write + L * ab * t_cycle;
        cost.macs += L * bl * dh;
    }
    cost.write_pj = static_cast<double>(cost.write_rows) * dcim.e_write_pj;
    cost.energy_pj = cost.write_pj + static_cast<double>(cost.macs) * ab * dcim.e_mac_pj;
    return cost;
}

namespace {

class Simulator {
public:
    Simulator(const workload::LayerGraph& g, const hw::SystemConfig& cfg,
              const glp::MappingPlan& plan, MappingKind mapping, DataflowMode mode,
              const RunOptions& opts)
        : g_(g), cfg_(cfg), plan_(plan), mapping_(mapping), mode_(mode), opts_(opts),
          mesh_(hw::assign_mesh(cfg)) {
        info_.reserve(g_.statics.size());
        for (int l = 0; l < static_cast<int>(g_.statics.size()); ++l)
            info_.push_back(layer_info(plan_, g_, l));
        layer_time_.assign(g_.statics.size(), 0);
        head_dcim_.resize(g_.spec.heads);
        heads_on_.assign(cfg_.n_dcim_chiplets, 0);
        for (int h = 0; h < g_.spec.heads; ++h) {
            head_dcim_[h] = h % cfg_.n_dcim_chiplets;
            ++heads_on_[head_dcim_[h]];
        }
        t_row_ = to_ps(cfg_.acim.t_row_ns);
        t_adc_ = to_ps(cfg_.acim.t_adc_ns);
        t_simd_ = to_ps(cfg_.idp.t_simd_ns);
    }

    SimReport simulate();

private:
    struct StaticStep {
        std::vector<int> layers;
        bool serial_chain = false;  // FFN sub-layers execute one after another
        bool slice_input = false;   // each layer brings its own d-row input slice
        std::string in_tag;
        std::string out_tag;
        bool out_to_dcim = false;   // direct Q/K/V forwarding under HEMLET
    };

    std::int64_t buf_time(const hw::BufferCost& c, std::int64_t bytes) const {
        return to_ps(c.t_ns * static_cast<double>(bytes));
    }

    void add_event(std::int64_t time, EventKind kind, std::string resource, std::int64_t dur,
                   double energy, std::string tag) {
        if (opts_.collect_events)
            events_.push_back({time, kind, std::move(resource), dur, energy, std::move(tag)});
    }

    /// NoP message; accounts IC busy/energy, tag bytes and IDP SRAM energy.
    std::int64_t do_transfer(std::int64_t start, nop::Coord src, nop::Coord dst,
                             std::int64_t bytes, const std::string& tag) {
        nop::Transfer t{src, dst, bytes, tag};
        const nop::Cost c = nop::transfer_cost(t, cfg_.nop);
        std::int64_t lat = to_ps(c.latency_ns);
        if (cfg_.nop.link_serialization && !(src == dst)) {
            const auto links = nop::xy_route_links(src, dst, cfg_.nop.mesh_x, cfg_.nop.mesh_y);
            const std::int64_t hold = to_ps(static_cast<double>(bytes) / cfg_.nop.bw_gbps);
            const std::int64_t admitted = links_.admit(links, start, hold);
            lat += admitted - start;
        }
        bytes_by_tag_[tag] += bytes;
        busy_.ic_ps += lat;
        busy_.ic_pj += c.energy_pj;
        if (src == mesh_.idp) busy_.buffer_pj += static_cast<double>(bytes) * cfg_.idp.e_buf_r_pj;
        if (dst == mesh_.idp) busy_.buffer_pj += static_cast<double>(bytes) * cfg_.idp.e_buf_w_pj;
        add_event(start, EventKind::Transfer, "nop", lat, c.energy_pj, tag);
        return lat;
    }

    /// Chiplet-buffer access (time and energy), n passes over the bytes.
    std::int64_t cbuf(std::int64_t bytes, int passes, const std::string& resource,
                      std::int64_t start) {
        const std::int64_t dur = buf_time(cfg_.chiplet_buf, bytes) * passes;
        const double e = static_cast<double>(bytes) * passes * cfg_.chiplet_buf.e_pj;
        busy_.buffer_ps += dur;
        busy_.buffer_pj += e;
        add_event(start, EventKind::Buffer, resource, dur, e, "chiplet-buffer");
        return dur;
    }

    std::int64_t simd_block(std::int64_t start, std::int64_t ops, const std::string& resource,
                            const std::string& tag, bool idp_sram) {
        if (ops <= 0) return 0;
        const std::int64_t dur = ceil_div(ops, cfg_.idp.simd_width) * t_simd_;
        const double e = static_cast<double>(ops) * cfg_.idp.e_simd_pj;
        busy_.simd_ps += dur;
        busy_.simd_pj += e;
        simd_ops_ += ops;
        if (idp_sram) {
            const std::int64_t bytes = ops * g_.spec.act_bits / 8;
            busy_.buffer_pj +=
                static_cast<double>(bytes) * (cfg_.idp.e_buf_r_pj + cfg_.idp.e_buf_w_pj);
        }
        add_event(start, EventKind::Simd, resource, dur, e, tag);
        return dur;
    }

    nop::Coord acim_coord(int c) const { return mesh_.acim.at(c); }
    nop::Coord dcim_coord(int c) const { return mesh_.dcim.at(c); }

    std::int64_t run_static_step(const StaticStep& st, std::int64_t start);
    std::int64_t attention_native(std::int64_t start, int block);
    std::int64_t attention_hemlet(std::int64_t start, int block);
    int dcim_waves(int heads_dc) const;

    const workload::LayerGraph& g_;
    const hw::SystemConfig& cfg_;
    const glp::MappingPlan& plan_;
    MappingKind mapping_;
    DataflowMode mode_;
    RunOptions opts_;
    hw::MeshLayout mesh_;
    std::vector<LayerInfo> info_;
    std::vector<std::int64_t> layer_time_;
    std::vector<int> head_dcim_;
    std::vector<int> heads_on_;
    nop::LinkSchedule links_;

    std::int64_t t_row_ = 0, t_adc_ = 0, t_simd_ = 0;
    std::int64_t now_ = 0;
    Breakdown busy_;
    std::int64_t static_macs_ = 0, dynamic_macs_ = 0, simd_ops_ = 0;
    std::int64_t conversions_ = 0;
    std::int64_t acim_active_ps_ = 0;
    std::map<std::string, std::int64_t> bytes_by_tag_;
    std::vector<SimEvent> events_;
};

int Simulator::dcim_waves(int heads_dc) const {
    const auto& dc = cfg_.dcim;
    const std::int64_t L = g_.spec.seq_len;
    const std::int64_t dh = g_.spec.head_dim();
    const std::int64_t bl = std::min<std::int64_t>(cfg_.block_tokens, L);
    const std::int64_t qkt_sas = ceil_div(dh, dc.sa_rows) * ceil_div(bl, dc.sa_cols);
    const std::int64_t pv_sas = ceil_div(bl, dc.sa_rows) * ceil_div(dh, dc.sa_cols);
    const std::int64_t total_sas = static_cast<std::int64_t>(dc.pe_per_chiplet) * dc.sa_per_pe;
    const std::int64_t concurrent = std::max<std::int64_t>(1, total_sas / (qkt_sas + pv_sas));
    return static_cast<int>(ceil_div(heads_dc, concurrent));
}

std::int64_t Simulator::run_static_step(const StaticStep& st, std::int64_t start) {
    const std::int64_t L = g_.spec.seq_len;
    const int ab = g_.spec.act_bits;
    const std::int64_t bl = std::min<std::int64_t>(cfg_.block_tokens, L);
    const int n_b = static_cast<int>(ceil_div(L, bl));
    const bool pipelined = mode_ != DataflowMode::Native;
    const int r = plan_.replication;

    // Which chiplets see which layers in this step.
    std::vector<int> chiplets;
    for (int l : st.layers)
        for (const auto& sh : info_[l].shares)
            if (std::find(chiplets.begin(), chiplets.end(), sh.chiplet) == chiplets.end())
                chiplets.push_back(sh.chiplet);
    std::sort(chiplets.begin(), chiplets.end());

    std::int64_t step = 0;
    std::int64_t step_sa = 0;  // ADC-active window for utilization accounting
    for (int c : chiplets) {
        std::vector<std::pair<int, const LayerShare*>> here;  // (layer, share)
        for (int l : st.layers)
            for (const auto& sh : info_[l].shares)
                if (sh.chiplet == c) here.emplace_back(l, &sh);

        const std::int64_t rows = g_.statics[st.layers[0]].rows;
        const std::int64_t in_bytes_per_tok =
            st.slice_input ? static_cast<std::int64_t>(here.size()) * rows * ab / 8
                           : rows * ab / 8;
        std::int64_t out_cols = 0;
        for (const auto& [l, sh] : here) out_cols += sh->cols;

        const std::string resource = "acim" + std::to_string(c);
        std::vector<std::int64_t> t_in(n_b), t_comp(n_b), t_out(n_b);
        std::int64_t sa_sum = 0;
        for (int i = 0; i < n_b; ++i) {
            const std::int64_t tok = (i == n_b - 1) ? L - static_cast<std::int64_t>(i) * bl : bl;
            const std::int64_t in_bytes = in_bytes_per_tok * tok;
            const std::int64_t out_bytes = out_cols * tok * ab / 8;

            // Inbound: NoP from IDP plus chiplet-buffer write. Peak profiling
            // assumes the block is already resident.
            std::int64_t tin = 0;
            if (!opts_.peak) {
                tin += do_transfer(start, mesh_.idp, acim_coord(c), in_bytes, st.in_tag);
                tin += cbuf(in_bytes, 1, resource, start);
            }
            t_in[i] = tin;

            // Compute: chiplet-buffer read, local-buffer fill, crossbar time,
            // row-tile partial sums on the chiplet SIMD. Each layer's lane is
            // its local fill followed by its subarray time; the FFN chain
            // serializes lanes, the QKV triple overlaps them.
            const std::int64_t tc_buf = cbuf(in_bytes, 1, resource, start);
            std::int64_t lane_sum = 0, lane_max = 0;
            std::int64_t sa_here = 0, sa_max = 0;
            std::int64_t psum_ops = 0;
            for (const auto& [l, sh] : here) {
                const std::int64_t sa =
                    static_cast<std::int64_t>(ab) * (t_row_ + sh->degree * t_adc_) * tok;
                busy_.sa_ps += sa;
                const std::int64_t conv = sh->cols * r * ab * tok;
                const std::int64_t cells = info_[l].rows * sh->cols * r * ab * tok;
                const double e = static_cast<double>(conv) * cfg_.acim.e_adc_pj +
                                 static_cast<double>(cells) * cfg_.acim.e_mac_row_pj;
                busy_.sa_pj += e;
                conversions_ += conv;
                static_macs_ += info_[l].rows * sh->cols * tok;
                psum_ops += static_cast<std::int64_t>(info_[l].row_tiles - 1) * sh->cols * tok;
                add_event(start, EventKind::Compute, resource, sa, e, g_.statics[l].label());

                // Local-buffer fill: one write per subarray slab holding any
                // column of the active layer (input reuse shrinks as the
                // layer spreads over more subarrays).
                const std::int64_t slab_bytes = info_[l].rows * tok * ab / 8;
                busy_.buffer_pj +=
                    static_cast<double>(sh->slabs) * slab_bytes * cfg_.local_buf.e_pj;
                const std::int64_t slice =
                    buf_time(cfg_.local_buf,
                             std::min<std::int64_t>(info_[l].rows, cfg_.acim.sa_rows) * tok * ab / 8);
                busy_.buffer_ps += slice;
                lane_sum += slice + sa;
                lane_max = std::max(lane_max, slice + sa);
                sa_here += sa;
                sa_max = std::max(sa_max, sa);
            }
            const std::int64_t lanes = st.serial_chain ? lane_sum : lane_max;
            t_comp[i] = tc_buf + lanes + simd_block(start, psum_ops, resource, "row-tile-psum", false);
            sa_sum += st.serial_chain ? sa_here : sa_max;

            // Outbound: chiplet-buffer write+read and NoP to the destination.
            std::int64_t tout = cbuf(out_bytes, 2, resource, start);
            if (!opts_.peak) {
                if (st.out_to_dcim) {
                    std::int64_t worst = 0;
                    for (int dc = 0; dc < cfg_.n_dcim_chiplets; ++dc) {
                        if (heads_on_[dc] == 0) continue;
                        std::int64_t dc_cols = 0;
                        const std::int64_t dh = g_.spec.head_dim();
                        for (const auto& [l, sh] : here)
                            for (const auto& [lo, hi] : sh->col_intervals)
                                for (int h = 0; h < g_.spec.heads; ++h) {
                                    if (head_dcim_[h] != dc) continue;
                                    const std::int64_t o =
                                        std::min<std::int64_t>(hi, (h + 1) * dh) -
                                        std::max<std::int64_t>(lo, h * dh);
                                    if (o > 0) dc_cols += o;
                                }
                        if (dc_cols == 0) continue;
                        const std::int64_t bytes = dc_cols * tok * ab / 8;
                        worst = std::max(
                            worst, do_transfer(start, acim_coord(c), dcim_coord(dc), bytes, st.out_tag));
                    }
                    tout += worst;
                } else {
                    tout += do_transfer(start, acim_coord(c), mesh_.idp, out_bytes, st.out_tag);
                }
            }
            t_out[i] = tout;
        }

        std::int64_t total;
        if (!pipelined) {
            total = 0;
            for (int i = 0; i < n_b; ++i) total += t_in[i] + t_comp[i] + t_out[i];
        } else {
            // Double-buffered three-stage pipeline, fill/drain exact.
            std::vector<std::int64_t> ein(n_b), ecomp(n_b), eout(n_b);
            for (int i = 0; i < n_b; ++i) {
                std::int64_t ready = i > 0 ? ein[i - 1] : 0;
                if (i >= 2) ready = std::max(ready, ecomp[i - 2]);
                ein[i] = ready + t_in[i];
                ecomp[i] = std::max(ein[i], i > 0 ? ecomp[i - 1] : 0) + t_comp[i];
                eout[i] = std::max(ecomp[i], i > 0 ? eout[i - 1] : 0) + t_out[i];
            }
            total = eout[n_b - 1];
        }
        step = std::max(step, total);
        step_sa = std::max(step_sa, sa_sum);
    }

    // Per-layer latency attribution: each layer's own worst chiplet time.
    for (int l : st.layers) {
        std::int64_t worst = 0;
        for (const auto& sh : info_[l].shares)
            worst = std::max(worst, static_cast<std::int64_t>(g_.spec.act_bits) *
                                        (t_row_ + sh.degree * t_adc_) * L);
        layer_time_[l] += worst;
    }
    acim_active_ps_ += step_sa;
    return step;
}

std::int64_t Simulator::attention_native(std::int64_t start, int block) {
    const std::int64_t L = g_.spec.seq_len;
    const std::int64_t dh = g_.spec.head_dim();
    const std::int64_t H = g_.spec.heads;
    const int ab = g_.spec.act_bits;

    workload::DynamicOp qkt{block, 0, workload::DynKind::QKT};
    workload::DynamicOp pv{block, 0, workload::DynKind::PV};
    const DcimOpCost qkt_cost = dcim_op_latency(qkt, g_.spec, cfg_.dcim, cfg_.block_tokens);
    const DcimOpCost pv_cost = dcim_op_latency(pv, g_.spec, cfg_.dcim, cfg_.block_tokens);

    auto dcim_phase = [&](int dc, const DcimOpCost& cost, const std::string& resource) {
        const int waves = dcim_waves(heads_on_[dc]);
        const std::int64_t dur = static_cast<std::int64_t>(waves) * cost.latency_ps;
        busy_.dcim_write_ps += static_cast<std::int64_t>(waves) * cost.write_ps;
        busy_.sa_ps += static_cast<std::int64_t>(waves) * (cost.latency_ps - cost.write_ps);
        busy_.dcim_write_pj += cost.write_pj * heads_on_[dc];
        busy_.sa_pj += (cost.energy_pj - cost.write_pj) * heads_on_[dc];
        dynamic_macs_ += cost.macs * heads_on_[dc];
        add_event(start, EventKind::Compute, resource, dur, cost.energy_pj * heads_on_[dc],
                  "attention");
        return dur;
    };

    // Phase 1: Q/K/V to the DCIM chiplets, QK^T, P' back to the IDP.
    std::int64_t phase1 = 0;
    for (int dc = 0; dc < cfg_.n_dcim_chiplets; ++dc) {
        if (heads_on_[dc] == 0) continue;
        const std::string resource = "dcim" + std::to_string(dc);
        const std::int64_t qkv_bytes = heads_on_[dc] * 3 * L * dh * ab / 8;
        std::int64_t t = do_transfer(start, mesh_.idp, dcim_coord(dc), qkv_bytes, "QKV->DCIM");
        t += cbuf(qkv_bytes, 2, resource, start);
        t += dcim_phase(dc, qkt_cost, resource);
        const std::int64_t p_bytes = heads_on_[dc] * L * L * ab / 8;
        t += cbuf(p_bytes, 2, resource, start);
        t += do_transfer(start, dcim_coord(dc), mesh_.idp, p_bytes, "P'->IDP");
        phase1 = std::max(phase1, t);
    }

    // Full softmax on the IDP SIMD: exponentiation plus normalization.
    const std::int64_t sm = simd_block(start, 2 * H * L * L, "idp", "softmax", true);

    // Phase 2: P back to the DCIM chiplets, P''V, S to the IDP.
    std::int64_t phase2 = 0;
    for (int dc = 0; dc < cfg_.n_dcim_chiplets; ++dc) {
        if (heads_on_[dc] == 0) continue;
        const std::string resource = "dcim" + std::to_string(dc);
        const std::int64_t p_bytes = heads_on_[dc] * L * L * ab / 8;
        std::int64_t t = do_transfer(start, mesh_.idp, dcim_coord(dc), p_bytes, "P->DCIM");
        t += cbuf(p_bytes, 2, resource, start);
        t += dcim_phase(dc, pv_cost, resource);
        const std::int64_t s_bytes = heads_on_[dc] * L * dh * ab / 8;
        t += cbuf(s_bytes, 2, resource, start);
        t += do_transfer(start, dcim_coord(dc), mesh_.idp, s_bytes, "S->IDP");
        phase2 = std::max(phase2, t);
    }
    return phase1 + sm + phase2;
}

std::int64_t Simulator::attention_hemlet(std::int64_t start, int block) {
    const std::int64_t L = g_.spec.seq_len;
    const std::int64_t dh = g_.spec.head_dim();
    const int ab = g_.spec.act_bits;

    workload::DynamicOp qkt{block, 0, workload::DynKind::QKT};
    workload::DynamicOp pv{block, 0, workload::DynKind::PV};
    const DcimOpCost qkt_cost = dcim_op_latency(qkt, g_.spec, cfg_.dcim, cfg_.block_tokens);
    const DcimOpCost pv_cost = dcim_op_latency(pv, g_.spec, cfg_.dcim, cfg_.block_tokens);
    const auto sm_counts =
        numerics::softmax_op_counts(g_.spec.seq_len, std::min(cfg_.block_tokens, g_.spec.seq_len),
                                    static_cast<int>(dh));

    std::int64_t attn = 0;
    for (int dc = 0; dc < cfg_.n_dcim_chiplets; ++dc) {
        if (heads_on_[dc] == 0) continue;
        const std::string resource = "dcim" + std::to_string(dc);
        const std::int64_t qkv_bytes = heads_on_[dc] * 3 * L * dh * ab / 8;
        if (qkv_bytes > cfg_.dcim.chiplet_buffer_bytes)
            throw CapacityError("dcim.chiplet_buffer_bytes: chiplet " + std::to_string(dc) +
                                " cannot hold Q/K/V of " + std::to_string(heads_on_[dc]) +
                                " heads (" + std::to_string(qkv_bytes) + " bytes)");
        // Q/K/V arrived straight from the ACIM chiplets during the
        // projection step; charge the buffer landing and readback here.
        std::int64_t t = cbuf(qkv_bytes, 2, resource, start);

        const int waves = dcim_waves(heads_on_[dc]);
        const std::int64_t compute =
            static_cast<std::int64_t>(waves) * (qkt_cost.latency_ps + pv_cost.latency_ps);
        busy_.dcim_write_ps +=
            static_cast<std::int64_t>(waves) * (qkt_cost.write_ps + pv_cost.write_ps);
        busy_.sa_ps += compute - static_cast<std::int64_t>(waves) *
                                     (qkt_cost.write_ps + pv_cost.write_ps);
        busy_.dcim_write_pj += (qkt_cost.write_pj + pv_cost.write_pj) * heads_on_[dc];
        busy_.sa_pj += (qkt_cost.energy_pj - qkt_cost.write_pj + pv_cost.energy_pj -
                        pv_cost.write_pj) * heads_on_[dc];
        dynamic_macs_ += (qkt_cost.macs + pv_cost.macs) * heads_on_[dc];
        t += compute;
        add_event(start, EventKind::Compute, resource, compute,
                  (qkt_cost.energy_pj + pv_cost.energy_pj) * heads_on_[dc], "attention");

        // Local softmax per block plus the global normalization pass, all on
        // the DCIM SIMD; P' never leaves the chiplet.
        const std::int64_t sm_ops = heads_on_[dc] * L * sm_counts.total_per_row();
        t += simd_block(start, sm_ops, resource, "softmax-local", false);

        const std::int64_t s_bytes = heads_on_[dc] * L * dh * ab / 8;
        t += cbuf(s_bytes, 2, resource, start);
        t += do_transfer(start, dcim_coord(dc), mesh_.idp, s_bytes, "S->IDP");
        attn = std::max(attn, t);
    }
    return attn;
}

SimReport Simulator::simulate() {
    const std::int64_t L = g_.spec.seq_len;
    const std::int64_t d = g_.spec.embed_dim;
    const std::int64_t D = g_.spec.ffn_dim;
    const int k = g_.spec.ffn_splits();

    for (int b = 0; b < g_.spec.blocks; ++b) {
        using workload::LayerKind;
        StaticStep qkv;
        qkv.layers = {g_.static_index(b, LayerKind::WQ), g_.static_index(b, LayerKind::WK),
                      g_.static_index(b, LayerKind::WV)};
        qkv.in_tag = "X->ACIM";
        qkv.out_to_dcim = mode_ == DataflowMode::Hemlet;
        qkv.out_tag = qkv.out_to_dcim ? "QKV->DCIM" : "QKV->IDP";
        now_ += run_static_step(qkv, now_);

        now_ += mode_ == DataflowMode::Hemlet ? attention_hemlet(now_, b)
                                              : attention_native(now_, b);

        StaticStep wo;
        wo.layers = {g_.static_index(b, LayerKind::WO)};
        wo.in_tag = "S->ACIM";
        wo.out_tag = "A->IDP";
        now_ += run_static_step(wo, now_);

        now_ += simd_block(now_, L * d, "idp", "residual", true);
        now_ += simd_block(now_, L * d, "idp", "layernorm", true);

        StaticStep w1;
        w1.serial_chain = true;
        for (int i = 0; i < k; ++i) w1.layers.push_back(g_.static_index(b, LayerKind::W1Sub, i));
        w1.in_tag = "Z->ACIM";
        w1.out_tag = "H1->IDP";
        now_ += run_static_step(w1, now_);

        now_ += simd_block(now_, L * D, "idp", "gelu", true);

        StaticStep w2;
        w2.serial_chain = true;
        w2.slice_input = true;
        for (int i = 0; i < k; ++i) w2.layers.push_back(g_.static_index(b, LayerKind::W2Sub, i));
        w2.in_tag = "H1'->ACIM";
        w2.out_tag = "H2->IDP";
        now_ += run_static_step(w2, now_);

        now_ += simd_block(now_, static_cast<std::int64_t>(k - 1) * L * d, "idp", "ffn-psum", true);
        now_ += simd_block(now_, L * d, "idp", "residual", true);
        now_ += simd_block(now_, L * d, "idp", "layernorm", true);
    }

    SimReport report;
    report.model = g_.spec.name;
    report.config_label = cfg_.label;
    report.bw_gbps = cfg_.nop.bw_gbps;
    report.mapping = mapping_;
    report.mode = mode_;
    report.latency_ps = now_;
    report.busy = busy_;
    report.energy_pj = busy_.total_pj();
    report.static_macs = static_macs_;
    report.dynamic_macs = dynamic_macs_;
    report.simd_ops = simd_ops_;
    report.bytes_by_tag = bytes_by_tag_;
    report.events = std::move(events_);
    for (int l = 0; l < static_cast<int>(g_.statics.size()); ++l)
        report.per_layer_ps.emplace_back(g_.statics[l].label(), layer_time_[l]);

    const std::int64_t adcs_total = static_cast<std::int64_t>(cfg_.n_acim_chiplets) *
                                    cfg_.acim.subarrays_per_chiplet() *
                                    (cfg_.acim.sa_cols / cfg_.acim.group_size);
    if (acim_active_ps_ > 0 && adcs_total > 0) {
        report.adc_utilization = static_cast<double>(conversions_) * t_adc_ /
                                 (static_cast<double>(adcs_total) * acim_active_ps_);
        report.adc_utilization = std::clamp(report.adc_utilization, 0.0, 1.0);
    }
    return report;
}

}  // namespace

SimReport run_with_plan(const workload::LayerGraph& graph, const hw::SystemConfig& cfg,
                        const glp::MappingPlan& plan, MappingKind mapping, DataflowMode mode,
                        const RunOptions& opts) {
    Simulator sim(graph, cfg, plan, mapping, mode, opts);
    return sim.simulate();
}

SimReport run(const workload::ViTModelSpec& spec, const hw::SystemConfig& cfg, MappingKind mapping,
              DataflowMode mode, const RunOptions& opts) {
    auto diags = hw::validate(cfg, spec);
    if (!diags.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& m : diags) msg += "\n  " + m;
        throw ConfigError(msg);
    }
    const auto graph = workload::expand_model(spec);
    const auto sets = mapping == MappingKind::Glp
                          ? glp::build_layersets(graph, cfg.acim.group_size)
                          : glp::layerwise_plan(graph);
    const auto plan = glp::place(sets, graph, cfg);
    return run_with_plan(graph, cfg, plan, mapping, mode, opts);
}

CategorySpeedup breakdown_speedup(const SimReport& baseline, const SimReport& improved) {
    auto ratio = [](std::int64_t a, std::int64_t b) {
        if (b == 0) return a == 0 ? 1.0 : std::numeric_limits<double>::infinity();
        return static_cast<double>(a) / static_cast<double>(b);
    };
    CategorySpeedup s;
    s.sa = ratio(baseline.busy.sa_ps, improved.busy.sa_ps);
    s.buffer = ratio(baseline.busy.buffer_ps, improved.busy.buffer_ps);
    s.ic = ratio(baseline.busy.ic_ps, improved.busy.ic_ps);
    return s;
}

std::string report_to_json(const SimReport& r) {
    nlohmann::ordered_json j;
    j["model"] = r.model;
    j["config"] = r.config_label;
    j["bw_gbps"] = r.bw_gbps;
    j["mapping"] = mapping_name(r.mapping);
    j["mode"] = mode_name(r.mode);
    j["latency_ps"] = r.latency_ps;
    j["latency_ns"] = r.latency_ns();
    j["energy_pj"] = r.energy_pj;
    j["busy"]["sa_ps"] = r.busy.sa_ps;
    j["busy"]["buffer_ps"] = r.busy.buffer_ps;
    j["busy"]["ic_ps"] = r.busy.ic_ps;
    j["busy"]["simd_ps"] = r.busy.simd_ps;
    j["busy"]["dcim_write_ps"] = r.busy.dcim_write_ps;
    j["energy"]["sa_pj"] = r.busy.sa_pj;
    j["energy"]["buffer_pj"] = r.busy.buffer_pj;
    j["energy"]["ic_pj"] = r.busy.ic_pj;
    j["energy"]["simd_pj"] = r.busy.simd_pj;
    j["energy"]["dcim_write_pj"] = r.busy.dcim_write_pj;
    j["static_macs"] = r.static_macs;
    j["dynamic_macs"] = r.dynamic_macs;
    j["simd_ops"] = r.simd_ops;
    j["total_ops"] = r.total_ops();
    // ops / ps == TOPS; ops / pJ == TOPS/W.
    j["tops"] = static_cast<double>(r.total_ops()) / static_cast<double>(r.latency_ps);
    j["tops_per_watt"] = static_cast<double>(r.total_ops()) / r.energy_pj;
    j["adc_utilization"] = r.adc_utilization;
    j["bytes_by_tag"] = r.bytes_by_tag;
    j["per_layer_ps"] = nlohmann::ordered_json::array();
    for (const auto& [label, ps] : r.per_layer_ps)
        j["per_layer_ps"].push_back({{"layer", label}, {"ps", ps}});
    return j.dump(2);
}

void write_event_log(const SimReport& r, std::ostream& os) {
    for (const auto& e : r.events) {
        nlohmann::ordered_json j;
        j["time"] = e.time_ps;
        switch (e.kind) {
            case EventKind::Compute: j["kind"] = "compute"; break;
            case EventKind::Transfer: j["kind"] = "transfer"; break;
            case EventKind::Buffer: j["kind"] = "buffer"; break;
            case EventKind::Simd: j["kind"] = "simd"; break;
        }
        j["resource"] = e.resource;
        j["duration"] = e.duration_ps;
        j["energy"] = e.energy_pj;
        j["tag"] = e.tag;
        os << j.dump() << "\n";
    }
}

}  // namespace hemlet::engine
