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

#include "hemlet/hwconfig.hpp"

#include <algorithm>

#include "hemlet/errors.hpp"

namespace hemlet::hw {

int bit_slices(const AcimConfig& acim, int weight_bits) {
    if (acim.cell_bits <= 0) throw ConfigError("acim.cell_bits: must be > 0");
    return (weight_bits + acim.cell_bits - 1) / acim.cell_bits;
}

std::int64_t acim_capacity(const AcimConfig& acim, int weight_bits) {
    const std::int64_t cells = acim.subarrays_per_chiplet() *
                               static_cast<std::int64_t>(acim.sa_rows) * acim.sa_cols;
    return cells / bit_slices(acim, weight_bits);
}

int required_acim_chiplets(const workload::ViTModelSpec& spec, const AcimConfig& acim) {
    const std::int64_t cap = acim_capacity(acim, spec.weight_bits);
    if (cap <= 0) throw ConfigError("acim: zero weight capacity per chiplet");
    const std::int64_t weights = workload::static_weight_count(spec);
    return static_cast<int>((weights + cap - 1) / cap);
}

int heads_per_dcim_chiplet(const workload::ViTModelSpec& spec, const SystemConfig& cfg) {
    if (cfg.n_dcim_chiplets <= 0) return spec.heads;
    return (spec.heads + cfg.n_dcim_chiplets - 1) / cfg.n_dcim_chiplets;
}

std::int64_t head_qkv_bytes(const workload::ViTModelSpec& spec) {
    return 3LL * spec.seq_len * spec.head_dim() * spec.act_bits / 8;
}

std::vector<std::string> validate(const SystemConfig& cfg, const workload::ViTModelSpec& spec) {
    std::vector<std::string> diags = workload::check_spec(spec);

    const auto& a = cfg.acim;
    if (a.pe_per_chiplet <= 0) diags.push_back("acim.pe_per_chiplet: must be > 0");
    if (a.sa_per_pe <= 0) diags.push_back("acim.sa_per_pe: must be > 0");
    if (a.sa_rows <= 0) diags.push_back("acim.sa_rows: must be > 0");
    if (a.sa_cols <= 0) diags.push_back("acim.sa_cols: must be > 0");
    if (a.group_size <= 0) diags.push_back("acim.group_size: must be > 0");
    if (a.cell_bits <= 0) diags.push_back("acim.cell_bits: must be > 0");
    if (a.t_adc_ns <= 0) diags.push_back("acim.t_adc_ns: must be > 0");
    if (a.e_adc_pj <= 0) diags.push_back("acim.e_adc_pj: must be > 0");
    if (a.e_mac_row_pj <= 0) diags.push_back("acim.e_mac_row_pj: must be > 0");
    if (a.t_row_ns <= 0) diags.push_back("acim.t_row_ns: must be > 0");
    if (a.sa_cols > 0 && a.group_size > 0 && a.sa_cols % a.group_size != 0)
        diags.push_back("acim.sa_cols: must be divisible by group_size");
    if (a.sa_cols > 0 && a.group_size > 0 && a.cell_bits > 0 && spec.weight_bits > 0) {
        const int r = bit_slices(a, spec.weight_bits);
        if (a.sa_cols % (static_cast<std::int64_t>(a.group_size) * r) != 0)
            diags.push_back("acim.sa_cols: must be divisible by group_size * bit-slice count (" +
                            std::to_string(a.group_size) + " * " + std::to_string(r) + ")");
    }

    const auto& dc = cfg.dcim;
    if (dc.pe_per_chiplet <= 0) diags.push_back("dcim.pe_per_chiplet: must be > 0");
    if (dc.sa_per_pe <= 0) diags.push_back("dcim.sa_per_pe: must be > 0");
    if (dc.sa_rows <= 0) diags.push_back("dcim.sa_rows: must be > 0");
    if (dc.sa_cols <= 0) diags.push_back("dcim.sa_cols: must be > 0");
    if (dc.t_cycle_ns <= 0) diags.push_back("dcim.t_cycle_ns: must be > 0");
    if (dc.e_mac_pj <= 0) diags.push_back("dcim.e_mac_pj: must be > 0");
    if (dc.t_write_ns <= 0) diags.push_back("dcim.t_write_ns: must be > 0");
    if (dc.e_write_pj <= 0) diags.push_back("dcim.e_write_pj: must be > 0");
    if (dc.chiplet_buffer_bytes <= 0) diags.push_back("dcim.chiplet_buffer_bytes: must be > 0");

    const auto& idp = cfg.idp;
    if (idp.sram_bank_count <= 0) diags.push_back("idp.sram_bank_count: must be > 0");
    if (idp.bank_bytes <= 0) diags.push_back("idp.bank_bytes: must be > 0");
    if (idp.simd_width <= 0) diags.push_back("idp.simd_width: must be > 0");
    if (idp.t_simd_ns <= 0) diags.push_back("idp.t_simd_ns: must be > 0");
    if (idp.e_simd_pj <= 0) diags.push_back("idp.e_simd_pj: must be > 0");
    if (idp.e_buf_r_pj <= 0) diags.push_back("idp.e_buf_r_pj: must be > 0");
    if (idp.e_buf_w_pj <= 0) diags.push_back("idp.e_buf_w_pj: must be > 0");

    const auto& np = cfg.nop;
    if (np.mesh_x <= 0) diags.push_back("nop.mesh_x: must be > 0");
    if (np.mesh_y <= 0) diags.push_back("nop.mesh_y: must be > 0");
    if (np.bw_gbps <= 0) diags.push_back("nop.bw_gbps: must be > 0");
    if (np.t_hop_ns < 0) diags.push_back("nop.t_hop_ns: must be >= 0");
    if (np.e_bit_pj < 0) diags.push_back("nop.e_bit_pj: must be >= 0");

    if (cfg.n_acim_chiplets <= 0) diags.push_back("system.n_acim_chiplets: must be > 0");
    if (cfg.n_dcim_chiplets <= 0) diags.push_back("system.n_dcim_chiplets: must be > 0");
    if (cfg.n_idp_chiplets <= 0) diags.push_back("system.n_idp_chiplets: must be > 0");
    if (cfg.block_tokens <= 0) diags.push_back("system.block_tokens: must be > 0");
    if (cfg.chiplet_buf.t_ns < 0 || cfg.chiplet_buf.e_pj < 0)
        diags.push_back("system.chiplet_buf: costs must be >= 0");
    if (cfg.local_buf.t_ns < 0 || cfg.local_buf.e_pj < 0)
        diags.push_back("system.local_buf: costs must be >= 0");

    const std::int64_t total_chiplets = static_cast<std::int64_t>(cfg.n_acim_chiplets) +
                                        cfg.n_dcim_chiplets + cfg.n_idp_chiplets;
    if (np.mesh_x > 0 && np.mesh_y > 0 &&
        static_cast<std::int64_t>(np.mesh_x) * np.mesh_y < total_chiplets)
        diags.push_back("nop.mesh_x: mesh " + std::to_string(np.mesh_x) + "x" +
                        std::to_string(np.mesh_y) + " smaller than chiplet count " +
                        std::to_string(total_chiplets));

    // Can the ACIM chiplets hold all static weights at all? The placement
    // re-checks with fragmentation included.
    if (workload::check_spec(spec).empty() && a.pe_per_chiplet > 0 && a.sa_per_pe > 0 &&
        a.sa_rows > 0 && a.sa_cols > 0 && a.cell_bits > 0) {
        const int need = required_acim_chiplets(spec, a);
        if (cfg.n_acim_chiplets < need)
            diags.push_back("system.n_acim_chiplets: " + std::to_string(cfg.n_acim_chiplets) +
                            " chiplets cannot store " +
                            std::to_string(workload::static_weight_count(spec)) + " weights (need >= " +
                            std::to_string(need) + ")");
    }

    // DCIM buffer must hold the whole Q/K/V of the heads a chiplet serves.
    if (workload::check_spec(spec).empty() && cfg.n_dcim_chiplets > 0) {
        const std::int64_t need =
            static_cast<std::int64_t>(heads_per_dcim_chiplet(spec, cfg)) * head_qkv_bytes(spec);
        if (dc.chiplet_buffer_bytes < need)
            diags.push_back("dcim.chiplet_buffer_bytes: " + std::to_string(dc.chiplet_buffer_bytes) +
                            " < " + std::to_string(need) + " needed for " +
                            std::to_string(heads_per_dcim_chiplet(spec, cfg)) + " heads");
    }
    return diags;
}

MeshLayout assign_mesh(const SystemConfig& cfg) {
    const int mx = cfg.nop.mesh_x;
    const int my = cfg.nop.mesh_y;
    const std::int64_t cells = static_cast<std::int64_t>(mx) * my;
    const std::int64_t total = static_cast<std::int64_t>(cfg.n_acim_chiplets) +
                               cfg.n_dcim_chiplets + cfg.n_idp_chiplets;
    if (cells < total) throw ConfigError("nop.mesh: too small for chiplet count");

    MeshLayout layout;
    std::vector<bool> used(static_cast<size_t>(cells), false);
    const nop::Coord center{mx / 2, my / 2};
    auto take = [&](nop::Coord c) {
        used[static_cast<size_t>(c.y) * mx + c.x] = true;
        return c;
    };

    layout.idp = take(center);

    // DCIM chiplets nearest to the IDP, distance then row-major for ties.
    std::vector<nop::Coord> by_distance;
    for (int y = 0; y < my; ++y)
        for (int x = 0; x < mx; ++x) by_distance.push_back({x, y});
    std::stable_sort(by_distance.begin(), by_distance.end(),
                     [&](nop::Coord a, nop::Coord b) {
                         return nop::route_hops(a, center) < nop::route_hops(b, center);
                     });
    for (const auto& c : by_distance) {
        if (static_cast<int>(layout.dcim.size()) == cfg.n_dcim_chiplets) break;
        if (!used[static_cast<size_t>(c.y) * mx + c.x]) layout.dcim.push_back(take(c));
    }

    // ACIM chiplets fill the remaining cells row-major.
    for (int y = 0; y < my && static_cast<int>(layout.acim.size()) < cfg.n_acim_chiplets; ++y)
        for (int x = 0; x < mx && static_cast<int>(layout.acim.size()) < cfg.n_acim_chiplets; ++x)
            if (!used[static_cast<size_t>(y) * mx + x]) layout.acim.push_back(take({x, y}));

    return layout;
}

}  // namespace hemlet::hw
