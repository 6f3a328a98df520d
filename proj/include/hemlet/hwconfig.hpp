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

#include <cstdint>
#include <string>
#include <vector>

#include "hemlet/nop.hpp"
#include "hemlet/workload.hpp"

namespace hemlet::hw {

// All timing/energy constants are configuration inputs. The shipped
// reference.toml carries plausible defaults that are *not* silicon
// -calibrated; nothing here hardcodes an absolute cost.

struct AcimConfig {
    int pe_per_chiplet = 32;
    int sa_per_pe = 60;
    int sa_rows = 128;
    int sa_cols = 128;
    int group_size = 8;     // M: columns time-multiplexed onto one ADC
    int cell_bits = 2;
    int adc_bits = 9;
    double t_adc_ns = 2.0;  // one ADC conversion
    double e_adc_pj = 2.0;
    double e_mac_row_pj = 0.02;  // analog MAC energy per activated cell
    double t_row_ns = 1.0;       // wordline activation per input-bit cycle

    std::int64_t subarrays_per_chiplet() const {
        return static_cast<std::int64_t>(pe_per_chiplet) * sa_per_pe;
    }
};

struct DcimConfig {
    int pe_per_chiplet = 16;
    int sa_per_pe = 4;
    int sa_rows = 64;
    int sa_cols = 64;
    double t_cycle_ns = 1.0;  // one input-bit MAC cycle
    double e_mac_pj = 0.05;   // per MAC per input bit
    double t_write_ns = 2.0;  // per weight row written
    double e_write_pj = 4.0;
    std::int64_t chiplet_buffer_bytes = 524288;  // must hold Q/K/V of the assigned heads
};

struct IdpConfig {
    int sram_bank_count = 16;
    std::int64_t bank_bytes = 131072;
    // SIMD constants below are shared by every chiplet's vector unit; the
    // configuration exposes a single set.
    int simd_width = 128;
    double t_simd_ns = 1.0;  // per lane-op
    double e_simd_pj = 0.1;
    double e_buf_r_pj = 0.3;  // IDP SRAM, per byte (energy only)
    double e_buf_w_pj = 0.3;
};

struct NopConfig {
    int mesh_x = 4;
    int mesh_y = 4;
    double bw_gbps = 32.0;  // 1 GB/s == 1 byte/ns
    double t_hop_ns = 5.0;
    double e_bit_pj = 1.0;
    bool link_serialization = false;  // stretch mode: one outstanding transfer per link
};

/// Per-byte (time, energy) unit cost of one buffer hierarchy level.
struct BufferCost {
    double t_ns = 0.01;
    double e_pj = 0.5;
};

struct SystemConfig {
    AcimConfig acim;
    DcimConfig dcim;
    IdpConfig idp;
    NopConfig nop;
    int n_acim_chiplets = 1;
    int n_dcim_chiplets = 1;
    int n_idp_chiplets = 1;
    BufferCost chiplet_buf;  // ACIM/DCIM chiplet-level buffer
    BufferCost local_buf;    // PE-local buffer next to the subarrays
    int block_tokens = 32;   // B_L, pipeline/attention block size
    double clock_ghz = 0.5;  // reported metadata; timing uses absolute ns costs
    std::string label = "custom";
};

/// Weight elements one ACIM chiplet can hold:
/// pe * sa * rows * cols / ceil(weight_bits / cell_bits).
std::int64_t acim_capacity(const AcimConfig& acim, int weight_bits);

/// ceil(total static weights / capacity). Placement can raise this when
/// group packing fragments capacity; re-checked after place().
int required_acim_chiplets(const workload::ViTModelSpec& spec, const AcimConfig& acim);

/// Bit-slice replication factor r = ceil(weight_bits / cell_bits).
int bit_slices(const AcimConfig& acim, int weight_bits);

/// Heads each DCIM chiplet serves under the round-robin head assignment.
int heads_per_dcim_chiplet(const workload::ViTModelSpec& spec, const SystemConfig& cfg);

/// Q/K/V bytes one head needs resident in a DCIM chiplet buffer.
std::int64_t head_qkv_bytes(const workload::ViTModelSpec& spec);

/// Every config/spec invariant, reported as "field.path: message".
/// Empty result means valid.
std::vector<std::string> validate(const SystemConfig& cfg, const workload::ViTModelSpec& spec);

/// Mesh floorplan: IDP at grid center, DCIM chiplets on the nearest cells,
/// ACIM chiplets row-major over whatever remains.
struct MeshLayout {
    nop::Coord idp;
    std::vector<nop::Coord> acim;
    std::vector<nop::Coord> dcim;
};

MeshLayout assign_mesh(const SystemConfig& cfg);

}  // namespace hemlet::hw
