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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hemlet/glp_mapper.hpp"
#include "hemlet/hwconfig.hpp"
#include "hemlet/workload.hpp"

namespace hemlet::engine {

enum class DataflowMode { Native, Pipelined, Hemlet };
enum class MappingKind { LayerWise, Glp };

const char* mode_name(DataflowMode m);
const char* mapping_name(MappingKind m);
DataflowMode parse_mode(const std::string& s);
MappingKind parse_mapping(const std::string& s);

enum class EventKind { Compute, Transfer, Buffer, Simd };

/// Timestamps are integer picoseconds so determinism checks can compare
/// bit-identical reports.
struct SimEvent {
    std::int64_t time_ps = 0;
    EventKind kind = EventKind::Compute;
    std::string resource;
    std::int64_t duration_ps = 0;
    double energy_pj = 0.0;
    std::string tag;
};

/// Busy time / energy per resource class. "sa" covers in-array compute of
/// both CIM types; "ic" is NoP transfer cost; "buffer" is chiplet +
/// PE-local buffer traffic; "dcim_write" is the weight (re)write phases.
struct Breakdown {
    std::int64_t sa_ps = 0;
    std::int64_t buffer_ps = 0;
    std::int64_t ic_ps = 0;
    std::int64_t simd_ps = 0;
    std::int64_t dcim_write_ps = 0;
    double sa_pj = 0.0;
    double buffer_pj = 0.0;
    double ic_pj = 0.0;
    double simd_pj = 0.0;
    double dcim_write_pj = 0.0;

    std::int64_t total_ps() const { return sa_ps + buffer_ps + ic_ps + simd_ps + dcim_write_ps; }
    double total_pj() const { return sa_pj + buffer_pj + ic_pj + simd_pj + dcim_write_pj; }
};

struct SimReport {
    std::string model;
    std::string config_label;
    double bw_gbps = 0.0;
    MappingKind mapping = MappingKind::LayerWise;
    DataflowMode mode = DataflowMode::Native;

    std::int64_t latency_ps = 0;
    double energy_pj = 0.0;  // always equals busy.total_pj()
    Breakdown busy;
    std::int64_t static_macs = 0;
    std::int64_t dynamic_macs = 0;
    std::int64_t simd_ops = 0;  // processed elements in non-VMM operators
    double adc_utilization = 0.0;
    std::vector<std::pair<std::string, std::int64_t>> per_layer_ps;
    std::map<std::string, std::int64_t> bytes_by_tag;
    std::vector<SimEvent> events;  // populated only when requested

    std::int64_t total_ops() const { return 2 * (static_macs + dynamic_macs) + simd_ops; }
    double latency_ns() const { return static_cast<double>(latency_ps) / 1000.0; }
};

struct RunOptions {
    bool peak = false;            // inputs assumed preloaded in chiplet buffers
    bool collect_events = false;
};

/// ACIM static-VMM cost under a mapping: subarrays work in parallel, the
/// shared-ADC multiplex serializes a layer's columns within each group.
struct AcimLayerCost {
    std::int64_t latency_ps = 0;
    double energy_pj = 0.0;
    std::int64_t conversions = 0;       // physical ADC firings
    std::int64_t cell_activations = 0;  // physical cells * bit cycles * tokens
    int degree = 0;                     // max serialization degree across subarrays
};

AcimLayerCost acim_layer_latency(int layer, const glp::MappingPlan& plan,
                                 const workload::LayerGraph& graph, const hw::AcimConfig& acim,
                                 int tokens);

/// DCIM dynamic-VMM cost including the per-block weight-write phases:
/// Q blocks stay stationary for QK^T (K streamed), V for P''V (P'' streamed).
struct DcimOpCost {
    std::int64_t latency_ps = 0;
    std::int64_t write_ps = 0;    // included in latency_ps
    double energy_pj = 0.0;
    double write_pj = 0.0;
    std::int64_t write_rows = 0;
    std::int64_t macs = 0;
};

DcimOpCost dcim_op_latency(const workload::DynamicOp& op, const workload::ViTModelSpec& spec,
                           const hw::DcimConfig& dcim, int block_tokens);

/// Builds the layer-set plan and placement for the mapping kind, then
/// simulates one inference. Throws ConfigError / CapacityError on invalid
/// inputs.
SimReport run(const workload::ViTModelSpec& spec, const hw::SystemConfig& cfg, MappingKind mapping,
              DataflowMode mode, const RunOptions& opts = {});

/// Same, with a prebuilt graph and placement (reused across modes).
SimReport run_with_plan(const workload::LayerGraph& graph, const hw::SystemConfig& cfg,
                        const glp::MappingPlan& plan, MappingKind mapping, DataflowMode mode,
                        const RunOptions& opts = {});

struct CategorySpeedup {
    double sa = 1.0;
    double buffer = 1.0;
    double ic = 1.0;
};

/// Category-wise ratio of accumulated busy time, baseline over improved.
CategorySpeedup breakdown_speedup(const SimReport& baseline, const SimReport& improved);

std::string report_to_json(const SimReport& report);

/// Line-delimited JSON records {time, kind, resource, duration, energy, tag}.
void write_event_log(const SimReport& report, std::ostream& os);

}  // namespace hemlet::engine
