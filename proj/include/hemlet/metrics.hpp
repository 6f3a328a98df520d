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

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hemlet/engine.hpp"

namespace hemlet::metrics {

struct SweepPoint {
    std::string config_label;  // must match report.config_label
    double bw_gbps = 0.0;
    std::string model;
    engine::MappingKind mapping = engine::MappingKind::LayerWise;
    engine::DataflowMode mode = engine::DataflowMode::Native;
    engine::SimReport report;
};

/// Throughput in TOPS: (2 * MACs + vector ops) / latency. With latency in
/// integer picoseconds this is exactly ops / ps.
double tops(const engine::SimReport& report);

/// TOPS/W == total ops / energy in pJ.
double tops_per_watt(const engine::SimReport& report);

struct NormalizedPoint {
    const SweepPoint* point = nullptr;
    double latency_ratio = 1.0;  // vs the group's baseline point
    double energy_ratio = 1.0;
};

/// Groups points by (model, config, bandwidth); within each group every
/// point is divided by the unique baseline the selector identifies.
std::vector<NormalizedPoint> normalize(const std::vector<SweepPoint>& points,
                                       const std::function<bool(const SweepPoint&)>& is_baseline);

/// Fixed CSV schema:
/// model,config,bw_GBps,mapping,mode,latency_ns,energy_pJ,tops,tops_per_w,
/// sa_ns,buffer_ns,ic_ns,adc_util
std::string csv_header();
std::string csv_row(const SweepPoint& p);
void write_csv(std::ostream& os, const std::vector<SweepPoint>& points);

/// gnuplot-friendly .dat normalized table (one row per grid point).
void write_normalized_dat(std::ostream& os, const std::vector<NormalizedPoint>& rows);

/// Published A32D16 / 32 GB/s / ViT-L design figures, printed next to our
/// uncalibrated numbers for side-by-side comparison (no tolerance applies).
inline constexpr double kAnchorTops = 9.24;
inline constexpr double kAnchorTopsPerWatt = 4.98;

}  // namespace hemlet::metrics
