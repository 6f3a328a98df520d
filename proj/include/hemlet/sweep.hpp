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

#include "hemlet/config_io.hpp"
#include "hemlet/metrics.hpp"

namespace hemlet::sweep {

struct GridPoint {
    int acim_pe = 0;
    int dcim_pe = 0;
    double bw = 0.0;
    workload::ViTModelSpec model;
    engine::MappingKind mapping = engine::MappingKind::LayerWise;
    engine::DataflowMode mode = engine::DataflowMode::Native;
};

/// The ablation grid: {A18D9, A32D16, A50D25} x {8, 16, 32 GB/s} x the
/// three ViT presets x three execution strategies (baseline, baseline+GLP,
/// hemlet). all_strategies additionally expands every mapping x mode pair.
std::vector<GridPoint> ablation_grid(bool all_strategies = false);

/// Sizes chiplet counts and the mesh for one grid point on top of the base
/// config's unit costs: ACIM count from capacity (bumped when greedy
/// packing fragments), DCIM count from PE and Q/K/V buffering demand,
/// smallest square mesh that fits.
io::ParsedConfig derive_config(const io::ParsedConfig& base, const GridPoint& point);

/// Runs every grid point (worker pool of `jobs` threads); results are in
/// grid order regardless of scheduling.
std::vector<metrics::SweepPoint> run_grid(const io::ParsedConfig& base,
                                          const std::vector<GridPoint>& grid, int jobs);

}  // namespace hemlet::sweep
