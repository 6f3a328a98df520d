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

#include "hemlet/sweep.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "hemlet/glp_mapper.hpp"

namespace hemlet::sweep {

std::vector<GridPoint> ablation_grid(bool all_strategies) {
    const std::vector<std::pair<int, int>> sizes = {{18, 9}, {32, 16}, {50, 25}};
    const std::vector<double> bandwidths = {8.0, 16.0, 32.0};
    std::vector<std::pair<engine::MappingKind, engine::DataflowMode>> strategies;
    if (all_strategies) {
        for (auto mapping : {engine::MappingKind::LayerWise, engine::MappingKind::Glp})
            for (auto mode : {engine::DataflowMode::Native, engine::DataflowMode::Pipelined,
                              engine::DataflowMode::Hemlet})
                strategies.emplace_back(mapping, mode);
    } else {
        strategies = {{engine::MappingKind::LayerWise, engine::DataflowMode::Native},
                      {engine::MappingKind::Glp, engine::DataflowMode::Native},
                      {engine::MappingKind::Glp, engine::DataflowMode::Hemlet}};
    }
    std::vector<GridPoint> grid;
    for (const auto& [a, d] : sizes)
        for (double bw : bandwidths)
            for (const auto& model : workload::vit_presets())
                for (const auto& [mapping, mode] : strategies)
                    grid.push_back({a, d, bw, model, mapping, mode});
    return grid;
}

io::ParsedConfig derive_config(const io::ParsedConfig& base, const GridPoint& g) {
    io::ParsedConfig cfg = base;
    cfg.model = g.model;
    cfg.system.acim.pe_per_chiplet = g.acim_pe;
    cfg.system.dcim.pe_per_chiplet = g.dcim_pe;
    cfg.system.nop.bw_gbps = g.bw;
    cfg.system.label = "A" + std::to_string(g.acim_pe) + "D" + std::to_string(g.dcim_pe);

    const auto& spec = cfg.model;
    const auto& dc = cfg.system.dcim;
    const std::int64_t L = spec.seq_len;
    const std::int64_t dh = spec.head_dim();
    const std::int64_t bl = std::min<std::int64_t>(cfg.system.block_tokens, L);
    auto cdiv = [](std::int64_t a, std::int64_t b) { return (a + b - 1) / b; };
    const std::int64_t head_sas =
        cdiv(dh, dc.sa_rows) * cdiv(bl, dc.sa_cols) + cdiv(bl, dc.sa_rows) * cdiv(dh, dc.sa_cols);
    const std::int64_t chiplet_sas = static_cast<std::int64_t>(dc.pe_per_chiplet) * dc.sa_per_pe;
    int n_dcim = static_cast<int>(cdiv(spec.heads * head_sas, chiplet_sas));
    const std::int64_t hb = hw::head_qkv_bytes(spec);
    n_dcim = std::max(1, n_dcim);
    while (n_dcim < spec.heads &&
           cdiv(spec.heads, n_dcim) * hb > dc.chiplet_buffer_bytes)
        ++n_dcim;
    cfg.system.n_dcim_chiplets = n_dcim;

    cfg.system.n_acim_chiplets = hw::required_acim_chiplets(spec, cfg.system.acim);
    for (int attempt = 0; attempt < 8; ++attempt) {
        const int total =
            cfg.system.n_acim_chiplets + cfg.system.n_dcim_chiplets + cfg.system.n_idp_chiplets;
        const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(total))));
        cfg.system.nop.mesh_x = side;
        cfg.system.nop.mesh_y = side;
        try {
            const auto graph = workload::expand_model(spec);
            glp::place(glp::layerwise_plan(graph), graph, cfg.system);
            glp::place(glp::build_layersets(graph, cfg.system.acim.group_size), graph, cfg.system);
            return cfg;
        } catch (const CapacityError&) {
            ++cfg.system.n_acim_chiplets;  // greedy packing fragmented capacity
        }
    }
    throw CapacityError("sweep: cannot size ACIM chiplet count for " + spec.name + " on " +
                        cfg.system.label);
}

std::vector<metrics::SweepPoint> run_grid(const io::ParsedConfig& base,
                                          const std::vector<GridPoint>& grid, int jobs) {
    std::vector<metrics::SweepPoint> points(grid.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_msg;
    std::mutex error_mu;

    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= grid.size() || failed.load()) break;
            try {
                const auto cfg = derive_config(base, grid[i]);
                const auto report =
                    engine::run(cfg.model, cfg.system, grid[i].mapping, grid[i].mode, {});
                metrics::SweepPoint p;
                p.config_label = cfg.system.label;
                p.bw_gbps = cfg.system.nop.bw_gbps;
                p.model = cfg.model.name;
                p.mapping = grid[i].mapping;
                p.mode = grid[i].mode;
                p.report = report;
                points[i] = std::move(p);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(error_mu);
                if (!failed.exchange(true)) error_msg = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) throw ConfigError("sweep failed: " + error_msg);
    return points;
}

}  // namespace hemlet::sweep
