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

#include <doctest.h>

#include <cmath>
#include <map>

#include "hemlet/config_io.hpp"
#include "hemlet/engine.hpp"
#include "hemlet/sweep.hpp"

using namespace hemlet;
using engine::DataflowMode;
using engine::MappingKind;

namespace {

io::ParsedConfig reference() { return io::parse_config_file(HEMLET_REFERENCE_CONFIG); }

/// Slot-by-slot discrete oracle: enumerate every placed column, replay the
/// per-group ADC multiplexing subarray by subarray, and take the parallel
/// maximum.
engine::AcimLayerCost acim_oracle(int layer, const glp::MappingPlan& plan,
                                  const workload::LayerGraph& g, const hw::AcimConfig& acim,
                                  int tokens) {
    const int ab = g.spec.act_bits;
    const std::int64_t t_row = std::llround(acim.t_row_ns * 1000.0);
    const std::int64_t t_adc = std::llround(acim.t_adc_ns * 1000.0);
    std::map<std::pair<int, int>, std::map<int, int>> subarrays;  // (chip, sa) -> group -> cols
    for (int c = 0; c < g.statics[layer].cols; ++c) {
        const auto cp = plan.placement_of(layer, c);
        for (int t = 0; t < cp.row_tiles; ++t) ++subarrays[{cp.chiplet, cp.subarray + t}][cp.group];
    }
    engine::AcimLayerCost cost;
    for (const auto& [sa, by_group] : subarrays) {
        int deg = 0;
        for (const auto& [grp, n] : by_group) deg = std::max(deg, n);
        std::int64_t lat = 0;
        for (int bit = 0; bit < ab; ++bit) lat += t_row + deg * t_adc;  // mux walk per bit cycle
        cost.latency_ps = std::max(cost.latency_ps, lat * tokens);
        cost.degree = std::max(cost.degree, deg);
    }
    cost.conversions = static_cast<std::int64_t>(g.statics[layer].cols) * plan.replication * ab *
                       tokens;
    cost.cell_activations = static_cast<std::int64_t>(g.statics[layer].rows) *
                            g.statics[layer].cols * plan.replication * ab * tokens;
    cost.energy_pj = cost.conversions * acim.e_adc_pj + cost.cell_activations * acim.e_mac_row_pj;
    return cost;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("acim layer cost: layer-wise degree M vs fully packed degree 1") {
    auto cfg = reference();
    const auto g = workload::expand_model(cfg.model);
    const auto sets = glp::build_layersets(g, cfg.system.acim.group_size);
    const auto glp_plan = glp::place(sets, g, cfg.system);
    const auto lw_plan = glp::place(glp::layerwise_plan(g), g, cfg.system);

    const int wq = g.static_index(0, workload::LayerKind::WQ);
    const auto lw = engine::acim_layer_latency(wq, lw_plan, g, cfg.system.acim, 1);
    const auto gl = engine::acim_layer_latency(wq, glp_plan, g, cfg.system.acim, 1);
    CHECK(lw.degree == cfg.system.acim.group_size);
    CHECK(gl.degree == 1);

    // SA-time ratio approaches M when t_row << t_adc.
    auto fast_rows = cfg.system.acim;
    fast_rows.t_row_ns = 0.001;
    const auto lw2 = engine::acim_layer_latency(wq, lw_plan, g, fast_rows, 1);
    const auto gl2 = engine::acim_layer_latency(wq, glp_plan, g, fast_rows, 1);
    const double ratio =
        static_cast<double>(lw2.latency_ps) / static_cast<double>(gl2.latency_ps);
    CHECK(ratio == doctest::Approx(8.0).epsilon(0.01));
}

TEST_CASE("acim layer cost matches the slot-by-slot oracle (ViT-B WQ, both mappings)") {
    auto cfg = reference();
    const auto g = workload::expand_model(cfg.model);
    const int wq = g.static_index(0, workload::LayerKind::WQ);
    for (bool use_glp : {false, true}) {
        const auto sets = use_glp ? glp::build_layersets(g, cfg.system.acim.group_size)
                                  : glp::layerwise_plan(g);
        const auto plan = glp::place(sets, g, cfg.system);
        const auto got = engine::acim_layer_latency(wq, plan, g, cfg.system.acim, 197);
        const auto want = acim_oracle(wq, plan, g, cfg.system.acim, 197);
        CHECK(got.latency_ps == want.latency_ps);
        CHECK(got.degree == want.degree);
        CHECK(got.conversions == want.conversions);
        CHECK(got.cell_activations == want.cell_activations);
        CHECK(got.energy_pj == doctest::Approx(want.energy_pj));
    }
}

TEST_CASE("empty GLP slots charge no conversions") {
    auto cfg = reference();
    // Two members in an M=8 set: 6 slots per group stay empty.
    workload::LayerGraph g;
    g.spec = workload::ViTModelSpec{"syn", 128, 128, 2, 1, 4, 8, 8};
    g.statics.push_back({0, workload::LayerKind::WQ, -1, 128, 128});
    g.statics.push_back({1, workload::LayerKind::WQ, -1, 128, 128});
    glp::LayerSetPlan sets;
    sets.set_capacity = 8;
    glp::LayerSet one;
    one.capacity = 8;
    one.members = {0, 1};
    sets.glp_sets.push_back(one);
    const auto plan = glp::place(sets, g, cfg.system);
    const auto c = engine::acim_layer_latency(0, plan, g, cfg.system.acim, 1);
    // Conversions count only this layer's 128 columns (x 4 slices x 8 bits).
    CHECK(c.conversions == 128LL * 4 * 8);
    CHECK(c.degree == 1);
}

TEST_CASE("dcim op cost: block phases and conservation") {
    const auto spec = *workload::find_preset("ViT-B/16");
    hw::DcimConfig dc;
    const workload::DynamicOp qkt{0, 0, workload::DynKind::QKT};
    const workload::DynamicOp pv{0, 0, workload::DynKind::PV};

    SUBCASE("B_L = L: a single write+compute phase") {
        const auto c = engine::dcim_op_latency(qkt, spec, dc, spec.seq_len);
        CHECK(c.write_rows == 64LL * ((197 + 63) / 64));  // d_h x ceil(L/sa_cols)
        CHECK(c.macs == 197LL * 197 * 64);
    }
    SUBCASE("halving B_L doubles the write phases, MACs unchanged") {
        auto spec64 = spec;
        spec64.seq_len = 64;
        const auto full = engine::dcim_op_latency(qkt, spec64, dc, 64);
        const auto half = engine::dcim_op_latency(qkt, spec64, dc, 32);
        CHECK(half.write_rows == 2 * full.write_rows);
        CHECK(half.macs == full.macs);
    }
    SUBCASE("cycle-walk oracle, B_L = 32") {
        const std::int64_t L = spec.seq_len, dh = 64, ab = spec.act_bits;
        const std::int64_t n_b = (L + 31) / 32;
        std::int64_t rows = 0, cycles = 0, macs = 0;
        for (std::int64_t i = 0; i < n_b; ++i) {
            const std::int64_t bl = (i == n_b - 1) ? L - i * 32 : 32;
            rows += dh * ((bl + dc.sa_cols - 1) / dc.sa_cols);
            cycles += L * ab;
            macs += L * bl * dh;
        }
        const auto c = engine::dcim_op_latency(qkt, spec, dc, 32);
        CHECK(c.write_rows == rows);
        CHECK(c.macs == macs);
        CHECK(c.latency_ps == rows * std::llround(dc.t_write_ns * 1000) +
                                  cycles * std::llround(dc.t_cycle_ns * 1000));
        // P''V writes each V row exactly once in total.
        const auto p = engine::dcim_op_latency(pv, spec, dc, 32);
        CHECK(p.write_rows == L);
    }
}

TEST_CASE("free transfers and buffers make native and pipelined identical") {
    auto cfg = reference();
    cfg.model = *workload::find_preset("ViT-S/16");
    cfg.system.nop.t_hop_ns = 0.0;
    cfg.system.nop.bw_gbps = 1e9;
    cfg.system.chiplet_buf.t_ns = 0.0;
    cfg.system.local_buf.t_ns = 0.0;
    const auto native = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Native);
    const auto pipe = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Pipelined);
    CHECK(native.latency_ps == pipe.latency_ps);
}

TEST_CASE("MAC conservation across all modes and mappings") {
    const auto base = reference();
    for (const auto& model : workload::vit_presets()) {
        const auto mc = workload::mac_count(model);
        for (auto mapping : {MappingKind::LayerWise, MappingKind::Glp})
            for (auto mode : {DataflowMode::Native, DataflowMode::Pipelined, DataflowMode::Hemlet}) {
                const auto cfg = sweep::derive_config(base, {32, 16, 32.0, model, mapping, mode});
                const auto r = engine::run(cfg.model, cfg.system, mapping, mode);
                INFO(model.name, " ", engine::mapping_name(mapping), " ", engine::mode_name(mode));
                CHECK(r.static_macs == mc.static_macs);
                CHECK(r.dynamic_macs == mc.dynamic_macs);
            }
    }
}

TEST_CASE("latency orderings hold on a low-bandwidth small-chiplet point") {
    const auto base = reference();
    const auto model = *workload::find_preset("ViT-S/16");
    std::map<std::pair<int, int>, std::int64_t> lat;
    for (auto mapping : {MappingKind::LayerWise, MappingKind::Glp})
        for (auto mode : {DataflowMode::Native, DataflowMode::Pipelined, DataflowMode::Hemlet}) {
            const auto cfg = sweep::derive_config(base, {18, 9, 8.0, model, mapping, mode});
            lat[{static_cast<int>(mapping), static_cast<int>(mode)}] =
                engine::run(cfg.model, cfg.system, mapping, mode).latency_ps;
        }
    for (int m : {0, 1}) {
        CHECK(lat[{m, 2}] <= lat[{m, 1}]);  // hemlet <= pipelined
        CHECK(lat[{m, 1}] <= lat[{m, 0}]);  // pipelined <= native
    }
    for (int mode : {0, 1, 2})
        CHECK(lat[{1, mode}] <= lat[{0, mode}]);  // glp <= layerwise
}

TEST_CASE("energy directions: GLP costs more, dataflow optimization gives some back") {
    const auto base = reference();
    const auto model = *workload::find_preset("ViT-S/16");
    const auto mk = [&](MappingKind mapping, DataflowMode mode) {
        const auto cfg = sweep::derive_config(base, {18, 9, 8.0, model, mapping, mode});
        return engine::run(cfg.model, cfg.system, mapping, mode);
    };
    const auto lw_native = mk(MappingKind::LayerWise, DataflowMode::Native);
    const auto glp_native = mk(MappingKind::Glp, DataflowMode::Native);
    const auto hemlet = mk(MappingKind::Glp, DataflowMode::Hemlet);
    CHECK(glp_native.energy_pj > lw_native.energy_pj);
    CHECK(hemlet.energy_pj < glp_native.energy_pj);
    const double residual = hemlet.energy_pj / lw_native.energy_pj - 1.0;
    CHECK(residual > 0.0);
    CHECK(residual <= 0.30);
}

TEST_CASE("transfer log: HEMLET never routes Q/K/V or P' through the IDP") {
    auto cfg = reference();
    const std::int64_t N = cfg.model.blocks, H = cfg.model.heads, L = cfg.model.seq_len;
    const std::int64_t d = cfg.model.embed_dim, ab = cfg.model.act_bits;

    const auto native =
        engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Native);
    CHECK(native.bytes_by_tag.at("QKV->IDP") == N * 3 * L * d * ab / 8);
    CHECK(native.bytes_by_tag.at("P'->IDP") == N * H * L * L * ab / 8);

    const auto hem = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Hemlet);
    CHECK(hem.bytes_by_tag.count("QKV->IDP") == 0);
    CHECK(hem.bytes_by_tag.count("P'->IDP") == 0);
    CHECK(hem.bytes_by_tag.at("QKV->DCIM") == N * 3 * L * d * ab / 8);  // direct route
    CHECK(hem.busy.ic_pj < native.busy.ic_pj);
}

TEST_CASE("determinism: identical inputs give bit-identical reports") {
    const auto cfg = reference();
    const auto a = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Hemlet);
    const auto b = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Hemlet);
    CHECK(engine::report_to_json(a) == engine::report_to_json(b));
}

TEST_CASE("report internals: energy breakdown sums, utilization in range") {
    const auto cfg = reference();
    for (auto mode : {DataflowMode::Native, DataflowMode::Hemlet}) {
        const auto r = engine::run(cfg.model, cfg.system, MappingKind::Glp, mode);
        CHECK(r.energy_pj == r.busy.total_pj());
        CHECK(r.adc_utilization >= 0.0);
        CHECK(r.adc_utilization <= 1.0);
        CHECK(r.latency_ps > 0);
    }
    const auto lw = engine::run(cfg.model, cfg.system, MappingKind::LayerWise, DataflowMode::Native);
    const auto gl = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Native);
    CHECK(gl.adc_utilization > lw.adc_utilization);
}

TEST_CASE("peak profiling removes the NoP legs of static steps") {
    const auto cfg = reference();
    engine::RunOptions peak;
    peak.peak = true;
    const auto p = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Native, peak);
    const auto n = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Native);
    CHECK(p.bytes_by_tag.count("X->ACIM") == 0);
    CHECK(n.bytes_by_tag.count("X->ACIM") == 1);
    CHECK(p.busy.ic_ps < n.busy.ic_ps);
    CHECK(p.latency_ps < n.latency_ps);
}

TEST_CASE("breakdown speedup") {
    const auto cfg = reference();
    engine::RunOptions peak;
    peak.peak = true;
    const auto lw =
        engine::run(cfg.model, cfg.system, MappingKind::LayerWise, DataflowMode::Native, peak);
    const auto gl = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Native, peak);
    const auto same = engine::breakdown_speedup(lw, lw);
    CHECK(same.sa == doctest::Approx(1.0));
    CHECK(same.buffer == doctest::Approx(1.0));
    CHECK(same.ic == doctest::Approx(1.0));
    const auto sp = engine::breakdown_speedup(lw, gl);
    CHECK(sp.sa >= 1.0);
}

TEST_CASE("breakdown speedup recomputed from the event log (ViT-S A18D9)") {
    const auto base = reference();
    const auto model = *workload::find_preset("ViT-S/16");
    engine::RunOptions opts;
    opts.collect_events = true;
    const auto cfg = sweep::derive_config(
        base, {18, 9, 8.0, model, MappingKind::Glp, DataflowMode::Native});
    const auto lw = engine::run(cfg.model, cfg.system, MappingKind::LayerWise,
                                DataflowMode::Native, opts);
    const auto gl = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Native, opts);
    auto ic_from_events = [](const engine::SimReport& r) {
        std::int64_t total = 0;
        for (const auto& e : r.events)
            if (e.kind == engine::EventKind::Transfer) total += e.duration_ps;
        return total;
    };
    CHECK(ic_from_events(lw) == lw.busy.ic_ps);
    CHECK(ic_from_events(gl) == gl.busy.ic_ps);
    const auto sp = engine::breakdown_speedup(lw, gl);
    CHECK(sp.ic == doctest::Approx(static_cast<double>(ic_from_events(lw)) / ic_from_events(gl)));
}

TEST_CASE("HEMLET raises a capacity diagnostic for an undersized DCIM buffer") {
    auto cfg = reference();
    const auto g = workload::expand_model(cfg.model);
    const auto sets = glp::build_layersets(g, cfg.system.acim.group_size);
    const auto plan = glp::place(sets, g, cfg.system);
    cfg.system.dcim.chiplet_buffer_bytes = 100;  // bypass validate(), hit the engine check
    CHECK_THROWS_AS(engine::run_with_plan(g, cfg.system, plan, MappingKind::Glp,
                                          DataflowMode::Hemlet),
                    CapacityError);
}

TEST_CASE("link serialization mode stays deterministic and never speeds things up") {
    auto cfg = reference();
    cfg.model = *workload::find_preset("ViT-S/16");
    const auto off = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Hemlet);
    cfg.system.nop.link_serialization = true;
    const auto on1 = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Hemlet);
    const auto on2 = engine::run(cfg.model, cfg.system, MappingKind::Glp, DataflowMode::Hemlet);
    CHECK(engine::report_to_json(on1) == engine::report_to_json(on2));
    CHECK(on1.latency_ps >= off.latency_ps);
}

}  // TEST_SUITE
