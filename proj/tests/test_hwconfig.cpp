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

#include "hemlet/config_io.hpp"
#include "hemlet/hwconfig.hpp"

using namespace hemlet;
using workload::ViTModelSpec;

namespace {

io::ParsedConfig reference() { return io::parse_config_file(HEMLET_REFERENCE_CONFIG); }

std::int64_t capacity_by_loop(const hw::AcimConfig& a, int weight_bits) {
    std::int64_t cells = 0;
    for (int pe = 0; pe < a.pe_per_chiplet; ++pe)
        for (int sa = 0; sa < a.sa_per_pe; ++sa) cells += static_cast<std::int64_t>(a.sa_rows) * a.sa_cols;
    const int r = (weight_bits + a.cell_bits - 1) / a.cell_bits;
    return cells / r;
}

bool has_diag(const std::vector<std::string>& diags, const std::string& prefix) {
    for (const auto& d : diags)
        if (d.rfind(prefix, 0) == 0) return true;
    return false;
}

}  // namespace

TEST_SUITE("hwconfig") {

TEST_CASE("acim capacity") {
    hw::AcimConfig a;
    a.pe_per_chiplet = 1;
    a.sa_per_pe = 1;
    CHECK(hw::acim_capacity(a, 8) == 4096);  // 16384 cells / 4 slices

    hw::AcimConfig a32;  // defaults: 32 PEs x 60 SAs of 128x128, 2-bit cells
    CHECK(hw::acim_capacity(a32, 8) == 7864320);
    CHECK(hw::acim_capacity(a32, 8) == capacity_by_loop(a32, 8));

    hw::AcimConfig raw = a;
    raw.cell_bits = 8;
    CHECK(hw::acim_capacity(raw, 8) == 16384);  // one slice, raw cell count
}

TEST_CASE("capacity is monotone in every geometry field") {
    hw::AcimConfig base;
    const auto c0 = hw::acim_capacity(base, 8);
    for (int field = 0; field < 5; ++field) {
        hw::AcimConfig m = base;
        switch (field) {
            case 0: m.pe_per_chiplet += 3; break;
            case 1: m.sa_per_pe += 5; break;
            case 2: m.sa_rows += 32; break;
            case 3: m.sa_cols += 32; break;
            case 4: m.cell_bits += 2; break;
        }
        CHECK(hw::acim_capacity(m, 8) >= c0);
    }
}

TEST_CASE("required ACIM chiplets") {
    const auto* vb = workload::find_preset("ViT-B/16");
    hw::AcimConfig a32;
    CHECK(hw::required_acim_chiplets(*vb, a32) == 11);  // ceil(84934656 / 7864320)

    ViTModelSpec toy{"toy", 16, 16, 1, 2, 4, 8, 8};
    CHECK(hw::required_acim_chiplets(toy, a32) == 1);

    const auto* vl = workload::find_preset("ViT-L/16");
    hw::AcimConfig a18 = a32;
    a18.pe_per_chiplet = 18;
    const std::int64_t weights = workload::static_weight_count(*vl);
    const std::int64_t cap = capacity_by_loop(a18, 8);
    CHECK(hw::required_acim_chiplets(*vl, a18) == (weights + cap - 1) / cap);
    CHECK(hw::required_acim_chiplets(*vl, a18) == 69);
}

TEST_CASE("validate accepts the reference config") {
    const auto cfg = reference();
    CHECK(hw::validate(cfg.system, cfg.model).empty());
}

TEST_CASE("validate reports a too-small mesh with its field path") {
    auto cfg = reference();
    cfg.system.nop.mesh_x = 2;
    cfg.system.nop.mesh_y = 2;
    const auto diags = hw::validate(cfg.system, cfg.model);
    REQUIRE_FALSE(diags.empty());
    CHECK(has_diag(diags, "nop.mesh_x"));
}

TEST_CASE("validate checks the DCIM Q/K/V buffering requirement") {
    auto cfg = reference();
    cfg.system.dcim.chiplet_buffer_bytes = 1024;
    CHECK(has_diag(hw::validate(cfg.system, cfg.model), "dcim.chiplet_buffer_bytes"));
}

TEST_CASE("validate checks ACIM storage for all static weights") {
    auto cfg = reference();
    cfg.system.n_acim_chiplets = 2;
    CHECK(has_diag(hw::validate(cfg.system, cfg.model), "system.n_acim_chiplets"));
}

TEST_CASE("mesh floorplan: IDP centered, DCIM adjacent, all cells distinct") {
    const auto cfg = reference();
    const auto layout = hw::assign_mesh(cfg.system);
    CHECK(layout.idp.x == cfg.system.nop.mesh_x / 2);
    CHECK(layout.idp.y == cfg.system.nop.mesh_y / 2);
    REQUIRE(static_cast<int>(layout.dcim.size()) == cfg.system.n_dcim_chiplets);
    REQUIRE(static_cast<int>(layout.acim.size()) == cfg.system.n_acim_chiplets);
    for (const auto& d : layout.dcim) CHECK(nop::route_hops(d, layout.idp) <= 2);
    std::vector<nop::Coord> all{layout.idp};
    all.insert(all.end(), layout.acim.begin(), layout.acim.end());
    all.insert(all.end(), layout.dcim.begin(), layout.dcim.end());
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i + 1; j < all.size(); ++j) CHECK_FALSE(all[i] == all[j]);
}

TEST_CASE("config round-trips through TOML and JSON") {
    const auto cfg = reference();
    const std::string toml1 = io::to_toml(cfg);
    const auto back = io::parse_toml(toml1);
    CHECK(io::to_toml(back) == toml1);

    const std::string json1 = io::to_json(cfg);
    const auto back2 = io::parse_json_text(json1);
    CHECK(io::to_json(back2) == json1);
    CHECK(io::to_toml(back2) == toml1);  // formats agree on the same fields

    // A mutated config still round-trips.
    auto mut = cfg;
    mut.system.nop.bw_gbps = 12.5;
    mut.system.acim.t_adc_ns = 3.25;
    mut.model.name = "custom model";
    mut.system.nop.link_serialization = true;
    CHECK(io::to_toml(io::parse_toml(io::to_toml(mut))) == io::to_toml(mut));
}

TEST_CASE("unknown keys and sections are errors") {
    CHECK_THROWS_AS(io::parse_toml("[acim]\nbogus_key = 3\n"), ConfigError);
    CHECK_THROWS_AS(io::parse_toml("[warp_drive]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(io::parse_json_text(R"({"acim": {"bogus_key": 3}})"), ConfigError);
    CHECK_THROWS_AS(io::parse_toml("[model]\nd = \"not a number\"\n"), ConfigError);
}

TEST_CASE("head bookkeeping helpers") {
    const auto cfg = reference();
    CHECK(hw::head_qkv_bytes(cfg.model) == 3LL * 197 * 64 * 8 / 8);
    CHECK(hw::heads_per_dcim_chiplet(cfg.model, cfg.system) == 6);  // 12 heads / 2 chiplets
}

}  // TEST_SUITE
