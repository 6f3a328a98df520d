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

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>


#include "hemlet/config_io.hpp"
#include "hemlet/engine.hpp"
#include "hemlet/glp_mapper.hpp"
#include "hemlet/metrics.hpp"
#include "hemlet/sweep.hpp"
#include "hemlet/workload.hpp"

namespace fs = std::filesystem;
using namespace hemlet;

namespace {

struct Manifest {
    std::string config_path;
    std::string model;     // preset name; empty -> use the config's [model]
    std::string mapping = "glp";
    std::string mode = "hemlet";
    std::string out_dir = "out";
    std::string in_dir;
    int seed = 42;
    int jobs = 1;
    bool peak = false;
    bool event_log = false;
    bool link_contention = false;
    bool auto_size = false;  // derive chiplet counts and mesh for the model
};

std::string default_config_path() {
    if (const char* env = std::getenv("HEMLET_REF_CONFIG")) return env;
    return "reference.toml";
}

io::ParsedConfig load_config(const Manifest& m) {
    auto cfg = io::parse_config_file(m.config_path);
    if (!m.model.empty()) {
        const auto* preset = workload::find_preset(m.model);
        if (!preset) throw ConfigError("unknown model preset: " + m.model);
        cfg.model = *preset;
    }
    if (m.auto_size)
        cfg = sweep::derive_config(cfg, {cfg.system.acim.pe_per_chiplet,
                                         cfg.system.dcim.pe_per_chiplet, cfg.system.nop.bw_gbps,
                                         cfg.model, engine::MappingKind::Glp,
                                         engine::DataflowMode::Hemlet});
    if (m.link_contention) cfg.system.nop.link_serialization = true;
    return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << text;
}

void write_meta(const fs::path& dir, const Manifest& m, const std::string& command) {
    nlohmann::ordered_json j;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    j["command"] = command;
    j["config"] = m.config_path;
    j["seed"] = m.seed;
    j["timestamp_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    write_file(dir / "meta.json", j.dump(2) + "\n");
}

int cmd_validate(const Manifest& m) {
    const auto cfg = load_config(m);
    const auto diags = hw::validate(cfg.system, cfg.model);
    if (diags.empty()) {
        std::cout << "ok: " << cfg.model.name << " on " << cfg.system.label << " ("
                  << cfg.system.n_acim_chiplets << " ACIM, " << cfg.system.n_dcim_chiplets
                  << " DCIM, " << cfg.system.n_idp_chiplets << " IDP)\n";
        return 0;
    }
    for (const auto& d : diags) std::cerr << "error: " << d << "\n";
    return 1;
}

int cmd_map(const Manifest& m) {
    const auto cfg = load_config(m);
    const auto diags = hw::validate(cfg.system, cfg.model);
    if (!diags.empty()) {
        for (const auto& d : diags) std::cerr << "error: " << d << "\n";
        return 1;
    }
    const auto graph = workload::expand_model(cfg.model);
    const auto sets = glp::build_layersets(graph, cfg.system.acim.group_size);
    const auto plan = glp::place(sets, graph, cfg.system);
    const auto stats = glp::mapping_stats(plan, graph, sets);

    fs::create_directories(m.out_dir);
    write_file(fs::path(m.out_dir) / "layerset_plan.json",
               glp::layerset_plan_to_json(sets, graph) + "\n");
    write_file(fs::path(m.out_dir) / "mapping_plan.json",
               glp::mapping_plan_to_json(plan, graph) + "\n");

    std::ostringstream os;
    os << "layer,label,groups_active,serialization_degree,subarrays\n";
    for (const auto& ls : stats.per_layer)
        os << ls.layer << "," << ls.label << "," << ls.groups_active << ","
           << ls.serialization_degree << "," << ls.subarrays << "\n";
    write_file(fs::path(m.out_dir) / "mapping_stats.csv", os.str());

    nlohmann::ordered_json js;
    js["cells_used"] = stats.cells_used;
    js["cells_wasted"] = stats.cells_wasted;
    js["mean_serialization_degree"] = stats.mean_serialization_degree;
    for (int s = 1; s <= 4; ++s) {
        js["stage_counts"][std::to_string(s)]["sets"] = sets.stage[s].sets;
        js["stage_counts"][std::to_string(s)]["layers"] = sets.stage[s].layers;
    }
    write_file(fs::path(m.out_dir) / "mapping_stats.json", js.dump(2) + "\n");
    write_meta(m.out_dir, m, "map");

    std::cout << "glp sets: " << sets.glp_sets.size() << " (stage1 " << sets.stage[1].sets
              << ", stage3 " << sets.stage[3].sets << "), baseline layers: "
              << sets.baseline.size() << ", mean serialization degree: "
              << stats.mean_serialization_degree << "\n";
    std::cout << "wrote " << m.out_dir << "/layerset_plan.json, mapping_plan.json, mapping_stats.csv\n";
    return 0;
}

metrics::SweepPoint make_point(const io::ParsedConfig& cfg, engine::MappingKind mapping,
                               engine::DataflowMode mode, const engine::SimReport& report) {
    metrics::SweepPoint p;
    p.config_label = cfg.system.label;
    p.bw_gbps = cfg.system.nop.bw_gbps;
    p.model = cfg.model.name;
    p.mapping = mapping;
    p.mode = mode;
    p.report = report;
    return p;
}

int cmd_run(const Manifest& m) {
    const auto cfg = load_config(m);
    const auto mapping = engine::parse_mapping(m.mapping);
    const auto mode = engine::parse_mode(m.mode);
    engine::RunOptions opts;
    opts.peak = m.peak;
    opts.collect_events = m.event_log;

    const auto report = engine::run(cfg.model, cfg.system, mapping, mode, opts);

    fs::create_directories(m.out_dir);
    write_file(fs::path(m.out_dir) / "report.json", engine::report_to_json(report) + "\n");
    std::ostringstream csv;
    csv << metrics::csv_header() << "\n"
        << metrics::csv_row(make_point(cfg, mapping, mode, report)) << "\n";
    write_file(fs::path(m.out_dir) / "run.csv", csv.str());
    if (m.event_log) {
        std::ofstream ev(fs::path(m.out_dir) / "events.ndjson");
        engine::write_event_log(report, ev);
    }
    write_meta(m.out_dir, m, "run");

    std::cout << cfg.model.name << " " << cfg.system.label << " " << m.mapping << "+" << m.mode
              << ": latency " << report.latency_ns() / 1e6 << " ms, energy "
              << report.energy_pj / 1e9 << " mJ, " << metrics::tops(report) << " TOPS, "
              << metrics::tops_per_watt(report) << " TOPS/W\n";
    return 0;
}

void write_anchor_note(std::ostream& os, const std::vector<metrics::SweepPoint>& points) {
    os << "throughput/efficiency sanity anchors (constants are uncalibrated; no tolerance)\n";
    for (const auto& p : points) {
        if (p.model != "ViT-L/16" || p.config_label != "A32D16" || p.bw_gbps != 32.0) continue;
        if (p.mapping != engine::MappingKind::Glp || p.mode != engine::DataflowMode::Hemlet)
            continue;
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "simulated  ViT-L/16 A32D16 32GB/s: %.2f TOPS, %.2f TOPS/W\n",
                      metrics::tops(p.report), metrics::tops_per_watt(p.report));
        os << buf;
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf), "published  ViT-L/16 A32D16 32GB/s: %.2f TOPS, %.2f TOPS/W\n",
                  metrics::kAnchorTops, metrics::kAnchorTopsPerWatt);
    os << buf;
}

nlohmann::ordered_json point_to_json(const metrics::SweepPoint& p) {
    nlohmann::ordered_json j;
    j["model"] = p.model;
    j["config"] = p.config_label;
    j["bw_gbps"] = p.bw_gbps;
    j["mapping"] = engine::mapping_name(p.mapping);
    j["mode"] = engine::mode_name(p.mode);
    j["latency_ps"] = p.report.latency_ps;
    j["energy_pj"] = p.report.energy_pj;
    j["static_macs"] = p.report.static_macs;
    j["dynamic_macs"] = p.report.dynamic_macs;
    j["simd_ops"] = p.report.simd_ops;
    j["sa_ps"] = p.report.busy.sa_ps;
    j["buffer_ps"] = p.report.busy.buffer_ps;
    j["ic_ps"] = p.report.busy.ic_ps;
    j["adc_utilization"] = p.report.adc_utilization;
    return j;
}

int cmd_sweep(const Manifest& m) {
    const auto base = load_config(m);
    const auto grid = sweep::ablation_grid();
    const auto points = sweep::run_grid(base, grid, m.jobs);

    fs::create_directories(m.out_dir);
    std::ostringstream csv;
    metrics::write_csv(csv, points);
    write_file(fs::path(m.out_dir) / "sweep.csv", csv.str());

    nlohmann::ordered_json ja = nlohmann::ordered_json::array();
    for (const auto& p : points) ja.push_back(point_to_json(p));
    write_file(fs::path(m.out_dir) / "sweep.json", ja.dump(2) + "\n");

    const auto normalized = metrics::normalize(points, [](const metrics::SweepPoint& p) {
        return p.mapping == engine::MappingKind::LayerWise && p.mode == engine::DataflowMode::Native;
    });
    std::ostringstream dat;
    metrics::write_normalized_dat(dat, normalized);
    write_file(fs::path(m.out_dir) / "normalized.dat", dat.str());

    std::ostringstream anchors;
    write_anchor_note(anchors, points);
    write_file(fs::path(m.out_dir) / "anchors.txt", anchors.str());
    write_meta(m.out_dir, m, "sweep");

    std::cout << "swept " << points.size() << " points -> " << m.out_dir
              << "/sweep.csv, sweep.json, normalized.dat, anchors.txt\n";
    std::cout << anchors.str();
    return 0;
}

int cmd_report(const Manifest& m) {
    const fs::path in = m.in_dir.empty() ? fs::path(m.out_dir) : fs::path(m.in_dir);
    std::ifstream f(in / "sweep.json");
    if (!f) throw ConfigError("cannot open " + (in / "sweep.json").string());
    nlohmann::json ja = nlohmann::json::parse(f);

    std::vector<metrics::SweepPoint> points;
    for (const auto& j : ja) {
        metrics::SweepPoint p;
        p.model = j.at("model").get<std::string>();
        p.config_label = j.at("config").get<std::string>();
        p.bw_gbps = j.at("bw_gbps").get<double>();
        p.mapping = engine::parse_mapping(j.at("mapping").get<std::string>());
        p.mode = engine::parse_mode(j.at("mode").get<std::string>());
        p.report.model = p.model;
        p.report.config_label = p.config_label;
        p.report.bw_gbps = p.bw_gbps;
        p.report.mapping = p.mapping;
        p.report.mode = p.mode;
        p.report.latency_ps = j.at("latency_ps").get<std::int64_t>();
        p.report.energy_pj = j.at("energy_pj").get<double>();
        p.report.static_macs = j.at("static_macs").get<std::int64_t>();
        p.report.dynamic_macs = j.at("dynamic_macs").get<std::int64_t>();
        p.report.simd_ops = j.at("simd_ops").get<std::int64_t>();
        p.report.busy.sa_ps = j.at("sa_ps").get<std::int64_t>();
        p.report.busy.buffer_ps = j.at("buffer_ps").get<std::int64_t>();
        p.report.busy.ic_ps = j.at("ic_ps").get<std::int64_t>();
        p.report.adc_utilization = j.at("adc_utilization").get<double>();
        points.push_back(std::move(p));
    }

    const auto normalized = metrics::normalize(points, [](const metrics::SweepPoint& p) {
        return p.mapping == engine::MappingKind::LayerWise && p.mode == engine::DataflowMode::Native;
    });
    fs::create_directories(m.out_dir);
    std::ostringstream dat;
    metrics::write_normalized_dat(dat, normalized);
    write_file(fs::path(m.out_dir) / "normalized.dat", dat.str());
    std::ostringstream anchors;
    write_anchor_note(anchors, points);
    write_file(fs::path(m.out_dir) / "anchors.txt", anchors.str());
    std::cout << dat.str();
    std::cout << anchors.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hemlet: heterogeneous CIM chiplet performance simulator for ViT inference"};
    app.require_subcommand(1);

    Manifest m;
    m.config_path = default_config_path();

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", m.config_path, "config file (.toml or .json)");
        sub->add_option("--model", m.model, "model preset (ViT-S/16, ViT-B/16, ViT-L/16)");
        sub->add_option("--seed", m.seed, "run seed recorded in metadata");
        sub->add_flag("--auto-size", m.auto_size,
                      "derive chiplet counts and mesh size for the selected model");
    };

    auto* validate = app.add_subcommand("validate", "check a configuration");
    add_common(validate);

    auto* map = app.add_subcommand("map", "emit GLP layer sets, placement and stats");
    add_common(map);
    map->add_option("--out", m.out_dir, "output directory");

    auto* run = app.add_subcommand("run", "simulate one inference");
    add_common(run);
    run->add_option("--mapping", m.mapping, "layerwise | glp");
    run->add_option("--mode", m.mode, "native | pipelined | hemlet");
    run->add_option("--out", m.out_dir, "output directory");
    run->add_flag("--peak", m.peak, "assume inputs preloaded in chiplet buffers");
    run->add_flag("--event-log", m.event_log, "emit events.ndjson");
    run->add_flag("--link-contention", m.link_contention,
                  "serialize transfers sharing a mesh link");

    auto* sweep = app.add_subcommand("sweep", "run the full ablation grid");
    add_common(sweep);
    sweep->add_option("--out", m.out_dir, "output directory");
    sweep->add_option("--jobs", m.jobs, "parallel workers");

    auto* report = app.add_subcommand("report", "normalized tables from a sweep directory");
    report->add_option("--in", m.in_dir, "sweep output directory");
    report->add_option("--out", m.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(validate)) return cmd_validate(m);
        if (app.got_subcommand(map)) return cmd_map(m);
        if (app.got_subcommand(run)) return cmd_run(m);
        if (app.got_subcommand(sweep)) return cmd_sweep(m);
        if (app.got_subcommand(report)) return cmd_report(m);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
