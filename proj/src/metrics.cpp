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

#include "hemlet/metrics.hpp"

#include <cstdio>
#include <map>
#include <ostream>

#include "hemlet/errors.hpp"

namespace hemlet::metrics {

double tops(const engine::SimReport& report) {
    if (report.latency_ps <= 0) throw ConfigError("tops: non-positive latency");
    return static_cast<double>(report.total_ops()) / static_cast<double>(report.latency_ps);
}

double tops_per_watt(const engine::SimReport& report) {
    if (report.energy_pj <= 0) throw ConfigError("tops_per_watt: non-positive energy");
    return static_cast<double>(report.total_ops()) / report.energy_pj;
}

std::vector<NormalizedPoint> normalize(const std::vector<SweepPoint>& points,
                                       const std::function<bool(const SweepPoint&)>& is_baseline) {
    // Group key -> baseline index.
    auto key_of = [](const SweepPoint& p) {
        char bw[32];
        std::snprintf(bw, sizeof(bw), "%g", p.bw_gbps);
        return p.model + "|" + p.config_label + "|" + bw;
    };
    std::map<std::string, int> baseline_of;
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
        if (!is_baseline(points[i])) continue;
        const auto key = key_of(points[i]);
        if (baseline_of.count(key))
            throw ConfigError("normalize: two baseline points in group " + key);
        baseline_of[key] = i;
    }
    std::vector<NormalizedPoint> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        const auto it = baseline_of.find(key_of(p));
        if (it == baseline_of.end())
            throw ConfigError("normalize: no baseline point in group " + key_of(p));
        const auto& base = points[it->second].report;
        if (base.latency_ps <= 0 || base.energy_pj <= 0)
            throw ConfigError("normalize: degenerate baseline report");
        NormalizedPoint n;
        n.point = &p;
        n.latency_ratio =
            static_cast<double>(p.report.latency_ps) / static_cast<double>(base.latency_ps);
        n.energy_ratio = p.report.energy_pj / base.energy_pj;
        out.push_back(n);
    }
    return out;
}

std::string csv_header() {
    return "model,config,bw_GBps,mapping,mode,latency_ns,energy_pJ,tops,tops_per_w,"
           "sa_ns,buffer_ns,ic_ns,adc_util";
}

std::string csv_row(const SweepPoint& p) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%s,%g,%s,%s,%.3f,%.3f,%.6f,%.6f,%.3f,%.3f,%.3f,%.6f",
                  p.model.c_str(), p.config_label.c_str(), p.bw_gbps,
                  engine::mapping_name(p.mapping), engine::mode_name(p.mode),
                  p.report.latency_ns(), p.report.energy_pj, tops(p.report),
                  tops_per_watt(p.report), static_cast<double>(p.report.busy.sa_ps) / 1000.0,
                  static_cast<double>(p.report.busy.buffer_ps) / 1000.0,
                  static_cast<double>(p.report.busy.ic_ps) / 1000.0, p.report.adc_utilization);
    return buf;
}

void write_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
    os << csv_header() << "\n";
    for (const auto& p : points) os << csv_row(p) << "\n";
}

void write_normalized_dat(std::ostream& os, const std::vector<NormalizedPoint>& rows) {
    os << "# model config bw_GBps mapping mode norm_latency norm_energy\n";
    for (const auto& r : rows) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s %s %g %s %s %.6f %.6f", r.point->model.c_str(),
                      r.point->config_label.c_str(), r.point->bw_gbps,
                      engine::mapping_name(r.point->mapping), engine::mode_name(r.point->mode),
                      r.latency_ratio, r.energy_ratio);
        os << buf << "\n";
    }
}

}  // namespace hemlet::metrics
