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
#include <map>
#include <string>
#include <vector>

namespace hemlet::hw {
struct NopConfig;
}

namespace hemlet::nop {

struct Coord {
    int x = 0;
    int y = 0;
    bool operator==(const Coord&) const = default;
};

struct Transfer {
    Coord src;
    Coord dst;
    std::int64_t bytes = 0;
    std::string tag;
};

/// XY dimension-order hop count (Manhattan distance).
int route_hops(Coord a, Coord b);

struct Cost {
    double latency_ns = 0.0;
    double energy_pj = 0.0;
};

/// Contention-free analytic cost: hops * t_hop + bytes / bw, energy
/// bytes * 8 * e_bit. src == dst yields (0, 0) — intra-chiplet movement is
/// charged through buffer costs, not the NoP.
Cost transfer_cost(const Transfer& t, const hw::NopConfig& cfg);

/// Directed link ids along the XY route; used only by the optional one
/// -outstanding-transfer-per-link serialization mode.
std::vector<int> xy_route_links(Coord src, Coord dst, int mesh_x, int mesh_y);

/// Per-link availability tracker for the optional serialization mode.
class LinkSchedule {
public:
    /// Returns the admitted start time: max of ready time and every route
    /// link's free time; occupies the links until start + hold.
    std::int64_t admit(const std::vector<int>& links, std::int64_t ready_ps, std::int64_t hold_ps);

private:
    std::map<int, std::int64_t> free_at_;
};

}  // namespace hemlet::nop
