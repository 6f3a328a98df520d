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

#include "hemlet/nop.hpp"

#include <algorithm>
#include <cstdlib>

#include "hemlet/hwconfig.hpp"

namespace hemlet::nop {

int route_hops(Coord a, Coord b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

Cost transfer_cost(const Transfer& t, const hw::NopConfig& cfg) {
    if (t.src == t.dst) return {0.0, 0.0};
    Cost c;
    const int hops = route_hops(t.src, t.dst);
    // bw is in GB/s == bytes/ns; payload is one unpacketized stream.
    c.latency_ns = hops * cfg.t_hop_ns + static_cast<double>(t.bytes) / cfg.bw_gbps;
    c.energy_pj = static_cast<double>(t.bytes) * 8.0 * cfg.e_bit_pj;
    return c;
}

std::vector<int> xy_route_links(Coord src, Coord dst, int mesh_x, int mesh_y) {
    // Directed link id: 4 * (y * mesh_x + x) + direction {0:+x, 1:-x, 2:+y, 3:-y}.
    std::vector<int> links;
    auto link_id = [mesh_x](Coord c, int dir) { return 4 * (c.y * mesh_x + c.x) + dir; };
    Coord cur = src;
    while (cur.x != dst.x) {
        int dir = dst.x > cur.x ? 0 : 1;
        links.push_back(link_id(cur, dir));
        cur.x += dst.x > cur.x ? 1 : -1;
    }
    while (cur.y != dst.y) {
        int dir = dst.y > cur.y ? 2 : 3;
        links.push_back(link_id(cur, dir));
        cur.y += dst.y > cur.y ? 1 : -1;
    }
    (void)mesh_y;
    return links;
}

std::int64_t LinkSchedule::admit(const std::vector<int>& links, std::int64_t ready_ps,
                                 std::int64_t hold_ps) {
    std::int64_t start = ready_ps;
    for (int l : links) {
        auto it = free_at_.find(l);
        if (it != free_at_.end()) start = std::max(start, it->second);
    }
    for (int l : links) free_at_[l] = start + hold_ps;
    return start;
}

}  // namespace hemlet::nop
