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

#include "hemlet/workload.hpp"

#include <map>

namespace hemlet::workload {

std::vector<std::string> check_spec(const ViTModelSpec& spec) {
    std::vector<std::string> diags;
    if (spec.embed_dim <= 0) diags.push_back("model.d: must be > 0");
    if (spec.ffn_dim < spec.embed_dim) diags.push_back("model.D: must be >= d");
    if (spec.embed_dim > 0 && spec.ffn_dim % spec.embed_dim != 0)
        diags.push_back("model.D: must be divisible by d (square FFN sub-layer partition)");
    if (spec.blocks <= 0) diags.push_back("model.N: must be > 0");
    if (spec.heads <= 0) diags.push_back("model.H: must be > 0");
    if (spec.heads > 0 && spec.embed_dim % spec.heads != 0)
        diags.push_back("model.H: must divide d");
    if (spec.seq_len <= 0) diags.push_back("model.L: must be > 0");
    if (spec.weight_bits <= 0) diags.push_back("model.weight_bits: must be > 0");
    if (spec.act_bits <= 0) diags.push_back("model.act_bits: must be > 0");
    return diags;
}

const std::vector<ViTModelSpec>& vit_presets() {
    static const std::vector<ViTModelSpec> presets = {
        {"ViT-S/16", 384, 1536, 12, 6, 197, 8, 8},
        {"ViT-B/16", 768, 3072, 12, 12, 197, 8, 8},
        {"ViT-L/16", 1024, 4096, 24, 16, 197, 8, 8},
    };
    return presets;
}

const ViTModelSpec* find_preset(const std::string& name) {
    for (const auto& p : vit_presets())
        if (p.name == name) return &p;
    return nullptr;
}

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::WQ: return "WQ";
        case LayerKind::WK: return "WK";
        case LayerKind::WV: return "WV";
        case LayerKind::WO: return "WO";
        case LayerKind::W1Sub: return "W1";
        case LayerKind::W2Sub: return "W2";
    }
    return "?";
}

std::string StaticLayer::label() const {
    std::string s = "b" + std::to_string(block) + "." + layer_kind_name(kind);
    if (sub >= 0) s += "_" + std::to_string(sub);
    return s;
}

int LayerGraph::static_index(int block, LayerKind kind, int sub) const {
    for (int i = 0; i < static_cast<int>(statics.size()); ++i) {
        const auto& l = statics[i];
        if (l.block == block && l.kind == kind && l.sub == sub) return i;
    }
    throw InternalError("static layer not found: block " + std::to_string(block));
}

bool LayerGraph::concurrent(int a, int b) const {
    if (a == b) return false;  // irreflexive
    const auto& la = statics.at(a);
    const auto& lb = statics.at(b);
    if (la.block != lb.block) return false;
    auto is_qkv = [](LayerKind k) {
        return k == LayerKind::WQ || k == LayerKind::WK || k == LayerKind::WV;
    };
    return is_qkv(la.kind) && is_qkv(lb.kind) && la.kind != lb.kind;
}

LayerGraph expand_model(const ViTModelSpec& spec) {
    auto diags = check_spec(spec);
    if (!diags.empty()) {
        std::string msg = "invalid model spec:";
        for (const auto& d : diags) msg += " [" + d + "]";
        throw ConfigError(msg);
    }

    LayerGraph g;
    g.spec = spec;
    const int d = spec.embed_dim;
    const int k = spec.ffn_splits();
    const std::int64_t L = spec.seq_len;
    const std::int64_t H = spec.heads;
    const std::int64_t D = spec.ffn_dim;

    auto add_static = [&](int block, LayerKind kind, int sub) {
        g.statics.push_back({block, kind, sub, d, d});
        return static_cast<int>(g.statics.size()) - 1;
    };
    auto add_vec = [&](int block, VecKind kind, std::int64_t elems) {
        g.vectors.push_back({block, kind, elems});
        return NodeRef{NodeRef::Cls::Vector, static_cast<int>(g.vectors.size()) - 1};
    };
    auto sref = [](int i) { return NodeRef{NodeRef::Cls::Static, i}; };
    auto dref = [](int i) { return NodeRef{NodeRef::Cls::Dynamic, i}; };
    auto edge = [&](NodeRef a, NodeRef b) { g.edges.emplace_back(a, b); };

    NodeRef block_input{};  // last LayerNorm of the previous block
    bool have_input = false;

    for (int b = 0; b < spec.blocks; ++b) {
        int wq = add_static(b, LayerKind::WQ, -1);
        int wk = add_static(b, LayerKind::WK, -1);
        int wv = add_static(b, LayerKind::WV, -1);
        if (have_input)
            for (int l : {wq, wk, wv}) edge(block_input, sref(l));

        std::vector<int> qkt_ids, pv_ids;
        for (int h = 0; h < spec.heads; ++h) {
            g.dynamics.push_back({b, h, DynKind::QKT});
            qkt_ids.push_back(static_cast<int>(g.dynamics.size()) - 1);
        }
        for (int h = 0; h < spec.heads; ++h) {
            g.dynamics.push_back({b, h, DynKind::PV});
            pv_ids.push_back(static_cast<int>(g.dynamics.size()) - 1);
        }
        for (int h = 0; h < spec.heads; ++h) {
            edge(sref(wq), dref(qkt_ids[h]));
            edge(sref(wk), dref(qkt_ids[h]));
        }
        NodeRef sm = add_vec(b, VecKind::SoftmaxLocal, H * L * L);
        NodeRef gn = add_vec(b, VecKind::GlobalNorm, H * L * L);
        for (int h = 0; h < spec.heads; ++h) edge(dref(qkt_ids[h]), sm);
        edge(sm, gn);
        for (int h = 0; h < spec.heads; ++h) {
            edge(gn, dref(pv_ids[h]));
            edge(sref(wv), dref(pv_ids[h]));
        }

        int wo = add_static(b, LayerKind::WO, -1);
        for (int h = 0; h < spec.heads; ++h) edge(dref(pv_ids[h]), sref(wo));

        NodeRef res1 = add_vec(b, VecKind::ResidualAdd, L * d);
        NodeRef ln1 = add_vec(b, VecKind::LayerNorm, L * d);
        edge(sref(wo), res1);
        edge(res1, ln1);

        NodeRef prev = ln1;
        for (int i = 0; i < k; ++i) {
            int w1 = add_static(b, LayerKind::W1Sub, i);
            edge(prev, sref(w1));
            prev = sref(w1);
        }
        NodeRef gelu = add_vec(b, VecKind::Gelu, L * D);
        edge(prev, gelu);
        prev = gelu;
        for (int i = 0; i < k; ++i) {
            int w2 = add_static(b, LayerKind::W2Sub, i);
            edge(prev, sref(w2));
            prev = sref(w2);
        }
        NodeRef res2 = add_vec(b, VecKind::ResidualAdd, L * d);
        NodeRef ln2 = add_vec(b, VecKind::LayerNorm, L * d);
        edge(prev, res2);
        edge(res2, ln2);

        block_input = ln2;
        have_input = true;
    }
    return g;
}

MacCount mac_count(const ViTModelSpec& spec) {
    auto diags = check_spec(spec);
    if (!diags.empty()) throw ConfigError("invalid model spec");
    const std::int64_t d = spec.embed_dim;
    const std::int64_t D = spec.ffn_dim;
    const std::int64_t N = spec.blocks;
    const std::int64_t H = spec.heads;
    const std::int64_t L = spec.seq_len;
    const std::int64_t dh = spec.head_dim();

    MacCount mc;
    mc.static_macs = N * L * (4 * d * d + 2 * d * D);
    mc.dynamic_macs = 2 * N * H * L * L * dh;
    // One op per processed element for the non-VMM operators; biases fold
    // into this rule rather than being enumerated separately.
    mc.vector_ops = N * (2 * H * L * L + 4 * L * d + L * D);
    return mc;
}

std::int64_t static_weight_count(const ViTModelSpec& spec) {
    const std::int64_t d = spec.embed_dim;
    const std::int64_t D = spec.ffn_dim;
    return static_cast<std::int64_t>(spec.blocks) * (4 * d * d + 2 * d * D);
}

template <typename T>
std::vector<Mat<T>> ffn_partition(const Mat<T>& w, int k, LayerKind which) {
    if (k <= 0) throw ConfigError("ffn_partition: k must be positive");
    std::vector<Mat<T>> parts;
    parts.reserve(k);
    if (which == LayerKind::W1Sub) {
        if (w.cols % k != 0) throw ConfigError("ffn_partition: W1 columns not divisible by k");
        const int c = w.cols / k;
        for (int i = 0; i < k; ++i) {
            Mat<T> p(w.rows, c);
            for (int r = 0; r < w.rows; ++r)
                for (int j = 0; j < c; ++j) p(r, j) = w(r, i * c + j);
            parts.push_back(std::move(p));
        }
    } else if (which == LayerKind::W2Sub) {
        if (w.rows % k != 0) throw ConfigError("ffn_partition: W2 rows not divisible by k");
        const int r0 = w.rows / k;
        for (int i = 0; i < k; ++i) {
            Mat<T> p(r0, w.cols);
            for (int r = 0; r < r0; ++r)
                for (int j = 0; j < w.cols; ++j) p(r, j) = w(i * r0 + r, j);
            parts.push_back(std::move(p));
        }
    } else {
        throw ConfigError("ffn_partition: layer kind must be W1 or W2");
    }
    return parts;
}

template std::vector<Mat<float>> ffn_partition<float>(const Mat<float>&, int, LayerKind);
template std::vector<Mat<double>> ffn_partition<double>(const Mat<double>&, int, LayerKind);

}  // namespace hemlet::workload
