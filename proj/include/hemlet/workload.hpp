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
#include <string>
#include <vector>

#include "hemlet/matrix.hpp"

namespace hemlet::workload {

/// ViT hyperparameters. Only shapes and bit-widths matter to the simulator;
/// weight values are synthetic and live in test code / the numerics model.
struct ViTModelSpec {
    std::string name;
    int embed_dim = 0;      // d
    int ffn_dim = 0;        // D, must be a multiple of d
    int blocks = 0;         // N, transformer block count
    int heads = 0;          // H
    int seq_len = 0;        // L, tokens
    int weight_bits = 8;
    int act_bits = 8;

    int head_dim() const { return heads > 0 ? embed_dim / heads : 0; }   // d_h
    int ffn_splits() const { return embed_dim > 0 ? ffn_dim / embed_dim : 0; }  // k
};

/// Field-path diagnostics; empty means the spec is valid.
std::vector<std::string> check_spec(const ViTModelSpec& spec);

/// Built-in shapes for the standard ViT scales (patch-16, 224x224 inputs,
/// D = 4d). Patch embedding and the classifier head are not part of the
/// simulated graph; they are a constant offset outside the transformer
/// blocks.
const std::vector<ViTModelSpec>& vit_presets();
const ViTModelSpec* find_preset(const std::string& name);

enum class LayerKind { WQ, WK, WV, WO, W1Sub, W2Sub };
const char* layer_kind_name(LayerKind k);

enum class DynKind { QKT, PV };
enum class VecKind { SoftmaxLocal, GlobalNorm, LayerNorm, Gelu, ResidualAdd };

/// One static-weight linear layer after the FFN partition; all are d x d.
struct StaticLayer {
    int block = 0;
    LayerKind kind = LayerKind::WQ;
    int sub = -1;  // FFN sub-layer index, -1 for MHA projections
    int rows = 0;
    int cols = 0;

    std::string label() const;
};

struct DynamicOp {
    int block = 0;
    int head = 0;
    DynKind kind = DynKind::QKT;
};

struct VectorOp {
    int block = 0;
    VecKind kind = VecKind::LayerNorm;
    std::int64_t elements = 0;
};

struct NodeRef {
    enum class Cls { Static, Dynamic, Vector };
    Cls cls = Cls::Static;
    int index = 0;

    bool operator==(const NodeRef&) const = default;
};

/// The expanded per-inference operator graph. Edges reproduce the native
/// block-by-block execution order; the only static layers without an order
/// between them are the {WQ, WK, WV} triple of one block.
struct LayerGraph {
    ViTModelSpec spec;
    std::vector<StaticLayer> statics;
    std::vector<DynamicOp> dynamics;
    std::vector<VectorOp> vectors;
    std::vector<std::pair<NodeRef, NodeRef>> edges;

    /// Index into statics; throws InternalError if absent.
    int static_index(int block, LayerKind kind, int sub = -1) const;

    /// True iff the two static layers may be active at the same time:
    /// exactly the same-block {WQ, WK, WV} pairs.
    bool concurrent(int a, int b) const;
};

/// Expands a validated spec; throws ConfigError when invariants fail
/// (notably D not divisible by d).
LayerGraph expand_model(const ViTModelSpec& spec);

struct MacCount {
    std::int64_t static_macs = 0;   // N*L*(4d^2 + 2dD)
    std::int64_t dynamic_macs = 0;  // 2*N*H*L^2*d_h
    std::int64_t vector_ops = 0;    // one op per processed element

    std::int64_t total_ops() const { return 2 * (static_macs + dynamic_macs) + vector_ops; }
};

MacCount mac_count(const ViTModelSpec& spec);

/// Total pretrained weight elements held stationary in ACIM: N*(4d^2 + 2dD).
std::int64_t static_weight_count(const ViTModelSpec& spec);

/// Splits W1 (d x D) along columns or W2 (D x d) along rows into k square
/// d x d sub-layers. Throws ConfigError when the shape does not divide.
template <typename T>
std::vector<Mat<T>> ffn_partition(const Mat<T>& w, int k, LayerKind which);

extern template std::vector<Mat<float>> ffn_partition<float>(const Mat<float>&, int, LayerKind);
extern template std::vector<Mat<double>> ffn_partition<double>(const Mat<double>&, int, LayerKind);

}  // namespace hemlet::workload
