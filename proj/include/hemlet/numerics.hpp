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

#include <cmath>
#include <cstdint>

#include "hemlet/matrix.hpp"

namespace hemlet::numerics {

/// Functional attention inputs. Q, K, V are L x d_h; block_tokens is the
/// B_L used by the blocked path. scale applies the standard 1/sqrt(d_h)
/// factor (on by default, can be switched off).
template <typename T>
struct AttentionInput {
    Mat<T> q;
    Mat<T> k;
    Mat<T> v;
    int block_tokens = 0;
    bool scale = true;
};

template <typename T>
void check_attention_input(const AttentionInput<T>& in) {
    if (in.q.rows <= 0 || in.q.cols <= 0) throw ConfigError("attention: L and d_h must be > 0");
    if (!in.q.same_shape(in.k) || !in.q.same_shape(in.v))
        throw ConfigError("attention: Q, K, V must share the L x d_h shape");
    if (in.block_tokens < 1 || in.block_tokens > in.q.rows)
        throw ConfigError("attention: block size must be in [1, L]");
}

/// Reference path: row-wise numerically stable softmax of scale * Q K^T,
/// then the product with V.
template <typename T>
Mat<T> dense_attention(const AttentionInput<T>& in) {
    check_attention_input(in);
    const int L = in.q.rows;
    const int dh = in.q.cols;
    const T s = in.scale ? static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh))) : T(1);

    Mat<T> out(L, dh);
    std::vector<T> logits(static_cast<size_t>(L));
    for (int i = 0; i < L; ++i) {
        T row_max = -std::numeric_limits<T>::infinity();
        for (int j = 0; j < L; ++j) {
            T acc = 0;
            for (int c = 0; c < dh; ++c) acc += in.q(i, c) * in.k(j, c);
            logits[static_cast<size_t>(j)] = acc * s;
            row_max = std::max(row_max, logits[static_cast<size_t>(j)]);
        }
        T denom = 0;
        for (int j = 0; j < L; ++j) {
            logits[static_cast<size_t>(j)] = std::exp(logits[static_cast<size_t>(j)] - row_max);
            denom += logits[static_cast<size_t>(j)];
        }
        for (int c = 0; c < dh; ++c) {
            T acc = 0;
            for (int j = 0; j < L; ++j) acc += logits[static_cast<size_t>(j)] * in.v(j, c);
            out(i, c) = acc / denom;
        }
    }
    return out;
}

/// Blocked two-stage softmax attention: K/V are visited in B_L-sized
/// blocks, each P' block gets a local softmax against the running row
/// maximum, the accumulated S' is rescaled whenever the maximum moves, and
/// one global normalization finishes the row. O(d_h) extra state per row.
template <typename T>
Mat<T> blocked_attention(const AttentionInput<T>& in) {
    check_attention_input(in);
    const int L = in.q.rows;
    const int dh = in.q.cols;
    const int bl = in.block_tokens;
    const T s = in.scale ? static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh))) : T(1);

    Mat<T> acc(L, dh);
    std::vector<T> run_max(static_cast<size_t>(L), -std::numeric_limits<T>::infinity());
    std::vector<T> run_den(static_cast<size_t>(L), T(0));
    std::vector<T> block_logits(static_cast<size_t>(bl));

    for (int j0 = 0; j0 < L; j0 += bl) {
        const int jn = std::min(bl, L - j0);
        for (int i = 0; i < L; ++i) {
            T blk_max = -std::numeric_limits<T>::infinity();
            for (int j = 0; j < jn; ++j) {
                T dot = 0;
                for (int c = 0; c < dh; ++c) dot += in.q(i, c) * in.k(j0 + j, c);
                block_logits[static_cast<size_t>(j)] = dot * s;
                blk_max = std::max(blk_max, block_logits[static_cast<size_t>(j)]);
            }
            const T new_max = std::max(run_max[static_cast<size_t>(i)], blk_max);
            const T carry = run_den[static_cast<size_t>(i)] > 0
                                ? std::exp(run_max[static_cast<size_t>(i)] - new_max)
                                : T(0);
            if (carry != T(1)) {
                run_den[static_cast<size_t>(i)] *= carry;
                for (int c = 0; c < dh; ++c) acc(i, c) *= carry;
            }
            for (int j = 0; j < jn; ++j) {
                const T p = std::exp(block_logits[static_cast<size_t>(j)] - new_max);
                run_den[static_cast<size_t>(i)] += p;
                for (int c = 0; c < dh; ++c) acc(i, c) += p * in.v(j0 + j, c);
            }
            run_max[static_cast<size_t>(i)] = new_max;
        }
    }
    for (int i = 0; i < L; ++i)
        for (int c = 0; c < dh; ++c) acc(i, c) /= run_den[static_cast<size_t>(i)];
    return acc;
}

/// Per-row element counts the engine charges to SIMD for the two-stage
/// softmax. rescale is the worst case (every block moves the maximum).
struct SoftmaxOpCounts {
    std::int64_t blocks = 0;
    std::int64_t exp_per_row = 0;       // = L, blocking-independent
    std::int64_t sum_per_row = 0;       // denominator accumulation, = L
    std::int64_t rescale_per_row = 0;   // (blocks - 1) * d_h worst case
    std::int64_t final_div_per_row = 0; // d_h (dense path normalizes L weights instead)

    std::int64_t total_per_row() const {
        return exp_per_row + sum_per_row + rescale_per_row + final_div_per_row;
    }
};

SoftmaxOpCounts softmax_op_counts(int seq_len, int block_tokens, int head_dim);

}  // namespace hemlet::numerics
