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

#include "hemlet/numerics.hpp"

namespace hemlet::numerics {

SoftmaxOpCounts softmax_op_counts(int seq_len, int block_tokens, int head_dim) {
    if (seq_len <= 0 || head_dim <= 0) throw ConfigError("softmax_op_counts: L, d_h must be > 0");
    if (block_tokens < 1 || block_tokens > seq_len)
        throw ConfigError("softmax_op_counts: block size must be in [1, L]");
    SoftmaxOpCounts c;
    c.blocks = (seq_len + block_tokens - 1) / block_tokens;
    c.exp_per_row = seq_len;
    c.sum_per_row = seq_len;
    c.rescale_per_row = (c.blocks - 1) * static_cast<std::int64_t>(head_dim);
    c.final_div_per_row = head_dim;
    return c;
}

}  // namespace hemlet::numerics
