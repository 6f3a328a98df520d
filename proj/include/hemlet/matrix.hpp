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
#include <random>
#include <vector>

#include "hemlet/errors.hpp"

namespace hemlet {

/// Dense row-major matrix. Shared by the functional attention model, the
/// FFN partition and the column interleaver; the performance model itself
/// only ever looks at shapes.
template <typename T>
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<T> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, T(0)) {
        if (r < 0 || c < 0) throw InternalError("matrix dimensions must be non-negative");
    }

    T& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    const T& operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && data == o.data; }

    /// Seeded uniform values in [-1, 1); mt19937_64 so results are identical
    /// across platforms.
    static Mat random(int r, int c, std::uint64_t seed) {
        Mat m(r, c);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (auto& v : m.data) v = static_cast<T>(dist(rng));
        return m;
    }
};

using MatF = Mat<float>;
using MatD = Mat<double>;

}  // namespace hemlet
