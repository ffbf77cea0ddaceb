/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include "fabsim/image.hpp"
#include "fabsim/kernels.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace fabsim {

/// Parameters shared by every software edge-detection pipeline.
struct PipelineParams {
    ConvKernel conv = make_gaussian_5x5();
    int threshold = kDefaultThreshold;
    int thread_count = 1;
};

/// Direct 25-tap convolution followed by Sobel and suppression, one thread.
EdgeMap edge_detect_naive(const PixelImage& image, const PipelineParams& params = {});

/// The naive algorithm split into row bands, one band per thread. Bands read
/// halo rows from their neighbours but only write their own rows.
EdgeMap edge_detect_threaded(const PixelImage& image, const PipelineParams& params = {});

/// Separable convolution with 32-bit intermediates and a single final division,
/// then a fused gradient + suppression pass. Threaded over row bands.
/// Requires a separable kernel; the binomial Gaussian is one.
EdgeMap edge_detect_optimized(const PixelImage& image, const PipelineParams& params = {});

/// Row and column factors when `kernel` is an outer product of two integer
/// vectors, empty otherwise.
struct SeparableFactors {
    std::array<std::int32_t, ConvKernel::kSize> column{};
    std::array<std::int32_t, ConvKernel::kSize> row{};
};
std::optional<SeparableFactors> separate(const ConvKernel& kernel);

} // namespace fabsim
