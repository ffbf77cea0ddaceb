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

#include <array>
#include <cstdint>
#include <string_view>

namespace fabsim {

enum class KernelKind { conv, canny, identity };

std::string_view to_string(KernelKind kind) noexcept;
KernelKind kernel_kind_from_string(std::string_view text);

/// 5x5 integer convolution with a positive divisor. The taps sum to the
/// divisor so constant images pass through unchanged.
struct ConvKernel {
    static constexpr int kSize = 5;
    std::array<std::array<std::int32_t, kSize>, kSize> taps{};
    std::int32_t divisor = 1;

    std::int32_t tap_sum() const noexcept;
    bool operator==(const ConvKernel&) const = default;
};

/// Binomial Gaussian approximation: outer product of [1 4 6 4 1], divisor 256.
ConvKernel make_gaussian_5x5();

inline constexpr std::array<std::int32_t, 5> kBinomialRow{1, 4, 6, 4, 1};

/// Default single edge threshold on the L1 gradient magnitude.
inline constexpr int kDefaultThreshold = 128;

/// Whole-image 5x5 convolution with 32-bit signed accumulation, edge-replicated
/// borders and floor division. Requires at least 5x5.
PixelImage conv2d_reference(const PixelImage& image, const ConvKernel& kernel);

/// Sobel gradients, L1 magnitude, 4-bin direction quantisation and non-max
/// suppression. A pixel is an edge when it survives suppression and its
/// magnitude reaches `threshold`. The 1-pixel border ring is always 0 and
/// border magnitudes count as 0 for suppression. Requires at least 3x3.
EdgeMap canny_reference(const PixelImage& image, int threshold = kDefaultThreshold);

// Gradient direction and suppression rules shared by every implementation.

enum class GradientBin : std::uint8_t { horizontal, diagonal, vertical, antidiagonal };

/// tan(22.5 deg) ~= 106/256.
inline constexpr int kTanNumerator = 106;
inline constexpr int kTanDenominator = 256;

/// Horizontal when 256|gy| < 106|gx|, vertical when 256|gx| < 106|gy|,
/// otherwise one of the diagonals by the sign agreement of gx and gy.
constexpr GradientBin quantize_direction(std::int32_t gx, std::int32_t gy) noexcept {
    const std::int32_t ax = gx < 0 ? -gx : gx;
    const std::int32_t ay = gy < 0 ? -gy : gy;
    if (kTanDenominator * ay < kTanNumerator * ax) {
        return GradientBin::horizontal;
    }
    if (kTanDenominator * ax < kTanNumerator * ay) {
        return GradientBin::vertical;
    }
    return (gx > 0) == (gy > 0) ? GradientBin::diagonal : GradientBin::antidiagonal;
}

/// Row/column offsets of the two neighbours compared during suppression.
/// `first` is the neighbour with the smaller row+column sum.
struct NmsNeighbors {
    int first_dr, first_dc;
    int second_dr, second_dc;
};

constexpr NmsNeighbors nms_neighbors(GradientBin bin) noexcept {
    switch (bin) {
    case GradientBin::horizontal: return {0, -1, 0, 1};
    case GradientBin::vertical: return {-1, 0, 1, 0};
    case GradientBin::diagonal: return {-1, -1, 1, 1};
    case GradientBin::antidiagonal: return {-1, 1, 1, -1};
    }
    return {0, 0, 0, 0};
}

/// Strictly greater than `first`, at least `second`. On the anti-diagonal
/// both neighbours share a coordinate sum, so both comparisons are >=; this
/// keeps the rule symmetric under transposition.
constexpr bool survives_nms(std::int32_t magnitude, GradientBin bin, std::int32_t first,
                            std::int32_t second) noexcept {
    if (bin == GradientBin::antidiagonal) {
        return magnitude >= first && magnitude >= second;
    }
    return magnitude > first && magnitude >= second;
}

/// Window size and default pipeline depth of each streaming kernel. Canny is
/// two cascaded 3x3 windows (Sobel, then suppression), so its look-ahead is
/// that of a 5x5 window.
struct KernelGeometry {
    int window;           // effective square window, odd
    int pipeline_depth;   // default register stages after window formation
    int min_width;        // smallest frame width the line buffers support
};

KernelGeometry geometry_of(KernelKind kind) noexcept;

/// Cycles from the first accepted input pixel to the first valid output:
/// (K-1)/2 * width + (K-1)/2 + pipeline_depth. Throws precondition-violation
/// when the width is below the window size.
std::int64_t latency_of(KernelKind kind, int frame_width);
std::int64_t latency_of(KernelKind kind, int frame_width, int pipeline_depth);

/// Look-ahead in raster positions (latency without the pipeline depth).
std::int64_t lookahead_of(KernelKind kind, int frame_width) noexcept;

} // namespace fabsim
