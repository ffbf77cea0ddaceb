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

#include "fabsim/kernels.hpp"

#include "fabsim/error.hpp"

#include <algorithm>
#include <cassert>
#include <string>
#include <vector>

namespace fabsim {

std::string_view to_string(KernelKind kind) noexcept {
    switch (kind) {
    case KernelKind::conv: return "conv";
    case KernelKind::canny: return "canny";
    case KernelKind::identity: return "identity";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(std::string_view text) {
    if (text == "conv") return KernelKind::conv;
    if (text == "canny") return KernelKind::canny;
    if (text == "identity") return KernelKind::identity;
    fail(ErrorCode::invalid_argument, "unknown kernel kind '" + std::string(text) + "'");
}

std::int32_t ConvKernel::tap_sum() const noexcept {
    std::int32_t sum = 0;
    for (const auto& row : taps) {
        for (std::int32_t t : row) {
            sum += t;
        }
    }
    return sum;
}

ConvKernel make_gaussian_5x5() {
    ConvKernel k;
    for (int y = 0; y < ConvKernel::kSize; ++y) {
        for (int x = 0; x < ConvKernel::kSize; ++x) {
            k.taps[y][x] = kBinomialRow[y] * kBinomialRow[x];
        }
    }
    k.divisor = 256;
    return k;
}

PixelImage conv2d_reference(const PixelImage& image, const ConvKernel& kernel) {
    const int w = image.width();
    const int h = image.height();
    if (w < 5 || h < 5) {
        fail(ErrorCode::image_too_small, "convolution needs at least 5x5, got " + std::to_string(w) + "x" +
                                             std::to_string(h));
    }
    if (kernel.divisor <= 0) {
        fail(ErrorCode::invalid_argument, "convolution divisor must be positive");
    }
    PixelImage out(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            std::int32_t acc = 0;
            for (int ky = 0; ky < 5; ++ky) {
                const int rr = std::clamp(r + ky - 2, 0, h - 1);
                for (int kx = 0; kx < 5; ++kx) {
                    const int cc = std::clamp(c + kx - 2, 0, w - 1);
                    acc += kernel.taps[ky][kx] * static_cast<std::int32_t>(image(rr, cc));
                }
            }
            const std::int32_t q = acc >= 0 ? acc / kernel.divisor : -((-acc + kernel.divisor - 1) / kernel.divisor);
            out(r, c) = static_cast<std::uint8_t>(std::clamp<std::int32_t>(q, 0, 255));
        }
    }
    return out;
}

EdgeMap canny_reference(const PixelImage& image, int threshold) {
    const int w = image.width();
    const int h = image.height();
    if (w < 3 || h < 3) {
        fail(ErrorCode::image_too_small, "edge detection needs at least 3x3, got " + std::to_string(w) + "x" +
                                             std::to_string(h));
    }
    std::vector<std::int32_t> magnitude(static_cast<std::size_t>(w) * h, 0);
    std::vector<GradientBin> bins(magnitude.size(), GradientBin::horizontal);
    auto px = [&](int r, int c) { return static_cast<std::int32_t>(image(r, c)); };
    for (int r = 1; r < h - 1; ++r) {
        for (int c = 1; c < w - 1; ++c) {
            const std::int32_t gx = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1)) -
                                    (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
            const std::int32_t gy = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1)) -
                                    (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
            assert(gx >= -4 * 255 && gx <= 4 * 255 && gy >= -4 * 255 && gy <= 4 * 255);
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            magnitude[i] = (gx < 0 ? -gx : gx) + (gy < 0 ? -gy : gy);
            bins[i] = quantize_direction(gx, gy);
        }
    }
    EdgeMap out(w, h);
    for (int r = 1; r < h - 1; ++r) {
        for (int c = 1; c < w - 1; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            const std::int32_t m = magnitude[i];
            if (m < threshold) {
                continue;
            }
            const NmsNeighbors n = nms_neighbors(bins[i]);
            const std::int32_t first = magnitude[static_cast<std::size_t>(r + n.first_dr) * w + c + n.first_dc];
            const std::int32_t second = magnitude[static_cast<std::size_t>(r + n.second_dr) * w + c + n.second_dc];
            if (survives_nms(m, bins[i], first, second)) {
                out(r, c) = kEdge;
            }
        }
    }
    return out;
}

KernelGeometry geometry_of(KernelKind kind) noexcept {
    switch (kind) {
    case KernelKind::conv: return {5, 4, 5};
    case KernelKind::canny: return {5, 6, 3};
    case KernelKind::identity: return {1, 1, 1};
    }
    return {1, 1, 1};
}

std::int64_t lookahead_of(KernelKind kind, int frame_width) noexcept {
    const std::int64_t half = (geometry_of(kind).window - 1) / 2;
    return half * frame_width + half;
}

std::int64_t latency_of(KernelKind kind, int frame_width) {
    return latency_of(kind, frame_width, geometry_of(kind).pipeline_depth);
}

std::int64_t latency_of(KernelKind kind, int frame_width, int pipeline_depth) {
    const KernelGeometry g = geometry_of(kind);
    if (frame_width < g.min_width) {
        fail(ErrorCode::precondition, std::string(to_string(kind)) + " needs frame width >= " +
                                          std::to_string(g.min_width) + ", got " + std::to_string(frame_width));
    }
    if (pipeline_depth < 1) {
        fail(ErrorCode::precondition, "pipeline depth must be at least 1");
    }
    return lookahead_of(kind, frame_width) + pipeline_depth;
}

} // namespace fabsim
