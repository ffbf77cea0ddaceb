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

#include "fabsim/pipelines.hpp"

#include "fabsim/error.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace fabsim {

namespace {

void check_input(const PixelImage& image, const PipelineParams& params) {
    if (image.width() < 5 || image.height() < 5) {
        fail(ErrorCode::image_too_small, "edge detection needs at least 5x5, got " + std::to_string(image.width()) +
                                             "x" + std::to_string(image.height()));
    }
    if (params.thread_count < 1) {
        fail(ErrorCode::invalid_argument, "thread_count must be at least 1");
    }
    if (params.conv.divisor <= 0) {
        fail(ErrorCode::invalid_argument, "convolution divisor must be positive");
    }
}

inline std::uint8_t finish(std::int32_t acc, std::int32_t divisor) noexcept {
    const std::int32_t q = acc >= 0 ? acc / divisor : -((-acc + divisor - 1) / divisor);
    return static_cast<std::uint8_t>(std::clamp<std::int32_t>(q, 0, 255));
}

inline int band_begin(int rows, int band, int bands) noexcept {
    return static_cast<int>(static_cast<long long>(rows) * band / bands);
}

// Direct 5x5 convolution of output rows [r0, r1) into `out` (row-major, full width).
void conv_rows(const PixelImage& image, const ConvKernel& kernel, int r0, int r1, std::uint8_t* out) {
    const int w = image.width();
    const int h = image.height();
    for (int r = r0; r < r1; ++r) {
        for (int c = 0; c < w; ++c) {
            std::int32_t acc = 0;
            for (int ky = 0; ky < 5; ++ky) {
                const int rr = std::clamp(r + ky - 2, 0, h - 1);
                for (int kx = 0; kx < 5; ++kx) {
                    const int cc = std::clamp(c + kx - 2, 0, w - 1);
                    acc += kernel.taps[ky][kx] * static_cast<std::int32_t>(image(rr, cc));
                }
            }
            out[static_cast<std::size_t>(r - r0) * w + c] = finish(acc, kernel.divisor);
        }
    }
}

// Sobel magnitude and direction bin of interior pixels in rows [r0, r1).
void gradient_rows(const PixelImage& blur, int r0, int r1, std::int32_t* magnitude, GradientBin* bins) {
    const int w = blur.width();
    const int h = blur.height();
    auto px = [&](int r, int c) { return static_cast<std::int32_t>(blur(r, c)); };
    for (int r = std::max(r0, 1); r < std::min(r1, h - 1); ++r) {
        for (int c = 1; c < w - 1; ++c) {
            const std::int32_t gx = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1)) -
                                    (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
            const std::int32_t gy = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1)) -
                                    (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            magnitude[i] = (gx < 0 ? -gx : gx) + (gy < 0 ? -gy : gy);
            bins[i] = quantize_direction(gx, gy);
        }
    }
}

void suppress_rows(const std::int32_t* magnitude, const GradientBin* bins, int w, int h, int threshold, int r0,
                   int r1, EdgeMap& out) {
    for (int r = std::max(r0, 1); r < std::min(r1, h - 1); ++r) {
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
}

struct Scratch {
    PixelImage blur;
    std::vector<std::int32_t> magnitude;
    std::vector<GradientBin> bins;

    explicit Scratch(const PixelImage& image)
        : blur(image.width(), image.height()),
          magnitude(image.size(), 0),
          bins(image.size(), GradientBin::horizontal) { }
};

} // namespace

EdgeMap edge_detect_naive(const PixelImage& image, const PipelineParams& params) {
    check_input(image, params);
    const int w = image.width();
    const int h = image.height();
    Scratch s(image);
    conv_rows(image, params.conv, 0, h, s.blur.data());
    gradient_rows(s.blur, 0, h, s.magnitude.data(), s.bins.data());
    EdgeMap out(w, h);
    suppress_rows(s.magnitude.data(), s.bins.data(), w, h, params.threshold, 0, h, out);
    return out;
}

EdgeMap edge_detect_threaded(const PixelImage& image, const PipelineParams& params) {
    check_input(image, params);
    const int w = image.width();
    const int h = image.height();
    Scratch s(image);
    EdgeMap out(w, h);
#pragma omp parallel num_threads(params.thread_count)
    {
        const int bands = omp_get_num_threads();
        const int band = omp_get_thread_num();
        const int r0 = band_begin(h, band, bands);
        const int r1 = band_begin(h, band + 1, bands);
        conv_rows(image, params.conv, r0, r1, s.blur.data() + static_cast<std::size_t>(r0) * w);
#pragma omp barrier
        gradient_rows(s.blur, r0, r1, s.magnitude.data(), s.bins.data());
#pragma omp barrier
        suppress_rows(s.magnitude.data(), s.bins.data(), w, h, params.threshold, r0, r1, out);
    }
    return out;
}

std::optional<SeparableFactors> separate(const ConvKernel& kernel) {
    constexpr int n = ConvKernel::kSize;
    int pivot_row = -1;
    for (int y = 0; y < n && pivot_row < 0; ++y) {
        for (int x = 0; x < n; ++x) {
            if (kernel.taps[y][x] != 0) {
                pivot_row = y;
                break;
            }
        }
    }
    if (pivot_row < 0) {
        return std::nullopt;
    }
    SeparableFactors f;
    std::int32_t g = 0;
    for (int x = 0; x < n; ++x) {
        g = std::gcd(g, kernel.taps[pivot_row][x]);
    }
    int pivot_col = 0;
    for (int x = 0; x < n; ++x) {
        f.row[x] = kernel.taps[pivot_row][x] / g;
        if (f.row[x] != 0 && f.row[pivot_col] == 0) {
            pivot_col = x;
        }
    }
    for (int y = 0; y < n; ++y) {
        if (kernel.taps[y][pivot_col] % f.row[pivot_col] != 0) {
            return std::nullopt;
        }
        f.column[y] = kernel.taps[y][pivot_col] / f.row[pivot_col];
    }
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            if (f.column[y] * f.row[x] != kernel.taps[y][x]) {
                return std::nullopt;
            }
        }
    }
    return f;
}

namespace {

// Blurred rows [b0, b1) of `image` via the separable factors. Each output row
// uses a ring of five horizontally filtered rows.
void separable_rows(const PixelImage& image, const SeparableFactors& f, std::int32_t divisor, int b0, int b1,
                    std::uint8_t* out) {
    const int w = image.width();
    const int h = image.height();
    std::vector<std::int32_t> ring(static_cast<std::size_t>(5) * w);
    auto horizontal = [&](int src_row, std::int32_t* dst) {
        const std::uint8_t* p = image.data() + static_cast<std::size_t>(src_row) * w;
        for (int c = 0; c < 2; ++c) {
            std::int32_t acc = 0;
            for (int k = 0; k < 5; ++k) {
                acc += f.row[k] * p[std::clamp(c + k - 2, 0, w - 1)];
            }
            dst[c] = acc;
        }
        const std::int32_t k0 = f.row[0], k1 = f.row[1], k2 = f.row[2], k3 = f.row[3], k4 = f.row[4];
        for (int c = 2; c < w - 2; ++c) {
            dst[c] = k0 * p[c - 2] + k1 * p[c - 1] + k2 * p[c] + k3 * p[c + 1] + k4 * p[c + 2];
        }
        for (int c = std::max(2, w - 2); c < w; ++c) {
            std::int32_t acc = 0;
            for (int k = 0; k < 5; ++k) {
                acc += f.row[k] * p[std::clamp(c + k - 2, 0, w - 1)];
            }
            dst[c] = acc;
        }
    };
    // ring slot of virtual source row v (may lie outside the image; clamped)
    auto slot = [&](int v) { return ring.data() + static_cast<std::size_t>(((v % 5) + 5) % 5) * w; };
    for (int v = b0 - 2; v < b0 + 2; ++v) {
        horizontal(std::clamp(v, 0, h - 1), slot(v));
    }
    for (int r = b0; r < b1; ++r) {
        horizontal(std::clamp(r + 2, 0, h - 1), slot(r + 2));
        const std::int32_t* t0 = slot(r - 2);
        const std::int32_t* t1 = slot(r - 1);
        const std::int32_t* t2 = slot(r);
        const std::int32_t* t3 = slot(r + 1);
        const std::int32_t* t4 = slot(r + 2);
        std::uint8_t* dst = out + static_cast<std::size_t>(r - b0) * w;
        const std::int32_t c0 = f.column[0], c1 = f.column[1], c2 = f.column[2], c3 = f.column[3], c4 = f.column[4];
        for (int c = 0; c < w; ++c) {
            const std::int32_t acc = c0 * t0[c] + c1 * t1[c] + c2 * t2[c] + c3 * t3[c] + c4 * t4[c];
            dst[c] = finish(acc, divisor);
        }
    }
}

// Gradient + suppression for output rows [r0, r1), reading blurred rows
// [r0 - 2, r1 + 2) from `blur`, whose first row is image row `blur_row0`.
void fused_edges(const std::uint8_t* blur, int blur_row0, int w, int h, int threshold, int r0, int r1,
                 EdgeMap& out) {
    std::vector<std::int32_t> mag(static_cast<std::size_t>(3) * w, 0);
    std::vector<GradientBin> bin(static_cast<std::size_t>(3) * w, GradientBin::horizontal);
    auto mag_row = [&](int r) { return mag.data() + static_cast<std::size_t>(((r % 3) + 3) % 3) * w; };
    auto bin_row = [&](int r) { return bin.data() + static_cast<std::size_t>(((r % 3) + 3) % 3) * w; };
    auto compute = [&](int r) {
        std::int32_t* m = mag_row(r);
        GradientBin* b = bin_row(r);
        if (r <= 0 || r >= h - 1) {
            std::fill(m, m + w, 0);
            return;
        }
        const std::uint8_t* up = blur + static_cast<std::size_t>(r - 1 - blur_row0) * w;
        const std::uint8_t* mid = up + w;
        const std::uint8_t* dn = mid + w;
        m[0] = 0;
        m[w - 1] = 0;
        for (int c = 1; c < w - 1; ++c) {
            const std::int32_t gx = (up[c + 1] + 2 * mid[c + 1] + dn[c + 1]) - (up[c - 1] + 2 * mid[c - 1] + dn[c - 1]);
            const std::int32_t gy = (dn[c - 1] + 2 * dn[c] + dn[c + 1]) - (up[c - 1] + 2 * up[c] + up[c + 1]);
            m[c] = (gx < 0 ? -gx : gx) + (gy < 0 ? -gy : gy);
            b[c] = quantize_direction(gx, gy);
        }
    };
    const int first = std::max(r0, 1);
    const int last = std::min(r1, h - 1);
    if (first >= last) {
        return;
    }
    compute(first - 1);
    compute(first);
    for (int r = first; r < last; ++r) {
        compute(r + 1);
        const std::int32_t* rows[3] = {mag_row(r - 1), mag_row(r), mag_row(r + 1)};
        const GradientBin* b = bin_row(r);
        for (int c = 1; c < w - 1; ++c) {
            const std::int32_t m = rows[1][c];
            if (m < threshold) {
                continue;
            }
            const NmsNeighbors n = nms_neighbors(b[c]);
            const std::int32_t a = rows[1 + n.first_dr][c + n.first_dc];
            const std::int32_t z = rows[1 + n.second_dr][c + n.second_dc];
            if (survives_nms(m, b[c], a, z)) {
                out(r, c) = kEdge;
            }
        }
    }
}

} // namespace

EdgeMap edge_detect_optimized(const PixelImage& image, const PipelineParams& params) {
    check_input(image, params);
    const int w = image.width();
    const int h = image.height();
    const std::optional<SeparableFactors> factors = separate(params.conv);
    EdgeMap out(w, h);
#pragma omp parallel num_threads(params.thread_count)
    {
        const int bands = omp_get_num_threads();
        const int band = omp_get_thread_num();
        const int r0 = band_begin(h, band, bands);
        const int r1 = band_begin(h, band + 1, bands);
        if (r0 < r1) {
            // blurred rows this band needs, halo included
            const int b0 = std::max(r0 - 2, 0);
            const int b1 = std::min(r1 + 2, h);
            std::vector<std::uint8_t> blur(static_cast<std::size_t>(b1 - b0) * w);
            if (factors) {
                separable_rows(image, *factors, params.conv.divisor, b0, b1, blur.data());
            } else {
                conv_rows(image, params.conv, b0, b1, blur.data());
            }
            fused_edges(blur.data(), b0, w, h, params.threshold, r0, r1, out);
        }
    }
    return out;
}

} // namespace fabsim
