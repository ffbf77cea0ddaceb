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

#include "fabsim/error.hpp"
#include "fabsim/kernels.hpp"

#include "oracle/oracle.hpp"
#include "support/errors.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fabsim;
using fabsim::test::code_of;

namespace {

std::vector<std::uint8_t> oracle_blur(const PixelImage& img) {
    return oracle::blur(oracle::make(img.width(), img.height(), img.data()));
}

std::vector<std::uint8_t> oracle_edges(const PixelImage& img, int threshold) {
    return oracle::edges(oracle::make(img.width(), img.height(), img.data()), threshold);
}

std::vector<std::uint8_t> bytes_of(std::span<const std::uint8_t> s) {
    return {s.begin(), s.end()};
}

} // namespace

TEST(Gaussian, CenterTapIs36) {
    EXPECT_EQ(make_gaussian_5x5().taps[2][2], 36);
}

TEST(Gaussian, CornerTapIs1) {
    const ConvKernel k = make_gaussian_5x5();
    EXPECT_EQ(k.taps[0][0], 1);
    EXPECT_EQ(k.taps[4][4], 1);
    EXPECT_EQ(k.taps[0][4], 1);
}

TEST(Gaussian, TapsSumToDivisor) {
    const ConvKernel k = make_gaussian_5x5();
    EXPECT_EQ(k.tap_sum(), 256);
    EXPECT_EQ(k.divisor, 256);
    for (const auto& row : k.taps) {
        for (int t : row) {
            EXPECT_GE(t, 0);
        }
    }
}

TEST(Conv2d, ConstantImageIsPreserved) {
    const PixelImage img(12, 9, 100);
    EXPECT_EQ(conv2d_reference(img, make_gaussian_5x5()), img);
}

TEST(Conv2d, ConstantPreservedForEveryLevel) {
    for (int v = 0; v < 256; ++v) {
        const PixelImage img(7, 6, static_cast<std::uint8_t>(v));
        ASSERT_EQ(conv2d_reference(img, make_gaussian_5x5()), img) << "level " << v;
    }
}

// Direct per-tap evaluation: only the impulse contributes, so the output at
// offset (dy, dx) from the centre is floor(255 * tap / 256).
TEST(Conv2d, ImpulseGivesScaledTaps) {
    PixelImage img(9, 9);
    img(4, 4) = 255;
    const PixelImage out = conv2d_reference(img, make_gaussian_5x5());
    const int expected[5][5] = {
        {0, 3, 5, 3, 0},
        {3, 15, 23, 15, 3},
        {5, 23, 35, 23, 5},
        {3, 15, 23, 15, 3},
        {0, 3, 5, 3, 0},
    };
    for (int r = 0; r < 9; ++r) {
        for (int c = 0; c < 9; ++c) {
            const bool inside = r >= 2 && r <= 6 && c >= 2 && c <= 6;
            const int want = inside ? expected[r - 2][c - 2] : 0;
            EXPECT_EQ(out(r, c), want) << r << "," << c;
        }
    }
}

TEST(Conv2d, FourByFourIsTooSmall) {
    EXPECT_EQ(code_of([] { conv2d_reference(PixelImage(4, 4), make_gaussian_5x5()); }), ErrorCode::image_too_small);
    EXPECT_EQ(code_of([] { conv2d_reference(PixelImage(5, 4), make_gaussian_5x5()); }), ErrorCode::image_too_small);
}

TEST(Conv2d, NegativeTapsFloorAndClamp) {
    ConvKernel k;
    k.taps[2][2] = 2;
    k.taps[2][1] = -3;
    k.divisor = 2;
    PixelImage img(5, 5);
    img(2, 2) = 1;
    img(2, 1) = 1;
    const PixelImage out = conv2d_reference(img, k);
    // 2*1 - 3*1 = -1, floor(-1/2) = -1, clamped to 0
    EXPECT_EQ(out(2, 2), 0);
    // 2*1 - 3*0 = 2 -> 1
    EXPECT_EQ(out(2, 1), 1);
}

TEST(Conv2dProperty, MatchesBruteForceOracle) {
    std::mt19937 rng(31);
    for (int i = 0; i < 200; ++i) {
        const int w = 5 + static_cast<int>(rng() % 30);
        const int h = 5 + static_cast<int>(rng() % 30);
        const PixelImage img = test::random_pixels(rng, w, h);
        ASSERT_EQ(bytes_of(conv2d_reference(img, make_gaussian_5x5()).samples()), oracle_blur(img));
    }
}

TEST(Canny, ConstantImageHasNoEdges) {
    const EdgeMap out = canny_reference(PixelImage(10, 10, 77));
    EXPECT_EQ(out, EdgeMap(10, 10));
}

// Brute-force oracle on the 16x16 step: columns 7 and 8 both have magnitude
// 4 * 255 = 1020; the strict comparison against the left neighbour keeps only
// column 7. Rows 0 and 15 are the zeroed border ring.
TEST(Canny, VerticalStepGivesOneColumn) {
    const PixelImage img = test::vertical_step(16, 16);
    const EdgeMap out = canny_reference(img, 128);
    const std::vector<std::uint8_t> want = oracle_edges(img, 128);
    EXPECT_EQ(bytes_of(out.samples()), want);
    const oracle::Gray g = oracle::make(16, 16, img.data());
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
            const bool edge = c == 7 && r >= 1 && r <= 14;
            EXPECT_EQ(out(r, c), edge ? kEdge : kNoEdge) << r << "," << c;
            if (edge) {
                EXPECT_EQ(oracle::sobel(g, r, c).mag, 1020);
            }
        }
    }
}

TEST(Canny, HorizontalStepIsTransposeOfVertical) {
    const PixelImage vertical = test::vertical_step(16, 16);
    const PixelImage horizontal = transpose(vertical);
    const EdgeMap out = canny_reference(horizontal, 128);
    EXPECT_EQ(out, transpose(canny_reference(vertical, 128)));
    EXPECT_EQ(bytes_of(out.samples()), oracle_edges(horizontal, 128));
    int count = 0;
    for (int c = 0; c < 16; ++c) {
        count += out(7, c) == kEdge;
    }
    EXPECT_EQ(count, 14);
}

TEST(Canny, TwoByTwoIsTooSmall) {
    EXPECT_EQ(code_of([] { canny_reference(PixelImage(2, 5)); }), ErrorCode::image_too_small);
}

TEST(Canny, OutputIsBinaryWithZeroBorder) {
    std::mt19937 rng(8);
    const PixelImage img = test::random_pixels(rng, 20, 13);
    const EdgeMap out = canny_reference(img, 100);
    EXPECT_TRUE(is_binary(out));
    for (int c = 0; c < 20; ++c) {
        EXPECT_EQ(out(0, c), 0);
        EXPECT_EQ(out(12, c), 0);
    }
    for (int r = 0; r < 13; ++r) {
        EXPECT_EQ(out(r, 0), 0);
        EXPECT_EQ(out(r, 19), 0);
    }
}

TEST(CannyProperty, MatchesBruteForceOracle) {
    std::mt19937 rng(41);
    for (int i = 0; i < 300; ++i) {
        const int w = 3 + static_cast<int>(rng() % 30);
        const int h = 3 + static_cast<int>(rng() % 30);
        const int threshold = static_cast<int>(rng() % 400);
        const PixelImage img = i % 2 == 0 ? test::random_pixels(rng, w, h) : test::random_scene(rng, w, h);
        ASSERT_EQ(bytes_of(canny_reference(img, threshold).samples()), oracle_edges(img, threshold))
            << w << "x" << h << " threshold " << threshold;
    }
}

TEST(CannyProperty, TransposeSymmetry) {
    std::mt19937 rng(42);
    for (int i = 0; i < 300; ++i) {
        const int w = 3 + static_cast<int>(rng() % 24);
        const int h = 3 + static_cast<int>(rng() % 24);
        const int threshold = static_cast<int>(rng() % 300);
        const PixelImage img = i % 2 == 0 ? test::random_pixels(rng, w, h) : test::random_scene(rng, w, h);
        ASSERT_EQ(canny_reference(transpose(img), threshold), transpose(canny_reference(img, threshold)))
            << w << "x" << h << " threshold " << threshold;
    }
}

TEST(CannyProperty, SobelStaysWithinBounds) {
    std::mt19937 rng(43);
    for (int i = 0; i < 100; ++i) {
        const PixelImage img = test::random_pixels(rng, 8, 8);
        const oracle::Gray g = oracle::make(8, 8, img.data());
        for (int r = 1; r < 7; ++r) {
            for (int c = 1; c < 7; ++c) {
                const oracle::Grad d = oracle::sobel(g, r, c);
                ASSERT_LE(std::llabs(d.gx), 4 * 255);
                ASSERT_LE(std::llabs(d.gy), 4 * 255);
            }
        }
    }
}

TEST(Direction, BinBoundaries) {
    EXPECT_EQ(quantize_direction(256, 105), GradientBin::horizontal);
    EXPECT_EQ(quantize_direction(256, 106), GradientBin::diagonal);
    EXPECT_EQ(quantize_direction(-256, 106), GradientBin::antidiagonal);
    EXPECT_EQ(quantize_direction(105, 256), GradientBin::vertical);
    EXPECT_EQ(quantize_direction(106, -256), GradientBin::antidiagonal);
    EXPECT_EQ(quantize_direction(5, 0), GradientBin::horizontal);
    EXPECT_EQ(quantize_direction(0, -5), GradientBin::vertical);
    EXPECT_EQ(quantize_direction(7, 7), GradientBin::diagonal);
    EXPECT_EQ(quantize_direction(-7, -7), GradientBin::diagonal);
    EXPECT_EQ(quantize_direction(-7, 7), GradientBin::antidiagonal);
}

TEST(DirectionProperty, BinsMirrorUnderTranspose) {
    std::mt19937 rng(44);
    std::uniform_int_distribution<int> d(-1020, 1020);
    for (int i = 0; i < 100000; ++i) {
        const int gx = d(rng);
        const int gy = d(rng);
        if (gx == 0 && gy == 0) {
            continue;
        }
        const GradientBin a = quantize_direction(gx, gy);
        const GradientBin b = quantize_direction(gy, gx);
        const GradientBin mirrored = a == GradientBin::horizontal ? GradientBin::vertical
                                     : a == GradientBin::vertical ? GradientBin::horizontal
                                                                  : a;
        ASSERT_EQ(b, mirrored) << gx << "," << gy;
    }
}

TEST(Latency, ConvAt1024Is2054) {
    EXPECT_EQ(latency_of(KernelKind::conv, 1024), 2 * 1024 + 2 + 4);
}

// Sobel followed by suppression needs two rows and two pixels of look-ahead,
// the same as a 5x5 window.
TEST(Latency, CannyAt1024Is2056) {
    EXPECT_EQ(latency_of(KernelKind::canny, 1024), 2 * 1024 + 2 + 6);
}

TEST(Latency, WidthBelowWindowIsPrecondition) {
    EXPECT_EQ(code_of([] { latency_of(KernelKind::conv, 4); }), ErrorCode::precondition);
    EXPECT_EQ(code_of([] { latency_of(KernelKind::conv, 1024, 0); }), ErrorCode::precondition);
}

TEST(Latency, DepthOverride) {
    EXPECT_EQ(latency_of(KernelKind::conv, 100, 1), 203);
    EXPECT_EQ(lookahead_of(KernelKind::identity, 100), 0);
}

TEST(KernelKind, StringRoundTrip) {
    for (KernelKind k : {KernelKind::conv, KernelKind::canny, KernelKind::identity}) {
        EXPECT_EQ(kernel_kind_from_string(to_string(k)), k);
    }
    EXPECT_EQ(code_of([] { kernel_kind_from_string("sobel"); }), ErrorCode::invalid_argument);
}
