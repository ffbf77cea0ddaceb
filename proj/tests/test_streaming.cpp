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
#include "fabsim/streaming_kernels.hpp"

#include "support/errors.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fabsim;
using fabsim::test::code_of;
using fabsim::test::VectorSink;
using fabsim::test::VectorSource;

namespace {

struct Rig {
    StreamSwitch sw;
    VectorSource src{"src", &sw};
    VectorSink sink{"sink", &sw};
    std::unique_ptr<StreamingKernel> kernel;
    PortId sink_port = 0;

    Rig(KernelKind kind, StreamingParams params) {
        kernel = make_streaming(kind, "k", params);
        const PortId s = sw.attach_port(src, PortDirection::producer);
        sink_port = sw.attach_port(sink, PortDirection::consumer);
        const PortId in = sw.attach_port(kernel->input(), PortDirection::consumer);
        const PortId out = sw.attach_port(kernel->output(), PortDirection::producer);
        sw.add_component(*kernel);
        sw.configure_route(s, in);
        sw.configure_route(out, sink_port);
    }

    CycleStats run(const PixelImage& img) {
        src.load({img.samples().begin(), img.samples().end()});
        sink.tokens.clear();
        sink.cycles.clear();
        return sw.run_frame(sink_port, 4 * img.size() + 10000);
    }
};

std::vector<std::uint8_t> flat(std::span<const std::uint8_t> s) {
    return {s.begin(), s.end()};
}

} // namespace

TEST(StreamingConv, ConstantFrameStaysConstant) {
    Rig rig(KernelKind::conv, {16, 12});
    rig.run(PixelImage(16, 12, 100));
    ASSERT_EQ(rig.sink.tokens.size(), 16u * 12u);
    for (const StreamToken& t : rig.sink.tokens) {
        EXPECT_EQ(t.payload, 100u);
    }
}

TEST(StreamingConv, Random32x32MatchesReference) {
    std::mt19937 rng(51);
    const PixelImage img = test::random_pixels(rng, 32, 32);
    Rig rig(KernelKind::conv, {32, 32});
    rig.run(img);
    EXPECT_EQ(rig.sink.bytes(), flat(conv2d_reference(img, make_gaussian_5x5()).samples()));
}

TEST(StreamingCanny, VerticalStepMatchesReference) {
    const PixelImage img = test::vertical_step(16, 16);
    Rig rig(KernelKind::canny, {16, 16, 128});
    rig.run(img);
    EXPECT_EQ(rig.sink.bytes(), flat(canny_reference(img, 128).samples()));
}

TEST(Streaming, ExactlyOneLastFlagPerFrame) {
    std::mt19937 rng(52);
    Rig rig(KernelKind::canny, {9, 7});
    rig.run(test::random_pixels(rng, 9, 7));
    int lasts = 0;
    for (const StreamToken& t : rig.sink.tokens) {
        lasts += t.last;
    }
    EXPECT_EQ(lasts, 1);
    EXPECT_TRUE(rig.sink.tokens.back().last);
}

TEST(Streaming, FirstOutputLatencyMatchesFormula) {
    std::mt19937 rng(53);
    for (KernelKind kind : {KernelKind::conv, KernelKind::canny, KernelKind::identity}) {
        for (int w : {5, 8, 33, 64}) {
            for (int depth : {1, 4, 6}) {
                Rig rig(kind, {w, 6, kDefaultThreshold, depth});
                const CycleStats stats = rig.run(test::random_pixels(rng, w, 6));
                const std::int64_t expected = latency_of(kind, w, depth);
                ASSERT_TRUE(rig.kernel->last_frame_latency().has_value());
                EXPECT_EQ(static_cast<std::int64_t>(*rig.kernel->last_frame_latency()), expected);
                // source starts in cycle 0, so the first output arrives in cycle `latency`
                EXPECT_EQ(static_cast<std::int64_t>(rig.sink.cycles.front()), expected);
                EXPECT_EQ(static_cast<std::int64_t>(stats.cycles_elapsed), w * 6 + expected);
            }
        }
    }
}

TEST(Streaming, SteadyStateAcceptsOneTokenPerCycle) {
    std::mt19937 rng(54);
    Rig rig(KernelKind::conv, {40, 30});
    rig.run(test::random_pixels(rng, 40, 30));
    EXPECT_EQ(rig.kernel->input_hold_cycles(), 0u);
    for (std::size_t i = 1; i < rig.sink.cycles.size(); ++i) {
        ASSERT_EQ(rig.sink.cycles[i], rig.sink.cycles[i - 1] + 1);
    }
}

TEST(Streaming, BackToBackFramesReuseTheKernel) {
    std::mt19937 rng(55);
    Rig rig(KernelKind::canny, {12, 10, 90});
    for (int i = 0; i < 3; ++i) {
        const PixelImage img = test::random_scene(rng, 12, 10);
        rig.run(img);
        EXPECT_EQ(rig.sink.bytes(), flat(canny_reference(img, 90).samples()));
    }
    EXPECT_EQ(rig.kernel->frames_completed(), 3u);
}

TEST(Streaming, ShortFrameIsDimensionMismatch) {
    Rig rig(KernelKind::conv, {8, 8});
    std::vector<std::uint8_t> bytes(50, 1);
    rig.src.load(bytes);
    EXPECT_EQ(code_of([&] { rig.sw.run_frame(rig.sink_port, 1000); }), ErrorCode::dimension_mismatch);
}

TEST(Streaming, MissingLastFlagIsDimensionMismatch) {
    Rig rig(KernelKind::identity, {2, 2});
    rig.src.load_tokens({{1, false}, {2, false}, {3, false}, {4, false}, {5, true}});
    EXPECT_EQ(code_of([&] { rig.sw.run_frame(rig.sink_port, 1000); }), ErrorCode::dimension_mismatch);
}

TEST(Streaming, UndeclaredSizeIsDimensionMismatch) {
    Rig rig(KernelKind::conv, {});
    rig.src.load({1, 2, 3});
    EXPECT_EQ(code_of([&] { rig.sw.run_frame(rig.sink_port, 100); }), ErrorCode::dimension_mismatch);
}

TEST(Streaming, StoppedKernelAcceptsNothing) {
    Rig rig(KernelKind::identity, {2, 2});
    rig.kernel->set_running(false);
    rig.src.load({1, 2, 3, 4});
    EXPECT_EQ(code_of([&] { rig.sw.run_frame(rig.sink_port, 50); }), ErrorCode::timeout);
    EXPECT_EQ(rig.src.remaining(), 4u);
}

// Property: streaming output equals the reference operation, bit-exact, over
// random frame sizes, contents, thresholds, depths and back-pressure.
TEST(StreamingProperty, MatchesReferenceOnRandomFrames) {
    std::mt19937 rng(56);
    int frames = 0;
    for (int i = 0; i < 600; ++i) {
        const KernelKind kind = i % 2 == 0 ? KernelKind::conv : KernelKind::canny;
        const int w = 5 + static_cast<int>(rng() % 60);
        const int h = 5 + static_cast<int>(rng() % 60);
        const int threshold = static_cast<int>(rng() % 300);
        const int depth = 1 + static_cast<int>(rng() % 8);
        const PixelImage img = i % 3 == 0 ? test::random_pixels(rng, w, h) : test::random_scene(rng, w, h);
        Rig rig(kind, {w, h, threshold, depth});
        if (i % 4 == 1) {
            const std::uint32_t mask = rng() | 1u;
            rig.sink.ready = [mask](std::uint64_t c) { return ((mask >> (c % 32)) & 1u) != 0; };
        }
        rig.run(img);
        const std::vector<std::uint8_t> want = kind == KernelKind::conv
                                                   ? flat(conv2d_reference(img, make_gaussian_5x5()).samples())
                                                   : flat(canny_reference(img, threshold).samples());
        ASSERT_EQ(rig.sink.bytes(), want) << to_string(kind) << " " << w << "x" << h;
        ++frames;
    }
    EXPECT_EQ(frames, 600);
}
