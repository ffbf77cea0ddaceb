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

#include "fabsim/dma.hpp"
#include "fabsim/error.hpp"
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

struct Loopback {
    StreamSwitch sw;
    DmaChannel in{"dma_in", DmaDirection::to_fabric, DmaTiming{}};
    DmaChannel out{"dma_out", DmaDirection::from_fabric, DmaTiming{}};

    Loopback() {
        const PortId p = sw.attach_port(in, PortDirection::producer);
        const PortId c = sw.attach_port(out, PortDirection::consumer);
        in.init(sw, p);
        out.init(sw, c);
        sw.configure_route(p, c);
    }
};

} // namespace

TEST(DmaInit, ToFabricOnConsumerPortIsDirectionMismatch) {
    StreamSwitch sw;
    DmaChannel ch("dma_in", DmaDirection::to_fabric, DmaTiming{});
    const PortId p = sw.attach_port(ch, PortDirection::consumer);
    EXPECT_EQ(code_of([&] { ch.init(sw, p); }), ErrorCode::port_direction_mismatch);
}

TEST(DmaInit, DefaultsGiveIdleChannel) {
    StreamSwitch sw;
    DmaChannel ch("dma_in", DmaDirection::to_fabric, DmaTiming{400e6, 50e-6, 200e6});
    ch.init(sw, sw.attach_port(ch, PortDirection::producer));
    EXPECT_EQ(ch.state(), DmaState::idle);
    EXPECT_DOUBLE_EQ(ch.timing().bandwidth_bytes_per_sec, 400e6);
    EXPECT_DOUBLE_EQ(ch.timing().setup_latency_sec, 50e-6);
}

TEST(DmaInit, TwoChannelsOnDistinctPorts) {
    Loopback lb;
    EXPECT_EQ(lb.in.state(), DmaState::idle);
    EXPECT_EQ(lb.out.state(), DmaState::idle);
    EXPECT_NE(lb.in.port(), lb.out.port());
}

TEST(DmaInit, PortOfAnotherEndpointIsRejected) {
    StreamSwitch sw;
    VectorSource other("other");
    DmaChannel ch("dma_in", DmaDirection::to_fabric, DmaTiming{});
    const PortId p = sw.attach_port(other, PortDirection::producer);
    EXPECT_EQ(code_of([&] { ch.init(sw, p); }), ErrorCode::port_direction_mismatch);
}

TEST(DmaTransfer, BusyChannelRejectsTransfer) {
    Loopback lb;
    DmaBuffer a(16), b(16);
    lb.in.transfer(a);
    EXPECT_EQ(lb.in.state(), DmaState::busy);
    EXPECT_EQ(code_of([&] { lb.in.transfer(b); }), ErrorCode::busy);
}

// 786432 / 400e6 + 50e-6
TEST(DmaTransfer, CostOfFullFrame) {
    const DmaChannel ch("c", DmaDirection::to_fabric, DmaTiming{400e6, 50e-6, 200e6});
    EXPECT_NEAR(ch.transfer_cost(786432), 0.00201608, 1e-12);
    EXPECT_NEAR(ch.transfer_cost(786432), 0.002016, 5e-7);
}

TEST(DmaTransfer, LoopbackIsByteExact) {
    Loopback lb;
    std::mt19937 rng(61);
    std::vector<std::uint8_t> src(1000);
    for (auto& b : src) {
        b = static_cast<std::uint8_t>(rng());
    }
    DmaBuffer in(src);
    DmaBuffer out(src.size());
    const DmaTicket to = lb.out.transfer(out);
    const DmaTicket ti = lb.in.transfer(in);
    const DmaCompletion ci = dma_wait(lb.sw, lb.in, ti);
    const DmaCompletion co = dma_wait(lb.sw, lb.out, to);
    EXPECT_EQ(ci.bytes_moved, 1000u);
    EXPECT_EQ(co.bytes_moved, 1000u);
    EXPECT_EQ(std::vector<std::uint8_t>(out.bytes().begin(), out.bytes().end()), src);
    EXPECT_EQ(lb.in.state(), DmaState::idle);
    EXPECT_EQ(lb.out.state(), DmaState::idle);
}

// The sink refuses tokens for the first 100 cycles: the host-to-fabric
// channel is back-pressured for exactly those cycles.
TEST(DmaWait, StallTimeIsCharged) {
    StreamSwitch sw;
    DmaChannel in("dma_in", DmaDirection::to_fabric, DmaTiming{400e6, 50e-6, 200e6});
    VectorSink sink("sink", &sw);
    sink.ready = [](std::uint64_t c) { return c >= 100; };
    const PortId p = sw.attach_port(in, PortDirection::producer);
    const PortId c = sw.attach_port(sink, PortDirection::consumer);
    in.init(sw, p);
    sw.configure_route(p, c);
    DmaBuffer buf(std::vector<std::uint8_t>(64, 9));
    const DmaTicket t = in.transfer(buf);
    const CycleStats before = sw.totals();
    const DmaCompletion rec = dma_wait(sw, in, t);
    const CycleStats after = sw.totals();
    EXPECT_EQ(rec.stall_cycles, 100u);
    EXPECT_EQ(after.stalled({p, c}) - before.stalled({p, c}), 100u);
    EXPECT_NEAR(rec.simulated_seconds, 50e-6 + 64 / 400e6 + 100 / 200e6, 1e-15);
}

TEST(DmaWait, SecondWaitReturnsSameRecord) {
    Loopback lb;
    DmaBuffer in(std::vector<std::uint8_t>{1, 2, 3});
    DmaBuffer out(3);
    const DmaTicket to = lb.out.transfer(out);
    const DmaTicket ti = lb.in.transfer(in);
    const DmaCompletion first = dma_wait(lb.sw, lb.out, to);
    const DmaCompletion second = dma_wait(lb.sw, lb.out, to);
    EXPECT_EQ(first, second);
    EXPECT_EQ(dma_wait(lb.sw, lb.in, ti), dma_wait(lb.sw, lb.in, ti));
}

TEST(DmaWait, UnroutedChannelTimesOut) {
    StreamSwitch sw;
    DmaChannel in("dma_in", DmaDirection::to_fabric, DmaTiming{});
    in.init(sw, sw.attach_port(in, PortDirection::producer));
    DmaBuffer buf(8);
    const DmaTicket t = in.transfer(buf);
    EXPECT_EQ(code_of([&] { dma_wait(sw, in, t, 50); }), ErrorCode::timeout);
}

TEST(DmaTransfer, FrameLargerThanBufferIsLengthMismatch) {
    Loopback lb;
    DmaBuffer in(std::vector<std::uint8_t>(10, 1));
    DmaBuffer out(6);
    const DmaTicket to = lb.out.transfer(out);
    lb.in.transfer(in);
    EXPECT_EQ(code_of([&] { dma_wait(lb.sw, lb.out, to, 100); }), ErrorCode::length_mismatch);
}

TEST(DmaTransfer, EmptyBufferIsRejected) {
    EXPECT_EQ(code_of([] { DmaBuffer b(0); }), ErrorCode::invalid_argument);
}

TEST(DmaProperty, CostIsMonotoneInLength) {
    std::mt19937 rng(62);
    for (int i = 0; i < 200; ++i) {
        const double bw = 1e6 + static_cast<double>(rng() % 1'000'000'000);
        const DmaChannel ch("c", DmaDirection::to_fabric, DmaTiming{bw, 1e-6 * (rng() % 100), 200e6});
        std::size_t prev_len = 0;
        double prev = ch.transfer_cost(0);
        for (int j = 0; j < 50; ++j) {
            const std::size_t len = prev_len + rng() % 100000;
            const double cost = ch.transfer_cost(len);
            ASSERT_GE(cost, prev);
            prev = cost;
            prev_len = len;
        }
    }
}

TEST(DmaProperty, RandomBuffersRoundTripThroughIdentityKernel) {
    std::mt19937 rng(63);
    for (int i = 0; i < 100; ++i) {
        StreamSwitch sw;
        DmaChannel in("dma_in", DmaDirection::to_fabric, DmaTiming{});
        DmaChannel out("dma_out", DmaDirection::from_fabric, DmaTiming{});
        const int w = 1 + static_cast<int>(rng() % 40);
        const int h = 1 + static_cast<int>(rng() % 40);
        auto id = make_streaming(KernelKind::identity, "id", {w, h, kDefaultThreshold, 1 + static_cast<int>(rng() % 5)});
        const PortId p = sw.attach_port(in, PortDirection::producer);
        const PortId c = sw.attach_port(out, PortDirection::consumer);
        const PortId ki = sw.attach_port(id->input(), PortDirection::consumer);
        const PortId ko = sw.attach_port(id->output(), PortDirection::producer);
        in.init(sw, p);
        out.init(sw, c);
        sw.add_component(*id);
        sw.configure_route(p, ki);
        sw.configure_route(ko, c);
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h);
        for (auto& b : bytes) {
            b = static_cast<std::uint8_t>(rng());
        }
        DmaBuffer src(bytes);
        DmaBuffer dst(bytes.size());
        const DmaTicket to = out.transfer(dst);
        const DmaTicket ti = in.transfer(src);
        dma_wait(sw, in, ti);
        dma_wait(sw, out, to);
        ASSERT_EQ(std::vector<std::uint8_t>(dst.bytes().begin(), dst.bytes().end()), bytes);
    }
}
