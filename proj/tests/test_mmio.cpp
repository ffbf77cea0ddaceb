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
#include "fabsim/mmio.hpp"

#include "support/errors.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fabsim;
using fabsim::test::code_of;

TEST(AddressMap, MapsRegionOnEmptyMap) {
    AddressMap map;
    const RegionHandle h = map.map_region(0x4000'0000, 0x100, "conv");
    ASSERT_EQ(map.regions().size(), 1u);
    EXPECT_EQ(map.region(h).base, 0x4000'0000u);
    EXPECT_EQ(map.region(h).length, 0x100u);
    EXPECT_EQ(map.region(h).owner, "conv");
}

TEST(AddressMap, ExactCollisionIsOverlap) {
    AddressMap map;
    map.map_region(0x4000'0000, 0x100, "a");
    EXPECT_EQ(code_of([&] { map.map_region(0x4000'0000, 0x100, "b"); }), ErrorCode::overlap);
}

TEST(AddressMap, PartialCollisionIsOverlap) {
    AddressMap map;
    map.map_region(0x1000, 0x100, "a");
    EXPECT_EQ(code_of([&] { map.map_region(0x10FC, 0x8, "b"); }), ErrorCode::overlap);
    EXPECT_EQ(code_of([&] { map.map_region(0x0F00, 0x104, "c"); }), ErrorCode::overlap);
    EXPECT_EQ(code_of([&] { map.map_region(0x1100, 0x4, "d"); }), ErrorCode::ok);
}

TEST(AddressMap, MisalignedBaseOrLength) {
    AddressMap map;
    EXPECT_EQ(code_of([&] { map.map_region(0x4000'0002, 0x100, "a"); }), ErrorCode::alignment);
    EXPECT_EQ(code_of([&] { map.map_region(0x4000'0000, 0x102, "a"); }), ErrorCode::alignment);
    EXPECT_TRUE(map.regions().empty());
}

TEST(AddressMap, FindLocatesOwningRegion) {
    AddressMap map;
    map.map_region(0x100, 0x10, "a");
    map.map_region(0x200, 0x10, "b");
    ASSERT_NE(map.find(0x20C), nullptr);
    EXPECT_EQ(map.find(0x20C)->owner, "b");
    EXPECT_EQ(map.find(0x210), nullptr);
}

TEST(Mmio, WriteThenReadRoundTrips) {
    MmioSpace space;
    const RegionHandle h = space.map_region(0x4000'0000, 0x100, "k");
    space.write(h, 0x10, 0xDEADBEEF);
    EXPECT_EQ(space.read(h, 0x10), 0xDEADBEEFu);
}

TEST(Mmio, MisalignedWriteIsRejected) {
    MmioSpace space;
    const RegionHandle h = space.map_region(0x4000'0000, 0x100, "k");
    EXPECT_EQ(code_of([&] { space.write(h, 0x03, 1); }), ErrorCode::alignment);
    EXPECT_EQ(code_of([&] { space.read(h, 0x05); }), ErrorCode::alignment);
}

TEST(Mmio, OnePastEndIsRange) {
    MmioSpace space;
    const RegionHandle h = space.map_region(0x4000'0000, 0x100, "k");
    EXPECT_EQ(code_of([&] { space.write(h, 0x100, 1); }), ErrorCode::range);
    EXPECT_EQ(code_of([&] { space.read(h, 0x100); }), ErrorCode::range);
    EXPECT_EQ(code_of([&] { space.write(h, 0xFC, 1); }), ErrorCode::ok);
}

TEST(Mmio, NeverWrittenReadsResetValue) {
    MmioSpace zero;
    const RegionHandle a = zero.map_region(0x0, 0x40, "k");
    EXPECT_EQ(zero.read(a, 0x20), 0u);

    MmioSpace custom(0xA5A5'A5A5);
    const RegionHandle b = custom.map_region(0x0, 0x40, "k");
    EXPECT_EQ(custom.read(b, 0x20), 0xA5A5'A5A5u);
}

TEST(Mmio, LastWriteWins) {
    MmioSpace space;
    const RegionHandle h = space.map_region(0x0, 0x40, "k");
    space.write(h, 0x8, 0x1);
    space.write(h, 0x8, 0x2);
    EXPECT_EQ(space.read(h, 0x8), 0x2u);
}

TEST(Mmio, GenerationCountsWrites) {
    MmioSpace space;
    const RegionHandle h = space.map_region(0x0, 0x40, "k");
    const auto g0 = space.generation();
    space.read(h, 0);
    EXPECT_EQ(space.generation(), g0);
    space.write(h, 0, 1);
    EXPECT_EQ(space.generation(), g0 + 1);
}

TEST(MmioProperty, RoundTripForRandomOffsetsAndWords) {
    std::mt19937 rng(11);
    MmioSpace space;
    const RegionHandle h = space.map_region(0x8000, 0x400, "k");
    for (int i = 0; i < 5000; ++i) {
        const Address offset = 4 * (rng() % (0x400 / 4));
        const Word value = static_cast<Word>(rng());
        space.write(h, offset, value);
        ASSERT_EQ(space.read(h, offset), value) << "offset " << offset;
    }
}

TEST(MmioProperty, WritesToOneRegionNeverChangeAnother) {
    std::mt19937 rng(12);
    MmioSpace space;
    const RegionHandle a = space.map_region(0x0, 0x100, "a");
    const RegionHandle b = space.map_region(0x100, 0x100, "b");
    for (Address o = 0; o < 0x100; o += 4) {
        space.write(b, o, static_cast<Word>(o * 3 + 1));
    }
    for (int i = 0; i < 2000; ++i) {
        space.write(a, 4 * (rng() % 64), static_cast<Word>(rng()));
    }
    for (Address o = 0; o < 0x100; o += 4) {
        ASSERT_EQ(space.read(b, o), static_cast<Word>(o * 3 + 1));
    }
}

TEST(MmioProperty, IdenticalWriteSequencesGiveIdenticalState) {
    for (std::uint32_t seed = 0; seed < 20; ++seed) {
        MmioSpace x;
        MmioSpace y;
        const RegionHandle hx = x.map_region(0x0, 0x200, "k");
        const RegionHandle hy = y.map_region(0x0, 0x200, "k");
        std::mt19937 rx(seed);
        std::mt19937 ry(seed);
        for (int i = 0; i < 300; ++i) {
            x.write(hx, 4 * (rx() % 128), static_cast<Word>(rx()));
            y.write(hy, 4 * (ry() % 128), static_cast<Word>(ry()));
        }
        ASSERT_EQ(x.snapshot(), y.snapshot());
        ASSERT_EQ(x.registers(), y.registers());
    }
}

TEST(MmioProperty, StoredOffsetsAreAligned) {
    std::mt19937 rng(5);
    MmioSpace space;
    const RegionHandle h = space.map_region(0x1000, 0x100, "k");
    for (int i = 0; i < 500; ++i) {
        const Address offset = rng() % 0x104;
        try {
            space.write(h, offset, 1);
        } catch (const Error&) {
        }
    }
    for (const auto& [address, value] : space.snapshot()) {
        EXPECT_EQ(address % 4, 0u);
        EXPECT_GE(address, 0x1000u);
        EXPECT_LT(address, 0x1100u);
    }
}
