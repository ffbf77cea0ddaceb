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
#include "fabsim/image.hpp"

#include "support/errors.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace fabsim;
using fabsim::test::code_of;

namespace {

std::filesystem::path data_file(const std::string& name) {
    return std::filesystem::path(FABSIM_TEST_DATA_DIR) / name;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
}

} // namespace

TEST(Pgm, WriteThenReadRandom64x64) {
    std::mt19937 rng(3);
    const PixelImage img = test::random_pixels(rng, 64, 64);
    const auto path = data_file("roundtrip.pgm");
    write_pgm(img, path);
    EXPECT_EQ(read_pgm(path), img);
}

TEST(Pgm, RoundTripNonSquare) {
    std::mt19937 rng(4);
    const PixelImage img = test::random_pixels(rng, 37, 5);
    const std::vector<std::uint8_t> bytes = encode_pgm(img.width(), img.height(), img.samples());
    EXPECT_EQ(decode_pgm(bytes), img);
}

TEST(Pgm, EdgeMapWritesAsPgm) {
    EdgeMap map(8, 4);
    map(1, 2) = kEdge;
    const auto path = data_file("edges.pgm");
    write_pgm(map, path);
    const PixelImage back = read_pgm(path);
    EXPECT_EQ(back(1, 2), 255);
    EXPECT_EQ(back(0, 0), 0);
}

TEST(Pgm, AsciiP2IsFormatError) {
    const auto path = data_file("ascii.pgm");
    write_bytes(path, "P2\n2 2\n255\n0 1 2 3\n");
    EXPECT_EQ(code_of([&] { read_pgm(path); }), ErrorCode::format);
}

TEST(Pgm, TruncatedPayloadIsFormatError) {
    const auto path = data_file("truncated.pgm");
    write_bytes(path, std::string("P5\n4 4\n255\n") + std::string(10, '\x01'));
    EXPECT_EQ(code_of([&] { read_pgm(path); }), ErrorCode::format);
}

TEST(Pgm, MaxvalOtherThan255IsFormatError) {
    const std::string text = std::string("P5\n2 2\n65535\n") + std::string(8, '\0');
    const std::vector<std::uint8_t> bytes(text.begin(), text.end());
    EXPECT_EQ(code_of([&] { decode_pgm(bytes); }), ErrorCode::format);
}

TEST(Pgm, CommentsInHeaderAreSkipped) {
    const std::string text = std::string("P5\n# made by hand\n2 1\n255\n") + "\x07\x09";
    const std::vector<std::uint8_t> bytes(text.begin(), text.end());
    const PixelImage img = decode_pgm(bytes);
    EXPECT_EQ(img.width(), 2);
    EXPECT_EQ(img(0, 1), 9);
}

TEST(Pgm, MissingFileIsIoError) {
    EXPECT_EQ(code_of([&] { read_pgm(data_file("does_not_exist.pgm")); }), ErrorCode::io);
}

TEST(Raster, TransposeSwapsAxes) {
    PixelImage img(3, 2);
    img(0, 2) = 7;
    img(1, 0) = 9;
    const PixelImage t = transpose(img);
    EXPECT_EQ(t.width(), 2);
    EXPECT_EQ(t.height(), 3);
    EXPECT_EQ(t(2, 0), 7);
    EXPECT_EQ(t(0, 1), 9);
    EXPECT_EQ(transpose(t), img);
}

TEST(Raster, IsBinary) {
    EdgeMap map(4, 4);
    EXPECT_TRUE(is_binary(map));
    map(2, 2) = kEdge;
    EXPECT_TRUE(is_binary(map));
    map(1, 1) = 3;
    EXPECT_FALSE(is_binary(map));
}
