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

#include "fabsim/image.hpp"

#include "fabsim/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace fabsim {

template <typename Tag>
Raster<Tag>::Raster(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        fail(ErrorCode::invalid_argument, "raster dimensions must be non-negative");
    }
    samples_.assign(static_cast<std::size_t>(width) * height, fill);
}

template <typename Tag>
Raster<Tag>::Raster(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
    if (width < 0 || height < 0) {
        fail(ErrorCode::invalid_argument, "raster dimensions must be non-negative");
    }
    if (samples_.size() != static_cast<std::size_t>(width) * height) {
        fail(ErrorCode::dimension_mismatch,
             "sample count " + std::to_string(samples_.size()) + " does not match " +
                 std::to_string(width) + "x" + std::to_string(height));
    }
}

template class Raster<PixelTag>;
template class Raster<EdgeTag>;

bool is_binary(const EdgeMap& map) noexcept {
    return std::ranges::all_of(map.samples(), [](std::uint8_t v) { return v == kEdge || v == kNoEdge; });
}

template <typename Tag>
Raster<Tag> transpose(const Raster<Tag>& image) {
    Raster<Tag> out(image.height(), image.width());
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            out(c, r) = image(r, c);
        }
    }
    return out;
}

template PixelImage transpose(const PixelImage&);
template EdgeMap transpose(const EdgeMap&);

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) { }

    // Skips whitespace and '#' comments, then parses a decimal field.
    int next_int(const char* field) {
        skip_blank();
        std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) {
                fail(ErrorCode::format, std::string("PGM ") + field + " out of range");
            }
            ++pos_;
        }
        if (pos_ == start) {
            fail(ErrorCode::format, std::string("PGM header: missing ") + field);
        }
        return static_cast<int>(value);
    }

    std::size_t pos() const { return pos_; }
    void advance() { ++pos_; }

private:
    void skip_blank() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::io, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorCode::io, "cannot create " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        fail(ErrorCode::io, "write failed for " + path.string());
    }
}

} // namespace

PixelImage decode_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        fail(ErrorCode::format, "not a binary PGM (expected magic P5)");
    }
    HeaderReader header(bytes.subspan(2));
    int width = header.next_int("width");
    int height = header.next_int("height");
    int maxval = header.next_int("maxval");
    if (maxval != 255) {
        fail(ErrorCode::format, "unsupported PGM maxval " + std::to_string(maxval) + " (expected 255)");
    }
    // exactly one whitespace byte separates the header from the raster
    std::size_t offset = 2 + header.pos();
    if (offset >= bytes.size() || !std::isspace(bytes[offset])) {
        fail(ErrorCode::format, "PGM header not terminated");
    }
    ++offset;
    std::size_t expected = static_cast<std::size_t>(width) * height;
    if (bytes.size() - offset < expected) {
        fail(ErrorCode::format, "truncated PGM payload: expected " + std::to_string(expected) +
                                    " bytes, found " + std::to_string(bytes.size() - offset));
    }
    std::vector<std::uint8_t> samples(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                                      bytes.begin() + static_cast<std::ptrdiff_t>(offset + expected));
    return PixelImage(width, height, std::move(samples));
}

std::vector<std::uint8_t> encode_pgm(int width, int height, std::span<const std::uint8_t> samples) {
    std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), samples.begin(), samples.end());
    return out;
}

PixelImage read_pgm(const std::filesystem::path& path) {
    return decode_pgm(slurp(path));
}

void write_pgm(const PixelImage& image, const std::filesystem::path& path) {
    dump(path, encode_pgm(image.width(), image.height(), image.samples()));
}

void write_pgm(const EdgeMap& map, const std::filesystem::path& path) {
    dump(path, encode_pgm(map.width(), map.height(), map.samples()));
}

} // namespace fabsim
