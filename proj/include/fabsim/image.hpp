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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fabsim {

/// Width x height raster of 8-bit samples, stored row-major.
template <typename Tag>
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, std::uint8_t fill = 0);
    Raster(int width, int height, std::vector<std::uint8_t> samples);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return samples_.size(); }

    std::uint8_t operator()(int row, int col) const noexcept {
        return samples_[static_cast<std::size_t>(row) * width_ + col];
    }
    std::uint8_t& operator()(int row, int col) noexcept {
        return samples_[static_cast<std::size_t>(row) * width_ + col];
    }

    std::span<const std::uint8_t> samples() const noexcept { return samples_; }
    std::span<std::uint8_t> samples() noexcept { return samples_; }
    std::uint8_t* data() noexcept { return samples_.data(); }
    const std::uint8_t* data() const noexcept { return samples_.data(); }

    bool operator==(const Raster&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> samples_;
};

struct PixelTag { };
struct EdgeTag { };

/// 8-bit grayscale image.
using PixelImage = Raster<PixelTag>;

/// Output of the edge detector: every sample is 0 (no edge) or 255 (edge).
using EdgeMap = Raster<EdgeTag>;

inline constexpr std::uint8_t kEdge = 255;
inline constexpr std::uint8_t kNoEdge = 0;

/// True when every sample of `map` is 0 or 255.
bool is_binary(const EdgeMap& map) noexcept;

template <typename Tag>
Raster<Tag> transpose(const Raster<Tag>& image);

/// Reads a binary PGM (P5, maxval 255). Throws format-error or io-error.
PixelImage read_pgm(const std::filesystem::path& path);

void write_pgm(const PixelImage& image, const std::filesystem::path& path);
void write_pgm(const EdgeMap& map, const std::filesystem::path& path);

/// Decodes P5 data already in memory.
PixelImage decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(int width, int height, std::span<const std::uint8_t> samples);

} // namespace fabsim
