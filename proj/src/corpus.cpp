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

#include "fabsim/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string_view>

namespace fabsim {

namespace {

std::uint8_t clamp_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void add_noise(PixelImage& img, std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& s : img.samples()) {
        s = clamp_byte(s + noise(rng));
    }
}

} // namespace

PixelImage synthetic_image(CorpusPattern pattern, std::uint64_t seed, int width, int height) {
    std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(pattern) + 1) * 0x9E3779B97F4A7C15ull);
    PixelImage img(width, height);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (pattern) {
    case CorpusPattern::shapes: {
        std::fill(img.samples().begin(), img.samples().end(), static_cast<std::uint8_t>(40 + rng() % 40));
        for (int n = 0; n < 40; ++n) {
            const double cx = unit(rng) * width;
            const double cy = unit(rng) * height;
            const double rx = 10 + unit(rng) * width / 6.0;
            const double ry = 10 + unit(rng) * height / 6.0;
            const auto shade = static_cast<std::uint8_t>(rng() % 256);
            const bool ellipse = rng() % 2 == 0;
            const int y0 = std::max(0, static_cast<int>(cy - ry));
            const int y1 = std::min(height, static_cast<int>(cy + ry) + 1);
            const int x0 = std::max(0, static_cast<int>(cx - rx));
            const int x1 = std::min(width, static_cast<int>(cx + rx) + 1);
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const double dx = (x - cx) / rx;
                    const double dy = (y - cy) / ry;
                    if (!ellipse || dx * dx + dy * dy <= 1.0) {
                        img(y, x) = shade;
                    }
                }
            }
        }
        add_noise(img, rng, 6.0);
        break;
    }
    case CorpusPattern::gradient_noise: {
        const double fx = 2 + unit(rng) * 6;
        const double fy = 2 + unit(rng) * 6;
        const double phase = unit(rng) * 6.283185307179586;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double u = static_cast<double>(x) / width;
                const double v = static_cast<double>(y) / height;
                img(y, x) = clamp_byte(128 + 60 * std::sin(6.283185307179586 * fx * u + phase) +
                                       60 * std::cos(6.283185307179586 * fy * v * (1 + u)));
            }
        }
        add_noise(img, rng, 12.0);
        break;
    }
    case CorpusPattern::checker_blobs: {
        const int cell = 16 + static_cast<int>(rng() % 48);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                img(y, x) = ((x / cell + y / cell) % 2 == 0) ? 200 : 50;
            }
        }
        for (int n = 0; n < 25; ++n) {
            const double cx = unit(rng) * width;
            const double cy = unit(rng) * height;
            const double radius = 8 + unit(rng) * 60;
            const double peak = unit(rng) * 160 - 80;
            const int y0 = std::max(0, static_cast<int>(cy - 3 * radius));
            const int y1 = std::min(height, static_cast<int>(cy + 3 * radius) + 1);
            const int x0 = std::max(0, static_cast<int>(cx - 3 * radius));
            const int x1 = std::min(width, static_cast<int>(cx + 3 * radius) + 1);
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const double d2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (radius * radius);
                    img(y, x) = clamp_byte(img(y, x) + peak * std::exp(-d2));
                }
            }
        }
        add_noise(img, rng, 4.0);
        break;
    }
    }
    return img;
}

PixelImage random_image(std::uint64_t seed, int width, int height) {
    std::mt19937_64 rng(seed);
    PixelImage img(width, height);
    for (auto& s : img.samples()) {
        s = static_cast<std::uint8_t>(rng() & 0xFF);
    }
    return img;
}

std::uint64_t seed_from_environment() {
    const char* env = std::getenv("BENCH_SEED");
    if (env == nullptr) {
        return kDefaultSeed;
    }
    const std::string_view text(env);
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        return kDefaultSeed;
    }
    return seed;
}

std::string to_string(CorpusPattern pattern) {
    switch (pattern) {
    case CorpusPattern::shapes: return "shapes";
    case CorpusPattern::gradient_noise: return "gradient-noise";
    case CorpusPattern::checker_blobs: return "checker-blobs";
    }
    return "unknown";
}

} // namespace fabsim
