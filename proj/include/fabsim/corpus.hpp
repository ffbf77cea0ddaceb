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

#include "fabsim/image.hpp"

#include <cstdint>
#include <string>

namespace fabsim {

inline constexpr int kCorpusWidth = 1024;
inline constexpr int kCorpusHeight = 768;
inline constexpr std::uint64_t kDefaultSeed = 20240611;

enum class CorpusPattern { shapes, gradient_noise, checker_blobs };

/// Deterministic synthetic grayscale scene: the same seed and pattern always
/// give the same image.
PixelImage synthetic_image(CorpusPattern pattern, std::uint64_t seed, int width = kCorpusWidth,
                           int height = kCorpusHeight);

/// Uniformly random samples.
PixelImage random_image(std::uint64_t seed, int width, int height);

/// Seed from BENCH_SEED when set and numeric, else kDefaultSeed.
std::uint64_t seed_from_environment();

std::string to_string(CorpusPattern pattern);

} // namespace fabsim
