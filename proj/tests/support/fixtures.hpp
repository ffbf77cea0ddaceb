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
#include "fabsim/stream_switch.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace fabsim::test {

/// Producer that replays a token list, optionally only on cycles `gate` allows.
class VectorSource final : public StreamEndpoint {
public:
    explicit VectorSource(std::string name, const StreamSwitch* clock = nullptr)
        : name_(std::move(name)), clock_(clock) { }

    void load(const std::vector<std::uint8_t>& bytes) {
        tokens_.clear();
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            tokens_.push_back(StreamToken{bytes[i], i + 1 == bytes.size()});
        }
        next_ = 0;
    }
    void load_tokens(std::vector<StreamToken> tokens) {
        tokens_ = std::move(tokens);
        next_ = 0;
    }
    std::function<bool(std::uint64_t)> gate;

    std::string_view endpoint_name() const override { return name_; }
    bool has_token() const override {
        if (next_ >= tokens_.size()) {
            return false;
        }
        return !gate || clock_ == nullptr || gate(clock_->cycle());
    }
    StreamToken take_token() override { return tokens_[next_++]; }
    std::size_t remaining() const { return tokens_.size() - next_; }

private:
    std::string name_;
    const StreamSwitch* clock_;
    std::vector<StreamToken> tokens_;
    std::size_t next_ = 0;
};

/// Consumer that records tokens and the cycle each one arrived in.
class VectorSink final : public StreamEndpoint {
public:
    explicit VectorSink(std::string name, const StreamSwitch* clock = nullptr)
        : name_(std::move(name)), clock_(clock) { }

    std::function<bool(std::uint64_t)> ready;

    std::string_view endpoint_name() const override { return name_; }
    bool can_accept() const override { return !ready || clock_ == nullptr || ready(clock_->cycle()); }
    void give_token(StreamToken token) override {
        tokens.push_back(token);
        cycles.push_back(clock_ != nullptr ? clock_->cycle() : 0);
    }
    std::vector<std::uint8_t> bytes() const {
        std::vector<std::uint8_t> out;
        for (const StreamToken& t : tokens) {
            out.push_back(static_cast<std::uint8_t>(t.payload));
        }
        return out;
    }

    std::vector<StreamToken> tokens;
    std::vector<std::uint64_t> cycles;

private:
    std::string name_;
    const StreamSwitch* clock_;
};

inline PixelImage random_pixels(std::mt19937& rng, int width, int height) {
    PixelImage img(width, height);
    std::uniform_int_distribution<int> d(0, 255);
    for (auto& s : img.samples()) {
        s = static_cast<std::uint8_t>(d(rng));
    }
    return img;
}

/// Random image biased towards structure: blocks of flat shade, plus noise.
inline PixelImage random_scene(std::mt19937& rng, int width, int height) {
    PixelImage img(width, height);
    std::uniform_int_distribution<int> shade(0, 255);
    std::uniform_int_distribution<int> noise(-12, 12);
    const int bx = 1 + static_cast<int>(rng() % 8);
    const int by = 1 + static_cast<int>(rng() % 8);
    std::vector<int> palette(64);
    for (int& p : palette) {
        p = shade(rng);
    }
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const int v = palette[((r / by) * 7 + c / bx) % 64] + noise(rng);
            img(r, c) = static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
    }
    return img;
}

/// Left half 0, right half 255.
inline PixelImage vertical_step(int width, int height) {
    PixelImage img(width, height);
    for (int r = 0; r < height; ++r) {
        for (int c = width / 2; c < width; ++c) {
            img(r, c) = 255;
        }
    }
    return img;
}

} // namespace fabsim::test
