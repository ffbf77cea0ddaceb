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

#include "fabsim/streaming_kernels.hpp"

#include "fabsim/error.hpp"

#include <algorithm>
#include <vector>

namespace fabsim {

namespace {

/// Ring of `rows` raster rows. Row r lives in slot r % rows, so writing row r
/// evicts row r - rows.
template <typename T>
class LineBuffer {
public:
    void reset(int width, int rows) {
        width_ = width;
        rows_ = rows;
        data_.assign(static_cast<std::size_t>(width) * rows, T{});
    }
    void put(int row, int col, T value) { data_[slot(row) + col] = value; }
    T get(int row, int col) const { return data_[slot(row) + col]; }

private:
    std::size_t slot(int row) const { return static_cast<std::size_t>(row % rows_) * width_; }

    int width_ = 0;
    int rows_ = 1;
    std::vector<T> data_;
};

int min_height(KernelKind kind) {
    switch (kind) {
    case KernelKind::conv: return 5;
    case KernelKind::canny: return 3;
    case KernelKind::identity: return 1;
    }
    return 1;
}

class ConvStream final : public StreamingKernel {
public:
    using StreamingKernel::StreamingKernel;

protected:
    void begin_frame(const StreamingParams& p) override {
        width_ = p.width;
        height_ = p.height;
        kernel_ = p.conv;
        lines_.reset(width_, ConvKernel::kSize);
    }

    std::optional<std::uint8_t> process(std::int64_t position, std::optional<std::uint8_t> pixel) override {
        if (pixel) {
            lines_.put(static_cast<int>(position / width_), static_cast<int>(position % width_), *pixel);
        }
        const std::int64_t j = position - (2 * static_cast<std::int64_t>(width_) + 2);
        if (j < 0) {
            return std::nullopt;
        }
        const int r = static_cast<int>(j / width_);
        const int c = static_cast<int>(j % width_);
        std::int32_t acc = 0;
        for (int ky = 0; ky < 5; ++ky) {
            const int rr = std::clamp(r + ky - 2, 0, height_ - 1);
            for (int kx = 0; kx < 5; ++kx) {
                const int cc = std::clamp(c + kx - 2, 0, width_ - 1);
                acc += kernel_.taps[ky][kx] * static_cast<std::int32_t>(lines_.get(rr, cc));
            }
        }
        const std::int32_t d = kernel_.divisor;
        const std::int32_t q = acc >= 0 ? acc / d : -((-acc + d - 1) / d);
        return static_cast<std::uint8_t>(std::clamp<std::int32_t>(q, 0, 255));
    }

private:
    int width_ = 0;
    int height_ = 0;
    ConvKernel kernel_;
    LineBuffer<std::uint8_t> lines_;
};

/// Sobel stage feeding a suppression stage, each with a 3-row line buffer.
class CannyStream final : public StreamingKernel {
public:
    using StreamingKernel::StreamingKernel;

protected:
    void begin_frame(const StreamingParams& p) override {
        width_ = p.width;
        height_ = p.height;
        threshold_ = p.threshold;
        pixels_.reset(width_, 3);
        gradients_.reset(width_, 3);
    }

    std::optional<std::uint8_t> process(std::int64_t position, std::optional<std::uint8_t> pixel) override {
        const std::int64_t w = width_;
        const std::int64_t n = static_cast<std::int64_t>(width_) * height_;
        if (pixel) {
            pixels_.put(static_cast<int>(position / w), static_cast<int>(position % w), *pixel);
        }
        if (const std::int64_t j = position - (w + 1); j >= 0 && j < n) {
            gradient_stage(static_cast<int>(j / w), static_cast<int>(j % w));
        }
        const std::int64_t k = position - 2 * (w + 1);
        if (k < 0) {
            return std::nullopt;
        }
        return suppression_stage(static_cast<int>(k / w), static_cast<int>(k % w));
    }

private:
    struct Gradient {
        std::int32_t magnitude = 0;
        GradientBin bin = GradientBin::horizontal;
    };

    void gradient_stage(int r, int c) {
        Gradient g;
        if (r > 0 && r < height_ - 1 && c > 0 && c < width_ - 1) {
            auto px = [&](int rr, int cc) { return static_cast<std::int32_t>(pixels_.get(rr, cc)); };
            const std::int32_t gx = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1)) -
                                    (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
            const std::int32_t gy = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1)) -
                                    (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
            g.magnitude = (gx < 0 ? -gx : gx) + (gy < 0 ? -gy : gy);
            g.bin = quantize_direction(gx, gy);
        }
        gradients_.put(r, c, g);
    }

    std::uint8_t suppression_stage(int r, int c) const {
        if (r == 0 || r == height_ - 1 || c == 0 || c == width_ - 1) {
            return kNoEdge;
        }
        const Gradient g = gradients_.get(r, c);
        if (g.magnitude < threshold_) {
            return kNoEdge;
        }
        const NmsNeighbors nb = nms_neighbors(g.bin);
        const std::int32_t first = gradients_.get(r + nb.first_dr, c + nb.first_dc).magnitude;
        const std::int32_t second = gradients_.get(r + nb.second_dr, c + nb.second_dc).magnitude;
        return survives_nms(g.magnitude, g.bin, first, second) ? kEdge : kNoEdge;
    }

    int width_ = 0;
    int height_ = 0;
    int threshold_ = kDefaultThreshold;
    LineBuffer<std::uint8_t> pixels_;
    LineBuffer<Gradient> gradients_;
};

class IdentityStream final : public StreamingKernel {
public:
    using StreamingKernel::StreamingKernel;

protected:
    void begin_frame(const StreamingParams&) override { }
    std::optional<std::uint8_t> process(std::int64_t, std::optional<std::uint8_t> pixel) override {
        return pixel;
    }
};

} // namespace

StreamingKernel::StreamingKernel(std::string name, KernelKind kind, StreamingParams params)
    : name_(std::move(name)), kind_(kind), input_(*this), output_(*this) {
    set_params(params);
}

StreamingKernel::~StreamingKernel() = default;

void StreamingKernel::set_params(const StreamingParams& params) {
    if (params.pipeline_depth < 0) {
        fail(ErrorCode::precondition, name_ + ": pipeline depth must be non-negative");
    }
    if (params.conv.divisor <= 0) {
        fail(ErrorCode::invalid_argument, name_ + ": convolution divisor must be positive");
    }
    pending_ = params;
}

int StreamingKernel::pipeline_depth() const noexcept {
    return pending_.pipeline_depth > 0 ? pending_.pipeline_depth : geometry_of(kind_).pipeline_depth;
}

void StreamingKernel::start_frame(std::uint64_t cycle) {
    const StreamingParams& p = pending_;
    const KernelGeometry g = geometry_of(kind_);
    if (p.width < g.min_width || p.height < min_height(kind_)) {
        fail(ErrorCode::dimension_mismatch,
             name_ + ": frame " + std::to_string(p.width) + "x" + std::to_string(p.height) +
                 " is not a valid declared size for a " + std::string(to_string(kind_)) + " kernel");
    }
    active_params_ = p;
    depth_ = pipeline_depth();
    pixels_ = static_cast<std::int64_t>(p.width) * p.height;
    lookahead_ = lookahead_of(kind_, p.width);
    received_ = 0;
    position_ = 0;
    emitted_ = 0;
    start_cycle_ = cycle;
    latency_.reset();
    begin_frame(active_params_);
    active_ = true;
}

void StreamingKernel::emit(std::uint8_t value, std::uint64_t cycle) {
    const bool last = emitted_ == pixels_ - 1;
    const std::uint64_t ready = cycle + static_cast<std::uint64_t>(depth_);
    if (emitted_ == 0) {
        latency_ = ready - start_cycle_;
    }
    out_fifo_.push_back(Pending{StreamToken{value, last}, ready});
    ++emitted_;
}

void StreamingKernel::tick(std::uint64_t cycle) {
    if (input_reg_ && !active_) {
        start_frame(cycle);
    }
    if (active_) {
        const bool room = out_fifo_.size() < static_cast<std::size_t>(depth_) + 1;
        if (!room) {
            if (input_reg_) {
                ++hold_cycles_;
            }
        } else if (input_reg_) {
            const StreamToken token = *input_reg_;
            input_reg_.reset();
            ++received_;
            if (token.last != (received_ == pixels_)) {
                fail(ErrorCode::dimension_mismatch,
                     name_ + ": end of frame after " + std::to_string(received_) + " tokens, declared " +
                         std::to_string(active_params_.width) + "x" + std::to_string(active_params_.height));
            }
            if (auto out = process(position_++, static_cast<std::uint8_t>(token.payload & 0xFFu))) {
                emit(*out, cycle);
            }
        } else if (received_ == pixels_ && position_ < pixels_ + lookahead_) {
            if (auto out = process(position_++, std::nullopt)) {
                emit(*out, cycle);
            }
        }
    }
    now_ = cycle + 1;
}

bool StreamingKernel::idle() const {
    return !active_ && !input_reg_ && out_fifo_.empty();
}

bool StreamingKernel::InputPort::can_accept() const {
    const StreamingKernel& k = kernel_;
    return !k.input_reg_ && (k.active_ ? k.received_ < k.pixels_ : k.running_);
}

void StreamingKernel::InputPort::give_token(StreamToken token) {
    kernel_.input_reg_ = token;
}

bool StreamingKernel::OutputPort::has_token() const {
    const StreamingKernel& k = kernel_;
    return !k.out_fifo_.empty() && k.out_fifo_.front().ready_cycle <= k.now_;
}

StreamToken StreamingKernel::OutputPort::take_token() {
    StreamingKernel& k = kernel_;
    const StreamToken token = k.out_fifo_.front().token;
    k.out_fifo_.pop_front();
    if (token.last) {
        k.active_ = false;
        ++k.frames_;
    }
    return token;
}

std::unique_ptr<StreamingKernel> make_streaming(KernelKind kind, std::string name, StreamingParams params) {
    switch (kind) {
    case KernelKind::conv: return std::make_unique<ConvStream>(std::move(name), kind, std::move(params));
    case KernelKind::canny: return std::make_unique<CannyStream>(std::move(name), kind, std::move(params));
    case KernelKind::identity: return std::make_unique<IdentityStream>(std::move(name), kind, std::move(params));
    }
    fail(ErrorCode::invalid_argument, "unknown kernel kind");
}

} // namespace fabsim
