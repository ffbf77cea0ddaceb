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

#include "fabsim/kernels.hpp"
#include "fabsim/stream_switch.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>

namespace fabsim {

struct StreamingParams {
    int width = 0;
    int height = 0;
    int threshold = kDefaultThreshold;
    int pipeline_depth = 0;   // 0 selects the kind's default
    ConvKernel conv = make_gaussian_5x5();

    bool operator==(const StreamingParams&) const = default;
};

/// A fabric kernel with an input and an output stream port. It consumes at
/// most one pixel per cycle into row line buffers and, once the window look-ahead
/// has filled, produces one output per cycle after `pipeline_depth` register
/// stages. After the last input pixel it keeps stepping through the remaining
/// raster positions on its own (bottom/right borders), so a frame of N pixels
/// takes N + latency cycles end to end.
class StreamingKernel : public Clocked {
public:
    StreamingKernel(std::string name, KernelKind kind, StreamingParams params);
    ~StreamingKernel() override;

    StreamingKernel(const StreamingKernel&) = delete;
    StreamingKernel& operator=(const StreamingKernel&) = delete;

    const std::string& name() const noexcept { return name_; }
    KernelKind kind() const noexcept { return kind_; }

    StreamEndpoint& input() noexcept { return input_; }
    StreamEndpoint& output() noexcept { return output_; }

    /// New frame parameters, latched at the next frame start.
    void set_params(const StreamingParams& params);
    const StreamingParams& params() const noexcept { return pending_; }
    int pipeline_depth() const noexcept;

    /// A stopped kernel finishes its current frame but accepts no new one.
    void set_running(bool running) noexcept { running_ = running; }
    bool running() const noexcept { return running_; }

    void tick(std::uint64_t cycle) override;
    bool idle() const override;

    bool busy() const noexcept { return active_; }
    std::uint64_t frames_completed() const noexcept { return frames_; }
    /// Cycles an input token sat in the input register without being consumed.
    std::uint64_t input_hold_cycles() const noexcept { return hold_cycles_; }
    /// First-valid-output cycle minus first-input cycle of the latest frame.
    std::optional<std::uint64_t> last_frame_latency() const noexcept { return latency_; }

protected:
    /// Called once per frame with the latched parameters.
    virtual void begin_frame(const StreamingParams& params) = 0;
    /// Handles raster position `position`; `pixel` is present for real input
    /// positions and empty for the trailing border positions. Returns the output
    /// for position - lookahead when that index is a valid pixel.
    virtual std::optional<std::uint8_t> process(std::int64_t position, std::optional<std::uint8_t> pixel) = 0;

    std::int64_t pixel_count() const noexcept { return pixels_; }

private:
    class InputPort final : public StreamEndpoint {
    public:
        explicit InputPort(StreamingKernel& k) : kernel_(k), name_(k.name_ + ".in") { }
        std::string_view endpoint_name() const override { return name_; }
        bool can_accept() const override;
        void give_token(StreamToken token) override;

    private:
        StreamingKernel& kernel_;
        std::string name_;
    };
    class OutputPort final : public StreamEndpoint {
    public:
        explicit OutputPort(StreamingKernel& k) : kernel_(k), name_(k.name_ + ".out") { }
        std::string_view endpoint_name() const override { return name_; }
        bool has_token() const override;
        StreamToken take_token() override;

    private:
        StreamingKernel& kernel_;
        std::string name_;
    };

    struct Pending {
        StreamToken token;
        std::uint64_t ready_cycle;
    };

    void start_frame(std::uint64_t cycle);
    void emit(std::uint8_t value, std::uint64_t cycle);

    std::string name_;
    KernelKind kind_;
    StreamingParams pending_;
    StreamingParams active_params_;
    InputPort input_;
    OutputPort output_;

    std::optional<StreamToken> input_reg_;
    std::deque<Pending> out_fifo_;
    std::uint64_t now_ = 0;

    bool active_ = false;
    bool running_ = true;
    int depth_ = 1;
    std::int64_t pixels_ = 0;
    std::int64_t lookahead_ = 0;
    std::int64_t received_ = 0;
    std::int64_t position_ = 0;
    std::int64_t emitted_ = 0;
    std::uint64_t start_cycle_ = 0;
    std::uint64_t frames_ = 0;
    std::uint64_t hold_cycles_ = 0;
    std::optional<std::uint64_t> latency_;
};

/// Builds a streaming kernel of the given kind. Frame dimensions must be
/// declared in `params` before the first token arrives.
std::unique_ptr<StreamingKernel> make_streaming(KernelKind kind, std::string name, StreamingParams params);

} // namespace fabsim
