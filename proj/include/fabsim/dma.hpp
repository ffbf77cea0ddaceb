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

#include "fabsim/stream_switch.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fabsim {

enum class DmaDirection {
    to_fabric,     // host memory -> stream (memory-mapped to stream)
    from_fabric,   // stream -> host memory
};

std::string_view to_string(DmaDirection direction) noexcept;
DmaDirection dma_direction_from_string(std::string_view text);

struct DmaTiming {
    double bandwidth_bytes_per_sec = 400e6;
    double setup_latency_sec = 50e-6;
    double fabric_clock_hz = 200e6;

    bool operator==(const DmaTiming&) const = default;
};

enum class DmaState { idle, busy, done };

/// Contiguous host buffer handed to a channel. It must stay alive until the
/// transfer has been waited on.
class DmaBuffer {
public:
    explicit DmaBuffer(std::size_t length);
    explicit DmaBuffer(std::vector<std::uint8_t> bytes);

    std::size_t length() const noexcept { return bytes_.size(); }
    std::span<std::uint8_t> bytes() noexcept { return bytes_; }
    std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
    std::vector<std::uint8_t> release() && { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

struct DmaTicket {
    const void* channel = nullptr;
    std::uint64_t sequence = 0;
    bool operator==(const DmaTicket&) const = default;
};

struct DmaCompletion {
    std::uint64_t bytes_moved = 0;
    double simulated_seconds = 0.0;
    std::uint64_t start_cycle = 0;
    std::uint64_t end_cycle = 0;
    std::uint64_t stall_cycles = 0;
    bool operator==(const DmaCompletion&) const = default;
};

/// A DMA engine bound to one switch port. Host-to-fabric channels emit one
/// byte per token (zero-extended, last flag on the final byte); fabric-to-host
/// channels write arriving tokens into the destination buffer. Only one transfer
/// is outstanding at a time.
///
/// Simulated cost of a transfer: setup_latency + length / bandwidth, plus
/// stall_cycles / fabric_clock for cycles the stream was back-pressured.
class DmaChannel final : public StreamEndpoint, public Clocked {
public:
    DmaChannel(std::string name, DmaDirection direction, DmaTiming timing);

    DmaChannel(const DmaChannel&) = delete;
    DmaChannel& operator=(const DmaChannel&) = delete;

    /// Binds the channel to a port it was attached on. Throws
    /// port-direction-mismatch unless a to_fabric channel sits on a producer
    /// port (or from_fabric on a consumer port) whose endpoint is this channel.
    void init(StreamSwitch& fabric, PortId port);

    /// Starts a transfer. Throws busy-error unless the channel is idle.
    DmaTicket transfer(std::span<std::uint8_t> buffer);
    DmaTicket transfer(DmaBuffer& buffer) { return transfer(buffer.bytes()); }

    /// Completion record if the ticket's transfer has finished.
    std::optional<DmaCompletion> completion(const DmaTicket& ticket) const;
    /// Returns the channel to idle and yields the ticket's record. Repeated
    /// calls return the same record.
    DmaCompletion acknowledge(const DmaTicket& ticket);

    double transfer_cost(std::size_t length) const noexcept;

    const std::string& name() const noexcept { return name_; }
    DmaDirection direction() const noexcept { return direction_; }
    const DmaTiming& timing() const noexcept { return timing_; }
    DmaState state() const noexcept { return state_; }
    std::optional<PortId> port() const noexcept { return port_; }
    std::uint64_t bytes_in_flight_transfer() const noexcept { return moved_; }
    std::uint64_t transfers_started() const noexcept { return sequence_; }
    std::uint64_t total_bytes_moved() const noexcept { return total_bytes_; }

    // StreamEndpoint
    std::string_view endpoint_name() const override { return name_; }
    bool has_token() const override;
    StreamToken take_token() override;
    bool can_accept() const override;
    void give_token(StreamToken token) override;

    // Clocked
    void tick(std::uint64_t cycle) override;
    bool idle() const override { return state_ != DmaState::busy; }

private:
    void finish(std::uint64_t end_cycle);

    std::string name_;
    DmaDirection direction_;
    DmaTiming timing_;
    std::optional<PortId> port_;
    StreamSwitch* fabric_ = nullptr;

    DmaState state_ = DmaState::idle;
    std::span<std::uint8_t> buffer_;
    std::uint64_t moved_ = 0;
    std::uint64_t stalls_ = 0;
    std::uint64_t start_cycle_ = 0;
    bool took_this_cycle_ = false;
    std::uint64_t sequence_ = 0;
    std::uint64_t total_bytes_ = 0;
    std::map<std::uint64_t, DmaCompletion> records_;
};

/// Steps the switch until the ticket's transfer completes, then acknowledges
/// it. Throws timeout-error after max_cycles.
DmaCompletion dma_wait(StreamSwitch& fabric, DmaChannel& channel, const DmaTicket& ticket,
                       std::uint64_t max_cycles = 100'000'000);

} // namespace fabsim
