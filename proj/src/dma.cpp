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

#include "fabsim/dma.hpp"

#include "fabsim/error.hpp"

namespace fabsim {

std::string_view to_string(DmaDirection direction) noexcept {
    return direction == DmaDirection::to_fabric ? "to_fabric" : "from_fabric";
}

DmaDirection dma_direction_from_string(std::string_view text) {
    if (text == "to_fabric") return DmaDirection::to_fabric;
    if (text == "from_fabric") return DmaDirection::from_fabric;
    fail(ErrorCode::invalid_argument, "unknown DMA direction '" + std::string(text) + "'");
}

DmaBuffer::DmaBuffer(std::size_t length) : bytes_(length) {
    if (length == 0) {
        fail(ErrorCode::invalid_argument, "DMA buffer length must be positive");
    }
}

DmaBuffer::DmaBuffer(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
    if (bytes_.empty()) {
        fail(ErrorCode::invalid_argument, "DMA buffer length must be positive");
    }
}

DmaChannel::DmaChannel(std::string name, DmaDirection direction, DmaTiming timing)
    : name_(std::move(name)), direction_(direction), timing_(timing) {
    if (!(timing.bandwidth_bytes_per_sec > 0) || !(timing.fabric_clock_hz > 0) || timing.setup_latency_sec < 0) {
        fail(ErrorCode::invalid_argument, name_ + ": DMA bandwidth and clock must be positive, setup non-negative");
    }
}

void DmaChannel::init(StreamSwitch& fabric, PortId port) {
    const PortDirection expected =
        direction_ == DmaDirection::to_fabric ? PortDirection::producer : PortDirection::consumer;
    if (fabric.direction(port) != expected) {
        fail(ErrorCode::port_direction_mismatch,
             name_ + ": " + std::string(to_string(direction_)) + " channel needs a " +
                 (expected == PortDirection::producer ? "producer" : "consumer") + " port");
    }
    if (&fabric.endpoint(port) != this) {
        fail(ErrorCode::port_direction_mismatch, name_ + ": port " + std::to_string(port) +
                                                     " belongs to " + std::string(fabric.endpoint(port).endpoint_name()));
    }
    fabric_ = &fabric;
    port_ = port;
    fabric.add_component(*this);
}

DmaTicket DmaChannel::transfer(std::span<std::uint8_t> buffer) {
    if (fabric_ == nullptr) {
        fail(ErrorCode::precondition, name_ + ": channel not initialised");
    }
    if (state_ == DmaState::busy) {
        fail(ErrorCode::busy, name_ + ": transfer already in progress");
    }
    if (buffer.empty()) {
        fail(ErrorCode::invalid_argument, name_ + ": empty transfer buffer");
    }
    state_ = DmaState::busy;
    buffer_ = buffer;
    moved_ = 0;
    stalls_ = 0;
    took_this_cycle_ = false;
    start_cycle_ = fabric_->cycle();
    ++sequence_;
    return DmaTicket{this, sequence_};
}

double DmaChannel::transfer_cost(std::size_t length) const noexcept {
    return timing_.setup_latency_sec + static_cast<double>(length) / timing_.bandwidth_bytes_per_sec;
}

void DmaChannel::finish(std::uint64_t end_cycle) {
    DmaCompletion record;
    record.bytes_moved = moved_;
    record.stall_cycles = stalls_;
    record.start_cycle = start_cycle_;
    record.end_cycle = end_cycle;
    record.simulated_seconds =
        transfer_cost(moved_) + static_cast<double>(stalls_) / timing_.fabric_clock_hz;
    records_[sequence_] = record;
    total_bytes_ += moved_;
    buffer_ = {};
    state_ = DmaState::done;
}

std::optional<DmaCompletion> DmaChannel::completion(const DmaTicket& ticket) const {
    if (ticket.channel != this || ticket.sequence == 0 || ticket.sequence > sequence_) {
        fail(ErrorCode::invalid_argument, name_ + ": ticket does not belong to this channel");
    }
    auto it = records_.find(ticket.sequence);
    if (it == records_.end()) {
        return std::nullopt;
    }
    return it->second;
}

DmaCompletion DmaChannel::acknowledge(const DmaTicket& ticket) {
    auto record = completion(ticket);
    if (!record) {
        fail(ErrorCode::busy, name_ + ": transfer has not completed");
    }
    if (state_ == DmaState::done && ticket.sequence == sequence_) {
        state_ = DmaState::idle;
    }
    return *record;
}

bool DmaChannel::has_token() const {
    return direction_ == DmaDirection::to_fabric && state_ == DmaState::busy && moved_ < buffer_.size();
}

StreamToken DmaChannel::take_token() {
    if (!has_token()) {
        fail(ErrorCode::precondition, name_ + ": no token available");
    }
    const StreamToken token{buffer_[moved_], moved_ + 1 == buffer_.size()};
    ++moved_;
    took_this_cycle_ = true;
    if (token.last) {
        finish(fabric_->cycle() + 1);
    }
    return token;
}

bool DmaChannel::can_accept() const {
    return direction_ == DmaDirection::from_fabric && state_ == DmaState::busy;
}

void DmaChannel::give_token(StreamToken token) {
    if (!can_accept()) {
        fail(ErrorCode::precondition, name_ + ": not receiving");
    }
    if (moved_ >= buffer_.size()) {
        fail(ErrorCode::length_mismatch, name_ + ": incoming frame is larger than the " +
                                             std::to_string(buffer_.size()) + "-byte buffer");
    }
    buffer_[moved_] = static_cast<std::uint8_t>(token.payload & 0xFFu);
    ++moved_;
    if (token.last) {
        finish(fabric_->cycle() + 1);
    } else if (moved_ == buffer_.size()) {
        // buffer full without end-of-frame: the frame is larger than the buffer
        fail(ErrorCode::length_mismatch, name_ + ": incoming frame is larger than the " +
                                             std::to_string(buffer_.size()) + "-byte buffer");
    }
}

void DmaChannel::tick(std::uint64_t) {
    if (state_ == DmaState::busy && direction_ == DmaDirection::to_fabric && moved_ < buffer_.size() &&
        !took_this_cycle_) {
        ++stalls_;
    }
    took_this_cycle_ = false;
}

DmaCompletion dma_wait(StreamSwitch& fabric, DmaChannel& channel, const DmaTicket& ticket,
                       std::uint64_t max_cycles) {
    for (std::uint64_t n = 0; !channel.completion(ticket); ++n) {
        if (n >= max_cycles) {
            fail(ErrorCode::timeout, channel.name() + ": transfer did not complete within " +
                                         std::to_string(max_cycles) + " cycles");
        }
        fabric.advance();
    }
    return channel.acknowledge(ticket);
}

} // namespace fabsim
