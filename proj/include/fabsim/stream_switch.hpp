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

#include "fabsim/mmio.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fabsim {

/// One beat on a stream: a pixel zero-extended to 32 bits plus the end-of-frame flag.
struct StreamToken {
    Word payload = 0;
    bool last = false;
    bool operator==(const StreamToken&) const = default;
};

enum class PortDirection { producer, consumer };

using PortId = std::uint32_t;

/// Route register value meaning "consumer not driven".
inline constexpr Word kUnrouted = 0xFFFF'FFFFu;

/// A stream interface attached to the switch. Producers override
/// has_token/take_token, consumers override can_accept/give_token.
class StreamEndpoint {
public:
    virtual ~StreamEndpoint() = default;

    virtual std::string_view endpoint_name() const = 0;

    virtual bool has_token() const { return false; }
    virtual StreamToken take_token();

    virtual bool can_accept() const { return false; }
    virtual void give_token(StreamToken token);
};

/// Fabric state advanced once per cycle after the switch has moved tokens.
class Clocked {
public:
    virtual ~Clocked() = default;
    virtual void tick(std::uint64_t cycle) = 0;
    /// No frame in flight and nothing buffered.
    virtual bool idle() const = 0;
};

struct RouteKey {
    PortId producer = 0;
    PortId consumer = 0;
    auto operator<=>(const RouteKey&) const = default;
};

struct CycleStats {
    std::uint64_t cycles_elapsed = 0;
    std::map<RouteKey, std::uint64_t> tokens_moved;
    std::map<RouteKey, std::uint64_t> stall_cycles;

    std::uint64_t moved(RouteKey route) const;
    std::uint64_t stalled(RouteKey route) const;
    std::uint64_t total_moved() const;

    CycleStats& operator+=(const CycleStats& other);
    bool operator==(const CycleStats&) const = default;
};

/// producer port -> consumer port
struct SwitchConfig {
    std::map<PortId, PortId> routes;
    bool operator==(const SwitchConfig&) const = default;
};

/// Crossbar between kernel and DMA stream ports. Each step, every route moves
/// at most one token, and only when the producer has one and the consumer is
/// ready. Routes are point-to-point (no fan-in, no fan-out) and may only change
/// while the fabric is idle.
class StreamSwitch {
public:
    StreamSwitch() = default;
    StreamSwitch(const StreamSwitch&) = delete;
    StreamSwitch& operator=(const StreamSwitch&) = delete;

    /// Ports are numbered from 0 in attach order. The endpoint must outlive the switch.
    PortId attach_port(StreamEndpoint& endpoint, PortDirection direction);

    /// Registers per-cycle state to tick after each token-move phase.
    void add_component(Clocked& component);

    void configure_route(PortId producer, PortId consumer);
    void remove_route(PortId consumer);

    CycleStats step();

    /// Steps until `sink` receives a token with last=true. Throws timeout-error
    /// when that does not happen within max_cycles.
    CycleStats run_frame(PortId sink, std::uint64_t max_cycles);

    /// Single step without materialising a stats delta. Returns true when a
    /// last-flagged token was delivered to `watch`.
    bool advance(std::optional<PortId> watch = std::nullopt);

    bool idle() const;
    std::uint64_t cycle() const noexcept { return cycle_; }
    CycleStats totals() const;
    SwitchConfig config() const;

    std::size_t port_count() const noexcept { return ports_.size(); }
    PortDirection direction(PortId port) const;
    StreamEndpoint& endpoint(PortId port) const;
    std::optional<PortId> find_port(std::string_view name) const;
    std::optional<PortId> producer_for(PortId consumer) const;
    std::optional<PortId> consumer_for(PortId producer) const;

private:
    struct Port {
        StreamEndpoint* endpoint;
        PortDirection direction;
    };
    struct Route {
        PortId producer;
        PortId consumer;
        StreamEndpoint* source;
        StreamEndpoint* sink;
        std::uint64_t moved = 0;
        std::uint64_t stalled = 0;
        bool mid_frame = false;
    };

    const Port& port(PortId id) const;
    void require_idle(const char* what) const;

    std::vector<Port> ports_;
    std::vector<Route> routes_;      // ordered by consumer id
    std::vector<Clocked*> components_;
    // counters of removed routes, so totals() stays cumulative
    std::map<RouteKey, std::pair<std::uint64_t, std::uint64_t>> retired_;
    std::uint64_t cycle_ = 0;
};

} // namespace fabsim
