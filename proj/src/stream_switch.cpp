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

#include "fabsim/stream_switch.hpp"

#include "fabsim/error.hpp"

#include <algorithm>

namespace fabsim {

StreamToken StreamEndpoint::take_token() {
    fail(ErrorCode::port_direction_mismatch, std::string(endpoint_name()) + " does not produce tokens");
}

void StreamEndpoint::give_token(StreamToken) {
    fail(ErrorCode::port_direction_mismatch, std::string(endpoint_name()) + " does not consume tokens");
}

std::uint64_t CycleStats::moved(RouteKey route) const {
    auto it = tokens_moved.find(route);
    return it == tokens_moved.end() ? 0 : it->second;
}

std::uint64_t CycleStats::stalled(RouteKey route) const {
    auto it = stall_cycles.find(route);
    return it == stall_cycles.end() ? 0 : it->second;
}

std::uint64_t CycleStats::total_moved() const {
    std::uint64_t sum = 0;
    for (const auto& [key, n] : tokens_moved) {
        sum += n;
    }
    return sum;
}

CycleStats& CycleStats::operator+=(const CycleStats& other) {
    cycles_elapsed += other.cycles_elapsed;
    for (const auto& [key, n] : other.tokens_moved) {
        tokens_moved[key] += n;
    }
    for (const auto& [key, n] : other.stall_cycles) {
        stall_cycles[key] += n;
    }
    return *this;
}

namespace {

CycleStats difference(const CycleStats& after, const CycleStats& before) {
    CycleStats delta;
    delta.cycles_elapsed = after.cycles_elapsed - before.cycles_elapsed;
    for (const auto& [key, n] : after.tokens_moved) {
        if (std::uint64_t d = n - before.moved(key); d != 0) {
            delta.tokens_moved[key] = d;
        }
    }
    for (const auto& [key, n] : after.stall_cycles) {
        if (std::uint64_t d = n - before.stalled(key); d != 0) {
            delta.stall_cycles[key] = d;
        }
    }
    return delta;
}

} // namespace

const StreamSwitch::Port& StreamSwitch::port(PortId id) const {
    if (id >= ports_.size()) {
        fail(ErrorCode::unknown_port, "port " + std::to_string(id) + " is not attached");
    }
    return ports_[id];
}

PortId StreamSwitch::attach_port(StreamEndpoint& endpoint, PortDirection direction) {
    for (const Port& p : ports_) {
        if (p.endpoint == &endpoint) {
            fail(ErrorCode::duplicate_attach, std::string(endpoint.endpoint_name()) + " is already attached");
        }
    }
    ports_.push_back(Port{&endpoint, direction});
    return static_cast<PortId>(ports_.size() - 1);
}

void StreamSwitch::add_component(Clocked& component) {
    if (std::ranges::find(components_, &component) == components_.end()) {
        components_.push_back(&component);
    }
}

void StreamSwitch::require_idle(const char* what) const {
    if (!idle()) {
        fail(ErrorCode::busy, std::string(what) + " while a frame is in flight");
    }
}

void StreamSwitch::configure_route(PortId producer, PortId consumer) {
    const Port& src = port(producer);
    const Port& dst = port(consumer);
    if (src.direction != PortDirection::producer) {
        fail(ErrorCode::port_direction_mismatch, "port " + std::to_string(producer) + " is not a producer");
    }
    if (dst.direction != PortDirection::consumer) {
        fail(ErrorCode::port_direction_mismatch, "port " + std::to_string(consumer) + " is not a consumer");
    }
    for (const Route& r : routes_) {
        if (r.consumer == consumer) {
            fail(ErrorCode::fan_in_conflict, "consumer port " + std::to_string(consumer) +
                                                 " is already driven by port " + std::to_string(r.producer));
        }
        if (r.producer == producer) {
            fail(ErrorCode::fan_out_conflict, "producer port " + std::to_string(producer) +
                                                  " already drives port " + std::to_string(r.consumer));
        }
    }
    require_idle("route change");
    RouteKey key{producer, consumer};
    auto [moved, stalled] = retired_[key];
    retired_.erase(key);
    Route route{producer, consumer, src.endpoint, dst.endpoint, moved, stalled, false};
    auto pos = std::ranges::lower_bound(routes_, consumer, {}, &Route::consumer);
    routes_.insert(pos, route);
}

void StreamSwitch::remove_route(PortId consumer) {
    port(consumer);
    auto it = std::ranges::find(routes_, consumer, &Route::consumer);
    if (it == routes_.end()) {
        return;
    }
    require_idle("route change");
    retired_[RouteKey{it->producer, it->consumer}] = {it->moved, it->stalled};
    routes_.erase(it);
}

bool StreamSwitch::advance(std::optional<PortId> watch) {
    bool delivered_last = false;
    for (Route& r : routes_) {
        if (!r.source->has_token()) {
            continue;
        }
        if (!r.sink->can_accept()) {
            ++r.stalled;
            continue;
        }
        StreamToken token = r.source->take_token();
        r.sink->give_token(token);
        ++r.moved;
        r.mid_frame = !token.last;
        if (token.last && watch && *watch == r.consumer) {
            delivered_last = true;
        }
    }
    for (Clocked* c : components_) {
        c->tick(cycle_);
    }
    ++cycle_;
    return delivered_last;
}

CycleStats StreamSwitch::step() {
    CycleStats before = totals();
    advance();
    return difference(totals(), before);
}

CycleStats StreamSwitch::run_frame(PortId sink, std::uint64_t max_cycles) {
    if (port(sink).direction != PortDirection::consumer) {
        fail(ErrorCode::port_direction_mismatch, "run_frame sink must be a consumer port");
    }
    CycleStats before = totals();
    for (std::uint64_t n = 0;; ++n) {
        if (n >= max_cycles) {
            fail(ErrorCode::timeout, "frame did not reach port " + std::to_string(sink) + " within " +
                                         std::to_string(max_cycles) + " cycles");
        }
        if (advance(sink)) {
            break;
        }
    }
    return difference(totals(), before);
}

bool StreamSwitch::idle() const {
    for (const Route& r : routes_) {
        if (r.mid_frame) {
            return false;
        }
    }
    return std::ranges::all_of(components_, [](const Clocked* c) { return c->idle(); });
}

CycleStats StreamSwitch::totals() const {
    CycleStats stats;
    stats.cycles_elapsed = cycle_;
    for (const auto& [key, counters] : retired_) {
        if (counters.first != 0) {
            stats.tokens_moved[key] = counters.first;
        }
        if (counters.second != 0) {
            stats.stall_cycles[key] = counters.second;
        }
    }
    for (const Route& r : routes_) {
        RouteKey key{r.producer, r.consumer};
        if (r.moved != 0) {
            stats.tokens_moved[key] = r.moved;
        }
        if (r.stalled != 0) {
            stats.stall_cycles[key] = r.stalled;
        }
    }
    return stats;
}

SwitchConfig StreamSwitch::config() const {
    SwitchConfig cfg;
    for (const Route& r : routes_) {
        cfg.routes[r.producer] = r.consumer;
    }
    return cfg;
}

PortDirection StreamSwitch::direction(PortId id) const {
    return port(id).direction;
}

StreamEndpoint& StreamSwitch::endpoint(PortId id) const {
    return *port(id).endpoint;
}

std::optional<PortId> StreamSwitch::find_port(std::string_view name) const {
    for (std::size_t i = 0; i < ports_.size(); ++i) {
        if (ports_[i].endpoint->endpoint_name() == name) {
            return static_cast<PortId>(i);
        }
    }
    return std::nullopt;
}

std::optional<PortId> StreamSwitch::producer_for(PortId consumer) const {
    auto it = std::ranges::find(routes_, consumer, &Route::consumer);
    if (it == routes_.end()) {
        return std::nullopt;
    }
    return it->producer;
}

std::optional<PortId> StreamSwitch::consumer_for(PortId producer) const {
    auto it = std::ranges::find(routes_, producer, &Route::producer);
    if (it == routes_.end()) {
        return std::nullopt;
    }
    return it->consumer;
}

} // namespace fabsim
