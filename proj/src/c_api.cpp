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

#include "fabsim/c_api.h"

#include "fabsim/digest.hpp"
#include "fabsim/error.hpp"
#include "fabsim/overlay.hpp"
#include "fabsim/pipelines.hpp"

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

using namespace fabsim;

namespace {

struct Session {
    explicit Session(Overlay o) : overlay(std::move(o)) { }
    Overlay overlay;
    std::vector<DmaTicket> tickets;
};

struct Registry {
    std::mutex mutex;
    std::map<fabsim_handle, std::shared_ptr<Session>> open;
    fabsim_handle next = 1;
};

Registry& registry() {
    static Registry r;
    return r;
}

thread_local std::string last_error;

int record(ErrorCode code, const std::string& message) {
    last_error = message;
    return static_cast<int>(code);
}

template <typename F>
int guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return FABSIM_OK;
    } catch (const Error& e) {
        return record(e.code(), e.what());
    } catch (const std::exception& e) {
        return record(ErrorCode::invalid_argument, e.what());
    } catch (...) {
        return record(ErrorCode::invalid_argument, "unknown failure");
    }
}

std::shared_ptr<Session> session(fabsim_handle handle) {
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.open.find(handle);
    if (it == r.open.end()) {
        if (handle > 0 && handle < r.next) {
            fail(ErrorCode::closed_handle, "overlay handle " + std::to_string(handle) + " has been released");
        }
        fail(ErrorCode::invalid_argument, "overlay handle " + std::to_string(handle) + " was never issued");
    }
    return it->second;
}

void require(const void* p, const char* what) {
    if (p == nullptr) {
        fail(ErrorCode::invalid_argument, std::string(what) + " must not be null");
    }
}

} // namespace

extern "C" {

int fabsim_abi_version(void) {
    return FABSIM_ABI_VERSION;
}

int fabsim_overlay_load(const char* path, fabsim_handle* out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto s = std::make_shared<Session>(Overlay::load(path));
        Registry& r = registry();
        std::lock_guard lock(r.mutex);
        const fabsim_handle h = r.next++;
        r.open.emplace(h, std::move(s));
        *out = h;
    });
}

int fabsim_overlay_release(fabsim_handle handle) {
    return guarded([&] {
        session(handle);
        Registry& r = registry();
        std::lock_guard lock(r.mutex);
        r.open.erase(handle);
    });
}

int fabsim_overlay_describe(fabsim_handle handle, char* buffer, size_t capacity, size_t* needed) {
    return guarded([&] {
        const std::string text = serialize_descriptor(session(handle)->overlay.describe());
        if (needed != nullptr) {
            *needed = text.size() + 1;
        }
        if (capacity > 0) {
            require(buffer, "buffer");
            const std::size_t n = std::min(capacity - 1, text.size());
            std::memcpy(buffer, text.data(), n);
            buffer[n] = '\0';
        }
    });
}

int fabsim_mmio_read(fabsim_handle handle, uint64_t base, uint64_t length, uint64_t offset, uint32_t* value) {
    return guarded([&] {
        require(value, "value");
        *value = session(handle)->overlay.window(base, length).read(offset);
    });
}

int fabsim_mmio_write(fabsim_handle handle, uint64_t base, uint64_t length, uint64_t offset, uint32_t value) {
    return guarded([&] { session(handle)->overlay.window(base, length).write(offset, value); });
}

int fabsim_route_register(fabsim_handle handle, const char* consumer, uint64_t* address) {
    return guarded([&] {
        require(consumer, "consumer");
        require(address, "address");
        *address = session(handle)->overlay.route_register(consumer);
    });
}

int fabsim_reconfigure_route(fabsim_handle handle, const char* producer, const char* consumer) {
    return guarded([&] {
        require(producer, "producer");
        require(consumer, "consumer");
        session(handle)->overlay.reconfigure_route(producer, consumer);
    });
}

int fabsim_dma_transfer(fabsim_handle handle, const char* channel, uint8_t* buffer, size_t length,
                        uint64_t* ticket) {
    return guarded([&] {
        require(channel, "channel");
        require(buffer, "buffer");
        require(ticket, "ticket");
        auto s = session(handle);
        const DmaTicket t = s->overlay.transfer(channel, std::span<std::uint8_t>(buffer, length));
        s->tickets.push_back(t);
        *ticket = s->tickets.size();
    });
}

int fabsim_dma_wait(fabsim_handle handle, uint64_t ticket, uint64_t max_cycles, fabsim_completion* out) {
    return guarded([&] {
        require(out, "out");
        auto s = session(handle);
        if (ticket == 0 || ticket > s->tickets.size()) {
            fail(ErrorCode::invalid_argument, "unknown DMA ticket " + std::to_string(ticket));
        }
        const DmaCompletion c = s->overlay.wait(s->tickets[ticket - 1], max_cycles);
        *out = fabsim_completion{c.bytes_moved, c.simulated_seconds, c.start_cycle, c.end_cycle, c.stall_cycles};
    });
}

int fabsim_fabric_cycle(fabsim_handle handle, uint64_t* cycle) {
    return guarded([&] {
        require(cycle, "cycle");
        *cycle = session(handle)->overlay.fabric().cycle();
    });
}

int fabsim_fabric_clock_hz(fabsim_handle handle, double* hz) {
    return guarded([&] {
        require(hz, "hz");
        *hz = session(handle)->overlay.fabric_clock_hz();
    });
}

int fabsim_memory_traffic(fabsim_handle handle, fabsim_traffic* out) {
    return guarded([&] {
        require(out, "out");
        const MemoryTraffic t = session(handle)->overlay.memory_traffic();
        *out = fabsim_traffic{t.transfers, t.bytes_from_host, t.bytes_to_host};
    });
}

int fabsim_register_snapshot(fabsim_handle handle, uint64_t* addresses, uint32_t* values, size_t capacity,
                             size_t* count) {
    return guarded([&] {
        require(count, "count");
        const RegisterSnapshot snap = session(handle)->overlay.mmio().snapshot();
        *count = snap.size();
        if (capacity > 0) {
            require(addresses, "addresses");
            require(values, "values");
        }
        std::size_t i = 0;
        for (const auto& [address, value] : snap) {
            if (i == capacity) {
                break;
            }
            addresses[i] = address;
            values[i] = value;
            ++i;
        }
    });
}

int fabsim_edge_detect_optimized(const uint8_t* pixels, int32_t width, int32_t height, int32_t threshold,
                                 int32_t threads, uint8_t* out) {
    return guarded([&] {
        require(pixels, "pixels");
        require(out, "out");
        if (width < 1 || height < 1) {
            fail(ErrorCode::invalid_argument, "image dimensions must be positive");
        }
        const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
        PixelImage img(width, height, std::vector<std::uint8_t>(pixels, pixels + n));
        PipelineParams p;
        p.threshold = threshold;
        p.thread_count = threads;
        const EdgeMap edges = edge_detect_optimized(img, p);
        std::memcpy(out, edges.data(), n);
    });
}

int fabsim_digest(const uint8_t* bytes, size_t length, char* out) {
    return guarded([&] {
        require(out, "out");
        if (length > 0) {
            require(bytes, "bytes");
        }
        const std::string hex = sha256_hex(std::span<const std::uint8_t>(bytes, length));
        std::memcpy(out, hex.c_str(), hex.size() + 1);
    });
}

const char* fabsim_last_error(void) {
    return last_error.c_str();
}

const char* fabsim_error_name(int code) {
    if (code < 0 || code > static_cast<int>(ErrorCode::invalid_argument)) {
        return "unknown-error";
    }
    return to_string(static_cast<ErrorCode>(code)).data();
}

} // extern "C"
