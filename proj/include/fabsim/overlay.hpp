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

#include "fabsim/dma.hpp"
#include "fabsim/kernels.hpp"
#include "fabsim/mmio.hpp"
#include "fabsim/stream_switch.hpp"
#include "fabsim/streaming_kernels.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fabsim {

struct KernelDecl {
    std::string name;
    KernelKind kind = KernelKind::identity;
    Address base = 0;
    int pipeline_depth = 1;
    int width = 0;
    int height = 0;
    int threshold = kDefaultThreshold;

    bool operator==(const KernelDecl&) const = default;
};

struct SwitchDecl {
    std::uint32_t ports = 0;
    Address base = 0;

    bool operator==(const SwitchDecl&) const = default;
};

struct DmaDecl {
    std::string name;
    DmaDirection direction = DmaDirection::to_fabric;
    double bandwidth = 400e6;
    double setup_latency = 50e-6;
    Address base = 0;

    bool operator==(const DmaDecl&) const = default;
};

struct RouteDecl {
    std::string producer;
    std::string consumer;

    bool operator==(const RouteDecl&) const = default;
};

/// Declarative overlay: what a bitstream would contain, in readable form.
struct OverlayDescriptor {
    int version = 1;
    std::string name;
    double fabric_clock_hz = 200e6;
    double cpu_clock_hz = 667e6;
    Word reset_value = 0;
    SwitchDecl stream_switch;
    std::vector<KernelDecl> kernels;
    std::vector<DmaDecl> dma_channels;
    std::vector<RouteDecl> routes;

    bool operator==(const OverlayDescriptor&) const = default;
};

inline constexpr int kDescriptorVersion = 1;

/// Parses descriptor YAML. Throws parse-error naming the line and field.
OverlayDescriptor parse_descriptor(std::string_view text);
OverlayDescriptor read_descriptor(const std::filesystem::path& path);
std::string serialize_descriptor(const OverlayDescriptor& descriptor);
void write_descriptor(const OverlayDescriptor& descriptor, const std::filesystem::path& path);

// Register layout, relative to each component's base.
namespace regs {
inline constexpr Address kKernelBlock = 0x20;
inline constexpr Address kKernelControl = 0x00;    // bit0: run (auto-restart)
inline constexpr Address kKernelStatus = 0x04;     // bit0: busy
inline constexpr Address kKernelWidth = 0x08;
inline constexpr Address kKernelHeight = 0x0C;
inline constexpr Address kKernelThreshold = 0x10;
inline constexpr Address kKernelDepth = 0x14;
inline constexpr Address kKernelFrames = 0x18;

inline constexpr Address kDmaBlock = 0x20;
inline constexpr Address kDmaControl = 0x00;       // bit0: start (set by a transfer)
inline constexpr Address kDmaStatus = 0x04;        // 0 idle, 1 busy, 2 done
inline constexpr Address kDmaLength = 0x08;
inline constexpr Address kDmaBytesMoved = 0x0C;

/// One word per consumer port at base + 4 * port: producer port id or kUnrouted.
inline constexpr Address route_offset(PortId consumer) { return 4 * static_cast<Address>(consumer); }
} // namespace regs

/// Host view of a sub-range of the control space, addressed from `base`.
class MmioWindow {
public:
    MmioWindow(MmioSpace& space, RegionHandle region, Address offset, Address length)
        : space_(&space), region_(region), offset_(offset), length_(length) { }

    Word read(Address offset) const;
    void write(Address offset, Word value);
    Address length() const noexcept { return length_; }

private:
    void check(Address offset) const;

    MmioSpace* space_;
    RegionHandle region_;
    Address offset_;
    Address length_;
};

/// Host-memory traffic caused by DMA.
struct MemoryTraffic {
    std::uint64_t transfers = 0;
    std::uint64_t bytes_from_host = 0;
    std::uint64_t bytes_to_host = 0;
    bool operator==(const MemoryTraffic&) const = default;
};

/// An instantiated overlay: switch, kernels and DMA channels wired into one
/// control space. Register writes take effect on the next simulation step.
class Overlay {
public:
    static Overlay load(const std::filesystem::path& path);
    explicit Overlay(OverlayDescriptor descriptor);

    Overlay(Overlay&&) noexcept;
    Overlay& operator=(Overlay&&) noexcept;
    ~Overlay();

    const OverlayDescriptor& descriptor() const noexcept;
    /// Current structure, with routes read back from the switch registers.
    OverlayDescriptor describe() const;

    double fabric_clock_hz() const noexcept;

    MmioSpace& mmio() noexcept;
    const MmioSpace& mmio() const noexcept;
    /// Window over [base, base + length), which must sit inside one mapped region.
    MmioWindow window(Address base, Address length);

    StreamSwitch& fabric() noexcept;
    DmaChannel& dma(std::string_view name);
    StreamingKernel& kernel(std::string_view name);

    /// Port of an endpoint name ("dma_in", "conv.in", "conv.out", ...).
    PortId port(std::string_view endpoint) const;
    std::string endpoint_name(PortId port) const;
    /// Absolute address of the route register of a consumer endpoint.
    Address route_register(std::string_view consumer) const;

    /// Drives `consumer` from `producer`, clearing any other consumer the
    /// producer was driving. Performs exactly the route-register writes a host
    /// would issue through raw MMIO, then applies them.
    void reconfigure_route(std::string_view producer, std::string_view consumer);
    /// Detaches `consumer` from its producer.
    void clear_route(std::string_view consumer);

    /// Applies register writes made since the last step. Throws busy-error if a
    /// route change is requested mid-frame.
    void sync();

    DmaTicket transfer(std::string_view channel, std::span<std::uint8_t> buffer);
    DmaCompletion wait(const DmaTicket& ticket, std::uint64_t max_cycles = 100'000'000);

    /// Runs the fabric for a number of cycles (control registers applied first).
    void run_cycles(std::uint64_t cycles);

    MemoryTraffic memory_traffic() const;
    /// Host wall-clock seconds spent stepping the simulation.
    double simulation_wall_seconds() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace fabsim
