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

#include "fabsim/overlay.hpp"

#include "fabsim/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fabsim {

// ---------------------------------------------------------------------------
// Descriptor parsing

namespace {

std::string line_of(const YAML::Node& node) {
    const YAML::Mark mark = node.Mark();
    return mark.is_null() ? std::string("line ?") : "line " + std::to_string(mark.line + 1);
}

[[noreturn]] void parse_fail(const YAML::Node& node, const std::string& what) {
    fail(ErrorCode::parse, line_of(node) + ": " + what);
}

void check_keys(const YAML::Node& map, const std::string& context, std::initializer_list<const char*> allowed) {
    if (!map.IsMap()) {
        parse_fail(map, context + " must be a mapping");
    }
    for (const auto& kv : map) {
        const std::string key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            parse_fail(kv.first, "unknown field '" + key + "' in " + context);
        }
    }
}

YAML::Node require(const YAML::Node& map, const char* key, const std::string& context) {
    YAML::Node child = map[key];
    if (!child) {
        parse_fail(map, "missing field '" + std::string(key) + "' in " + context);
    }
    return child;
}

std::string as_string(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) {
        parse_fail(node, "field '" + field + "' must be a scalar");
    }
    return node.Scalar();
}

std::uint64_t as_uint(const YAML::Node& node, const std::string& field) {
    const std::string text = as_string(node, field);
    std::uint64_t value = 0;
    int base = 10;
    std::string_view digits = text;
    if (digits.starts_with("0x") || digits.starts_with("0X")) {
        digits.remove_prefix(2);
        base = 16;
    }
    std::string clean;
    for (char ch : digits) {
        if (ch != '_') {
            clean.push_back(ch);
        }
    }
    auto [ptr, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), value, base);
    if (ec != std::errc() || ptr != clean.data() + clean.size() || clean.empty()) {
        parse_fail(node, "field '" + field + "' expects an unsigned integer, got '" + text + "'");
    }
    return value;
}

int as_int(const YAML::Node& node, const std::string& field) {
    const std::uint64_t v = as_uint(node, field);
    if (v > 0x7FFF'FFFFu) {
        parse_fail(node, "field '" + field + "' is out of range");
    }
    return static_cast<int>(v);
}

double as_double(const YAML::Node& node, const std::string& field) {
    const std::string text = as_string(node, field);
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        parse_fail(node, "field '" + field + "' expects a number, got '" + text + "'");
    }
}

std::string hex(Address a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(a));
    return buf;
}

} // namespace

OverlayDescriptor parse_descriptor(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        fail(ErrorCode::parse, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root || !root.IsMap()) {
        fail(ErrorCode::parse, "line 1: descriptor must be a mapping");
    }
    check_keys(root, "descriptor",
               {"version", "name", "fabric_clock_hz", "cpu_clock_hz", "reset_value", "switch", "kernels",
                "dma_channels", "routes"});

    OverlayDescriptor d;
    d.version = as_int(require(root, "version", "descriptor"), "version");
    if (d.version != kDescriptorVersion) {
        parse_fail(root["version"], "unsupported descriptor version " + std::to_string(d.version));
    }
    d.name = as_string(require(root, "name", "descriptor"), "name");
    d.fabric_clock_hz = as_double(require(root, "fabric_clock_hz", "descriptor"), "fabric_clock_hz");
    if (root["cpu_clock_hz"]) {
        d.cpu_clock_hz = as_double(root["cpu_clock_hz"], "cpu_clock_hz");
    }
    if (root["reset_value"]) {
        const std::uint64_t v = as_uint(root["reset_value"], "reset_value");
        if (v > 0xFFFF'FFFFu) {
            parse_fail(root["reset_value"], "reset_value exceeds 32 bits");
        }
        d.reset_value = static_cast<Word>(v);
    }

    if (YAML::Node sw = root["switch"]) {
        check_keys(sw, "switch", {"ports", "base"});
        const std::uint64_t ports = as_uint(require(sw, "ports", "switch"), "switch.ports");
        if (ports > 4096) {
            parse_fail(sw["ports"], "switch.ports is out of range");
        }
        d.stream_switch.ports = static_cast<std::uint32_t>(ports);
        d.stream_switch.base = as_uint(require(sw, "base", "switch"), "switch.base");
    }

    if (YAML::Node kernels = root["kernels"]) {
        if (!kernels.IsSequence()) {
            parse_fail(kernels, "'kernels' must be a list");
        }
        for (std::size_t i = 0; i < kernels.size(); ++i) {
            const YAML::Node k = kernels[i];
            const std::string ctx = "kernels[" + std::to_string(i) + "]";
            check_keys(k, ctx, {"name", "kind", "base", "pipeline_depth", "width", "height", "threshold"});
            KernelDecl decl;
            decl.name = as_string(require(k, "name", ctx), ctx + ".name");
            const YAML::Node kind = require(k, "kind", ctx);
            try {
                decl.kind = kernel_kind_from_string(as_string(kind, ctx + ".kind"));
            } catch (const Error& e) {
                parse_fail(kind, e.what());
            }
            decl.base = as_uint(require(k, "base", ctx), ctx + ".base");
            decl.pipeline_depth = k["pipeline_depth"] ? as_int(k["pipeline_depth"], ctx + ".pipeline_depth")
                                                      : geometry_of(decl.kind).pipeline_depth;
            decl.width = k["width"] ? as_int(k["width"], ctx + ".width") : 0;
            decl.height = k["height"] ? as_int(k["height"], ctx + ".height") : 0;
            decl.threshold = k["threshold"] ? as_int(k["threshold"], ctx + ".threshold") : kDefaultThreshold;
            d.kernels.push_back(std::move(decl));
        }
    }

    if (YAML::Node channels = root["dma_channels"]) {
        if (!channels.IsSequence()) {
            parse_fail(channels, "'dma_channels' must be a list");
        }
        for (std::size_t i = 0; i < channels.size(); ++i) {
            const YAML::Node c = channels[i];
            const std::string ctx = "dma_channels[" + std::to_string(i) + "]";
            check_keys(c, ctx, {"name", "direction", "bandwidth", "setup_latency", "base"});
            DmaDecl decl;
            decl.name = as_string(require(c, "name", ctx), ctx + ".name");
            const YAML::Node dir = require(c, "direction", ctx);
            try {
                decl.direction = dma_direction_from_string(as_string(dir, ctx + ".direction"));
            } catch (const Error& e) {
                parse_fail(dir, e.what());
            }
            if (c["bandwidth"]) {
                decl.bandwidth = as_double(c["bandwidth"], ctx + ".bandwidth");
            }
            if (c["setup_latency"]) {
                decl.setup_latency = as_double(c["setup_latency"], ctx + ".setup_latency");
            }
            decl.base = as_uint(require(c, "base", ctx), ctx + ".base");
            d.dma_channels.push_back(std::move(decl));
        }
    }

    if (YAML::Node routes = root["routes"]) {
        if (!routes.IsSequence()) {
            parse_fail(routes, "'routes' must be a list");
        }
        for (std::size_t i = 0; i < routes.size(); ++i) {
            const YAML::Node r = routes[i];
            const std::string ctx = "routes[" + std::to_string(i) + "]";
            check_keys(r, ctx, {"producer", "consumer"});
            d.routes.push_back(RouteDecl{as_string(require(r, "producer", ctx), ctx + ".producer"),
                                         as_string(require(r, "consumer", ctx), ctx + ".consumer")});
        }
    }
    return d;
}

OverlayDescriptor read_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::io, "cannot open overlay descriptor " + path.string());
    }
    std::stringstream text;
    text << in.rdbuf();
    try {
        return parse_descriptor(text.str());
    } catch (const Error& e) {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

std::string serialize_descriptor(const OverlayDescriptor& d) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "version" << YAML::Value << d.version;
    out << YAML::Key << "name" << YAML::Value << d.name;
    out << YAML::Key << "fabric_clock_hz" << YAML::Value << d.fabric_clock_hz;
    out << YAML::Key << "cpu_clock_hz" << YAML::Value << d.cpu_clock_hz;
    out << YAML::Key << "reset_value" << YAML::Value << hex(d.reset_value);
    out << YAML::Key << "switch" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "ports" << YAML::Value << d.stream_switch.ports;
    out << YAML::Key << "base" << YAML::Value << hex(d.stream_switch.base);
    out << YAML::EndMap;

    out << YAML::Key << "kernels" << YAML::Value << YAML::BeginSeq;
    for (const KernelDecl& k : d.kernels) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << k.name;
        out << YAML::Key << "kind" << YAML::Value << std::string(to_string(k.kind));
        out << YAML::Key << "base" << YAML::Value << hex(k.base);
        out << YAML::Key << "pipeline_depth" << YAML::Value << k.pipeline_depth;
        out << YAML::Key << "width" << YAML::Value << k.width;
        out << YAML::Key << "height" << YAML::Value << k.height;
        out << YAML::Key << "threshold" << YAML::Value << k.threshold;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "dma_channels" << YAML::Value << YAML::BeginSeq;
    for (const DmaDecl& c : d.dma_channels) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << c.name;
        out << YAML::Key << "direction" << YAML::Value << std::string(to_string(c.direction));
        out << YAML::Key << "bandwidth" << YAML::Value << c.bandwidth;
        out << YAML::Key << "setup_latency" << YAML::Value << c.setup_latency;
        out << YAML::Key << "base" << YAML::Value << hex(c.base);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "routes" << YAML::Value << YAML::BeginSeq;
    for (const RouteDecl& r : d.routes) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "producer" << YAML::Value << r.producer;
        out << YAML::Key << "consumer" << YAML::Value << r.consumer;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void write_descriptor(const OverlayDescriptor& descriptor, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        fail(ErrorCode::io, "cannot create " + path.string());
    }
    out << serialize_descriptor(descriptor);
}

// ---------------------------------------------------------------------------
// MMIO window

void MmioWindow::check(Address offset) const {
    if (offset % kWordBytes != 0) {
        fail(ErrorCode::alignment, "MMIO offset " + hex(offset) + " is not 4-byte aligned");
    }
    if (offset >= length_ || length_ - offset < kWordBytes) {
        fail(ErrorCode::range, "MMIO offset " + hex(offset) + " outside window of length " + hex(length_));
    }
}

Word MmioWindow::read(Address offset) const {
    check(offset);
    return space_->read(region_, offset_ + offset);
}

void MmioWindow::write(Address offset, Word value) {
    check(offset);
    space_->write(region_, offset_ + offset, value);
}

// ---------------------------------------------------------------------------
// Overlay

struct Overlay::Impl {
    explicit Impl(OverlayDescriptor d) : desc(std::move(d)), mmio(desc.reset_value) { }

    OverlayDescriptor desc;
    MmioSpace mmio;
    std::vector<std::unique_ptr<DmaChannel>> channels;
    std::vector<RegionHandle> channel_regions;
    std::vector<std::unique_ptr<StreamingKernel>> kernels;
    std::vector<RegionHandle> kernel_regions;
    std::optional<RegionHandle> switch_region;
    StreamSwitch fabric;
    std::vector<std::string> port_names;
    std::uint64_t synced_generation = ~std::uint64_t{0};
    double sim_wall = 0.0;

    void instantiate();
    void apply_routes();
    void apply_kernel_registers();
    void write_status();
    std::optional<PortId> find_port(std::string_view name) const;
    PortId consumer_port(std::string_view name) const;
    PortId producer_port(std::string_view name) const;
    Word route_value(PortId consumer) const {
        return mmio.read(*switch_region, regs::route_offset(consumer));
    }
    void sync();
};

std::optional<PortId> Overlay::Impl::find_port(std::string_view name) const {
    for (std::size_t i = 0; i < port_names.size(); ++i) {
        if (port_names[i] == name) {
            return static_cast<PortId>(i);
        }
    }
    return std::nullopt;
}

PortId Overlay::Impl::consumer_port(std::string_view name) const {
    auto p = find_port(name);
    if (!p) {
        fail(ErrorCode::unknown_endpoint, "no endpoint named '" + std::string(name) + "'");
    }
    if (fabric.direction(*p) != PortDirection::consumer) {
        fail(ErrorCode::port_direction_mismatch, "'" + std::string(name) + "' is not a consumer endpoint");
    }
    return *p;
}

PortId Overlay::Impl::producer_port(std::string_view name) const {
    auto p = find_port(name);
    if (!p) {
        fail(ErrorCode::unknown_endpoint, "no endpoint named '" + std::string(name) + "'");
    }
    if (fabric.direction(*p) != PortDirection::producer) {
        fail(ErrorCode::port_direction_mismatch, "'" + std::string(name) + "' is not a producer endpoint");
    }
    return *p;
}

void Overlay::Impl::instantiate() {
    if (!(desc.fabric_clock_hz > 0)) {
        fail(ErrorCode::validation, "fabric_clock_hz must be positive");
    }
    if (!(desc.cpu_clock_hz > 0)) {
        fail(ErrorCode::validation, "cpu_clock_hz must be positive");
    }
    std::set<std::string> names;
    auto claim_name = [&](const std::string& n) {
        if (n.empty() || n.find('.') != std::string::npos) {
            fail(ErrorCode::validation, "invalid component name '" + n + "'");
        }
        if (!names.insert(n).second) {
            fail(ErrorCode::validation, "duplicate component name '" + n + "'");
        }
    };
    auto map = [&](Address base, Address length, const std::string& owner) {
        try {
            return mmio.map_region(base, length, owner);
        } catch (const Error& e) {
            fail(ErrorCode::validation, std::string("register map: ") + e.what());
        }
    };

    if (desc.stream_switch.ports > 0) {
        switch_region = map(desc.stream_switch.base, 4 * static_cast<Address>(desc.stream_switch.ports), "switch");
    }

    for (const DmaDecl& c : desc.dma_channels) {
        claim_name(c.name);
        channel_regions.push_back(map(c.base, regs::kDmaBlock, c.name));
        if (!(c.bandwidth > 0) || c.setup_latency < 0) {
            fail(ErrorCode::validation, c.name + ": bandwidth must be positive and setup latency non-negative");
        }
        channels.push_back(std::make_unique<DmaChannel>(
            c.name, c.direction, DmaTiming{c.bandwidth, c.setup_latency, desc.fabric_clock_hz}));
    }
    for (const KernelDecl& k : desc.kernels) {
        claim_name(k.name);
        kernel_regions.push_back(map(k.base, regs::kKernelBlock, k.name));
        if (k.pipeline_depth < 1) {
            fail(ErrorCode::validation, k.name + ": pipeline_depth must be at least 1");
        }
        StreamingParams params;
        params.width = k.width;
        params.height = k.height;
        params.threshold = k.threshold;
        params.pipeline_depth = k.pipeline_depth;
        kernels.push_back(make_streaming(k.kind, k.name, params));
    }

    const std::size_t needed = channels.size() + 2 * kernels.size();
    if (needed > desc.stream_switch.ports) {
        fail(ErrorCode::validation, "switch declares " + std::to_string(desc.stream_switch.ports) +
                                        " ports but the overlay needs " + std::to_string(needed));
    }
    for (auto& ch : channels) {
        const PortDirection dir =
            ch->direction() == DmaDirection::to_fabric ? PortDirection::producer : PortDirection::consumer;
        const PortId id = fabric.attach_port(*ch, dir);
        ch->init(fabric, id);
        port_names.push_back(ch->name());
    }
    for (auto& k : kernels) {
        fabric.attach_port(k->input(), PortDirection::consumer);
        port_names.emplace_back(k->input().endpoint_name());
        fabric.attach_port(k->output(), PortDirection::producer);
        port_names.emplace_back(k->output().endpoint_name());
        fabric.add_component(*k);
    }

    // reset state of every register the overlay owns
    for (PortId p = 0; p < port_names.size(); ++p) {
        if (fabric.direction(p) == PortDirection::consumer) {
            mmio.write(*switch_region, regs::route_offset(p), kUnrouted);
        }
    }
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        const KernelDecl& k = desc.kernels[i];
        const RegionHandle r = kernel_regions[i];
        mmio.write(r, regs::kKernelControl, 1);
        mmio.write(r, regs::kKernelStatus, 0);
        mmio.write(r, regs::kKernelWidth, static_cast<Word>(k.width));
        mmio.write(r, regs::kKernelHeight, static_cast<Word>(k.height));
        mmio.write(r, regs::kKernelThreshold, static_cast<Word>(k.threshold));
        mmio.write(r, regs::kKernelDepth, static_cast<Word>(k.pipeline_depth));
        mmio.write(r, regs::kKernelFrames, 0);
    }
    for (const RegionHandle r : channel_regions) {
        mmio.write(r, regs::kDmaControl, 0);
        mmio.write(r, regs::kDmaStatus, 0);
        mmio.write(r, regs::kDmaLength, 0);
        mmio.write(r, regs::kDmaBytesMoved, 0);
    }

    std::set<PortId> driven;
    std::set<PortId> driving;
    for (const RouteDecl& route : desc.routes) {
        auto producer = find_port(route.producer);
        auto consumer = find_port(route.consumer);
        if (!producer || fabric.direction(*producer) != PortDirection::producer) {
            fail(ErrorCode::validation, "route source '" + route.producer + "' is not a declared producer endpoint");
        }
        if (!consumer || fabric.direction(*consumer) != PortDirection::consumer) {
            fail(ErrorCode::validation, "route target '" + route.consumer + "' is not a declared consumer endpoint");
        }
        if (!driven.insert(*consumer).second) {
            fail(ErrorCode::validation, "'" + route.consumer + "' is driven by more than one route");
        }
        if (!driving.insert(*producer).second) {
            fail(ErrorCode::validation, "'" + route.producer + "' drives more than one route");
        }
        mmio.write(*switch_region, regs::route_offset(*consumer), *producer);
    }
    sync();
}

void Overlay::Impl::apply_routes() {
    if (!switch_region) {
        return;
    }
    std::map<PortId, std::optional<PortId>> desired;
    std::set<PortId> producers;
    for (PortId c = 0; c < port_names.size(); ++c) {
        if (fabric.direction(c) != PortDirection::consumer) {
            continue;
        }
        const Word v = route_value(c);
        if (v == kUnrouted) {
            desired[c] = std::nullopt;
            continue;
        }
        if (v >= port_names.size() || fabric.direction(static_cast<PortId>(v)) != PortDirection::producer) {
            fail(ErrorCode::validation, "route register of '" + port_names[c] + "' holds " + std::to_string(v) +
                                            ", which is not a producer port");
        }
        if (!producers.insert(static_cast<PortId>(v)).second) {
            fail(ErrorCode::fan_out_conflict, "producer '" + port_names[v] + "' is routed to more than one consumer");
        }
        desired[c] = static_cast<PortId>(v);
    }
    std::vector<PortId> changed;
    for (const auto& [c, p] : desired) {
        if (fabric.producer_for(c) != p) {
            changed.push_back(c);
        }
    }
    if (changed.empty()) {
        return;
    }
    if (!fabric.idle()) {
        fail(ErrorCode::busy, "route change requested while a frame is in flight");
    }
    for (PortId c : changed) {
        fabric.remove_route(c);
    }
    for (PortId c : changed) {
        if (desired[c]) {
            fabric.configure_route(*desired[c], c);
        }
    }
}

void Overlay::Impl::apply_kernel_registers() {
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        const RegionHandle r = kernel_regions[i];
        StreamingParams params = kernels[i]->params();
        params.width = static_cast<int>(mmio.read(r, regs::kKernelWidth));
        params.height = static_cast<int>(mmio.read(r, regs::kKernelHeight));
        params.threshold = static_cast<int>(mmio.read(r, regs::kKernelThreshold));
        params.pipeline_depth = static_cast<int>(std::min<Word>(mmio.read(r, regs::kKernelDepth), 1u << 16));
        if (params.pipeline_depth < 1) {
            params.pipeline_depth = 1;
        }
        kernels[i]->set_params(params);
        kernels[i]->set_running((mmio.read(r, regs::kKernelControl) & 1u) != 0);
    }
}

void Overlay::Impl::sync() {
    if (mmio.generation() == synced_generation) {
        return;
    }
    apply_routes();
    apply_kernel_registers();
    synced_generation = mmio.generation();
}

void Overlay::Impl::write_status() {
    const bool clean = mmio.generation() == synced_generation;
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        mmio.write(kernel_regions[i], regs::kKernelStatus, kernels[i]->busy() ? 1u : 0u);
        mmio.write(kernel_regions[i], regs::kKernelFrames, static_cast<Word>(kernels[i]->frames_completed()));
    }
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const DmaChannel& ch = *channels[i];
        const Word status = ch.state() == DmaState::idle ? 0u : ch.state() == DmaState::busy ? 1u : 2u;
        mmio.write(channel_regions[i], regs::kDmaStatus, status);
        mmio.write(channel_regions[i], regs::kDmaBytesMoved, static_cast<Word>(ch.bytes_in_flight_transfer()));
        if (ch.state() != DmaState::busy) {
            mmio.write(channel_regions[i], regs::kDmaControl, 0);
        }
    }
    if (clean) {
        synced_generation = mmio.generation();
    }
}

Overlay Overlay::load(const std::filesystem::path& path) {
    return Overlay(read_descriptor(path));
}

Overlay::Overlay(OverlayDescriptor descriptor) : impl_(std::make_unique<Impl>(std::move(descriptor))) {
    impl_->instantiate();
}

Overlay::Overlay(Overlay&&) noexcept = default;
Overlay& Overlay::operator=(Overlay&&) noexcept = default;
Overlay::~Overlay() = default;

const OverlayDescriptor& Overlay::descriptor() const noexcept {
    return impl_->desc;
}

OverlayDescriptor Overlay::describe() const {
    OverlayDescriptor d = impl_->desc;
    d.routes.clear();
    if (!impl_->switch_region) {
        return d;
    }
    std::set<PortId> listed;
    for (const RouteDecl& r : impl_->desc.routes) {
        const PortId c = *impl_->find_port(r.consumer);
        const PortId p = *impl_->find_port(r.producer);
        if (impl_->route_value(c) == p) {
            d.routes.push_back(r);
            listed.insert(c);
        }
    }
    for (PortId c = 0; c < impl_->port_names.size(); ++c) {
        if (impl_->fabric.direction(c) != PortDirection::consumer || listed.contains(c)) {
            continue;
        }
        const Word v = impl_->route_value(c);
        if (v != kUnrouted && v < impl_->port_names.size()) {
            d.routes.push_back(RouteDecl{impl_->port_names[v], impl_->port_names[c]});
        }
    }
    return d;
}

double Overlay::fabric_clock_hz() const noexcept {
    return impl_->desc.fabric_clock_hz;
}

MmioSpace& Overlay::mmio() noexcept {
    return impl_->mmio;
}

const MmioSpace& Overlay::mmio() const noexcept {
    return impl_->mmio;
}

MmioWindow Overlay::window(Address base, Address length) {
    if (base % kWordBytes != 0) {
        fail(ErrorCode::alignment, "MMIO window base " + hex(base) + " is not 4-byte aligned");
    }
    auto handle = impl_->mmio.address_map().handle_for(base);
    if (!handle) {
        fail(ErrorCode::range, "no register region at " + hex(base));
    }
    const Region& r = impl_->mmio.address_map().region(*handle);
    if (length == 0 || length > r.end() - base) {
        fail(ErrorCode::range, "MMIO window " + hex(base) + "+" + hex(length) + " exceeds region " + r.owner);
    }
    return MmioWindow(impl_->mmio, *handle, base - r.base, length);
}

StreamSwitch& Overlay::fabric() noexcept {
    return impl_->fabric;
}

DmaChannel& Overlay::dma(std::string_view name) {
    for (auto& ch : impl_->channels) {
        if (ch->name() == name) {
            return *ch;
        }
    }
    fail(ErrorCode::unknown_endpoint, "no DMA channel named '" + std::string(name) + "'");
}

StreamingKernel& Overlay::kernel(std::string_view name) {
    for (auto& k : impl_->kernels) {
        if (k->name() == name) {
            return *k;
        }
    }
    fail(ErrorCode::unknown_endpoint, "no kernel named '" + std::string(name) + "'");
}

PortId Overlay::port(std::string_view endpoint) const {
    auto p = impl_->find_port(endpoint);
    if (!p) {
        fail(ErrorCode::unknown_endpoint, "no endpoint named '" + std::string(endpoint) + "'");
    }
    return *p;
}

std::string Overlay::endpoint_name(PortId port) const {
    if (port >= impl_->port_names.size()) {
        fail(ErrorCode::unknown_port, "port " + std::to_string(port) + " is not attached");
    }
    return impl_->port_names[port];
}

Address Overlay::route_register(std::string_view consumer) const {
    const PortId c = impl_->consumer_port(consumer);
    return impl_->desc.stream_switch.base + regs::route_offset(c);
}

void Overlay::reconfigure_route(std::string_view producer, std::string_view consumer) {
    const PortId p = impl_->producer_port(producer);
    const PortId c = impl_->consumer_port(consumer);
    impl_->sync();
    if (!impl_->fabric.idle()) {
        fail(ErrorCode::busy, "cannot reroute while a frame is in flight");
    }
    for (PortId other = 0; other < impl_->port_names.size(); ++other) {
        if (other != c && impl_->fabric.direction(other) == PortDirection::consumer &&
            impl_->route_value(other) == p) {
            impl_->mmio.write(*impl_->switch_region, regs::route_offset(other), kUnrouted);
        }
    }
    impl_->mmio.write(*impl_->switch_region, regs::route_offset(c), p);
    impl_->sync();
}

void Overlay::clear_route(std::string_view consumer) {
    const PortId c = impl_->consumer_port(consumer);
    impl_->sync();
    if (!impl_->fabric.idle()) {
        fail(ErrorCode::busy, "cannot reroute while a frame is in flight");
    }
    impl_->mmio.write(*impl_->switch_region, regs::route_offset(c), kUnrouted);
    impl_->sync();
}

void Overlay::sync() {
    impl_->sync();
}

DmaTicket Overlay::transfer(std::string_view channel, std::span<std::uint8_t> buffer) {
    DmaChannel& ch = dma(channel);
    impl_->sync();
    const DmaTicket ticket = ch.transfer(buffer);
    for (std::size_t i = 0; i < impl_->channels.size(); ++i) {
        if (impl_->channels[i].get() == &ch) {
            const bool clean = impl_->mmio.generation() == impl_->synced_generation;
            impl_->mmio.write(impl_->channel_regions[i], regs::kDmaLength, static_cast<Word>(buffer.size()));
            impl_->mmio.write(impl_->channel_regions[i], regs::kDmaControl, 1);
            impl_->mmio.write(impl_->channel_regions[i], regs::kDmaStatus, 1);
            if (clean) {
                impl_->synced_generation = impl_->mmio.generation();
            }
        }
    }
    return ticket;
}

DmaCompletion Overlay::wait(const DmaTicket& ticket, std::uint64_t max_cycles) {
    DmaChannel* channel = nullptr;
    for (auto& ch : impl_->channels) {
        if (ch.get() == ticket.channel) {
            channel = ch.get();
        }
    }
    if (channel == nullptr) {
        fail(ErrorCode::invalid_argument, "ticket does not belong to this overlay");
    }
    impl_->sync();
    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t n = 0;
    try {
        for (; !channel->completion(ticket); ++n) {
            if (n >= max_cycles) {
                fail(ErrorCode::timeout, channel->name() + ": transfer did not complete within " +
                                             std::to_string(max_cycles) + " cycles");
            }
            impl_->fabric.advance();
        }
    } catch (...) {
        impl_->sim_wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        impl_->write_status();
        throw;
    }
    impl_->sim_wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const DmaCompletion record = channel->acknowledge(ticket);
    impl_->write_status();
    return record;
}

void Overlay::run_cycles(std::uint64_t cycles) {
    impl_->sync();
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t i = 0; i < cycles; ++i) {
        impl_->fabric.advance();
    }
    impl_->sim_wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    impl_->write_status();
}

MemoryTraffic Overlay::memory_traffic() const {
    MemoryTraffic t;
    for (const auto& ch : impl_->channels) {
        t.transfers += ch->transfers_started();
        if (ch->direction() == DmaDirection::to_fabric) {
            t.bytes_from_host += ch->total_bytes_moved();
        } else {
            t.bytes_to_host += ch->total_bytes_moved();
        }
    }
    return t;
}

double Overlay::simulation_wall_seconds() const noexcept {
    return impl_->sim_wall;
}

} // namespace fabsim
