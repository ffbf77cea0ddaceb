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

#include "fabsim/bench.hpp"

#include "fabsim/corpus.hpp"
#include "fabsim/digest.hpp"
#include "fabsim/error.hpp"
#include "fabsim/pipelines.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include <unistd.h>

namespace fabsim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char ch : s) {
        if (ch == '\'') {
            out += "'\\''";
        } else {
            out += ch;
        }
    }
    return out + "'";
}

const DmaDecl* first_channel(const OverlayDescriptor& d, DmaDirection dir) {
    for (const DmaDecl& c : d.dma_channels) {
        if (c.direction == dir) {
            return &c;
        }
    }
    return nullptr;
}

} // namespace

std::string_view to_string(BenchConfigId id) noexcept {
    switch (id) {
    case BenchConfigId::naive_1t: return "naive-1t";
    case BenchConfigId::threaded_2t: return "threaded-2t";
    case BenchConfigId::optimized: return "optimized";
    case BenchConfigId::fabric_pipeline: return "fabric-pipeline";
    case BenchConfigId::script_optimized: return "script-optimized";
    case BenchConfigId::script_fabric: return "script-fabric";
    }
    return "unknown";
}

BenchConfigId bench_config_from_string(std::string_view text) {
    for (BenchConfigId id : kAllConfigs) {
        if (to_string(id) == text) {
            return id;
        }
    }
    fail(ErrorCode::invalid_argument, "unknown configuration '" + std::string(text) + "'");
}

std::vector<BenchConfigId> parse_config_list(std::string_view text) {
    if (text == "all") {
        return {kAllConfigs.begin(), kAllConfigs.end()};
    }
    std::vector<BenchConfigId> out;
    while (!text.empty()) {
        const std::size_t comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        if (!item.empty()) {
            const BenchConfigId id = bench_config_from_string(item);
            if (std::find(out.begin(), out.end(), id) == out.end()) {
                out.push_back(id);
            }
        }
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    if (out.empty()) {
        fail(ErrorCode::invalid_argument, "no configurations selected");
    }
    return out;
}

bool is_script_config(BenchConfigId id) noexcept {
    return id == BenchConfigId::script_optimized || id == BenchConfigId::script_fabric;
}

std::map<std::string, double> compute_speedups(const std::map<std::string, double>& times,
                                               const std::string& baseline) {
    auto base = times.find(baseline);
    if (base == times.end()) {
        fail(ErrorCode::missing_baseline, "baseline '" + baseline + "' has no time");
    }
    std::map<std::string, double> out;
    for (const auto& [name, t] : times) {
        if (!(t > 0)) {
            fail(ErrorCode::invalid_argument, "time of '" + name + "' must be positive");
        }
        out[name] = base->second / t;
    }
    return out;
}

double round_speedup(double speedup) noexcept {
    return std::round(speedup * 100.0) / 100.0;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        fail(ErrorCode::invalid_argument, "median of no values");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

FabricFrame fabric_edge_detect(Overlay& overlay, const PixelImage& image, int threshold) {
    const auto t0 = Clock::now();
    const double sim0 = overlay.simulation_wall_seconds();
    const OverlayDescriptor& d = overlay.descriptor();
    const DmaDecl* source = first_channel(d, DmaDirection::to_fabric);
    const DmaDecl* sink = first_channel(d, DmaDirection::from_fabric);
    if (source == nullptr || sink == nullptr) {
        fail(ErrorCode::validation, "overlay '" + d.name + "' lacks a host-to-fabric or fabric-to-host channel");
    }
    for (const KernelDecl& k : d.kernels) {
        MmioWindow regs = overlay.window(k.base, regs::kKernelBlock);
        regs.write(regs::kKernelWidth, static_cast<Word>(image.width()));
        regs.write(regs::kKernelHeight, static_cast<Word>(image.height()));
        regs.write(regs::kKernelThreshold, static_cast<Word>(threshold));
    }
    const MemoryTraffic before = overlay.memory_traffic();
    const std::uint64_t cycle0 = overlay.fabric().cycle();

    std::vector<std::uint8_t> input(image.samples().begin(), image.samples().end());
    EdgeMap edges(image.width(), image.height());
    const DmaTicket out_ticket = overlay.transfer(sink->name, edges.samples());
    const DmaTicket in_ticket = overlay.transfer(source->name, input);
    const std::uint64_t budget = 4 * static_cast<std::uint64_t>(image.size()) + 1'000'000;
    const DmaCompletion in = overlay.wait(in_ticket, budget);
    const DmaCompletion out = overlay.wait(out_ticket, budget);

    const MemoryTraffic after = overlay.memory_traffic();
    FabricBreakdown b;
    b.cycles = overlay.fabric().cycle() - cycle0;
    b.dma_in_seconds = in.simulated_seconds;
    b.dma_out_seconds = out.simulated_seconds;
    b.compute_seconds = static_cast<double>(b.cycles) / overlay.fabric_clock_hz();
    b.dma_transfers = after.transfers - before.transfers;
    b.bytes_from_host = after.bytes_from_host - before.bytes_from_host;
    b.bytes_to_host = after.bytes_to_host - before.bytes_to_host;
    b.intermediate_bytes = b.bytes_from_host + b.bytes_to_host - in.bytes_moved - out.bytes_moved;
    if (out.bytes_moved != image.size()) {
        fail(ErrorCode::dimension_mismatch, "fabric returned " + std::to_string(out.bytes_moved) + " bytes for a " +
                                                std::to_string(image.size()) + "-pixel frame");
    }
    b.host_overhead_seconds =
        std::max(0.0, seconds_since(t0) - (overlay.simulation_wall_seconds() - sim0));
    return FabricFrame{std::move(edges), b};
}

CycleModel cycle_model(const OverlayDescriptor& descriptor, int width, int height) {
    if (width < 1 || height < 1) {
        fail(ErrorCode::invalid_argument, "frame dimensions must be positive");
    }
    CycleModel m;
    m.width = width;
    m.height = height;
    m.pixels = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
    m.compute_cycles = m.pixels;
    for (const KernelDecl& k : descriptor.kernels) {
        const std::int64_t lat = latency_of(k.kind, width, k.pipeline_depth);
        m.kernel_latencies.emplace_back(k.name, lat);
        m.compute_cycles += static_cast<std::uint64_t>(lat);
    }
    m.compute_seconds = static_cast<double>(m.compute_cycles) / descriptor.fabric_clock_hz;
    auto cost = [&](const DmaDecl* c) {
        return c == nullptr ? 0.0 : c->setup_latency + static_cast<double>(m.pixels) / c->bandwidth;
    };
    m.dma_in_seconds = cost(first_channel(descriptor, DmaDirection::to_fabric));
    m.dma_out_seconds = cost(first_channel(descriptor, DmaDirection::from_fabric));
    return m;
}

std::filesystem::path script_path(const std::filesystem::path& script_dir, BenchConfigId id) {
    switch (id) {
    case BenchConfigId::script_optimized: return script_dir / "script_optimized_pipeline.py";
    case BenchConfigId::script_fabric: return script_dir / "script_fabric_pipeline.py";
    default: fail(ErrorCode::invalid_argument, std::string(to_string(id)) + " is not a script configuration");
    }
}

RunOutcome parse_script_row(std::string_view output, BenchConfigId expected) {
    std::string last;
    std::istringstream lines{std::string(output)};
    for (std::string line; std::getline(lines, line);) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            last = line;
        }
    }
    if (last.empty()) {
        fail(ErrorCode::format, std::string(to_string(expected)) + ": script printed no result row");
    }
    nlohmann::json row;
    try {
        row = nlohmann::json::parse(last);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::format, std::string(to_string(expected)) + ": result row is not JSON: " + e.what());
    }
    if (!row.is_object() || !row.contains("config") || !row.contains("seconds") || !row.contains("digest") ||
        !row["config"].is_string() || !row["seconds"].is_number() || !row["digest"].is_string()) {
        fail(ErrorCode::format, std::string(to_string(expected)) +
                                    ": result row needs string 'config', number 'seconds', string 'digest'");
    }
    if (row["config"].get<std::string>() != to_string(expected)) {
        fail(ErrorCode::format, "script reported config '" + row["config"].get<std::string>() + "', expected '" +
                                    std::string(to_string(expected)) + "'");
    }
    RunOutcome r;
    r.seconds = row["seconds"].get<double>();
    r.digest = row["digest"].get<std::string>();
    if (!(r.seconds > 0)) {
        fail(ErrorCode::format, std::string(to_string(expected)) + ": script reported a non-positive time");
    }
    return r;
}

namespace {

RunOutcome time_software(const PixelImage& image, EdgeMap (*fn)(const PixelImage&, const PipelineParams&),
                         const PipelineParams& params) {
    const auto t0 = Clock::now();
    EdgeMap out = fn(image, params);
    const double s = seconds_since(t0);
    return RunOutcome{s, digest_of(out), std::nullopt};
}

struct ScriptRun {
    std::filesystem::path script;
    std::filesystem::path image;
    std::filesystem::path overlay;
    std::string python;
    int threshold;
    int reps;
    int warmup;
};

RunOutcome run_script(const ScriptRun& s, BenchConfigId id) {
    const std::string cmd = shell_quote(s.python) + " " + shell_quote(s.script.string()) + " --image " +
                            shell_quote(s.image.string()) + " --overlay " + shell_quote(s.overlay.string()) +
                            " --threshold " + std::to_string(s.threshold) + " --reps " + std::to_string(s.reps) +
                            " --warmup " + std::to_string(s.warmup) + " --json";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        fail(ErrorCode::config_unavailable, std::string(to_string(id)) + ": cannot start " + s.python);
    }
    std::string output;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) {
        output.append(buf, n);
    }
    const int status = ::pclose(pipe);
    if (status != 0) {
        fail(ErrorCode::config_unavailable,
             std::string(to_string(id)) + ": script exited with status " + std::to_string(status) + "\n" + output);
    }
    return parse_script_row(output, id);
}

} // namespace

BenchReport run_benchmark(const PixelImage& image, const BenchOptions& options) {
    if (options.repetitions < (options.digest_only ? 1 : 3)) {
        fail(ErrorCode::invalid_argument, "at least 3 repetitions are needed for a reported median");
    }
    if (options.warmup < 0 || options.threads < 1) {
        fail(ErrorCode::invalid_argument, "warmup must be >= 0 and threads >= 1");
    }
    if (options.configs.empty()) {
        fail(ErrorCode::invalid_argument, "no configurations selected");
    }

    BenchReport report;
    std::optional<Overlay> overlay;
    std::filesystem::path image_file = options.image_path;
    std::optional<std::filesystem::path> temp_image;
    auto cleanup = [&] {
        if (temp_image) {
            std::error_code ec;
            std::filesystem::remove(*temp_image, ec);
        }
    };

    auto builtin = [&](BenchConfigId id) -> std::optional<ConfigRunner> {
        PipelineParams p;
        p.threshold = options.threshold;
        switch (id) {
        case BenchConfigId::naive_1t:
            return [p](const PixelImage& img) { return time_software(img, edge_detect_naive, p); };
        case BenchConfigId::threaded_2t:
            p.thread_count = options.threads;
            return [p](const PixelImage& img) { return time_software(img, edge_detect_threaded, p); };
        case BenchConfigId::optimized:
            p.thread_count = options.threads;
            return [p](const PixelImage& img) { return time_software(img, edge_detect_optimized, p); };
        case BenchConfigId::fabric_pipeline: {
            if (options.overlay.empty()) {
                fail(ErrorCode::config_unavailable, "fabric-pipeline needs an overlay descriptor");
            }
            if (!overlay) {
                overlay.emplace(Overlay::load(options.overlay));
            }
            const int threshold = options.threshold;
            Overlay* o = &*overlay;
            return [o, threshold](const PixelImage& img) {
                FabricFrame f = fabric_edge_detect(*o, img, threshold);
                return RunOutcome{f.breakdown.total(), digest_of(f.edges), f.breakdown};
            };
        }
        case BenchConfigId::script_optimized:
        case BenchConfigId::script_fabric: {
            if (options.script_dir.empty()) {
                report.notices.push_back(std::string(to_string(id)) +
                                         " skipped: scripting component not installed (no script directory)");
                return std::nullopt;
            }
            const std::filesystem::path script = script_path(options.script_dir, id);
            if (!std::filesystem::exists(script)) {
                report.notices.push_back(std::string(to_string(id)) + " skipped: " + script.string() + " not found");
                return std::nullopt;
            }
            if (options.overlay.empty()) {
                fail(ErrorCode::config_unavailable, std::string(to_string(id)) + " needs an overlay descriptor");
            }
            if (image_file.empty()) {
                temp_image = std::filesystem::temp_directory_path() /
                             ("fabsim_bench_" + std::to_string(::getpid()) + ".pgm");
                write_pgm(image, *temp_image);
                image_file = *temp_image;
            }
            ScriptRun run{script, image_file, options.overlay, options.python, options.threshold,
                          options.repetitions, options.warmup};
            // the script reports its own median, so it runs once per benchmark
            auto cached = std::make_shared<std::optional<RunOutcome>>();
            return [run, id, cached](const PixelImage&) {
                if (!*cached) {
                    *cached = run_script(run, id);
                }
                return **cached;
            };
        }
        }
        return std::nullopt;
    };

    try {
        for (BenchConfigId id : options.configs) {
            std::optional<ConfigRunner> runner;
            if (auto it = options.runners.find(id); it != options.runners.end()) {
                runner = it->second;
            } else {
                runner = builtin(id);
            }
            if (!runner) {
                continue;
            }
            BenchResult result;
            result.config = id;
            for (int i = 0; i < options.warmup; ++i) {
                (*runner)(image);
            }
            for (int i = 0; i < options.repetitions; ++i) {
                RunOutcome r = (*runner)(image);
                if (result.output_digest.empty()) {
                    result.output_digest = r.digest;
                } else if (r.digest != result.output_digest) {
                    fail(ErrorCode::digest_mismatch,
                         std::string(to_string(id)) + " produced different outputs across repetitions");
                }
                result.samples.push_back(r.seconds);
                if (r.fabric) {
                    result.fabric = r.fabric;
                }
            }
            result.seconds = median(result.samples);
            if (!report.results.empty() && result.output_digest != report.results.front().output_digest) {
                fail(ErrorCode::digest_mismatch,
                     std::string(to_string(id)) + " output digest " + result.output_digest + " differs from " +
                         std::string(to_string(report.results.front().config)) + " digest " +
                         report.results.front().output_digest);
            }
            report.results.push_back(std::move(result));
        }
    } catch (...) {
        cleanup();
        throw;
    }
    cleanup();

    std::map<std::string, double> times;
    for (const BenchResult& r : report.results) {
        times[std::string(to_string(r.config))] = r.seconds;
    }
    if (!report.results.empty() && !options.digest_only) {
        const auto speedups = compute_speedups(times, std::string(to_string(options.baseline)));
        for (BenchResult& r : report.results) {
            r.speedup = speedups.at(std::string(to_string(r.config)));
        }
    }
    return report;
}

ReportFormat report_format_from_string(std::string_view text) {
    if (text == "text") return ReportFormat::text;
    if (text == "csv") return ReportFormat::csv;
    if (text == "markdown") return ReportFormat::markdown;
    fail(ErrorCode::invalid_argument, "unknown report format '" + std::string(text) + "'");
}

std::string render_report(const std::vector<BenchResult>& results, ReportFormat fmt) {
    if (results.empty()) {
        fail(ErrorCode::precondition, "cannot render an empty result table");
    }
    std::ostringstream out;
    switch (fmt) {
    case ReportFormat::csv:
        out << "Configuration,Time (s),Speedup\n";
        for (const BenchResult& r : results) {
            out << to_string(r.config) << ',' << format("%.6f", r.seconds) << ','
                << format("%.2f", round_speedup(r.speedup)) << '\n';
        }
        break;
    case ReportFormat::markdown:
        out << "| Configuration | Time (s) | Speedup |\n";
        out << "|---|---:|---:|\n";
        for (const BenchResult& r : results) {
            out << "| " << to_string(r.config) << " | " << format("%.4f", r.seconds) << " | "
                << format("%.2f", round_speedup(r.speedup)) << " |\n";
        }
        break;
    case ReportFormat::text: {
        char line[128];
        std::snprintf(line, sizeof line, "%-18s %12s %10s\n", "Configuration", "Time (s)", "Speedup");
        out << line;
        for (const BenchResult& r : results) {
            std::snprintf(line, sizeof line, "%-18s %12.4f %10.2f\n", std::string(to_string(r.config)).c_str(),
                          r.seconds, round_speedup(r.speedup));
            out << line;
        }
        break;
    }
    }
    return out.str();
}

std::string render_fabric_breakdown(const std::vector<BenchResult>& results) {
    std::ostringstream out;
    for (const BenchResult& r : results) {
        if (!r.fabric) {
            continue;
        }
        const FabricBreakdown& b = *r.fabric;
        out << "fabric breakdown (" << to_string(r.config) << ", last repetition)\n";
        out << "  dma in         " << format("%.6f", b.dma_in_seconds) << " s\n";
        out << "  compute        " << format("%.6f", b.compute_seconds) << " s (" << b.cycles << " cycles)\n";
        out << "  dma out        " << format("%.6f", b.dma_out_seconds) << " s\n";
        out << "  host overhead  " << format("%.6f", b.host_overhead_seconds) << " s\n";
        out << "  dma transfers  " << b.dma_transfers << ", host bytes in " << b.bytes_from_host << ", out "
            << b.bytes_to_host << ", inter-kernel bytes " << b.intermediate_bytes << "\n";
    }
    return out.str();
}

std::string render_cycle_model(const CycleModel& m) {
    std::ostringstream out;
    out << "frame          " << m.width << "x" << m.height << " (" << m.pixels << " pixels)\n";
    for (const auto& [name, lat] : m.kernel_latencies) {
        out << "latency " << name << std::string(name.size() < 7 ? 7 - name.size() : 0, ' ') << lat
            << " cycles\n";
    }
    out << "compute        " << m.compute_cycles << " cycles, " << format("%.6f", m.compute_seconds) << " s\n";
    out << "dma in         " << format("%.6f", m.dma_in_seconds) << " s\n";
    out << "dma out        " << format("%.6f", m.dma_out_seconds) << " s\n";
    out << "total          " << format("%.6f", m.dma_in_seconds + m.compute_seconds + m.dma_out_seconds)
        << " s before host overhead\n";
    return out.str();
}

} // namespace fabsim
