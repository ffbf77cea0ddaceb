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

#include "fabsim/image.hpp"
#include "fabsim/overlay.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fabsim {

enum class BenchConfigId { naive_1t, threaded_2t, optimized, fabric_pipeline, script_optimized, script_fabric };

inline constexpr std::array<BenchConfigId, 6> kAllConfigs{
    BenchConfigId::naive_1t,        BenchConfigId::threaded_2t,      BenchConfigId::optimized,
    BenchConfigId::fabric_pipeline, BenchConfigId::script_optimized, BenchConfigId::script_fabric,
};

std::string_view to_string(BenchConfigId id) noexcept;
BenchConfigId bench_config_from_string(std::string_view text);
/// Comma-separated config names; "all" selects every config.
std::vector<BenchConfigId> parse_config_list(std::string_view text);
bool is_script_config(BenchConfigId id) noexcept;

/// speedup(c) = time(baseline) / time(c). Throws missing-baseline when the
/// baseline has no time, invalid-argument for a non-positive time.
std::map<std::string, double> compute_speedups(const std::map<std::string, double>& times,
                                               const std::string& baseline);
/// Speedup as reported: rounded to 2 decimals.
double round_speedup(double speedup) noexcept;

/// Fabric configuration time, component by component.
struct FabricBreakdown {
    std::uint64_t cycles = 0;
    double dma_in_seconds = 0.0;
    double compute_seconds = 0.0;
    double dma_out_seconds = 0.0;
    double host_overhead_seconds = 0.0;
    std::uint64_t dma_transfers = 0;
    std::uint64_t bytes_from_host = 0;
    std::uint64_t bytes_to_host = 0;
    /// Bytes that left the fabric between the two kernels. Always 0 for a fused route.
    std::uint64_t intermediate_bytes = 0;

    double total() const noexcept {
        return dma_in_seconds + compute_seconds + dma_out_seconds + host_overhead_seconds;
    }
};

struct FabricFrame {
    EdgeMap edges;
    FabricBreakdown breakdown;
};

/// Programs the kernels' frame registers through MMIO, then streams one frame
/// in through the overlay's first host-to-fabric channel and out through its
/// first fabric-to-host channel.
FabricFrame fabric_edge_detect(Overlay& overlay, const PixelImage& image, int threshold = kDefaultThreshold);

/// Ideal compute cycles of the routed kernel chain for a frame: pixels plus
/// every kernel's latency.
struct CycleModel {
    int width = 0;
    int height = 0;
    std::uint64_t pixels = 0;
    std::vector<std::pair<std::string, std::int64_t>> kernel_latencies;
    std::uint64_t compute_cycles = 0;
    double compute_seconds = 0.0;
    double dma_in_seconds = 0.0;
    double dma_out_seconds = 0.0;
};
CycleModel cycle_model(const OverlayDescriptor& descriptor, int width, int height);

/// One timed execution of a configuration.
struct RunOutcome {
    double seconds = 0.0;
    std::string digest;
    std::optional<FabricBreakdown> fabric;
};

using ConfigRunner = std::function<RunOutcome(const PixelImage&)>;

struct BenchOptions {
    std::vector<BenchConfigId> configs{kAllConfigs.begin(), kAllConfigs.end()};
    int repetitions = 5;
    int warmup = 1;
    int threshold = kDefaultThreshold;
    int threads = 2;
    BenchConfigId baseline = BenchConfigId::naive_1t;
    std::filesystem::path overlay;
    /// PGM the image came from. Script configs need a file; when empty one is written.
    std::filesystem::path image_path;
    /// Directory holding script_optimized_pipeline.py and script_fabric_pipeline.py.
    std::filesystem::path script_dir;
    std::string python = "python3";
    /// Single untimed-median run per config, for digest checks only.
    bool digest_only = false;
    /// Replaces the built-in runner of a config (used for fault injection).
    std::map<BenchConfigId, ConfigRunner> runners;
};

struct BenchResult {
    BenchConfigId config = BenchConfigId::naive_1t;
    double seconds = 0.0;
    double speedup = 0.0;
    std::string output_digest;
    std::vector<double> samples;
    std::optional<FabricBreakdown> fabric;
};

struct BenchReport {
    std::vector<BenchResult> results;
    /// Configs that were requested but skipped, with the reason.
    std::vector<std::string> notices;
};

double median(std::vector<double> values);

/// Runs each config sequentially: warmup runs discarded, median of the timed
/// repetitions reported. Throws digest-mismatch as soon as a config's output
/// differs from the first one's.
BenchReport run_benchmark(const PixelImage& image, const BenchOptions& options);

/// Script row protocol: the last non-empty stdout line of a script run is a
/// JSON object {"config": name, "seconds": number, "digest": hex}.
RunOutcome parse_script_row(std::string_view output, BenchConfigId expected);
std::filesystem::path script_path(const std::filesystem::path& script_dir, BenchConfigId id);

enum class ReportFormat { text, csv, markdown };
ReportFormat report_format_from_string(std::string_view text);

/// Table with columns Configuration, Time (s), Speedup.
std::string render_report(const std::vector<BenchResult>& results, ReportFormat format);
/// DMA / compute / host overhead split of the fabric rows.
std::string render_fabric_breakdown(const std::vector<BenchResult>& results);
std::string render_cycle_model(const CycleModel& model);

} // namespace fabsim
