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
#include "fabsim/overlay.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#ifndef FABSIM_DEFAULT_OVERLAY
#define FABSIM_DEFAULT_OVERLAY "overlays/edge_detect.yaml"
#endif

using namespace fabsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDigest = 2;

struct Common {
    std::string image;
    std::string overlay = FABSIM_DEFAULT_OVERLAY;
    std::string configs = "all";
    std::string script_dir;
    std::string python = "python3";
    int threshold = kDefaultThreshold;
    int threads = 2;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--image", c.image, "Input PGM (P5); a seeded synthetic 1024x768 scene when omitted");
    cmd->add_option("--overlay", c.overlay, "Overlay descriptor")->capture_default_str();
    cmd->add_option("--configs", c.configs, "Comma-separated configurations or 'all'")->capture_default_str();
    cmd->add_option("--threshold", c.threshold, "Edge threshold on the L1 gradient magnitude")
        ->capture_default_str()
        ->check(CLI::Range(0, 4 * 4 * 255));
    cmd->add_option("--threads", c.threads, "Threads of the threaded and optimized configurations")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--script-dir", c.script_dir, "Directory with the script pipelines (default $FABSIM_SCRIPT_DIR)");
    cmd->add_option("--python", c.python, "Interpreter for script configurations")->capture_default_str();
}

PixelImage load_image(const Common& c) {
    if (!c.image.empty()) {
        return read_pgm(c.image);
    }
    return synthetic_image(CorpusPattern::shapes, seed_from_environment());
}

BenchOptions options_from(const Common& c) {
    BenchOptions o;
    o.configs = parse_config_list(c.configs);
    o.threshold = c.threshold;
    o.threads = c.threads;
    o.overlay = c.overlay;
    o.image_path = c.image;
    o.python = c.python;
    if (!c.script_dir.empty()) {
        o.script_dir = c.script_dir;
    } else if (const char* env = std::getenv("FABSIM_SCRIPT_DIR")) {
        o.script_dir = env;
    }
    return o;
}

void print_notices(const BenchReport& report) {
    for (const std::string& n : report.notices) {
        std::cerr << "notice: " << n << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Overlay simulator benchmark harness"};
    app.require_subcommand(1);

    Common run_opts;
    int reps = 5;
    int warmup = 1;
    std::string fmt = "text";
    CLI::App* run = app.add_subcommand("run", "Time the configurations and print a speedup table");
    add_common(run, run_opts);
    run->add_option("--reps", reps, "Timed repetitions per configuration (median reported)")
        ->capture_default_str()
        ->check(CLI::Range(3, 1000));
    run->add_option("--warmup", warmup, "Discarded warmup runs per configuration")
        ->capture_default_str()
        ->check(CLI::Range(0, 1000));
    run->add_option("--format", fmt, "Report format")
        ->capture_default_str()
        ->check(CLI::IsMember({"text", "csv", "markdown"}));

    Common verify_opts;
    CLI::App* verify = app.add_subcommand("verify", "Check that every configuration produces the same edge map");
    add_common(verify, verify_opts);

    std::string cycles_overlay = FABSIM_DEFAULT_OVERLAY;
    int width = kCorpusWidth;
    int height = kCorpusHeight;
    bool simulate = false;
    CLI::App* cycles = app.add_subcommand("cycles", "Print the fabric cycle model");
    cycles->add_option("--overlay", cycles_overlay, "Overlay descriptor")->capture_default_str();
    cycles->add_option("--width", width, "Frame width")->capture_default_str()->check(CLI::PositiveNumber);
    cycles->add_option("--height", height, "Frame height")->capture_default_str()->check(CLI::PositiveNumber);
    cycles->add_flag("--simulate", simulate, "Also stream a random frame and report the simulated cycles");

    std::string corpus_dir = ".";
    int corpus_count = 3;
    CLI::App* corpus = app.add_subcommand("corpus", "Write the seeded synthetic 1024x768 corpus as PGM files");
    corpus->add_option("--out", corpus_dir, "Output directory")->capture_default_str();
    corpus->add_option("--count", corpus_count, "Number of images")->capture_default_str()->check(CLI::Range(1, 64));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) {
            BenchOptions o = options_from(run_opts);
            o.repetitions = reps;
            o.warmup = warmup;
            const PixelImage image = load_image(run_opts);
            const BenchReport report = run_benchmark(image, o);
            print_notices(report);
            if (report.results.empty()) {
                std::cerr << "error: no configuration ran\n";
                return kExitUsage;
            }
            const ReportFormat format = report_format_from_string(fmt);
            std::cout << render_report(report.results, format);
            if (format == ReportFormat::text) {
                const std::string breakdown = render_fabric_breakdown(report.results);
                if (!breakdown.empty()) {
                    std::cout << "\n" << breakdown;
                }
                std::cout << "\noutput digest " << report.results.front().output_digest << "\n";
            }
            return kExitOk;
        }
        if (*verify) {
            BenchOptions o = options_from(verify_opts);
            o.digest_only = true;
            o.repetitions = 1;
            o.warmup = 0;
            const PixelImage image = load_image(verify_opts);
            const BenchReport report = run_benchmark(image, o);
            print_notices(report);
            for (const BenchResult& r : report.results) {
                std::cout << to_string(r.config) << " " << r.output_digest << "\n";
            }
            std::cout << "ok: " << report.results.size() << " configurations agree\n";
            return kExitOk;
        }
        if (*cycles) {
            Overlay overlay = Overlay::load(cycles_overlay);
            const CycleModel model = cycle_model(overlay.descriptor(), width, height);
            std::cout << render_cycle_model(model);
            if (simulate) {
                const PixelImage image = random_image(seed_from_environment(), width, height);
                const FabricFrame frame = fabric_edge_detect(overlay, image);
                std::cout << "simulated      " << frame.breakdown.cycles << " cycles\n";
            }
            return kExitOk;
        }
        if (*corpus) {
            const std::uint64_t seed = seed_from_environment();
            std::filesystem::create_directories(corpus_dir);
            constexpr CorpusPattern patterns[] = {CorpusPattern::shapes, CorpusPattern::gradient_noise,
                                                  CorpusPattern::checker_blobs};
            for (int i = 0; i < corpus_count; ++i) {
                const CorpusPattern p = patterns[i % 3];
                const PixelImage img = synthetic_image(p, seed + static_cast<std::uint64_t>(i / 3));
                const std::filesystem::path path =
                    std::filesystem::path(corpus_dir) / ("corpus_" + std::to_string(i) + "_" + to_string(p) + ".pgm");
                write_pgm(img, path);
                std::cout << path.string() << "\n";
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return e.code() == ErrorCode::digest_mismatch ? kExitDigest : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
