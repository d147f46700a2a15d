#pragma once

// Experiment driver: runs any method on any stream, emitting per-step
// metrics, optional hypothesis traces, shy segment fits, and a run summary.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vbs/config.hpp"
#include "vbs/metrics.hpp"

namespace vbs {

struct RunResult {
    double final_mcae = 0.0;
    std::optional<double> mean_predictive_ll;
    int steps = 0;
    double wall_sec = 0.0;
};

// Executes the configured run. When write_files is true, emits the metrics
// CSV (streamed per step), the optional trace/segments CSVs, and the summary
// file under the effective output directory (config value overridden by the
// VBS_OUTPUT_DIR environment variable when set). Per-step records are
// appended to capture when provided. Throws on invalid configs and numeric
// failures; mid-run failures carry the step index in the message.
RunResult run_experiment(const RunConfig& cfg, bool write_files,
                         std::vector<StepRecord>* capture = nullptr);

// Output directory after applying the environment override.
std::string effective_out_dir(const RunConfig& cfg);

// Fixed 17-significant-digit float formatting used in every output file.
std::string fmt17(double v);

struct SweepAxis {
    std::string key;                  // e.g. "method.beta"
    std::vector<std::string> values;
};

// "method.beta=0.5,0.7;method.xi0=0,-2.2" -> two axes
std::vector<SweepAxis> parse_grid(const std::string& grid);

struct SweepRow {
    int index = 0;
    KvMap overrides;
    bool ok = false;
    double final_mcae = 0.0;
    std::optional<double> mean_predictive_ll;
    std::string error;
};

// Cartesian product over the axes (last axis fastest). Each point runs in
// its own subdirectory point_<index>/ of the sweep output directory; a
// failing point records its error and the sweep continues. jobs > 1 runs
// points concurrently.
std::vector<SweepRow> sweep(const KvMap& base, const std::vector<SweepAxis>& axes, int jobs,
                            const std::string& sweep_dir, bool write_files);

void write_sweep_summary(const std::string& path, const std::vector<SweepAxis>& axes,
                         const std::vector<SweepRow>& rows);

// Emits a generated stream plus its ground-truth sidecar as CSV files.
void simulate_to_files(const StreamSpec& spec, const std::string& dir,
                       const std::string& stream_file = "stream.csv",
                       const std::string& truth_file = "truth.csv");

// Compact invariant suite behind the `selftest` subcommand. Prints one line
// per check; returns the number of failures.
int selftest(std::ostream& out);

}  // namespace vbs
