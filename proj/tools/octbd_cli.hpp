#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "octbd/dataset_io.hpp"
#include "octbd/phantom.hpp"
#include "octbd/pipeline.hpp"

namespace octbd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Snapshot written next to every command's outputs.
inline constexpr const char* kRunConfigFile = "run_config.json";

struct SimulateOptions {
  std::filesystem::path out_dir;
  std::size_t frames = 200;
  std::uint64_t seed = 1;
  PhantomConfig phantom;
  OpticsConfig optics;
};

struct DatasetCommandOptions {
  std::filesystem::path fringe_dir;
  std::filesystem::path out_dir;
  DatasetOptions dataset;
  Interpolation interpolation = Interpolation::Linear;
  Apodization apodization = Apodization::Hann;
  BackgroundMode background = BackgroundMode::PerAline;
  bool use_reference = true;
  /// Used instead of the estimated window when dataset.auto_window is off.
  std::optional<DisplayWindow> fixed_window;
  std::size_t resize_height = 256;
  std::size_t resize_width = 256;
};

struct EvaluateOptions {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> reconstructed_dir;
  std::filesystem::path out_dir;
  Split split = Split::Test;
  std::vector<int> bit_depths;  // empty: every depth in the manifest
};

struct ReportOptions {
  std::filesystem::path aggregate;
  std::optional<std::filesystem::path> out_file;
};

// Each command throws octbd::Error subclasses; run() maps them to exit codes.
void cmd_simulate(const SimulateOptions& options, std::ostream& log);
DatasetManifest cmd_dataset(const DatasetCommandOptions& options, std::ostream& log);
MetricsReport cmd_evaluate(const EvaluateOptions& options, std::ostream& log);
std::string cmd_report(const ReportOptions& options);

/// Renders aggregates as an aligned table: one row per (bit depth, source),
/// columns PSNR / MSSSIM / CORR2 as mean±std.
std::string format_table(const std::vector<AggregateRow>& aggregates);

/// Reconstructed graymap expected for an entry: <dir>/NXX/<image_id>.pgm.
std::filesystem::path reconstruction_path(const std::filesystem::path& dir, int bit_depth,
                                          const std::string& image_id);

/// Parses argv and dispatches. Exit codes: 0 success, 1 usage, 2 data/format.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace octbd::cli
