#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "octbd/frame.hpp"
#include "octbd/metrics.hpp"
#include "octbd/pipeline.hpp"

namespace octbd {

// Raw fringe files ---------------------------------------------------------
//
// Layout: "OCTF", little-endian uint32 header length, header text of
// `key=value` lines, then num_alines * samples_per_aline little-endian
// uint16 samples with each A-line contiguous.

inline constexpr std::uint32_t kFringeFormatVersion = 1;

struct FringeFile {
  SpectralFrame frame;
  std::uint64_t phantom_seed = 0;
  std::uint64_t noise_seed = 0;
};

void write_fringe(const std::filesystem::path& path, const SpectralFrame& frame,
                  std::uint64_t phantom_seed = 0, std::uint64_t noise_seed = 0);
/// Throws FormatError (bad magic, bad header, truncated payload, sample out of
/// range) or IoError.
FringeFile read_fringe_file(const std::filesystem::path& path);
SpectralFrame read_fringe(const std::filesystem::path& path);

// B-scans as 16-bit binary graymaps ---------------------------------------

/// Writes a P5 graymap with maxval 65535, pixel = round(value * 65535). The
/// bit-depth label and display window travel in a header comment.
void write_bscan(const std::filesystem::path& path, const BScan& scan);
/// Reads any binary graymap (maxval up to 65535) into [0, 1].
BScan read_bscan(const std::filesystem::path& path);

// Paired datasets ---------------------------------------------------------

enum class Split { Train, Val, Test };

const char* to_string(Split split);
Split split_from_string(const std::string& text);

struct SplitRatio {
  unsigned train = 8;
  unsigned val = 1;
  unsigned test = 1;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;

  bool operator==(const SplitCounts&) const = default;
};

/// Frame-level split assignment: frame ids shuffled with `seed`, then cut in
/// `ratio`. Validation and test receive floor(n * share), training the rest.
std::vector<Split> assign_splits(std::size_t num_frames, SplitRatio ratio, std::uint64_t seed);

struct ManifestEntry {
  std::string image_id;
  int bit_depth = 0;
  Split split = Split::Train;
  /// Paths relative to the manifest directory.
  std::string low_path;
  std::string ref_path;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::string dataset_id;
  std::string pipeline_digest;
  /// Resolved pipeline configuration as JSON text.
  std::string pipeline_config;
  /// Phantom / optics provenance as JSON text (may be "{}").
  std::string source_config;
  std::uint64_t split_seed = 0;
  SplitCounts split_counts;
  std::vector<ManifestEntry> entries;
  /// Directory holding the manifest; entry paths resolve against it.
  std::filesystem::path root;

  std::vector<int> bit_depths() const;
};

inline constexpr const char* kManifestFileName = "manifest.txt";

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
/// Throws FormatError on malformed content, IoError when unreadable.
DatasetManifest read_manifest(const std::filesystem::path& path);

struct DatasetOptions {
  std::vector<int> bit_depths{3, 4, 5, 6, 7, 8};
  SplitRatio ratio;
  std::uint64_t split_seed = 2020;
  std::string dataset_id = "octbd";
  std::string source_config = "{}";
  /// Derive the shared display window from the 12-bit references; otherwise
  /// the pipeline's window is used unchanged.
  bool auto_window = true;
  double dynamic_range_db = 50.0;
  double ceil_percentile = 99.9;
};

/// Processes every frame at 12 bits and at each requested depth, writes the
/// graymaps under `out_dir` and the manifest last. Returns the manifest.
DatasetManifest build_dataset(const std::vector<SpectralFrame>& frames,
                              const PipelineConfig& pipeline, const DatasetOptions& options,
                              const std::filesystem::path& out_dir);

struct ImagePair {
  BScan low;
  BScan ref;
  std::string image_id;
  Split split = Split::Train;
};

/// Pairs of one depth and split, sorted by image id. Throws DataError when
/// the depth/split is absent, a file is missing or dimensions disagree.
std::vector<ImagePair> load_pairs(const DatasetManifest& manifest, int bit_depth, Split split);

// Metric tables ------------------------------------------------------------

void write_metrics_rows_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);
void write_metrics_aggregate_csv(const std::filesystem::path& path,
                                 const std::vector<AggregateRow>& aggregates);
/// Long-format series (bit_depth, source, metric, mean, std, n) for plotting
/// each metric against bit depth.
void write_metrics_plot_data(const std::filesystem::path& path,
                             const std::vector<AggregateRow>& aggregates);
/// Throws FormatError whose message names the offending line.
std::vector<AggregateRow> read_metrics_aggregate_csv(const std::filesystem::path& path);

}  // namespace octbd
