#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "octbd/config_json.hpp"
#include "octbd/error.hpp"
#include "octbd/parallel.hpp"
#include "octbd_cli.hpp"

namespace octbd::cli {
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_snapshot(const fs::path& dir, const Json& snapshot) {
  write_text(dir / kRunConfigFile, snapshot.dump(2) + "\n");
}

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.octf", i);
  return buf;
}

// Display width of a UTF-8 string (code points).
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string mean_std(const Summary& s, int precision) {
  if (s.n == 0) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f±%.*f", precision, s.mean, precision, s.stddev);
  return buf;
}

}  // namespace

fs::path reconstruction_path(const fs::path& dir, int bit_depth, const std::string& image_id) {
  char sub[8];
  std::snprintf(sub, sizeof sub, "N%02d", bit_depth);
  return dir / sub / (image_id + ".pgm");
}

void cmd_simulate(const SimulateOptions& options, std::ostream& log) {
  if (options.frames < 1) throw ConfigError("--frames must be at least 1");
  options.phantom.validate();
  options.optics.validate(options.phantom.samples_per_aline);
  ensure_directory(options.out_dir);

  for (std::size_t i = 0; i < options.frames; ++i) {
    PhantomConfig phantom = options.phantom;
    phantom.seed = derive_seed(options.seed, 2 * i);
    const std::uint64_t noise_seed = derive_seed(options.seed, 2 * i + 1);
    const SpectralFrame frame = synthesize_fringe(make_phantom(phantom), options.optics, noise_seed);
    write_fringe(options.out_dir / frame_name(i), frame, phantom.seed, noise_seed);
  }

  Json snapshot;
  snapshot["command"] = "simulate";
  snapshot["frames"] = options.frames;
  snapshot["seed"] = options.seed;
  snapshot["phantom"] = Json::parse(to_json(options.phantom));
  snapshot["optics"] = Json::parse(to_json(options.optics));
  write_snapshot(options.out_dir, snapshot);
  log << "simulate: wrote " << options.frames << " frames to " << options.out_dir.string() << '\n';
}

DatasetManifest cmd_dataset(const DatasetCommandOptions& options, std::ostream& log) {
  if (!fs::is_directory(options.fringe_dir)) {
    throw DataError("fringe directory " + options.fringe_dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(options.fringe_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".octf") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .octf fringe files in " + options.fringe_dir.string());

  std::vector<SpectralFrame> frames(files.size());
  parallel_for(files.size(), [&](std::size_t i) { frames[i] = read_fringe(files[i]); });
  for (const auto& f : frames) {
    if (f.k_grid_tag != frames.front().k_grid_tag || !f.samples.same_shape(frames.front().samples)) {
      throw DataError("fringe files in " + options.fringe_dir.string() + " disagree on shape or k-grid");
    }
  }
  const std::size_t samples = frames.front().samples_per_aline();

  // The simulation snapshot, when present, tells us how to undo the optics.
  PipelineConfig pipeline;
  Json source = Json::object();
  const fs::path snapshot_path = options.fringe_dir / kRunConfigFile;
  if (fs::exists(snapshot_path)) {
    Json snapshot;
    try {
      snapshot = Json::parse(read_text(snapshot_path));
    } catch (const Json::exception& e) {
      throw DataError(snapshot_path.string() + ": " + e.what());
    }
    OpticsConfig optics = OpticsConfig::for_samples(samples);
    if (snapshot.contains("optics")) optics = optics_config_from_json(snapshot["optics"].dump(), optics);
    pipeline = PipelineConfig::matched(optics, samples);
    for (const char* key : {"frames", "seed", "phantom", "optics"}) {
      if (snapshot.contains(key)) source[key] = snapshot[key];
    }
  } else {
    log << "dataset: no " << kRunConfigFile << " beside the fringes; assuming no dispersion and no reference\n";
    pipeline.k_mapping = KMapping::from_tag(frames.front().k_grid_tag);
  }
  if (pipeline.k_mapping.tag() != frames.front().k_grid_tag) {
    pipeline.k_mapping = KMapping::from_tag(frames.front().k_grid_tag);
  }
  pipeline.interpolation = options.interpolation;
  pipeline.apodization = options.apodization;
  pipeline.background = options.background;
  pipeline.resize_height = options.resize_height;
  pipeline.resize_width = options.resize_width;
  if (!options.use_reference) pipeline.reference_spectrum.clear();
  if (options.fixed_window) pipeline.window = *options.fixed_window;

  DatasetOptions dataset = options.dataset;
  dataset.source_config = source.dump();
  ensure_directory(options.out_dir);
  DatasetManifest manifest = build_dataset(frames, pipeline, dataset, options.out_dir);

  Json snapshot;
  snapshot["command"] = "dataset";
  snapshot["fringe_dir"] = options.fringe_dir.string();
  snapshot["frames"] = frames.size();
  snapshot["bit_depths"] = manifest.bit_depths();
  snapshot["split_seed"] = dataset.split_seed;
  snapshot["split_ratio"] = {dataset.ratio.train, dataset.ratio.val, dataset.ratio.test};
  snapshot["auto_window"] = dataset.auto_window;
  snapshot["dynamic_range_db"] = dataset.dynamic_range_db;
  snapshot["ceil_percentile"] = dataset.ceil_percentile;
  snapshot["pipeline_digest"] = manifest.pipeline_digest;
  snapshot["pipeline"] = Json::parse(manifest.pipeline_config);
  write_snapshot(options.out_dir, snapshot);
  log << "dataset: " << frames.size() << " frames x " << manifest.bit_depths().size() + 1
      << " variants, splits train/val/test = " << manifest.split_counts.train << "/" << manifest.split_counts.val
      << "/" << manifest.split_counts.test << '\n';
  return manifest;
}

MetricsReport cmd_evaluate(const EvaluateOptions& options, std::ostream& log) {
  const fs::path manifest_path =
      fs::is_directory(options.manifest) ? options.manifest / kManifestFileName : options.manifest;
  const DatasetManifest manifest = read_manifest(manifest_path);
  std::vector<int> depths = options.bit_depths.empty() ? manifest.bit_depths() : options.bit_depths;
  if (depths.empty()) throw DataError("manifest " + manifest_path.string() + " lists no images");

  struct Task {
    const ImagePair* pair;
    int bit_depth;
    Source source;
    RealMatrix reconstruction;
  };
  std::vector<std::vector<ImagePair>> pairs_by_depth;
  pairs_by_depth.reserve(depths.size());
  for (int d : depths) pairs_by_depth.push_back(load_pairs(manifest, d, options.split));

  std::vector<Task> tasks;
  std::size_t found = 0;
  std::size_t missing = 0;
  for (std::size_t k = 0; k < depths.size(); ++k) {
    for (const auto& pair : pairs_by_depth[k]) {
      tasks.push_back({&pair, depths[k], Source::Original, {}});
      if (!options.reconstructed_dir) continue;
      const fs::path path = reconstruction_path(*options.reconstructed_dir, depths[k], pair.image_id);
      if (!fs::exists(path)) {
        log << "warning: missing reconstruction " << path.string() << "; excluded\n";
        ++missing;
        continue;
      }
      BScan recon = read_bscan(path);
      if (!recon.pixels.same_shape(pair.ref.pixels)) {
        throw DimensionError("reconstruction " + path.string() + " does not match its reference size");
      }
      tasks.push_back({&pair, depths[k], Source::Reconstructed, std::move(recon.pixels)});
      ++found;
    }
  }

  std::vector<MetricRow> rows(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const Task& t = tasks[i];
    const RealMatrix& test = t.source == Source::Original ? t.pair->low.pixels : t.reconstruction;
    rows[i] = evaluate_pair(t.pair->image_id, t.bit_depth, t.source, test, t.pair->ref.pixels);
  });

  MetricsReport report = aggregate(std::move(rows));
  const fs::path out_dir = options.out_dir.empty() ? manifest_path.parent_path() / "evaluation" : options.out_dir;
  ensure_directory(out_dir);
  write_metrics_rows_csv(out_dir / "metrics_per_image.csv", report.rows);
  write_metrics_aggregate_csv(out_dir / "metrics_aggregate.csv", report.aggregates);
  write_metrics_plot_data(out_dir / "metrics_plot.csv", report.aggregates);

  Json snapshot;
  snapshot["command"] = "evaluate";
  snapshot["manifest"] = manifest_path.string();
  snapshot["pipeline_digest"] = manifest.pipeline_digest;
  snapshot["split"] = to_string(options.split);
  snapshot["bit_depths"] = depths;
  snapshot["reconstructed_dir"] = options.reconstructed_dir ? options.reconstructed_dir->string() : "";
  snapshot["reconstructions_found"] = found;
  snapshot["reconstructions_missing"] = missing;
  write_snapshot(out_dir, snapshot);
  log << "evaluate: " << report.rows.size() << " rows, " << report.aggregates.size() << " groups -> "
      << out_dir.string() << '\n';

  if (options.reconstructed_dir && found == 0) {
    throw DataError("no reconstructions found under " + options.reconstructed_dir->string());
  }
  return report;
}

std::string format_table(const std::vector<AggregateRow>& aggregates) {
  const std::vector<std::string> header{"Bit depth", "Source", "PSNR (dB)", "MSSSIM", "CORR2"};
  std::vector<std::vector<std::string>> body;
  int previous_depth = -1;
  for (const auto& a : aggregates) {
    std::string label = a.bit_depth == previous_depth ? "" : std::to_string(a.bit_depth) + "-bit";
    previous_depth = a.bit_depth;
    std::string source = a.source == Source::Original ? "Original" : "Reconstructed";
    body.push_back({label, source, mean_std(a.psnr, 3), mean_std(a.msssim, 3), mean_std(a.corr2, 3)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = display_width(header[c]);
    for (const auto& row : body) width[c] = std::max(width[c], display_width(row[c]));
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out += c + 1 == cells.size() ? cells[c] : pad(cells[c], width[c] + 2);
    }
    return out + "\n";
  };
  std::string out = line(header);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.emplace_back(w, '-');
  out += line(rule);
  for (const auto& row : body) out += line(row);
  return out;
}

std::string cmd_report(const ReportOptions& options) {
  const fs::path path =
      fs::is_directory(options.aggregate) ? options.aggregate / "metrics_aggregate.csv" : options.aggregate;
  const auto aggregates = read_metrics_aggregate_csv(path);
  if (aggregates.empty()) throw DataError(path.string() + " holds no aggregate rows");
  std::string table = format_table(aggregates);
  if (options.out_file) write_text(*options.out_file, table);
  return table;
}

}  // namespace octbd::cli
