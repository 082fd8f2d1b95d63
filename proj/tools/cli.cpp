#include <map>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "octbd/error.hpp"
#include "octbd/parallel.hpp"
#include "octbd_cli.hpp"

namespace octbd::cli {
namespace {

SplitRatio parse_ratio(const std::string& text) {
  SplitRatio r;
  if (std::sscanf(text.c_str(), "%u:%u:%u", &r.train, &r.val, &r.test) != 3) {
    throw ConfigError("--ratio expects TRAIN:VAL:TEST, got '" + text + "'");
  }
  return r;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low bit-depth OCT simulation, dataset and evaluation toolkit", "octbd"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file; options go under [simulate], [dataset] or [evaluate]");
  app.footer(std::string("Environment: ") + kWorkersEnv + " caps worker threads.\n"
             "Exit codes: 0 success, 1 usage error, 2 data or format error.");

  // simulate
  SimulateOptions sim;
  sim.optics = OpticsConfig::for_samples(sim.phantom.samples_per_aline);
  double k_warp = 0.08;
  auto* simulate = app.add_subcommand("simulate", "Synthesize 12-bit fringe files from layered phantoms");
  simulate->add_option("--out", sim.out_dir, "Output directory for .octf files")->required();
  simulate->add_option("--frames", sim.frames, "Number of B-frames")->capture_default_str()->check(CLI::Range(1, 100000));
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--alines", sim.phantom.num_alines, "A-lines per frame")->capture_default_str();
  simulate->add_option("--samples", sim.phantom.samples_per_aline, "Spectral samples per A-line (power of two)")
      ->capture_default_str();
  simulate->add_option("--layers", sim.phantom.num_layers, "Layer count")->capture_default_str();
  simulate->add_option("--depth-min", sim.phantom.layer_depth_min, "Shallowest layer depth, pixels")->capture_default_str();
  simulate->add_option("--depth-max", sim.phantom.layer_depth_max, "Deepest layer depth, pixels")->capture_default_str();
  simulate->add_option("--speckle-density", sim.phantom.speckle_density, "Scatterers per A-line")->capture_default_str();
  simulate->add_option("--speckle-reflectivity", sim.phantom.speckle_reflectivity, "Largest scatterer reflectivity")
      ->capture_default_str();
  simulate->add_option("--dc-level", sim.optics.dc_level, "Reference level, fraction of full scale")->capture_default_str();
  simulate->add_option("--visibility", sim.optics.fringe_visibility, "Fringe visibility")->capture_default_str();
  simulate->add_option("--noise-sigma", sim.optics.noise_sigma, "Additive noise, ADC counts")->capture_default_str();
  simulate->add_option("--k-warp", k_warp, "Quadratic k-mapping coefficient (0 = linear in k)")->capture_default_str();
  simulate->add_option("--a2", sim.optics.dispersion_a2, "Quadratic dispersion, radians at band edge")->capture_default_str();
  simulate->add_option("--a3", sim.optics.dispersion_a3, "Cubic dispersion, radians at band edge")->capture_default_str();

  // dataset
  DatasetCommandOptions ds;
  std::string ratio = "8:1:1";
  bool no_reference = false;
  double floor_db = 0.0;
  double ceil_db = 0.0;
  auto* dataset = app.add_subcommand("dataset", "Process fringes into paired low-bit / 12-bit B-scans");
  dataset->add_option("--fringes", ds.fringe_dir, "Directory of .octf files")->required();
  dataset->add_option("--out", ds.out_dir, "Dataset output directory")->required();
  dataset->add_option("--depths", ds.dataset.bit_depths, "Low bit depths (1..11)")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::Range(1, 11));
  dataset->add_option("--split-seed", ds.dataset.split_seed, "Seed of the frame-level split")->capture_default_str();
  dataset->add_option("--ratio", ratio, "Split ratio TRAIN:VAL:TEST")->capture_default_str();
  dataset->add_option("--dataset-id", ds.dataset.dataset_id, "Identifier stored in the manifest")->capture_default_str();
  dataset->add_option("--interp", ds.interpolation, "k-linearization interpolation")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Interpolation>{{"linear", Interpolation::Linear}, {"cubic", Interpolation::Cubic}}));
  dataset->add_option("--apodization", ds.apodization, "Apodization window")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Apodization>{{"hann", Apodization::Hann}, {"none", Apodization::None}}));
  dataset->add_option("--background", ds.background, "Background removal")
      ->transform(CLI::CheckedTransformer(std::map<std::string, BackgroundMode>{
          {"per-aline", BackgroundMode::PerAline}, {"mean-spectrum", BackgroundMode::MeanSpectrum}}));
  dataset->add_flag("--no-reference", no_reference, "Skip reference-spectrum removal");
  dataset->add_option("--dynamic-range", ds.dataset.dynamic_range_db, "Display floor below the peak, dB")
      ->capture_default_str();
  dataset->add_option("--ceil-percentile", ds.dataset.ceil_percentile, "Percentile used as display ceiling")
      ->capture_default_str();
  auto* floor_opt = dataset->add_option("--floor-db", floor_db, "Fixed display floor, dB (with --ceil-db)");
  auto* ceil_opt = dataset->add_option("--ceil-db", ceil_db, "Fixed display ceiling, dB (with --floor-db)");
  floor_opt->needs(ceil_opt);
  ceil_opt->needs(floor_opt);
  dataset->add_option("--height", ds.resize_height, "Output image height")->capture_default_str()->check(CLI::PositiveNumber);
  dataset->add_option("--width", ds.resize_width, "Output image width")->capture_default_str()->check(CLI::PositiveNumber);

  // evaluate
  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Compute PSNR / MSSSIM / CORR2 against the 12-bit references");
  evaluate->add_option("--manifest", ev.manifest, "Manifest file or dataset directory")->required();
  evaluate->add_option("--reconstructed", ev.reconstructed_dir, "Directory of reconstructions (NXX/<id>.pgm)");
  evaluate->add_option("--out", ev.out_dir, "Output directory (default <dataset>/evaluation)");
  evaluate->add_option("--split", ev.split, "Split to evaluate")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Split>{{"train", Split::Train}, {"val", Split::Val}, {"test", Split::Test}}));
  evaluate->add_option("--depths", ev.bit_depths, "Bit depths to evaluate (default: all)")->delimiter(',');

  // report
  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Print aggregate metrics as a table");
  report->add_option("--aggregate", rep.aggregate, "metrics_aggregate.csv or an evaluation directory")->required();
  report->add_option("--out", rep.out_file, "Also write the table to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      sim.optics.k_mapping = KMapping::quadratic(k_warp);
      cmd_simulate(sim, err);
    } else if (dataset->parsed()) {
      ds.dataset.ratio = parse_ratio(ratio);
      ds.use_reference = !no_reference;
      if (floor_opt->count() > 0) {
        ds.dataset.auto_window = false;
        // build_dataset takes the window from the pipeline when auto_window is off
        ds.fixed_window = DisplayWindow{floor_db, ceil_db};
      }
      cmd_dataset(ds, err);
    } else if (evaluate->parsed()) {
      cmd_evaluate(ev, err);
    } else if (report->parsed()) {
      out << cmd_report(rep);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace octbd::cli
