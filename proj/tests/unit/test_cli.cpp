#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "octbd/dataset_io.hpp"
#include "octbd_cli.hpp"
#include "test_support.hpp"

using namespace octbd;
using octbd::testing::slurp;
using octbd::testing::spit;
using octbd::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result octbd_run(std::vector<std::string> args) {
  args.insert(args.begin(), "octbd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Small frames keep the whole chain under a second.
std::vector<std::string> simulate_args(const fs::path& out, int frames = 10, int seed = 4) {
  return {"simulate",  "--out",    out.string(), "--frames",    std::to_string(frames), "--seed",
          std::to_string(seed), "--alines", "16", "--samples", "128", "--depth-min", "10", "--depth-max", "50",
          "--speckle-density", "5"};
}

std::vector<std::string> dataset_args(const fs::path& fringes, const fs::path& out) {
  return {"dataset", "--fringes", fringes.string(), "--out", out.string(), "--height", "32", "--width", "32"};
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext ? 1 : 0;
  return n;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("simulate") {
    TempDir dir("octbd_cli_sim");
    const auto first = octbd_run(simulate_args(dir / "a", 3));
    REQUIRE(first.code == cli::kExitOk);
    CHECK(count_files(dir / "a", ".octf") == 3);
    CHECK(fs::exists(dir / "a" / cli::kRunConfigFile));
    REQUIRE(octbd_run(simulate_args(dir / "b", 3)).code == cli::kExitOk);
    CHECK(slurp(dir / "a/frame_0001.octf") == slurp(dir / "b/frame_0001.octf"));
    REQUIRE(octbd_run(simulate_args(dir / "c", 3, 5)).code == cli::kExitOk);
    CHECK(slurp(dir / "a/frame_0001.octf") != slurp(dir / "c/frame_0001.octf"));

    auto zero = simulate_args(dir / "z", 1);
    zero[4] = "0";
    CHECK(octbd_run(zero).code == cli::kExitUsage);

    auto odd = simulate_args(dir / "o", 1);
    odd[10] = "100";
    CHECK(octbd_run(odd).code == cli::kExitUsage);

    CHECK(octbd_run({}).code == cli::kExitUsage);
    CHECK(octbd_run({"bogus"}).code == cli::kExitUsage);
    CHECK(octbd_run({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("options from a config file") {
    TempDir dir("octbd_cli_cfg");
    spit(dir / "sim.toml", "[simulate]\nout = \"" + (dir / "fr").generic_string() +
                               "\"\nframes = 2\nalines = 8\nsamples = 128\ndepth-min = 10\n"
                               "depth-max = 50\nspeckle-density = 2\n");
    const auto r = octbd_run({"--config", (dir / "sim.toml").string(), "simulate"});
    CHECK(r.code == cli::kExitOk);
    CHECK(count_files(dir / "fr", ".octf") == 2);
    CHECK(read_fringe(dir / "fr/frame_0000.octf").num_alines() == 8);
  }

  TEST_CASE("dataset") {
    TempDir dir("octbd_cli_ds");
    REQUIRE(octbd_run(simulate_args(dir / "fr")).code == cli::kExitOk);

    SUBCASE("default depths give seven variants") {
      REQUIRE(octbd_run(dataset_args(dir / "fr", dir / "ds")).code == cli::kExitOk);
      std::size_t dirs = 0;
      for (const auto& e : fs::directory_iterator(dir / "ds")) dirs += e.is_directory() ? 1 : 0;
      CHECK(dirs == 7);
      const auto m = read_manifest(dir / "ds" / kManifestFileName);
      CHECK(m.entries.size() == 60);
      CHECK(m.split_counts == SplitCounts{8, 1, 1});
      CHECK(count_files(dir / "ds/N05", ".pgm") == 10);
    }

    SUBCASE("explicit depth list") {
      auto args = dataset_args(dir / "fr", dir / "ds4");
      args.insert(args.end(), {"--depths", "4"});
      REQUIRE(octbd_run(args).code == cli::kExitOk);
      CHECK(fs::exists(dir / "ds4/N04"));
      CHECK(fs::exists(dir / "ds4/N12"));
      CHECK_FALSE(fs::exists(dir / "ds4/N03"));
    }

    SUBCASE("fixed display window") {
      auto args = dataset_args(dir / "fr", dir / "dsw");
      args.insert(args.end(), {"--depths", "6", "--floor-db", "20", "--ceil-db", "70"});
      REQUIRE(octbd_run(args).code == cli::kExitOk);
      const BScan scan = read_bscan(dir / "dsw/N06/frame_0000.pgm");
      CHECK(scan.window == DisplayWindow{20.0, 70.0});
    }

    SUBCASE("errors") {
      CHECK(octbd_run(dataset_args(dir / "missing", dir / "x")).code == cli::kExitData);
      auto bad_depth = dataset_args(dir / "fr", dir / "y");
      bad_depth.insert(bad_depth.end(), {"--depths", "12"});
      CHECK(octbd_run(bad_depth).code == cli::kExitUsage);
      auto bad_ratio = dataset_args(dir / "fr", dir / "y");
      bad_ratio.insert(bad_ratio.end(), {"--ratio", "8-1-1"});
      CHECK(octbd_run(bad_ratio).code == cli::kExitUsage);
      auto bad_window = dataset_args(dir / "fr", dir / "y");
      bad_window.insert(bad_window.end(), {"--floor-db", "70", "--ceil-db", "20"});
      CHECK(octbd_run(bad_window).code == cli::kExitUsage);

      spit(dir / "fr/frame_0003.octf", "OCTF");
      CHECK(octbd_run(dataset_args(dir / "fr", dir / "z")).code == cli::kExitData);
    }
  }

  TEST_CASE("evaluate and report") {
    TempDir dir("octbd_cli_eval");
    REQUIRE(octbd_run(simulate_args(dir / "fr")).code == cli::kExitOk);
    auto ds = dataset_args(dir / "fr", dir / "ds");
    ds.insert(ds.end(), {"--depths", "3,8"});
    REQUIRE(octbd_run(ds).code == cli::kExitOk);

    SUBCASE("originals only") {
      const auto r = octbd_run({"evaluate", "--manifest", (dir / "ds").string()});
      REQUIRE(r.code == cli::kExitOk);
      const auto agg = read_metrics_aggregate_csv(dir / "ds/evaluation/metrics_aggregate.csv");
      REQUIRE(agg.size() == 2);
      CHECK(agg[0].bit_depth == 3);
      CHECK(agg[0].count == 1);
      CHECK(fs::exists(dir / "ds/evaluation/metrics_per_image.csv"));
      CHECK(fs::exists(dir / "ds/evaluation/metrics_plot.csv"));

      const auto rep = octbd_run({"report", "--aggregate", (dir / "ds/evaluation").string(), "--out",
                                  (dir / "table.txt").string()});
      REQUIRE(rep.code == cli::kExitOk);
      CHECK(rep.out.find("3-bit") != std::string::npos);
      CHECK(rep.out.find("8-bit") != std::string::npos);
      CHECK(rep.out.find("±") != std::string::npos);
      CHECK(slurp(dir / "table.txt") == rep.out);
    }

    SUBCASE("with reconstructions") {
      // Copies of the references stand in for a perfect reconstruction.
      const auto m = read_manifest(dir / "ds" / kManifestFileName);
      for (const auto& e : m.entries) {
        if (e.split != Split::Train) continue;
        const fs::path target = cli::reconstruction_path(dir / "rec", e.bit_depth, e.image_id);
        fs::create_directories(target.parent_path());
        fs::copy_file(dir / "ds" / e.ref_path, target);
      }
      fs::remove(cli::reconstruction_path(dir / "rec", 3, m.entries[0].split == Split::Train
                                                                  ? m.entries[0].image_id
                                                                  : m.entries[1].image_id));
      const auto r = octbd_run({"evaluate", "--manifest", (dir / "ds" / kManifestFileName).string(),
                                "--reconstructed", (dir / "rec").string(), "--split", "train", "--out",
                                (dir / "ev").string()});
      REQUIRE(r.code == cli::kExitOk);
      CHECK(r.err.find("warning: missing reconstruction") != std::string::npos);
      const auto agg = read_metrics_aggregate_csv(dir / "ev/metrics_aggregate.csv");
      REQUIRE(agg.size() == 4);
      CHECK(agg[1].source == Source::Reconstructed);
      CHECK(agg[1].count == 7);
      CHECK(agg[1].psnr_identical == 7);
      CHECK(agg[3].count == 8);

      const auto table = octbd_run({"report", "--aggregate", (dir / "ev/metrics_aggregate.csv").string()});
      CHECK(table.out.find("Reconstructed") != std::string::npos);

      CHECK(octbd_run({"evaluate", "--manifest", (dir / "ds").string(), "--reconstructed",
                       (dir / "empty").string(), "--out", (dir / "ev2").string()})
                .code == cli::kExitData);
    }

    SUBCASE("failures") {
      CHECK(octbd_run({"evaluate", "--manifest", (dir / "nowhere").string()}).code == cli::kExitData);
      CHECK(octbd_run({"evaluate", "--manifest", (dir / "ds").string(), "--depths", "5"}).code == cli::kExitData);
      CHECK(octbd_run({"evaluate", "--manifest", (dir / "ds").string(), "--split", "dev"}).code == cli::kExitUsage);

      spit(dir / "bad.csv", "bit_depth,nonsense\n");
      CHECK(octbd_run({"report", "--aggregate", (dir / "bad.csv").string()}).code == cli::kExitData);
    }
  }

  TEST_CASE("empty test split") {
    TempDir dir("octbd_cli_small");
    REQUIRE(octbd_run(simulate_args(dir / "fr", 3)).code == cli::kExitOk);
    auto ds = dataset_args(dir / "fr", dir / "ds");
    ds.insert(ds.end(), {"--depths", "4"});
    REQUIRE(octbd_run(ds).code == cli::kExitOk);
    CHECK(octbd_run({"evaluate", "--manifest", (dir / "ds").string()}).code == cli::kExitData);
  }

  TEST_CASE("single-row table") {
    AggregateRow a;
    a.bit_depth = 6;
    a.count = 1;
    a.psnr = {21.5, 0.0, 1};
    a.msssim = {0.9, 0.0, 1};
    a.corr2 = {0.8, 0.0, 1};
    const std::string table = cli::format_table({a});
    CHECK(table.find("6-bit") != std::string::npos);
    CHECK(table.find("21.500±0.000") != std::string::npos);
  }

  TEST_CASE("end-to-end runs are reproducible") {
    TempDir dir("octbd_cli_repro");
    for (const char* run : {"one", "two"}) {
      const fs::path base = dir / run;
      REQUIRE(octbd_run(simulate_args(base / "fr")).code == cli::kExitOk);
      auto ds = dataset_args(base / "fr", base / "ds");
      ds.insert(ds.end(), {"--depths", "3,5"});
      REQUIRE(octbd_run(ds).code == cli::kExitOk);
      REQUIRE(octbd_run({"evaluate", "--manifest", (base / "ds").string(), "--split", "train"}).code ==
              cli::kExitOk);
    }
    for (const char* f : {"metrics_aggregate.csv", "metrics_per_image.csv", "metrics_plot.csv"}) {
      CHECK(slurp(dir / "one/ds/evaluation" / f) == slurp(dir / "two/ds/evaluation" / f));
    }
    CHECK(slurp(dir / "one/ds" / kManifestFileName) == slurp(dir / "two/ds" / kManifestFileName));
  }
}
