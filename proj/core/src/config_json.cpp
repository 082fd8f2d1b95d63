#include "octbd/config_json.hpp"

#include <cstdio>
#include <set>
#include <string>

#include "json.hpp"
#include "octbd/error.hpp"

namespace octbd {
namespace {

using Json = nlohmann::ordered_json;

Json parse_object(std::string_view text, const char* what) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  return j;
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const char* what) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename Enum>
void read_enum(const Json& j, const char* key, Enum& field,
               std::initializer_list<std::pair<const char*, Enum>> names) {
  if (!j.contains(key)) return;
  std::string text;
  read(j, key, text);
  for (const auto& [name, value] : names) {
    if (text == name) {
      field = value;
      return;
    }
  }
  throw ConfigError(std::string("config key '") + key + "': unknown value '" + text + "'");
}

const char* name_of(Interpolation v) { return v == Interpolation::Linear ? "linear" : "cubic"; }
const char* name_of(Apodization v) { return v == Apodization::None ? "none" : "hann"; }
const char* name_of(BackgroundMode v) {
  return v == BackgroundMode::PerAline ? "per_aline" : "mean_spectrum";
}

Json pipeline_json(const PipelineConfig& c) {
  Json j;
  j["k_mapping"] = c.k_mapping.coefficients();
  j["interpolation"] = name_of(c.interpolation);
  j["dispersion_a2"] = c.dispersion_a2;
  j["dispersion_a3"] = c.dispersion_a3;
  j["apodization"] = name_of(c.apodization);
  j["background"] = name_of(c.background);
  j["reference_spectrum"] = c.reference_spectrum;
  j["log_floor_db"] = c.window.floor_db;
  j["log_ceil_db"] = c.window.ceil_db;
  j["resize_height"] = c.resize_height;
  j["resize_width"] = c.resize_width;
  return j;
}

}  // namespace

std::string to_json(const PhantomConfig& c) {
  Json j;
  j["num_alines"] = c.num_alines;
  j["samples_per_aline"] = c.samples_per_aline;
  j["num_layers"] = c.num_layers;
  j["layer_depth_min"] = c.layer_depth_min;
  j["layer_depth_max"] = c.layer_depth_max;
  j["reflectivity_min"] = c.reflectivity_min;
  j["reflectivity_max"] = c.reflectivity_max;
  j["speckle_density"] = c.speckle_density;
  j["speckle_reflectivity"] = c.speckle_reflectivity;
  j["lateral_undulation"] = c.lateral_undulation;
  j["seed"] = c.seed;
  return j.dump();
}

std::string to_json(const OpticsConfig& c) {
  Json j;
  j["envelope_center"] = c.envelope_center;
  j["envelope_fwhm"] = c.envelope_fwhm;
  j["dc_level"] = c.dc_level;
  j["fringe_visibility"] = c.fringe_visibility;
  j["noise_sigma"] = c.noise_sigma;
  j["k_mapping"] = c.k_mapping.coefficients();
  j["dispersion_a2"] = c.dispersion_a2;
  j["dispersion_a3"] = c.dispersion_a3;
  return j.dump();
}

std::string to_json(const PipelineConfig& c) { return pipeline_json(c).dump(); }

PhantomConfig phantom_config_from_json(std::string_view text, PhantomConfig c) {
  const Json j = parse_object(text, "phantom config");
  reject_unknown(j,
                 {"num_alines", "samples_per_aline", "num_layers", "layer_depth_min", "layer_depth_max",
                  "reflectivity_min", "reflectivity_max", "speckle_density", "speckle_reflectivity",
                  "lateral_undulation", "seed"},
                 "phantom config");
  read(j, "num_alines", c.num_alines);
  read(j, "samples_per_aline", c.samples_per_aline);
  read(j, "num_layers", c.num_layers);
  read(j, "layer_depth_min", c.layer_depth_min);
  read(j, "layer_depth_max", c.layer_depth_max);
  read(j, "reflectivity_min", c.reflectivity_min);
  read(j, "reflectivity_max", c.reflectivity_max);
  read(j, "speckle_density", c.speckle_density);
  read(j, "speckle_reflectivity", c.speckle_reflectivity);
  read(j, "lateral_undulation", c.lateral_undulation);
  read(j, "seed", c.seed);
  return c;
}

OpticsConfig optics_config_from_json(std::string_view text, OpticsConfig c) {
  const Json j = parse_object(text, "optics config");
  reject_unknown(j,
                 {"envelope_center", "envelope_fwhm", "dc_level", "fringe_visibility", "noise_sigma",
                  "k_mapping", "dispersion_a2", "dispersion_a3"},
                 "optics config");
  read(j, "envelope_center", c.envelope_center);
  read(j, "envelope_fwhm", c.envelope_fwhm);
  read(j, "dc_level", c.dc_level);
  read(j, "fringe_visibility", c.fringe_visibility);
  read(j, "noise_sigma", c.noise_sigma);
  if (j.contains("k_mapping")) {
    std::vector<double> coeffs;
    read(j, "k_mapping", coeffs);
    c.k_mapping = KMapping(std::move(coeffs));
  }
  read(j, "dispersion_a2", c.dispersion_a2);
  read(j, "dispersion_a3", c.dispersion_a3);
  return c;
}

PipelineConfig pipeline_config_from_json(std::string_view text, PipelineConfig c) {
  const Json j = parse_object(text, "pipeline config");
  reject_unknown(j,
                 {"k_mapping", "interpolation", "dispersion_a2", "dispersion_a3", "apodization",
                  "background", "reference_spectrum", "log_floor_db", "log_ceil_db", "resize_height",
                  "resize_width"},
                 "pipeline config");
  if (j.contains("k_mapping")) {
    std::vector<double> coeffs;
    read(j, "k_mapping", coeffs);
    c.k_mapping = KMapping(std::move(coeffs));
  }
  read_enum(j, "interpolation", c.interpolation,
            {{"linear", Interpolation::Linear}, {"cubic", Interpolation::Cubic}});
  read(j, "dispersion_a2", c.dispersion_a2);
  read(j, "dispersion_a3", c.dispersion_a3);
  read_enum(j, "apodization", c.apodization, {{"none", Apodization::None}, {"hann", Apodization::Hann}});
  read_enum(j, "background", c.background,
            {{"per_aline", BackgroundMode::PerAline}, {"mean_spectrum", BackgroundMode::MeanSpectrum}});
  read(j, "reference_spectrum", c.reference_spectrum);
  read(j, "log_floor_db", c.window.floor_db);
  read(j, "log_ceil_db", c.window.ceil_db);
  read(j, "resize_height", c.resize_height);
  read(j, "resize_width", c.resize_width);
  return c;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_digest(const PipelineConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(config))));
  return buf;
}

}  // namespace octbd
