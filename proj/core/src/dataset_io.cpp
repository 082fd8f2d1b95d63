#include "octbd/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "octbd/config_json.hpp"
#include "octbd/error.hpp"
#include "octbd/parallel.hpp"
#include "octbd/quantize.hpp"

namespace octbd {
namespace fs = std::filesystem;

namespace {

constexpr char kFringeMagic[4] = {'O', 'C', 'T', 'F'};
constexpr std::size_t kFringePrefix = 8;  // magic + header length

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path.string());
  return bytes;
}

void write_all(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is unavailable on older toolchains
    try {
      std::size_t used = 0;
      const std::string s(text);
      out = static_cast<T>(std::stod(s, &used));
      return used == s.size() && !s.empty();
    } catch (const std::exception&) {
      return false;
    }
  } else {
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end && !text.empty();
  }
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Lines with the byte offset at which each one starts.
std::vector<std::pair<std::string, std::size_t>> text_lines(const std::vector<unsigned char>& bytes) {
  std::vector<std::pair<std::string, std::size_t>> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= bytes.size(); ++i) {
    if (i == bytes.size() || bytes[i] == '\n') {
      if (i == bytes.size() && start == i) break;
      std::string line(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                       bytes.begin() + static_cast<std::ptrdiff_t>(i));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.emplace_back(std::move(line), start);
      start = i + 1;
    }
  }
  return lines;
}

}  // namespace

// Fringes -------------------------------------------------------------------

void write_fringe(const fs::path& path, const SpectralFrame& frame, std::uint64_t phantom_seed,
                  std::uint64_t noise_seed) {
  if (frame.bit_depth < 1 || frame.bit_depth > kNativeBitDepth) {
    throw DomainError("cannot write a " + std::to_string(frame.bit_depth) + "-bit frame");
  }
  std::ostringstream header;
  header << "version=" << kFringeFormatVersion << '\n'
         << "num_alines=" << frame.num_alines() << '\n'
         << "samples_per_aline=" << frame.samples_per_aline() << '\n'
         << "bit_depth=" << frame.bit_depth << '\n'
         << "k_grid_tag=" << frame.k_grid_tag << '\n'
         << "phantom_seed=" << phantom_seed << '\n'
         << "noise_seed=" << noise_seed << '\n';
  const std::string text = header.str();

  std::string bytes(kFringeMagic, sizeof kFringeMagic);
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((len >> (8 * b)) & 0xff));
  bytes += text;
  bytes.reserve(bytes.size() + 2 * frame.samples.size());
  for (std::uint16_t v : frame.samples.values()) {
    if (v > frame.max_code()) {
      throw DomainError("sample " + std::to_string(v) + " exceeds the " + std::to_string(frame.bit_depth) +
                        "-bit range");
    }
    bytes.push_back(static_cast<char>(v & 0xff));
    bytes.push_back(static_cast<char>(v >> 8));
  }
  write_all(path, bytes);
}

FringeFile read_fringe_file(const fs::path& path) {
  const auto bytes = read_all(path);
  const std::string where = path.string() + ": ";
  if (bytes.size() < kFringePrefix) throw FormatError(where + "file too short for a fringe header", bytes.size());
  if (!std::equal(std::begin(kFringeMagic), std::end(kFringeMagic), bytes.begin())) {
    throw FormatError(where + "bad magic, expected \"OCTF\"", 0);
  }
  std::uint32_t header_len = 0;
  for (int b = 0; b < 4; ++b) header_len |= static_cast<std::uint32_t>(bytes[4 + b]) << (8 * b);
  if (header_len > bytes.size() - kFringePrefix) {
    throw FormatError(where + "header length " + std::to_string(header_len) + " exceeds file size", 4);
  }

  std::map<std::string, std::string> fields;
  {
    const std::string text(bytes.begin() + kFringePrefix, bytes.begin() + kFringePrefix + header_len);
    std::istringstream in(text);
    std::string line;
    std::size_t offset = kFringePrefix;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError(where + "malformed header line '" + line + "'", offset);
      fields[line.substr(0, eq)] = line.substr(eq + 1);
      offset += line.size() + 1;
    }
  }
  auto field = [&](const char* key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) throw FormatError(where + "header lacks '" + key + "'", kFringePrefix);
    return it->second;
  };
  auto integer = [&](const char* key, auto& out) {
    if (!parse_number(field(key), out)) {
      throw FormatError(where + "header field '" + key + "' is not an integer", kFringePrefix);
    }
  };

  std::uint32_t version = 0;
  integer("version", version);
  if (version != kFringeFormatVersion) {
    throw FormatError(where + "unsupported version " + std::to_string(version), kFringePrefix);
  }
  std::size_t num_alines = 0;
  std::size_t samples = 0;
  int bit_depth = 0;
  FringeFile file;
  integer("num_alines", num_alines);
  integer("samples_per_aline", samples);
  integer("bit_depth", bit_depth);
  integer("phantom_seed", file.phantom_seed);
  integer("noise_seed", file.noise_seed);
  if (bit_depth < 1 || bit_depth > kNativeBitDepth) {
    throw FormatError(where + "bit_depth " + std::to_string(bit_depth) + " outside 1..12", kFringePrefix);
  }

  const std::size_t payload_offset = kFringePrefix + header_len;
  const std::size_t expected = 2 * num_alines * samples;
  const std::size_t actual = bytes.size() - payload_offset;
  if (actual != expected) {
    throw FormatError(where + "payload length mismatch: expected " + std::to_string(expected) +
                          " bytes, found " + std::to_string(actual),
                      payload_offset);
  }

  file.frame.bit_depth = bit_depth;
  file.frame.k_grid_tag = field("k_grid_tag");
  file.frame.samples = Matrix<std::uint16_t>(samples, num_alines);
  const std::uint32_t max_code = file.frame.max_code();
  auto values = file.frame.samples.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t at = payload_offset + 2 * i;
    const auto v = static_cast<std::uint16_t>(bytes[at] | (bytes[at + 1] << 8));
    if (v > max_code) {
      throw FormatError(where + "sample value " + std::to_string(v) + " exceeds the " +
                            std::to_string(bit_depth) + "-bit range",
                        at);
    }
    values[i] = v;
  }
  return file;
}

SpectralFrame read_fringe(const fs::path& path) { return read_fringe_file(path).frame; }

// Graymaps --------------------------------------------------------------------

void write_bscan(const fs::path& path, const BScan& scan) {
  const RealMatrix& px = scan.pixels;
  std::ostringstream header;
  header << "P5\n# octbd bit_depth=" << scan.bit_depth_label << " floor_db=" << format_double(scan.window.floor_db)
         << " ceil_db=" << format_double(scan.window.ceil_db) << '\n'
         << px.cols() << ' ' << px.rows() << "\n65535\n";
  std::string bytes = header.str();
  bytes.reserve(bytes.size() + 2 * px.size());
  for (std::size_t r = 0; r < px.rows(); ++r) {
    for (std::size_t c = 0; c < px.cols(); ++c) {
      const double v = px(r, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw PreconditionError("pixel (" + std::to_string(r) + ", " + std::to_string(c) +
                                ") = " + format_double(v) + " outside [0, 1]");
      }
      const auto code = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      bytes.push_back(static_cast<char>(code >> 8));
      bytes.push_back(static_cast<char>(code & 0xff));
    }
  }
  write_all(path, bytes);
}

BScan read_bscan(const fs::path& path) {
  const auto bytes = read_all(path);
  const std::string where = path.string() + ": ";
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError(where + "not a binary graymap (expected \"P5\")", 0);
  }
  BScan scan;
  std::size_t pos = 2;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        const std::string comment(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                  bytes.begin() + static_cast<std::ptrdiff_t>(pos));
        if (comment.find("octbd") != std::string::npos) {
          std::istringstream ss(comment.substr(1));
          std::string token;
          while (ss >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = token.substr(0, eq);
            const std::string value = token.substr(eq + 1);
            if (key == "bit_depth") parse_number(value, scan.bit_depth_label);
            if (key == "floor_db") parse_number(value, scan.window.floor_db);
            if (key == "ceil_db") parse_number(value, scan.window.ceil_db);
          }
        }
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos;
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (value > (1u << 30)) throw FormatError(where + std::string(what) + " too large", start);
      ++pos;
    }
    if (pos == start) throw FormatError(where + "expected " + std::string(what), start);
    return value;
  };

  const std::size_t width = read_uint("width");
  const std::size_t height = read_uint("height");
  const std::size_t maxval = read_uint("maxval");
  if (width == 0 || height == 0) throw FormatError(where + "empty image", pos);
  if (maxval == 0 || maxval > 65535) throw FormatError(where + "maxval must lie in 1..65535", pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw FormatError(where + "missing whitespace after maxval", pos);
  }
  ++pos;

  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t expected = width * height * bytes_per_sample;
  if (bytes.size() - pos < expected) {
    throw FormatError(where + "raster truncated: expected " + std::to_string(expected) + " bytes, found " +
                          std::to_string(bytes.size() - pos),
                      pos);
  }
  scan.pixels = RealMatrix(height, width);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t at = pos + (r * width + c) * bytes_per_sample;
      const std::size_t v = bytes_per_sample == 2 ? (bytes[at] << 8 | bytes[at + 1]) : bytes[at];
      if (v > maxval) throw FormatError(where + "sample exceeds maxval", at);
      scan.pixels(r, c) = static_cast<double>(v) * scale;
    }
  }
  return scan;
}

// Splits and manifests ----------------------------------------------------------

const char* to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "?";
}

Split split_from_string(const std::string& text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  throw DataError("unknown split '" + text + "'");
}

std::vector<Split> assign_splits(std::size_t num_frames, SplitRatio ratio, std::uint64_t seed) {
  const unsigned total = ratio.train + ratio.val + ratio.test;
  if (total == 0) throw ConfigError("split ratio must not be all zero");
  const std::size_t n_val = num_frames * ratio.val / total;
  const std::size_t n_test = num_frames * ratio.test / total;
  const std::size_t n_train = num_frames - n_val - n_test;

  std::vector<std::size_t> order(num_frames);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = num_frames; i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }
  std::vector<Split> splits(num_frames);
  for (std::size_t k = 0; k < num_frames; ++k) {
    splits[order[k]] = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
  }
  return splits;
}

std::vector<int> DatasetManifest::bit_depths() const {
  std::set<int> depths;
  for (const auto& e : entries) depths.insert(e.bit_depth);
  return {depths.begin(), depths.end()};
}

namespace {

constexpr const char* kEntryColumns = "image_id,bit_depth,split,low_path,ref_path";

}  // namespace

void write_manifest(const fs::path& path, const DatasetManifest& m) {
  std::ostringstream out;
  out << "# octbd dataset manifest\n"
      << "format_version=1\n"
      << "dataset_id=" << m.dataset_id << '\n'
      << "pipeline_digest=" << m.pipeline_digest << '\n'
      << "split_seed=" << m.split_seed << '\n'
      << "split_counts=train:" << m.split_counts.train << ",val:" << m.split_counts.val
      << ",test:" << m.split_counts.test << '\n'
      << "pipeline_config=" << m.pipeline_config << '\n'
      << "source_config=" << m.source_config << '\n'
      << "[entries]\n"
      << kEntryColumns << '\n';
  for (const auto& e : m.entries) {
    out << e.image_id << ',' << e.bit_depth << ',' << to_string(e.split) << ',' << e.low_path << ','
        << e.ref_path << '\n';
  }
  write_all(path, out.str());
}

DatasetManifest read_manifest(const fs::path& path) {
  const auto bytes = read_all(path);
  const auto lines = text_lines(bytes);
  const std::string where = path.string() + ": ";
  DatasetManifest m;
  m.root = path.parent_path();

  auto fail = [&](std::size_t index, const std::string& what) -> FormatError {
    const std::size_t offset = index < lines.size() ? lines[index].second : bytes.size();
    return FormatError(where + "line " + std::to_string(index + 1) + ": " + what, offset);
  };

  std::size_t i = 0;
  std::set<std::string> seen;
  for (; i < lines.size(); ++i) {
    const std::string& line = lines[i].first;
    if (line.empty() || line[0] == '#') continue;
    if (line == "[entries]") break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw fail(i, "expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    seen.insert(key);
    if (key == "format_version") {
      if (value != "1") throw fail(i, "unsupported format_version " + value);
    } else if (key == "dataset_id") {
      m.dataset_id = value;
    } else if (key == "pipeline_digest") {
      m.pipeline_digest = value;
    } else if (key == "split_seed") {
      if (!parse_number(value, m.split_seed)) throw fail(i, "split_seed is not an integer");
    } else if (key == "split_counts") {
      unsigned long long tr = 0, va = 0, te = 0;
      if (std::sscanf(value.c_str(), "train:%llu,val:%llu,test:%llu", &tr, &va, &te) != 3) {
        throw fail(i, "malformed split_counts");
      }
      m.split_counts = {static_cast<std::size_t>(tr), static_cast<std::size_t>(va),
                        static_cast<std::size_t>(te)};
    } else if (key == "pipeline_config") {
      m.pipeline_config = value;
    } else if (key == "source_config") {
      m.source_config = value;
    } else {
      throw fail(i, "unknown key '" + key + "'");
    }
  }
  if (i >= lines.size()) throw fail(i, "missing [entries] section");
  for (const char* key : {"dataset_id", "pipeline_digest", "pipeline_config"}) {
    if (!seen.contains(key)) throw fail(i, std::string("header lacks '") + key + "'");
  }
  ++i;
  if (i >= lines.size() || lines[i].first != kEntryColumns) {
    throw fail(i, std::string("expected column header '") + kEntryColumns + "'");
  }

  std::map<std::string, std::pair<Split, std::string>> partner;
  std::set<std::pair<std::string, int>> keys;
  for (++i; i < lines.size(); ++i) {
    const std::string& line = lines[i].first;
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 5) throw fail(i, "expected 5 fields, found " + std::to_string(fields.size()));
    ManifestEntry e;
    e.image_id = fields[0];
    if (!parse_number(fields[1], e.bit_depth) || e.bit_depth < 1 || e.bit_depth > 11) {
      throw fail(i, "bad bit depth '" + fields[1] + "'");
    }
    try {
      e.split = split_from_string(fields[2]);
    } catch (const DataError& err) {
      throw fail(i, err.what());
    }
    e.low_path = fields[3];
    e.ref_path = fields[4];
    if (e.image_id.empty() || e.low_path.empty() || e.ref_path.empty()) throw fail(i, "empty field");
    if (!keys.insert({e.image_id, e.bit_depth}).second) {
      throw fail(i, "duplicate entry for " + e.image_id + " at " + std::to_string(e.bit_depth) + " bits");
    }
    // One reference per frame, and one split for every depth of that frame.
    const auto [it, inserted] = partner.try_emplace(e.image_id, e.split, e.ref_path);
    if (!inserted && (it->second.first != e.split || it->second.second != e.ref_path)) {
      throw fail(i, "image " + e.image_id + " disagrees with an earlier entry on split or reference");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetManifest build_dataset(const std::vector<SpectralFrame>& frames, const PipelineConfig& pipeline,
                              const DatasetOptions& options, const fs::path& out_dir) {
  if (frames.empty()) throw DataError("build_dataset needs at least one frame");
  if (options.bit_depths.empty()) throw DataError("build_dataset needs at least one bit depth");
  for (int n : options.bit_depths) {
    if (n < 1 || n > 11) throw DomainError("dataset bit depths must lie in 1..11, got " + std::to_string(n));
  }
  for (const auto& f : frames) {
    if (f.bit_depth != kNativeBitDepth) throw PreconditionError("dataset frames must be 12-bit");
  }
  std::vector<int> depths = options.bit_depths;
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());

  PipelineConfig config = pipeline;
  if (options.auto_window) {
    // Pass 1: the display window comes from the 12-bit references only.
    std::vector<std::vector<float>> per_frame(frames.size());
    parallel_for(frames.size(),
                 [&](std::size_t i) { per_frame[i] = magnitude_db(depth_magnitude(frames[i], config)); });
    std::vector<float> db;
    for (auto& part : per_frame) {
      db.insert(db.end(), part.begin(), part.end());
      std::vector<float>().swap(part);
    }
    config.window = display_window_from_db(db, options.dynamic_range_db, options.ceil_percentile);
  }
  config.validate();

  auto depth_dir = [](int bits) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "N%02d", bits);
    return std::string(buf);
  };
  auto image_id = [](std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04zu", i);
    return std::string(buf);
  };

  try {
    fs::create_directories(out_dir / depth_dir(kNativeBitDepth));
    for (int n : depths) fs::create_directories(out_dir / depth_dir(n));
  } catch (const fs::filesystem_error& e) {
    throw IoError("cannot create dataset directories under " + out_dir.string() + ": " + e.what());
  }

  parallel_for(frames.size(), [&](std::size_t i) {
    const std::string file = image_id(i) + ".pgm";
    write_bscan(out_dir / depth_dir(kNativeBitDepth) / file, process_frame(frames[i], config));
    for (int n : depths) {
      write_bscan(out_dir / depth_dir(n) / file, process_frame(requantize(frames[i], n), config));
    }
  });

  DatasetManifest m;
  m.dataset_id = options.dataset_id;
  m.pipeline_config = to_json(config);
  m.pipeline_digest = config_digest(config);
  m.source_config = options.source_config;
  m.split_seed = options.split_seed;
  m.root = out_dir;
  const auto splits = assign_splits(frames.size(), options.ratio, options.split_seed);
  for (Split s : splits) {
    if (s == Split::Train) ++m.split_counts.train;
    if (s == Split::Val) ++m.split_counts.val;
    if (s == Split::Test) ++m.split_counts.test;
  }
  for (int n : depths) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const std::string file = image_id(i) + ".pgm";
      m.entries.push_back({image_id(i), n, splits[i], depth_dir(n) + "/" + file,
                           depth_dir(kNativeBitDepth) + "/" + file});
    }
  }
  write_manifest(out_dir / kManifestFileName, m);
  return m;
}

std::vector<ImagePair> load_pairs(const DatasetManifest& manifest, int bit_depth, Split split) {
  std::vector<const ManifestEntry*> selected;
  bool depth_present = false;
  for (const auto& e : manifest.entries) {
    if (e.bit_depth != bit_depth) continue;
    depth_present = true;
    if (e.split == split) selected.push_back(&e);
  }
  if (!depth_present) throw DataError("bit depth " + std::to_string(bit_depth) + " not found in manifest");
  if (selected.empty()) {
    throw DataError(std::string("no ") + to_string(split) + " entries at " + std::to_string(bit_depth) + " bits");
  }
  std::sort(selected.begin(), selected.end(),
            [](const ManifestEntry* a, const ManifestEntry* b) { return a->image_id < b->image_id; });

  std::vector<ImagePair> pairs;
  pairs.reserve(selected.size());
  for (const ManifestEntry* e : selected) {
    ImagePair p;
    p.image_id = e->image_id;
    p.split = e->split;
    try {
      p.low = read_bscan(manifest.root / e->low_path);
      p.ref = read_bscan(manifest.root / e->ref_path);
    } catch (const Error& err) {
      throw DataError("entry " + e->image_id + " (" + std::to_string(bit_depth) + " bits): " + err.what());
    }
    if (!p.low.pixels.same_shape(p.ref.pixels)) {
      throw DataError("entry " + e->image_id + ": low and reference images differ in size");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

// Metric tables -----------------------------------------------------------------

namespace {

constexpr const char* kAggregateColumns =
    "bit_depth,source,count,psnr_mean,psnr_std,psnr_n,psnr_identical,msssim_mean,msssim_std,msssim_n,"
    "msssim_invalid,corr2_mean,corr2_std,corr2_n,corr2_undefined";

std::string summary_fields(const Summary& s) {
  if (s.n == 0) return "NA,NA,0";
  return format_double(s.mean) + "," + format_double(s.stddev) + "," + std::to_string(s.n);
}

}  // namespace

void write_metrics_rows_csv(const fs::path& path, const std::vector<MetricRow>& rows) {
  std::string out = "image_id,bit_depth,source,psnr_db,msssim,corr2\n";
  for (const auto& r : rows) {
    out += r.image_id + "," + std::to_string(r.bit_depth) + "," + to_string(r.source) + ",";
    out += r.psnr.identical ? "identical" : format_double(r.psnr.db);
    out += ",";
    out += r.msssim ? format_double(*r.msssim) : "invalid";
    out += ",";
    out += r.corr2 ? format_double(*r.corr2) : "undefined";
    out += "\n";
  }
  write_all(path, out);
}

void write_metrics_aggregate_csv(const fs::path& path, const std::vector<AggregateRow>& aggregates) {
  std::string out = std::string(kAggregateColumns) + "\n";
  for (const auto& a : aggregates) {
    out += std::to_string(a.bit_depth) + "," + to_string(a.source) + "," + std::to_string(a.count) + "," +
           summary_fields(a.psnr) + "," + std::to_string(a.psnr_identical) + "," + summary_fields(a.msssim) +
           "," + std::to_string(a.msssim_invalid) + "," + summary_fields(a.corr2) + "," +
           std::to_string(a.corr2_undefined) + "\n";
  }
  write_all(path, out);
}

void write_metrics_plot_data(const fs::path& path, const std::vector<AggregateRow>& aggregates) {
  std::string out = "bit_depth,source,metric,mean,std,n\n";
  for (const char* metric : {"psnr", "msssim", "corr2"}) {
    for (const auto& a : aggregates) {
      const Summary& s = metric[0] == 'p' ? a.psnr : (metric[0] == 'm' ? a.msssim : a.corr2);
      if (s.n == 0) continue;
      out += std::to_string(a.bit_depth) + "," + to_string(a.source) + "," + metric + "," + format_double(s.mean) +
             "," + format_double(s.stddev) + "," + std::to_string(s.n) + "\n";
    }
  }
  write_all(path, out);
}

std::vector<AggregateRow> read_metrics_aggregate_csv(const fs::path& path) {
  const auto bytes = read_all(path);
  const auto lines = text_lines(bytes);
  const std::string where = path.string() + ": ";
  auto fail = [&](std::size_t index, const std::string& what) {
    const std::size_t offset = index < lines.size() ? lines[index].second : bytes.size();
    return FormatError(where + "line " + std::to_string(index + 1) + ": " + what, offset);
  };
  if (lines.empty() || lines[0].first != kAggregateColumns) throw fail(0, "unexpected column header");

  std::vector<AggregateRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i].first;
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 15) throw fail(i, "expected 15 fields, found " + std::to_string(f.size()));
    AggregateRow a;
    auto count = [&](std::size_t k, std::size_t& out) {
      if (!parse_number(f[k], out)) throw fail(i, "field " + std::to_string(k + 1) + " is not a count");
    };
    auto summary = [&](std::size_t k, Summary& s) {
      count(k + 2, s.n);
      if (s.n == 0) {
        if (f[k] != "NA" || f[k + 1] != "NA") throw fail(i, "expected NA for an empty summary");
        return;
      }
      if (!parse_number(f[k], s.mean) || !parse_number(f[k + 1], s.stddev)) {
        throw fail(i, "field " + std::to_string(k + 1) + " is not a number");
      }
    };
    if (!parse_number(f[0], a.bit_depth)) throw fail(i, "bit_depth is not an integer");
    try {
      a.source = source_from_string(f[1]);
    } catch (const DataError& e) {
      throw fail(i, e.what());
    }
    count(2, a.count);
    summary(3, a.psnr);
    count(6, a.psnr_identical);
    summary(7, a.msssim);
    count(10, a.msssim_invalid);
    summary(11, a.corr2);
    count(14, a.corr2_undefined);
    rows.push_back(a);
  }
  return rows;
}

}  // namespace octbd
