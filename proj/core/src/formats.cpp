#include "mvid/formats.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace mvid {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIoFailure, "failed reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot create '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) fail(ErrorCode::kIoFailure, "failed writing '" + path.string() + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Calls fn(line_number, line) for each line, 1-based.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t start = 0;
  int line_no = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    start = end + 1;
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  fail(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// PFM

InverseDepthMap read_inverse_pfm(const std::filesystem::path& path) {
  const std::string data = read_text_file(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return std::string_view(data).substr(start, pos - start);
  };
  if (token() != "Pf") fail(ErrorCode::kBadFormat, "'" + path.string() + "' is not a 1-channel PFM");
  int w = 0, h = 0;
  double scale = 0.0;
  if (!parse_number(token(), w) || !parse_number(token(), h) || !parse_number(token(), scale) ||
      w <= 0 || h <= 0 || scale == 0.0) {
    fail(ErrorCode::kBadFormat, "bad PFM header in '" + path.string() + "'");
  }
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (data.size() < pos + 4 * n) fail(ErrorCode::kBadFormat, "truncated PFM '" + path.string() + "'");
  const bool little = scale < 0.0;

  InverseDepthMap out(w, h);
  for (int row = 0; row < h; ++row) {
    const int v = h - 1 - row;
    for (int u = 0; u < w; ++u) {
      const auto* p = reinterpret_cast<const unsigned char*>(data.data()) + pos +
                      4 * (static_cast<std::size_t>(row) * w + u);
      const std::uint32_t bits =
          little ? (p[0] | p[1] << 8 | p[2] << 16 | std::uint32_t(p[3]) << 24)
                 : (p[3] | p[2] << 8 | p[1] << 16 | std::uint32_t(p[0]) << 24);
      const float f = std::bit_cast<float>(bits);
      out(u, v) = std::isfinite(f) && f > 0.0f ? static_cast<double>(f) : 0.0;
    }
  }
  return out;
}

void write_inverse_pfm(const InverseDepthMap& map, const std::filesystem::path& path) {
  std::string data = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) +
                     "\n-1.0\n";
  const std::size_t header = data.size();
  data.resize(header + 4 * map.size());
  std::size_t k = header;
  for (int v = map.height() - 1; v >= 0; --v) {
    for (int u = 0; u < map.width(); ++u) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(map(u, v)));
      for (int b = 0; b < 4; ++b) data[k++] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
  write_text_file(path, data);
}

// ---------------------------------------------------------------------------
// Sparse CSV

SparsePoints parse_sparse_csv(std::string_view text, std::vector<std::string>* warnings) {
  SparsePoints points;
  std::map<std::pair<int, int>, int> first_line;
  for_each_line(text, [&](int line_no, std::string_view line) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) return;
    const auto fields = split(line, ',');
    if (fields.size() != 3) parse_fail(line_no, "expected u,v,depth_m");
    int u = 0, v = 0;
    double d = 0.0;
    if (!parse_number(fields[0], u) || !parse_number(fields[1], v)) {
      parse_fail(line_no, "pixel coordinates must be integers");
    }
    if (!parse_number(fields[2], d)) parse_fail(line_no, "depth is not a number");
    if (u < 0 || v < 0) parse_fail(line_no, "negative pixel coordinate");
    if (!(d > 0.0) || !std::isfinite(d)) {
      fail(ErrorCode::kNonPositiveDepth,
           "line " + std::to_string(line_no) + ": depth must be positive and finite");
    }
    const auto [it, inserted] = first_line.emplace(std::pair{u, v}, line_no);
    if (!inserted) {
      if (warnings != nullptr) {
        warnings->push_back("line " + std::to_string(line_no) + ": duplicate pixel (" +
                            std::to_string(u) + "," + std::to_string(v) +
                            ") ignored, first seen on line " + std::to_string(it->second));
      }
      return;
    }
    points.push_back({u, v, d});
  });
  return points;
}

SparsePoints read_sparse_csv(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return parse_sparse_csv(read_text_file(path), warnings);
}

void write_sparse_csv(std::span<const SparsePoint> points, const std::filesystem::path& path) {
  std::string text = "# u,v,depth_m\n";
  for (const auto& p : points) {
    text += std::to_string(p.u) + "," + std::to_string(p.v) + "," + format_double(p.depth) + "\n";
  }
  write_text_file(path, text);
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

constexpr std::string_view kManifestTag = "mvid-manifest";
constexpr std::array<std::string_view, 6> kManifestColumns{"id",   "rgb",    "gt",
                                                           "pred", "sparse", "profile"};

std::optional<std::filesystem::path> optional_path(std::string_view field,
                                                   const std::filesystem::path& base) {
  if (field == "-" || field.empty()) return std::nullopt;
  std::filesystem::path p{std::string(field)};
  return p.is_absolute() ? p : base / p;
}

std::string relative_field(const std::optional<std::filesystem::path>& p,
                           const std::filesystem::path& base) {
  if (!p) return "-";
  if (p->is_relative()) return p->generic_string();
  std::error_code ec;
  const auto rel = std::filesystem::relative(*p, base, ec);
  return ec || rel.empty() ? p->generic_string() : rel.generic_string();
}

}  // namespace

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  bool seen_columns = false;
  std::unordered_set<std::string> ids;
  for_each_line(text, [&](int line_no, std::string_view line) {
    if (trim(line).empty()) return;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      if (body.starts_with(kManifestTag)) {
        for (auto field : split(body.substr(kManifestTag.size()), ' ')) {
          field = trim(field);
          if (field.empty()) continue;
          if (field.starts_with("encoding=")) {
            try {
              m.encoding = parse_depth_encoding(field.substr(9));
            } catch (const Error& e) {
              parse_fail(line_no, e.what());
            }
          } else {
            parse_fail(line_no, "unknown manifest directive '" + std::string(field) + "'");
          }
        }
      } else if (body.starts_with("id\t") || body == "id") {
        const auto cols = split(body, '\t');
        if (cols.size() != kManifestColumns.size()) parse_fail(line_no, "unexpected column header");
        for (std::size_t i = 0; i < cols.size(); ++i) {
          if (trim(cols[i]) != kManifestColumns[i]) parse_fail(line_no, "unexpected column header");
        }
        seen_columns = true;
      }
      return;
    }
    if (!seen_columns) parse_fail(line_no, "record before the column header");
    const auto f = split(line, '\t');
    if (f.size() != kManifestColumns.size()) {
      parse_fail(line_no, "expected " + std::to_string(kManifestColumns.size()) +
                              " tab-separated fields");
    }
    ManifestRecord r;
    r.id = std::string(trim(f[0]));
    if (r.id.empty()) parse_fail(line_no, "empty frame id");
    if (!ids.insert(r.id).second) parse_fail(line_no, "duplicate frame id '" + r.id + "'");
    r.rgb = optional_path(trim(f[1]), base_dir);
    const auto gt = optional_path(trim(f[2]), base_dir);
    if (!gt) parse_fail(line_no, "ground-truth path is required");
    r.gt = *gt;
    r.pred = optional_path(trim(f[3]), base_dir);
    r.sparse = optional_path(trim(f[4]), base_dir);
    r.profile = std::string(trim(f[5]));
    try {
      ClampProfile::by_name(r.profile);
    } catch (const Error& e) {
      parse_fail(line_no, e.what());
    }
    m.records.push_back(std::move(r));
  });
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path, bool check_files) {
  DatasetManifest m = parse_manifest(read_text_file(path), path.parent_path());
  if (check_files) {
    auto require = [](const std::filesystem::path& p, const std::string& id) {
      if (!std::filesystem::is_regular_file(p)) {
        fail(ErrorCode::kIoFailure, "frame '" + id + "': missing file '" + p.string() + "'");
      }
    };
    for (const auto& r : m.records) {
      require(r.gt, r.id);
      for (const auto* p : {&r.rgb, &r.pred, &r.sparse}) {
        if (*p) require(**p, r.id);
      }
    }
  }
  return m;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  std::string text = "# " + std::string(kManifestTag) +
                     " encoding=" + std::string(depth_encoding_name(manifest.encoding)) + "\n# ";
  for (std::size_t i = 0; i < kManifestColumns.size(); ++i) {
    text += (i ? "\t" : "") + std::string(kManifestColumns[i]);
  }
  text += "\n";
  for (const auto& r : manifest.records) {
    text += r.id + "\t" + relative_field(r.rgb, base) + "\t" + relative_field(r.gt, base) + "\t" +
            relative_field(r.pred, base) + "\t" + relative_field(r.sparse, base) + "\t" +
            r.profile + "\n";
  }
  write_text_file(path, text);
}

// ---------------------------------------------------------------------------
// Training config

namespace {

bool parse_bool(std::string_view s, int line) {
  s = trim(s);
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  parse_fail(line, "expected true/false");
}

template <typename T>
T parse_value(std::string_view s, int line) {
  T v{};
  if (!parse_number(s, v)) parse_fail(line, "bad numeric value '" + std::string(trim(s)) + "'");
  return v;
}

}  // namespace

TrainingConfigFile parse_training_config(std::string_view text) {
  TrainingConfigFile c;
  std::set<std::string, std::less<>> seen;
  for_each_line(text, [&](int line_no, std::string_view line) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_fail(line_no, "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view val = line.substr(eq + 1);
    if (!seen.insert(key).second) parse_fail(line_no, "repeated key '" + key + "'");

    auto& t = c.train;
    auto& s = c.sml;
    if (key == "lr") t.lr = parse_value<double>(val, line_no);
    else if (key == "beta1") t.beta1 = parse_value<double>(val, line_no);
    else if (key == "beta2") t.beta2 = parse_value<double>(val, line_no);
    else if (key == "adam_eps") t.adam_eps = parse_value<double>(val, line_no);
    else if (key == "weight_decay") t.weight_decay = parse_value<double>(val, line_no);
    else if (key == "lr_halve_every") t.lr_halve_every = parse_value<int>(val, line_no);
    else if (key == "epochs") t.epochs = parse_value<int>(val, line_no);
    else if (key == "batch") t.batch = parse_value<int>(val, line_no);
    else if (key == "grad_loss_weight") t.grad_loss_weight = parse_value<double>(val, line_no);
    else if (key == "pyramid_levels") t.pyramid_levels = parse_value<int>(val, line_no);
    else if (key == "shift_lr_factor") t.shift_lr_factor = parse_value<double>(val, line_no);
    else if (key == "seed") t.seed = parse_value<std::uint64_t>(val, line_no);
    else if (key == "extra_confidence") s.extra.confidence = parse_bool(val, line_no);
    else if (key == "extra_gradients") s.extra.gradients = parse_bool(val, line_no);
    else if (key == "extra_grayscale") s.extra.grayscale = parse_bool(val, line_no);
    else if (key == "extra_rgb") s.extra.rgb = parse_bool(val, line_no);
    else if (key == "regress_shift") s.regress_shift = parse_bool(val, line_no);
    else if (key == "input_resolution") s.input_resolution = parse_value<int>(val, line_no);
    else if (key == "stage_widths") {
      const auto parts = split(val, ',');
      if (parts.size() != s.stage_widths.size()) parse_fail(line_no, "stage_widths needs 4 values");
      for (std::size_t i = 0; i < parts.size(); ++i) {
        s.stage_widths[i] = parse_value<int>(parts[i], line_no);
      }
    } else {
      parse_fail(line_no, "unknown key '" + key + "'");
    }
  });
  try {
    c.train.validate();
    c.sml.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kParseError, e.what());
  }
  return c;
}

TrainingConfigFile read_training_config(const std::filesystem::path& path) {
  return parse_training_config(read_text_file(path));
}

std::string format_training_config(const TrainingConfigFile& c) {
  std::ostringstream out;
  const auto& t = c.train;
  const auto& s = c.sml;
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "lr=" << format_double(t.lr) << "\n"
      << "beta1=" << format_double(t.beta1) << "\n"
      << "beta2=" << format_double(t.beta2) << "\n"
      << "adam_eps=" << format_double(t.adam_eps) << "\n"
      << "weight_decay=" << format_double(t.weight_decay) << "\n"
      << "lr_halve_every=" << t.lr_halve_every << "\n"
      << "epochs=" << t.epochs << "\n"
      << "batch=" << t.batch << "\n"
      << "grad_loss_weight=" << format_double(t.grad_loss_weight) << "\n"
      << "pyramid_levels=" << t.pyramid_levels << "\n"
      << "shift_lr_factor=" << format_double(t.shift_lr_factor) << "\n"
      << "seed=" << t.seed << "\n"
      << "extra_confidence=" << b(s.extra.confidence) << "\n"
      << "extra_gradients=" << b(s.extra.gradients) << "\n"
      << "extra_grayscale=" << b(s.extra.grayscale) << "\n"
      << "extra_rgb=" << b(s.extra.rgb) << "\n"
      << "stage_widths=" << s.stage_widths[0] << "," << s.stage_widths[1] << ","
      << s.stage_widths[2] << "," << s.stage_widths[3] << "\n"
      << "regress_shift=" << b(s.regress_shift) << "\n"
      << "input_resolution=" << s.input_resolution << "\n";
  return out.str();
}

}  // namespace mvid
