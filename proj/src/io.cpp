#include "lidar_deskew/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace lidar_deskew {
namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view token) {
  double v = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::size_t> to_index(std::string_view token) {
  std::size_t v = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

bool skippable(const std::vector<std::string_view>& tokens) {
  return tokens.empty() || tokens.front().starts_with('#');
}

class LineReader {
 public:
  LineReader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(is_, line_)) {
      ++number_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      tokens = tokenize(line_);
      if (!skippable(tokens)) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const { throw FormatError(source_, number_, message); }

  double number(std::string_view token) const {
    const auto v = to_double(token);
    if (!v) fail("expected a finite number, got '" + std::string(token) + "'");
    return *v;
  }

  std::size_t index(std::string_view token) const {
    const auto v = to_index(token);
    if (!v) fail("expected a non-negative integer, got '" + std::string(token) + "'");
    return *v;
  }

  void expect_count(const std::vector<std::string_view>& tokens, std::size_t n, const char* what) const {
    if (tokens.size() != n) {
      std::ostringstream os;
      os << what << ": expected " << n << " fields, got " << tokens.size();
      fail(os.str());
    }
  }

  std::size_t line_number() const { return number_; }
  const std::string& source() const { return source_; }

 private:
  std::istream& is_;
  std::string source_;
  std::string line_;
  std::size_t number_ = 0;
};

std::ifstream open_input(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  }
  return in;
}

void check_stream(const std::ostream& os, const std::filesystem::path& path) {
  if (!os) {
    throw std::runtime_error("write failed for '" + path.string() + "'");
  }
}

template <class T>
void put_le(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  buf.append(bytes, sizeof(T));
}

template <class T>
T get_le(const char* bytes) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, bytes, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(tmp, tmp + sizeof(T));
  }
  T v;
  std::memcpy(&v, tmp, sizeof(T));
  return v;
}

}  // namespace

FormatError::FormatError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

// --------------------------------------------------------------------------- scans

void write_scan(std::ostream& os, const Scan& scan) {
  const LidarConfig& cfg = scan.config();
  os << "# lidar-deskew scan v1\n";
  os << "ts " << format_double(scan.start_time()) << '\n';
  os << "period " << format_double(cfg.scan_period) << '\n';
  os << "beams " << cfg.num_beams() << '\n';
  os << "azimuth_step " << format_double(cfg.azimuth_step) << '\n';
  os << "mirror " << to_string(cfg.mirror_direction) << '\n';
  os << "max_range " << format_double(cfg.max_range) << '\n';
  os << "height " << format_double(cfg.sensor_height) << '\n';
  os << "inclinations";
  for (double w : cfg.beam_inclinations) os << ' ' << format_double(w);
  os << '\n';
  for (const Ray& r : scan.rays()) {
    os << r.beam_index << ' ' << format_double(r.azimuth) << ' ' << format_double(r.inclination) << ' '
       << format_double(r.range) << '\n';
  }
}

Scan read_scan(std::istream& is, const std::string& source_name) {
  LineReader reader(is, source_name);
  std::optional<double> ts;
  std::optional<double> period;
  std::optional<std::size_t> beams;
  std::optional<std::vector<double>> inclinations;
  LidarConfig cfg;
  std::vector<Ray> rays;

  std::vector<std::string_view> tok;
  while (reader.next(tok)) {
    const std::string_view key = tok.front();
    const bool is_header = !key.empty() && std::isalpha(static_cast<unsigned char>(key.front()));
    if (is_header) {
      if (!rays.empty()) reader.fail("header line '" + std::string(key) + "' after the first ray");
      if (key == "ts") {
        reader.expect_count(tok, 2, "ts");
        ts = reader.number(tok[1]);
      } else if (key == "period") {
        reader.expect_count(tok, 2, "period");
        period = reader.number(tok[1]);
      } else if (key == "beams") {
        reader.expect_count(tok, 2, "beams");
        beams = reader.index(tok[1]);
      } else if (key == "azimuth_step") {
        reader.expect_count(tok, 2, "azimuth_step");
        cfg.azimuth_step = reader.number(tok[1]);
      } else if (key == "mirror") {
        reader.expect_count(tok, 2, "mirror");
        try {
          cfg.mirror_direction = mirror_direction_from_string(std::string(tok[1]));
        } catch (const std::invalid_argument& e) {
          reader.fail(e.what());
        }
      } else if (key == "max_range") {
        reader.expect_count(tok, 2, "max_range");
        cfg.max_range = reader.number(tok[1]);
      } else if (key == "height") {
        reader.expect_count(tok, 2, "height");
        cfg.sensor_height = reader.number(tok[1]);
      } else if (key == "inclinations") {
        std::vector<double> w;
        for (std::size_t i = 1; i < tok.size(); ++i) w.push_back(reader.number(tok[i]));
        inclinations = std::move(w);
      } else {
        reader.fail("unknown header '" + std::string(key) + "'");
      }
      continue;
    }

    if (!ts || !period || !beams) reader.fail("ray before the ts/period/beams header");
    reader.expect_count(tok, 4, "ray");
    const std::size_t beam = reader.index(tok[0]);
    const double azimuth = reader.number(tok[1]);
    const double inclination = reader.number(tok[2]);
    const double range = reader.number(tok[3]);
    if (beam >= *beams) reader.fail("beam index " + std::to_string(beam) + " >= beams");
    if (!(azimuth >= 0.0 && azimuth < kTwoPi)) reader.fail("azimuth outside [0, 2pi)");
    if (!rays.empty() && azimuth < rays.back().azimuth) reader.fail("azimuth regression");
    if (range < 0.0 && range != kNoReturn) reader.fail("negative range other than the no-return sentinel -1");
    rays.emplace_back(beam, inclination, azimuth, range);
  }

  if (!ts || !period || !beams) {
    throw FormatError(source_name, reader.line_number(), "missing ts/period/beams header");
  }
  if (rays.empty()) {
    throw FormatError(source_name, reader.line_number(), "empty scan");
  }
  cfg.scan_period = *period;
  if (inclinations) {
    if (inclinations->size() != *beams) {
      throw FormatError(source_name, reader.line_number(), "inclinations header does not list one value per beam");
    }
    cfg.beam_inclinations = *inclinations;
  } else {
    cfg.beam_inclinations.assign(*beams, 0.0);
    std::vector<bool> seen(*beams, false);
    for (const Ray& r : rays) {
      if (!seen[r.beam_index]) {
        cfg.beam_inclinations[r.beam_index] = r.inclination;
        seen[r.beam_index] = true;
      }
    }
  }
  try {
    return Scan(std::move(rays), *ts, std::move(cfg));
  } catch (const std::invalid_argument& e) {
    throw FormatError(source_name, reader.line_number(), e.what());
  }
}

void write_scan_file(const Scan& scan, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_scan(out, scan);
  out.flush();
  check_stream(out, path);
}

Scan parse_scan_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_scan(in, path.string());
}

// --------------------------------------------------------------------------- odometry

double OdometryRecord::dt() const {
  return std::visit([](const auto& v) { return v.dt; }, value);
}

std::vector<OdometrySample> OdometryLog::wheel_samples() const {
  std::vector<OdometrySample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto* s = std::get_if<OdometrySample>(&r.value);
    if (s == nullptr) throw std::invalid_argument("odometry log contains direct increments, not wheel samples");
    out.push_back(*s);
  }
  return out;
}

TrajectorySegment OdometryLog::to_segment(const WheelConfig& cfg) const {
  std::vector<TimedIncrement> samples;
  samples.reserve(records.size());
  for (const auto& r : records) {
    const MotionIncrement inc = std::visit(
        [&](const auto& v) -> MotionIncrement {
          if constexpr (std::is_same_v<std::decay_t<decltype(v)>, OdometrySample>) {
            return wheel_to_increment(v, cfg);
          } else {
            return v;
          }
        },
        r.value);
    samples.push_back({r.start_time, inc});
  }
  return TrajectorySegment(std::move(samples));
}

void write_odometry_log(std::ostream& os, const OdometryLog& log) {
  os << "# lidar-deskew odometry v1\n";
  if (log.records.empty()) return;
  os << "t0 " << format_double(log.records.front().start_time) << '\n';
  for (const auto& r : log.records) {
    const double t_end = r.start_time + r.dt();
    if (const auto* s = std::get_if<OdometrySample>(&r.value)) {
      os << format_double(t_end) << ' ' << format_double(s->delta_theta_right) << ' '
         << format_double(s->delta_theta_left) << '\n';
    } else {
      const auto& inc = std::get<MotionIncrement>(r.value);
      os << "inc " << format_double(t_end) << ' ' << format_double(inc.delta_x) << ' '
         << format_double(inc.delta_theta) << '\n';
    }
  }
}

void write_odometry_log(std::ostream& os, const CanLog& log) {
  OdometryLog out;
  out.records.reserve(log.samples.size());
  double t = log.start_time;
  for (const auto& s : log.samples) {
    out.records.push_back({t, s});
    t += s.dt;
  }
  write_odometry_log(os, out);
}

OdometryLog read_odometry_log(std::istream& is, const std::string& source_name) {
  LineReader reader(is, source_name);
  std::optional<double> t0;
  std::optional<double> first_dt;
  std::optional<double> previous_end;
  OdometryLog log;

  std::vector<std::string_view> tok;
  while (reader.next(tok)) {
    const std::string_view key = tok.front();
    if (key == "t0" || key == "dt") {
      if (!log.records.empty()) reader.fail("header '" + std::string(key) + "' after the first record");
      reader.expect_count(tok, 2, std::string(key).c_str());
      (key == "t0" ? t0 : first_dt) = reader.number(tok[1]);
      continue;
    }
    const bool direct = key == "inc";
    const std::size_t offset = direct ? 1 : 0;
    reader.expect_count(tok, 3 + offset, direct ? "increment record" : "wheel record");
    const double t_end = reader.number(tok[offset]);
    const double a = reader.number(tok[offset + 1]);
    const double b = reader.number(tok[offset + 2]);

    double start = 0.0;
    if (previous_end) {
      start = *previous_end;
    } else if (t0) {
      start = *t0;
    } else if (first_dt) {
      start = t_end - *first_dt;
    } else {
      reader.fail("first record needs a 't0' or 'dt' header to define its duration");
    }
    if (!(t_end > start)) {
      std::ostringstream os;
      os << "record " << log.records.size() << ": timestamp " << format_double(t_end)
         << " is not after the previous timestamp " << format_double(start);
      reader.fail(os.str());
    }
    const double dt = t_end - start;
    if (direct) {
      log.records.push_back({start, MotionIncrement{a, b, dt}});
    } else {
      log.records.push_back({start, OdometrySample{dt, a, b}});
    }
    previous_end = t_end;
  }
  return log;
}

void write_odometry_log_file(const CanLog& log, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_odometry_log(out, log);
  out.flush();
  check_stream(out, path);
}

OdometryLog parse_odometry_log(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_odometry_log(in, path.string());
}

// --------------------------------------------------------------------------- clouds

CloudFormat cloud_format_from_string(const std::string& s) {
  if (s == "ply" || s == "ply-binary-little-endian") return CloudFormat::kPlyBinary;
  if (s == "xyz" || s == "xyz-ascii") return CloudFormat::kXyzAscii;
  throw std::invalid_argument("unknown cloud format '" + s + "' (expected ply or xyz)");
}

std::string extension_of(CloudFormat format) { return format == CloudFormat::kPlyBinary ? ".ply" : ".xyz"; }

void write_point_cloud(std::ostream& os, const PointCloud& cloud, CloudFormat format) {
  if (format == CloudFormat::kXyzAscii) {
    for (const auto& p : cloud.points) {
      os << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z) << '\n';
    }
    return;
  }
  const bool remission = cloud.has_remission() && cloud.remission.size() == cloud.points.size();
  os << "ply\n"
     << "format binary_little_endian 1.0\n"
     << "element vertex " << cloud.points.size() << '\n'
     << "property double x\n"
     << "property double y\n"
     << "property double z\n";
  if (remission) os << "property float remission\n";
  os << "end_header\n";
  std::string buf;
  buf.reserve(cloud.points.size() * (remission ? 28 : 24));
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    put_le(buf, cloud.points[i].x);
    put_le(buf, cloud.points[i].y);
    put_le(buf, cloud.points[i].z);
    if (remission) put_le(buf, cloud.remission[i]);
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  auto out = open_output(path, format == CloudFormat::kPlyBinary);
  write_point_cloud(out, cloud, format);
  out.flush();
  check_stream(out, path);
}

PointCloud read_ply(std::istream& is, const std::string& source_name) {
  struct Property {
    std::string name;
    std::string type;
    std::size_t size = 0;
    std::size_t offset = 0;
  };
  static const std::map<std::string, std::size_t> kSizes = {
      {"char", 1},   {"uchar", 1},  {"int8", 1},    {"uint8", 1},  {"short", 2},   {"ushort", 2},
      {"int16", 2},  {"uint16", 2}, {"int", 4},     {"uint", 4},   {"int32", 4},   {"uint32", 4},
      {"float", 4},  {"float32", 4}, {"double", 8}, {"float64", 8}};

  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& m) -> void { throw FormatError(source_name, line_no, m); };

  if (!std::getline(is, line) || (line != "ply" && line != "ply\r")) {
    line_no = 1;
    fail("missing 'ply' magic");
  }
  ++line_no;
  bool binary = false;
  bool in_vertex = false;
  bool vertex_seen = false;
  std::size_t vertex_count = 0;
  std::vector<Property> props;
  std::size_t stride = 0;
  bool header_done = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tok = tokenize(line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") {
      header_done = true;
      break;
    }
    if (tok[0] == "format") {
      if (tok.size() != 3) fail("malformed format line");
      if (tok[1] == "binary_little_endian") {
        binary = true;
      } else if (tok[1] == "ascii") {
        binary = false;
      } else {
        fail("unsupported PLY format '" + std::string(tok[1]) + "'");
      }
    } else if (tok[0] == "element") {
      if (tok.size() != 3) fail("malformed element line");
      if (vertex_seen && in_vertex) {
        in_vertex = false;  // later elements are ignored
      }
      if (tok[1] == "vertex") {
        if (vertex_seen) fail("duplicate vertex element");
        vertex_seen = true;
        in_vertex = true;
        vertex_count = std::stoull(std::string(tok[2]));
      } else if (!vertex_seen) {
        fail("elements before 'vertex' are not supported");
      }
    } else if (tok[0] == "property") {
      if (!in_vertex) continue;
      if (tok.size() != 3) fail("list properties are not supported on vertices");
      const auto it = kSizes.find(std::string(tok[1]));
      if (it == kSizes.end()) fail("unknown property type '" + std::string(tok[1]) + "'");
      props.push_back({std::string(tok[2]), std::string(tok[1]), it->second, stride});
      stride += it->second;
    } else {
      fail("unexpected header line '" + line + "'");
    }
  }
  if (!header_done) fail("missing end_header");
  if (!vertex_seen) fail("no vertex element");

  auto find = [&](std::initializer_list<const char*> names) -> const Property* {
    for (const char* n : names) {
      for (const auto& p : props) {
        if (p.name == n) return &p;
      }
    }
    return nullptr;
  };
  const Property* px = find({"x"});
  const Property* py = find({"y"});
  const Property* pz = find({"z"});
  const Property* pr = find({"remission", "intensity", "scalar_remission"});
  if (px == nullptr || py == nullptr || pz == nullptr) fail("vertex element lacks x/y/z");

  auto decode = [](const Property& p, const char* bytes) -> double {
    const char* at = bytes + p.offset;
    if (p.type == "float" || p.type == "float32") return get_le<float>(at);
    if (p.type == "double" || p.type == "float64") return get_le<double>(at);
    if (p.type == "char" || p.type == "int8") return get_le<std::int8_t>(at);
    if (p.type == "uchar" || p.type == "uint8") return get_le<std::uint8_t>(at);
    if (p.type == "short" || p.type == "int16") return get_le<std::int16_t>(at);
    if (p.type == "ushort" || p.type == "uint16") return get_le<std::uint16_t>(at);
    if (p.type == "int" || p.type == "int32") return get_le<std::int32_t>(at);
    return get_le<std::uint32_t>(at);
  };

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  if (pr != nullptr) cloud.remission.reserve(vertex_count);
  if (binary) {
    std::string buf(stride, '\0');
    for (std::size_t i = 0; i < vertex_count; ++i) {
      if (!is.read(buf.data(), static_cast<std::streamsize>(stride))) {
        fail("truncated binary vertex data at vertex " + std::to_string(i));
      }
      cloud.points.push_back({decode(*px, buf.data()), decode(*py, buf.data()), decode(*pz, buf.data())});
      if (pr != nullptr) cloud.remission.push_back(static_cast<float>(decode(*pr, buf.data())));
    }
  } else {
    LineReader reader(is, source_name);
    std::vector<std::string_view> tok;
    for (std::size_t i = 0; i < vertex_count; ++i) {
      if (!reader.next(tok)) fail("truncated ascii vertex data at vertex " + std::to_string(i));
      if (tok.size() != props.size()) reader.fail("vertex field count mismatch");
      auto value = [&](const Property* p) {
        const auto idx = static_cast<std::size_t>(p - props.data());
        return reader.number(tok[idx]);
      };
      cloud.points.push_back({value(px), value(py), value(pz)});
      if (pr != nullptr) cloud.remission.push_back(static_cast<float>(value(pr)));
    }
  }
  return cloud;
}

PointCloud read_xyz(std::istream& is, const std::string& source_name) {
  LineReader reader(is, source_name);
  PointCloud cloud;
  std::vector<std::string_view> tok;
  while (reader.next(tok)) {
    if (tok.size() < 3) reader.fail("expected 'x y z'");
    cloud.points.push_back({reader.number(tok[0]), reader.number(tok[1]), reader.number(tok[2])});
  }
  return cloud;
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  const bool ply = path.extension() == ".ply";
  auto in = open_input(path, ply);
  return ply ? read_ply(in, path.string()) : read_xyz(in, path.string());
}

// --------------------------------------------------------------------------- tables

void write_scan_poses(const std::vector<ScanPose>& poses, const std::filesystem::path& path) {
  std::vector<CsvRow> rows;
  rows.reserve(poses.size());
  for (const auto& p : poses) {
    rows.push_back({std::to_string(p.index), format_double(p.start_time), format_double(p.end_time),
                    format_double(p.end_pose.x()), format_double(p.end_pose.y()), format_double(p.end_pose.theta())});
  }
  write_csv(path, {"scan", "start_time", "end_time", "x", "y", "theta"}, rows);
}

std::vector<ScanPose> parse_scan_poses(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<ScanPose> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 6) throw FormatError(path.string(), line_no, "expected 6 comma-separated fields");
    const auto index = to_index(fields[0]);
    std::optional<double> values[5];
    for (std::size_t i = 0; i < 5; ++i) values[i] = to_double(fields[i + 1]);
    if (!index || std::any_of(std::begin(values), std::end(values), [](const auto& v) { return !v; })) {
      throw FormatError(path.string(), line_no, "malformed pose record");
    }
    out.push_back({*index, *values[0], *values[1], Pose2(*values[2], *values[3], *values[4])});
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvRow& header, const std::vector<CsvRow>& rows) {
  auto out = open_output(path);
  auto emit = [&](const CsvRow& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << row[i];
    }
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  out.flush();
  check_stream(out, path);
}

}  // namespace lidar_deskew
