#include "lidar_deskew/config.hpp"

#include <array>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

namespace lidar_deskew {
namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(where, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.contains(item.key())) config_error(where, "unknown key '" + item.key() + "'");
  }
}

double get_number(const json& obj, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    config_error(where, std::string("missing '") + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) config_error(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::array<double, 2> get_xy(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_array() || obj.at(key).size() != 2) {
    config_error(where, std::string("'") + key + "' must be [x, y]");
  }
  return {obj.at(key)[0].get<double>(), obj.at(key)[1].get<double>()};
}

Point3 get_xyz(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_array() || obj.at(key).size() != 3) {
    config_error(where, std::string("'") + key + "' must be [x, y, z]");
  }
  const auto& a = obj.at(key);
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(where, e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Scene scene_from(const json& j) {
  reject_unknown(j, "scene", {"ground", "posts", "fences", "boxes"});
  Scene scene;
  scene.ground = j.value("ground", true);
  for (const auto& p : j.value("posts", json::array())) {
    reject_unknown(p, "scene.posts[]", {"x", "y", "radius", "height"});
    scene.posts.push_back({get_number(p, "x", "post"), get_number(p, "y", "post"), get_number(p, "radius", "post", 0.1),
                           get_number(p, "height", "post", 3.0)});
  }
  for (const auto& f : j.value("fences", json::array())) {
    reject_unknown(f, "scene.fences[]", {"from", "to", "height"});
    const auto a = get_xy(f, "from", "fence");
    const auto b = get_xy(f, "to", "fence");
    scene.fences.push_back({a[0], a[1], b[0], b[1], get_number(f, "height", "fence", 1.5)});
  }
  for (const auto& b : j.value("boxes", json::array())) {
    reject_unknown(b, "scene.boxes[]", {"min", "max"});
    scene.boxes.push_back({get_xyz(b, "min", "box"), get_xyz(b, "max", "box")});
  }
  try {
    scene.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return scene;
}

double yaw_rate_of(const json& j, const std::string& where) {
  if (j.contains("yaw_rate") && j.contains("yaw_rate_deg")) config_error(where, "give yaw_rate or yaw_rate_deg, not both");
  if (j.contains("yaw_rate_deg")) return get_number(j, "yaw_rate_deg", where) * kDeg;
  return get_number(j, "yaw_rate", where, 0.0);
}

TrajectorySpec trajectory_from(const json& j) {
  const std::string where = "trajectory";
  reject_unknown(j, where, {"kind", "speed", "yaw_rate", "yaw_rate_deg", "segments", "duration", "start_pose"});
  TrajectorySpec spec;
  spec.duration = get_number(j, "duration", where);
  if (j.contains("start_pose")) {
    const auto& p = j.at("start_pose");
    if (!p.is_array() || p.size() != 3) config_error(where, "'start_pose' must be [x, y, theta]");
    spec.start_pose = Pose2(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
  }
  const std::string kind = j.value("kind", "linear");
  if (kind == "linear") {
    spec.kind = LinearMotion{get_number(j, "speed", where)};
  } else if (kind == "arc") {
    spec.kind = ArcMotion{get_number(j, "speed", where), yaw_rate_of(j, where)};
  } else if (kind == "piecewise") {
    PiecewiseMotion m;
    if (!j.contains("segments") || !j.at("segments").is_array()) config_error(where, "'segments' must be an array");
    for (const auto& s : j.at("segments")) {
      reject_unknown(s, "trajectory.segments[]", {"duration", "speed", "yaw_rate", "yaw_rate_deg"});
      m.segments.push_back({get_number(s, "duration", "segment"), get_number(s, "speed", "segment", 0.0),
                            yaw_rate_of(s, "segment")});
    }
    spec.kind = std::move(m);
  } else {
    config_error(where, "unknown kind '" + kind + "'");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

LidarConfig lidar_from(const json& j) {
  const std::string where = "lidar";
  reject_unknown(j, where,
                 {"preset", "scan_period", "columns", "beams", "inclination_min_deg", "inclination_max_deg",
                  "inclinations_deg", "mirror", "max_range", "sensor_height"});
  const std::string preset = j.value("preset", "hdl64");
  if (preset != "hdl64") config_error(where, "unknown preset '" + preset + "'");
  const auto columns = j.value("columns", std::size_t{2048});
  if (columns == 0) config_error(where, "'columns' must be > 0");
  const auto beams = j.value("beams", std::size_t{64});
  if (beams == 0) config_error(where, "'beams' must be > 0");

  LidarConfig cfg = LidarConfig::evenly_spaced(beams, get_number(j, "inclination_min_deg", where, -24.8) * kDeg,
                                               get_number(j, "inclination_max_deg", where, 2.0) * kDeg, columns,
                                               get_number(j, "scan_period", where, 0.1));
  if (j.contains("inclinations_deg")) {
    cfg.beam_inclinations.clear();
    for (const auto& w : j.at("inclinations_deg")) cfg.beam_inclinations.push_back(w.get<double>() * kDeg);
  }
  cfg.mirror_direction = MirrorDirection::kClockwise;
  if (j.contains("mirror")) {
    try {
      cfg.mirror_direction = mirror_direction_from_string(j.at("mirror").get<std::string>());
    } catch (const std::invalid_argument& e) {
      config_error(where, e.what());
    }
  }
  cfg.max_range = get_number(j, "max_range", where, 120.0);
  cfg.sensor_height = get_number(j, "sensor_height", where, 1.9);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace

void RunConfig::validate() const {
  try {
    scene.validate();
    trajectory.validate();
    lidar.validate();
    wheel.validate();
    noise.validate();
    icp.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (scene.empty()) throw ConfigError("config: the scene is empty");
  if (!(can_rate_hz > 0.0)) throw ConfigError("config: can_rate_hz must be > 0");
  if (num_scans == 0) throw ConfigError("config: num_scans must be > 0");
  if (first_scan_start < 0.0) throw ConfigError("config: first_scan_start must be >= 0");
  const double last_end = first_scan_start + static_cast<double>(num_scans) * lidar.scan_period;
  if (last_end > trajectory.duration + 1e-9) {
    std::ostringstream os;
    os << "config: " << num_scans << " scans end at t = " << last_end << " s, past the trajectory duration "
       << trajectory.duration << " s";
    throw ConfigError(os.str());
  }
  for (double c : cell_sizes) {
    if (!(c > 0.0)) throw ConfigError("config: cell sizes must be > 0");
  }
}

namespace {

RunConfig run_config_from(const std::string& json_text, const std::filesystem::path& base_dir) {
  const json j = parse_json(json_text, "config");
  reject_unknown(j, "config",
                 {"schema", "scene", "trajectory", "lidar", "wheel", "noise", "can_rate_hz", "num_scans",
                  "first_scan_start", "output_dir", "cloud_format", "cell_sizes", "icp", "seed"});
  const int schema = j.value("schema", 0);
  if (schema != kConfigSchemaVersion) {
    throw ConfigError("config: unsupported schema " + std::to_string(schema) + " (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  }

  RunConfig cfg;
  if (!j.contains("scene")) config_error("config", "missing 'scene'");
  if (j.at("scene").is_string()) {
    std::filesystem::path p = j.at("scene").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw ConfigError("config: scene file '" + p.string() + "' does not exist");
    cfg.scene_path = p;
    cfg.scene = load_scene(p);
  } else {
    cfg.scene = scene_from(j.at("scene"));
  }
  if (!j.contains("trajectory")) config_error("config", "missing 'trajectory'");
  cfg.trajectory = trajectory_from(j.at("trajectory"));
  if (j.contains("lidar")) cfg.lidar = lidar_from(j.at("lidar"));
  if (j.contains("wheel")) {
    const auto& w = j.at("wheel");
    reject_unknown(w, "wheel", {"radius", "track"});
    cfg.wheel = {get_number(w, "radius", "wheel", 0.3), get_number(w, "track", "wheel", 1.5)};
  }
  cfg.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    reject_unknown(n, "noise", {"range_sigma", "wheel_tick_sigma"});
    cfg.noise.range_sigma = get_number(n, "range_sigma", "noise", 0.0);
    cfg.noise.wheel_tick_sigma = get_number(n, "wheel_tick_sigma", "noise", 0.0);
  }
  cfg.noise.seed = cfg.seed;
  cfg.can_rate_hz = get_number(j, "can_rate_hz", "config", 100.0);
  cfg.num_scans = j.value("num_scans", std::size_t{15});
  cfg.first_scan_start = get_number(j, "first_scan_start", "config", 0.0);
  if (j.contains("output_dir")) {
    std::filesystem::path out = j.at("output_dir").get<std::string>();
    cfg.output_dir = out.is_relative() ? base_dir / out : out;
  }
  if (j.contains("cloud_format")) {
    try {
      cfg.cloud_format = cloud_format_from_string(j.at("cloud_format").get<std::string>());
    } catch (const std::invalid_argument& e) {
      config_error("config", e.what());
    }
  }
  if (j.contains("cell_sizes")) cfg.cell_sizes = j.at("cell_sizes").get<std::vector<double>>();
  if (j.contains("icp")) {
    const auto& p = j.at("icp");
    reject_unknown(p, "icp",
                   {"max_iterations", "convergence_eps", "max_correspondence_distance", "planar", "max_source_points"});
    cfg.icp.max_iterations = p.value("max_iterations", cfg.icp.max_iterations);
    cfg.icp.convergence_eps = p.value("convergence_eps", cfg.icp.convergence_eps);
    cfg.icp.max_correspondence_distance = p.value("max_correspondence_distance", cfg.icp.max_correspondence_distance);
    cfg.icp.planar = p.value("planar", cfg.icp.planar);
    cfg.icp.max_source_points = p.value("max_source_points", cfg.icp.max_source_points);
  }
  cfg.validate();
  return cfg;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  try {
    return run_config_from(json_text, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text(path), path.has_parent_path() ? path.parent_path() : ".");
}

Scene parse_scene(const std::string& json_text) {
  try {
    return scene_from(parse_json(json_text, "scene"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) { return parse_scene(read_text(path)); }

std::string scene_to_json(const Scene& scene) {
  json j;
  j["ground"] = scene.ground;
  j["posts"] = json::array();
  for (const auto& p : scene.posts) {
    j["posts"].push_back({{"x", p.x}, {"y", p.y}, {"radius", p.radius}, {"height", p.height}});
  }
  j["fences"] = json::array();
  for (const auto& f : scene.fences) {
    j["fences"].push_back({{"from", {f.x1, f.y1}}, {"to", {f.x2, f.y2}}, {"height", f.height}});
  }
  j["boxes"] = json::array();
  for (const auto& b : scene.boxes) {
    j["boxes"].push_back({{"min", {b.min.x, b.min.y, b.min.z}}, {"max", {b.max.x, b.max.y, b.max.z}}});
  }
  return j.dump(2) + "\n";
}

TrajectorySpec parse_trajectory(const std::string& json_text) {
  try {
    return trajectory_from(parse_json(json_text, "trajectory"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("trajectory: ") + e.what());
  }
}

}  // namespace lidar_deskew
