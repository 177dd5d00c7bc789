#pragma once

// Text scan files, odometry logs, point clouds (PLY / xyz) and CSV tables.
//
// All text formats write floating point values with 17 significant digits,
// so write -> parse is lossless.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lidar_deskew/odometry.hpp"
#include "lidar_deskew/simulator.hpp"
#include "lidar_deskew/types.hpp"

namespace lidar_deskew {

/// Parse failure carrying the offending location ("file:line: message").
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& source, std::size_t line, const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// printf("%.17g"): reads back to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Scan files
//
//   # lidar-deskew scan v1
//   ts <scan start, s>
//   period <scan period, s>
//   beams <n>
//   azimuth_step <rad>            optional, default 2*pi/2048
//   mirror cw|ccw                 optional, default cw
//   max_range <m>                 optional, default 120
//   height <m>                    optional, default 1.9
//   inclinations <w_0> ... <w_n-1> optional, default taken from the rays
//   <beam_index> <azimuth_rad> <inclination_rad> <range_m>   one per ray
//
// A range of -1 marks a no-return. Blank lines and '#' comments are ignored.
// ---------------------------------------------------------------------------

void write_scan(std::ostream& os, const Scan& scan);
Scan read_scan(std::istream& is, const std::string& source_name = "<stream>");
void write_scan_file(const Scan& scan, const std::filesystem::path& path);
Scan parse_scan_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Odometry logs
//
//   # lidar-deskew odometry v1
//   t0 <start time of the first record, s>
//   dt <duration of the first record, s>      alternative to t0
//   <t_end> <dtheta_R_rad> <dtheta_L_rad>     wheel increments
//   inc <t_end> <dx_m> <dtheta_rad>           direct motion increment
//
// Each record ends at t_end and starts where the previous one ended, so
// record durations come from consecutive timestamps.
// ---------------------------------------------------------------------------

struct OdometryRecord {
  double start_time = 0.0;
  std::variant<OdometrySample, MotionIncrement> value;

  double dt() const;
};

struct OdometryLog {
  std::vector<OdometryRecord> records;

  /// Wheel samples only; throws if the log holds direct increments.
  std::vector<OdometrySample> wheel_samples() const;
  TrajectorySegment to_segment(const WheelConfig& cfg) const;
};

void write_odometry_log(std::ostream& os, const CanLog& log);
void write_odometry_log(std::ostream& os, const OdometryLog& log);
OdometryLog read_odometry_log(std::istream& is, const std::string& source_name = "<stream>");
void write_odometry_log_file(const CanLog& log, const std::filesystem::path& path);
OdometryLog parse_odometry_log(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

enum class CloudFormat { kXyzAscii, kPlyBinary };

CloudFormat cloud_format_from_string(const std::string& s);
std::string extension_of(CloudFormat format);

/// xyz-ascii: one "x y z" line per point. PLY: binary little endian with
/// double x, y, z and an optional float remission property.
void write_point_cloud(std::ostream& os, const PointCloud& cloud, CloudFormat format);
void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);

/// Reads a PLY (ascii or binary little endian, vertex element) or, for any
/// other extension, xyz text.
PointCloud read_point_cloud(const std::filesystem::path& path);
PointCloud read_ply(std::istream& is, const std::string& source_name = "<stream>");
PointCloud read_xyz(std::istream& is, const std::string& source_name = "<stream>");

// ---------------------------------------------------------------------------
// Pose tables and CSV
// ---------------------------------------------------------------------------

/// Ground-truth pose of a scan: the vehicle pose at scan end.
struct ScanPose {
  std::size_t index = 0;
  double start_time = 0.0;
  double end_time = 0.0;
  Pose2 end_pose;
};

void write_scan_poses(const std::vector<ScanPose>& poses, const std::filesystem::path& path);
std::vector<ScanPose> parse_scan_poses(const std::filesystem::path& path);

using CsvRow = std::vector<std::string>;
void write_csv(const std::filesystem::path& path, const CsvRow& header, const std::vector<CsvRow>& rows);

/// Opens for writing, creating parent directories; throws with the path on failure.
std::ofstream open_output(const std::filesystem::path& path, bool binary = false);

}  // namespace lidar_deskew
