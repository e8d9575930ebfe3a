/*
 * Copyright 2026 The Semsteer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "semsteer/kitti.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>

#include "semsteer/byte_io.h"
#include "semsteer/error.h"
#include "semsteer/vehicle.h"

namespace semsteer {
namespace fs = std::filesystem;
namespace {

std::vector<std::string_view> Tokens(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) {
      ++j;
    }
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double ParseDouble(std::string_view token, const std::string& what) {
  double v = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(what + ": '" + std::string(token) + "' is not a number");
  }
  return v;
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// Frame index -> path for files named NNNNNNNNNN<ext> in `dir`.
std::map<size_t, std::string> IndexedFiles(const fs::path& dir,
                                           const std::string& ext) {
  std::map<size_t, std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ext) continue;
    const std::string stem = e.path().stem().string();
    size_t index = 0;
    auto [ptr, ec] =
        std::from_chars(stem.data(), stem.data() + stem.size(), index);
    if (ec != std::errc() || ptr != stem.data() + stem.size()) continue;
    out[index] = e.path().string();
  }
  return out;
}

std::vector<double> ReadTimestamps(const fs::path& path) {
  std::vector<double> out;
  for (const std::string& line : ReadLines(path.string())) {
    out.push_back(ParseKittiTimestamp(line));
  }
  return out;
}

std::string FileIndexName(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%010zu", index);
  return buf;
}

}  // namespace

OxtsRecord ParseOxts(std::string_view line) {
  const std::vector<std::string_view> tokens = Tokens(line);
  if (tokens.size() != OxtsRecord::kFieldCount) {
    throw FormatError("oxts line has " + std::to_string(tokens.size()) +
                      " fields, expected " +
                      std::to_string(OxtsRecord::kFieldCount));
  }
  OxtsRecord rec;
  for (size_t i = 0; i < tokens.size(); ++i) {
    rec.fields[i] = ParseDouble(tokens[i], "oxts field " + std::to_string(i));
  }
  return rec;
}

std::string FormatOxts(const OxtsRecord& record) {
  std::string out;
  char buf[64];
  for (size_t i = 0; i < record.fields.size(); ++i) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), record.fields[i]);
    if (ec != std::errc()) throw FormatError("cannot format oxts field");
    if (i) out.push_back(' ');
    out.append(buf, ptr);
  }
  return out;
}

PointCloud ParseVelodyneBin(std::string_view bytes) {
  if (bytes.empty()) throw EmptyCloudError("velodyne scan is empty");
  if (bytes.size() % 16 != 0) {
    throw FormatError("velodyne scan of " + std::to_string(bytes.size()) +
                      " bytes is not a multiple of 16; trailing record starts "
                      "at byte offset " +
                      std::to_string(bytes.size() - bytes.size() % 16));
  }
  ByteReader r(bytes);
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / 16);
  while (!r.done()) {
    Point3 p;
    p.x = r.GetF32();
    p.y = r.GetF32();
    p.z = r.GetF32();
    r.GetF32();  // reflectance
    cloud.points.push_back(p);
  }
  return cloud;
}

std::string EncodeVelodyneBin(const PointCloud& cloud) {
  ByteWriter w;
  for (const Point3& p : cloud.points) {
    w.PutF32(static_cast<float>(p.x));
    w.PutF32(static_cast<float>(p.y));
    w.PutF32(static_cast<float>(p.z));
    w.PutF32(0.0f);
  }
  return w.Take();
}

std::vector<ClassId> ParseLabels(std::string_view bytes) {
  if (bytes.size() % 4 != 0) {
    throw FormatError("label file of " + std::to_string(bytes.size()) +
                      " bytes is not a multiple of 4");
  }
  ByteReader r(bytes);
  std::vector<ClassId> out;
  out.reserve(bytes.size() / 4);
  while (!r.done()) out.push_back(static_cast<ClassId>(r.GetU32() & 0xffffu));
  return out;
}

std::string EncodeLabels(const std::vector<ClassId>& classes) {
  ByteWriter w;
  for (ClassId c : classes) w.PutU32(c);
  return w.Take();
}

CameraIntrinsics ParseCalib(std::string_view text, const std::string& camera) {
  std::map<std::string, std::vector<double>> entries;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    const size_t colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string key(line.substr(0, colon));
    std::vector<double> values;
    bool numeric = true;
    for (std::string_view tok : Tokens(line.substr(colon + 1))) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (numeric) entries[key] = std::move(values);
  }
  CameraIntrinsics intr;
  if (auto it = entries.find("K_" + camera); it != entries.end()) {
    const std::vector<double>& k = it->second;
    if (k.size() != 9) throw FormatError("K_" + camera + " needs 9 values");
    intr.fx = k[0];
    intr.cx = k[2];
    intr.fy = k[4];
    intr.cy = k[5];
  } else if (auto p = entries.find("P_rect_" + camera); p != entries.end()) {
    const std::vector<double>& m = p->second;
    if (m.size() != 12) {
      throw FormatError("P_rect_" + camera + " needs 12 values");
    }
    intr.fx = m[0];
    intr.cx = m[2];
    intr.fy = m[5];
    intr.cy = m[6];
  } else {
    throw FormatError("calibration has no K_" + camera + " or P_rect_" +
                      camera + " entry");
  }
  intr.Validate();
  return intr;
}

double ParseKittiTimestamp(std::string_view text) {
  const std::string s(text);
  int year, month, day, hour, minute, second;
  char frac[16] = {0};
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d %2d:%2d:%2d.%15[0-9]", &year,
                            &month, &day, &hour, &minute, &second, frac);
  if (n < 6) throw FormatError("bad timestamp '" + s + "'");
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = minute;
  tm.tm_sec = second;
  const double whole = static_cast<double>(timegm(&tm));
  double fraction = 0.0;
  if (n == 7) fraction = ParseDouble(std::string("0.") + frac, "timestamp");
  return whole + fraction;
}

std::string FormatKittiTimestamp(int64_t epoch_nanoseconds) {
  const std::time_t secs =
      static_cast<std::time_t>(epoch_nanoseconds / 1000000000);
  const int64_t nanos = epoch_nanoseconds % 1000000000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d.%09lld",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<long long>(nanos));
  return buf;
}

std::vector<FrameRecord> LoadKittiSequence(const std::string& directory,
                                           const KittiLoadOptions& opts) {
  const fs::path root(directory);
  if (!fs::is_directory(root)) {
    throw Error("sequence directory " + directory + " does not exist");
  }
  const std::map<size_t, std::string> clouds =
      IndexedFiles(root / "velodyne_points" / "data", ".bin");
  if (clouds.empty()) {
    throw Error(directory + " has no velodyne_points/data/*.bin scans");
  }
  const std::map<size_t, std::string> labels =
      IndexedFiles(root / "velodyne_points" / "labels", ".label");
  const std::map<size_t, std::string> depths =
      IndexedFiles(root / "depth" / "data", ".spdm");
  const std::map<size_t, std::string> semantics =
      IndexedFiles(root / "semantic" / "data", ".spdm");
  const std::map<size_t, std::string> oxts_files =
      IndexedFiles(root / "oxts" / "data", ".txt");
  const std::vector<double> scan_times =
      ReadTimestamps(root / "velodyne_points" / "timestamps.txt");
  const std::vector<double> oxts_times =
      ReadTimestamps(root / "oxts" / "timestamps.txt");
  const bool synced = scan_times.size() == oxts_times.size();

  std::vector<FrameRecord> out;
  for (const auto& [index, path] : clouds) {
    if (index >= scan_times.size()) {
      throw Error("frame " + std::to_string(index) +
                  " has no entry in velodyne_points/timestamps.txt");
    }
    FrameRecord rec;
    rec.frame_index = index;
    rec.cloud_path = path;
    rec.timestamp = scan_times[index] - scan_times.front();
    if (auto it = labels.find(index); it != labels.end()) rec.label_path = it->second;
    if (auto it = depths.find(index); it != depths.end()) rec.depth_path = it->second;
    if (auto it = semantics.find(index); it != semantics.end()) {
      rec.semantic_path = it->second;
    }
    size_t oxts_index = index;
    if (!synced) {
      if (oxts_times.empty()) throw Error(directory + " has no oxts timestamps");
      const auto it =
          std::lower_bound(oxts_times.begin(), oxts_times.end(), scan_times[index]);
      size_t hi = static_cast<size_t>(it - oxts_times.begin());
      if (hi == oxts_times.size()) hi = oxts_times.size() - 1;
      oxts_index = hi;
      if (hi > 0 && std::abs(oxts_times[hi - 1] - scan_times[index]) <=
                        std::abs(oxts_times[hi] - scan_times[index])) {
        oxts_index = hi - 1;
      }
    }
    const auto oxts_it = oxts_files.find(oxts_index);
    if (oxts_it == oxts_files.end()) {
      throw Error("frame " + std::to_string(index) + " is missing oxts/data/" +
                  FileIndexName(oxts_index) + ".txt");
    }
    const std::vector<std::string> lines = ReadLines(oxts_it->second);
    if (lines.size() != 1) {
      throw FormatError(oxts_it->second + " must hold exactly one record");
    }
    rec.oxts = ParseOxts(lines.front());
    rec.velocity = rec.oxts.forward_velocity();
    rec.yaw_rate = rec.oxts.yaw_rate();
    try {
      rec.steering = SteeringFromYaw(rec.velocity, rec.yaw_rate, opts.wheelbase,
                                     opts.min_speed);
    } catch (const LowSpeedError&) {
      rec.low_speed = true;
      rec.steering = 0.0;
    }
    if (!out.empty() && !(rec.timestamp > out.back().timestamp)) {
      throw FormatError("timestamps are not increasing at frame " +
                        std::to_string(index));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

PointCloud LoadFrameCloud(const FrameRecord& frame) {
  PointCloud cloud = ParseVelodyneBin(ReadFileBytes(frame.cloud_path));
  if (frame.label_path) {
    std::vector<ClassId> classes = ParseLabels(ReadFileBytes(*frame.label_path));
    if (classes.size() != cloud.size()) {
      throw DimensionError(*frame.label_path + " has " +
                           std::to_string(classes.size()) + " labels for " +
                           std::to_string(cloud.size()) + " points");
    }
    cloud.classes = std::move(classes);
  }
  cloud.frame_index = static_cast<int64_t>(frame.frame_index);
  cloud.timestamp = frame.timestamp;
  return cloud;
}

}  // namespace semsteer
