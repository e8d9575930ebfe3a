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

#include "semsteer/dataset.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "semsteer/error.h"
#include "semsteer/kitti.h"
#include "semsteer/random.h"

namespace semsteer {
namespace fs = std::filesystem;
namespace {

uint64_t Fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void CheckSplitNames(const std::vector<std::string>& names, const char* split,
                     const std::set<std::string>& known,
                     std::set<std::string>& seen) {
  if (names.empty()) {
    throw ConfigError(std::string(split) + " split is empty");
  }
  for (const std::string& n : names) {
    if (!known.contains(n)) {
      throw ConfigError(std::string(split) + " split names unknown sequence '" +
                        n + "'");
    }
    if (!seen.insert(n).second) {
      throw ConfigError("sequence '" + n + "' is assigned to more than one split");
    }
  }
}

}  // namespace

RawSequence FromSynthetic(const std::string& name, const SyntheticSequence& seq) {
  RawSequence raw;
  raw.name = name;
  raw.clouds = seq.frames;
  raw.truth = seq.truth;
  raw.velocities = seq.velocities;
  raw.valid = seq.valid;
  raw.dt = seq.dt;
  return raw;
}

RawSequence LoadRawSequence(const std::string& directory,
                            const std::string& name) {
  const std::vector<FrameRecord> frames = LoadKittiSequence(directory);
  RawSequence raw;
  raw.name = name;
  for (const FrameRecord& f : frames) {
    raw.clouds.push_back(LoadFrameCloud(f));
    raw.truth.push_back(f.steering);
    raw.velocities.push_back(f.velocity);
    raw.valid.push_back(f.low_speed ? 0 : 1);
  }
  if (frames.size() > 1) {
    raw.dt = (frames.back().timestamp - frames.front().timestamp) /
             static_cast<double>(frames.size() - 1);
  }
  return raw;
}

DatasetSplit SplitDataset(std::span<const std::string> sequences,
                          const SplitAssignment& assignment) {
  const std::set<std::string> known(sequences.begin(), sequences.end());
  if (known.size() != sequences.size()) {
    throw ConfigError("sequence names are not unique");
  }
  std::set<std::string> seen;
  CheckSplitNames(assignment.train, "train", known, seen);
  CheckSplitNames(assignment.val, "val", known, seen);
  CheckSplitNames(assignment.test, "test", known, seen);
  return {assignment.train, assignment.val, assignment.test};
}

SplitAssignment DefaultAssignment(std::span<const std::string> sequences) {
  const size_t n = sequences.size();
  if (n < 3) throw ConfigError("need at least 3 sequences to split");
  const double scale = static_cast<double>(n) / 15.0;
  const size_t test = std::max<size_t>(1, static_cast<size_t>(std::lround(scale)));
  const size_t val =
      std::max<size_t>(1, static_cast<size_t>(std::lround(2.0 * scale)));
  if (test + val >= n) throw ConfigError("too few sequences for a train split");
  SplitAssignment a;
  const size_t train = n - val - test;
  a.train.assign(sequences.begin(), sequences.begin() + static_cast<long>(train));
  a.val.assign(sequences.begin() + static_cast<long>(train),
               sequences.begin() + static_cast<long>(train + val));
  a.test.assign(sequences.begin() + static_cast<long>(train + val), sequences.end());
  return a;
}

void WriteManifest(const std::string& path,
                   std::span<const ManifestEntry> entries) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path);
  for (const ManifestEntry& e : entries) {
    out << e.split << ' ' << e.directory << '\n';
  }
  if (!out) throw Error("failed writing manifest " + path);
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ManifestEntry e;
    if (!(ss >> e.split >> e.directory)) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": expected '<split> <directory>'");
    }
    if (e.split != "train" && e.split != "val" && e.split != "test") {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": unknown split '" + e.split + "'");
    }
    if (fs::path(e.directory).is_relative()) {
      e.directory = (base / e.directory).string();
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string SequenceNameFromDirectory(const std::string& directory) {
  fs::path p(directory);
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

SteeringSequence PrepareSequence(const RawSequence& raw, const ModelConfig& cfg,
                                 uint64_t seed) {
  if (raw.clouds.size() != raw.truth.size() ||
      raw.clouds.size() != raw.valid.size()) {
    throw DimensionError("raw sequence '" + raw.name + "' is inconsistent");
  }
  SteeringSequence seq;
  seq.name = raw.name;
  seq.truth = raw.truth;
  seq.valid = raw.valid;
  const uint64_t base = seed ^ Fnv1a(raw.name);
  for (size_t f = 0; f < raw.clouds.size(); ++f) {
    Rng rng(base, f);
    const uint64_t sample_seed = rng.NextU64();
    const uint64_t prune_seed = rng.NextU64();
    const PointCloud cloud =
        RandomDownsample(raw.clouds[f], cfg.points_per_frame, sample_seed);
    if (cfg.encoder == EncoderKind::kGcn) {
      seq.frames.push_back(MakeGraphFrame(cloud, cfg, prune_seed));
    } else {
      seq.frames.push_back(MakeCloudFrame(cloud, cfg, 0));
    }
  }
  seq.Validate();
  return seq;
}

std::vector<SteeringSequence> PrepareSequences(std::span<const RawSequence> raw,
                                               const ModelConfig& cfg,
                                               uint64_t seed) {
  std::vector<SteeringSequence> out;
  out.reserve(raw.size());
  for (const RawSequence& r : raw) out.push_back(PrepareSequence(r, cfg, seed));
  return out;
}

std::vector<RawSequence> GenerateSyntheticDataset(
    const SyntheticDatasetSpec& spec) {
  spec.Validate();
  std::vector<RawSequence> out;
  for (size_t i = 0; i < spec.num_sequences; ++i) {
    out.push_back(FromSynthetic(
        SequenceName(i), GenerateSyntheticSequence(MakeSequenceSpec(spec, i))));
  }
  return out;
}

void WriteSyntheticDataset(const SyntheticDatasetSpec& spec,
                           const std::string& directory) {
  spec.Validate();
  fs::create_directories(directory);
  std::vector<std::string> names;
  for (size_t i = 0; i < spec.num_sequences; ++i) {
    names.push_back(SequenceName(i));
    const SyntheticSequence seq =
        GenerateSyntheticSequence(MakeSequenceSpec(spec, i));
    WriteKittiSequence(seq, (fs::path(directory) / names.back()).string());
  }
  const SplitAssignment a = DefaultAssignment(names);
  std::vector<ManifestEntry> entries;
  for (const std::string& n : a.train) entries.push_back({"train", n});
  for (const std::string& n : a.val) entries.push_back({"val", n});
  for (const std::string& n : a.test) entries.push_back({"test", n});
  WriteManifest((fs::path(directory) / "manifest.txt").string(), entries);
}

LoadedSplits LoadManifest(const std::string& manifest_path) {
  const std::vector<ManifestEntry> entries = ReadManifest(manifest_path);
  std::vector<std::string> names;
  SplitAssignment a;
  for (const ManifestEntry& e : entries) {
    names.push_back(SequenceNameFromDirectory(e.directory));
    if (e.split == "train") a.train.push_back(names.back());
    if (e.split == "val") a.val.push_back(names.back());
    if (e.split == "test") a.test.push_back(names.back());
  }
  SplitDataset(names, a);
  LoadedSplits out;
  for (size_t i = 0; i < entries.size(); ++i) {
    RawSequence raw = LoadRawSequence(entries[i].directory, names[i]);
    if (entries[i].split == "train") out.train.push_back(std::move(raw));
    if (entries[i].split == "val") out.val.push_back(std::move(raw));
    if (entries[i].split == "test") out.test.push_back(std::move(raw));
  }
  return out;
}

}  // namespace semsteer
