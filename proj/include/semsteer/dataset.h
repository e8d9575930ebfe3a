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

#ifndef SEMSTEER_DATASET_H_
#define SEMSTEER_DATASET_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semsteer/model.h"
#include "semsteer/pointcloud.h"
#include "semsteer/synthetic.h"
#include "semsteer/training.h"

namespace semsteer {

// A drive as stored on disk: full-resolution clouds plus labels.
struct RawSequence {
  std::string name;
  std::vector<PointCloud> clouds;
  std::vector<double> truth;
  std::vector<double> velocities;
  std::vector<uint8_t> valid;
  double dt = 0.1;
};

RawSequence FromSynthetic(const std::string& name, const SyntheticSequence& seq);
RawSequence LoadRawSequence(const std::string& directory,
                            const std::string& name);

struct SplitAssignment {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

// Checks the assignment against the known sequence names: every name must
// exist, no name may appear twice, and no split may be empty.
DatasetSplit SplitDataset(std::span<const std::string> sequences,
                          const SplitAssignment& assignment);

// Sizes (train, val, test) proportional to 12/2/1 with at least one sequence
// in val and test.
SplitAssignment DefaultAssignment(std::span<const std::string> sequences);

// Plain-text manifest, one `<split> <directory>` line per sequence;
// relative directories are resolved against the manifest's own folder.
struct ManifestEntry {
  std::string split;
  std::string directory;
};
void WriteManifest(const std::string& path, std::span<const ManifestEntry> entries);
std::vector<ManifestEntry> ReadManifest(const std::string& path);
std::string SequenceNameFromDirectory(const std::string& directory);

// Down-samples every cloud to `cfg.points_per_frame` and builds the encoder
// input the model expects. Seeds derive from `seed`, the sequence position
// and the frame index, so preparation is reproducible.
SteeringSequence PrepareSequence(const RawSequence& raw, const ModelConfig& cfg,
                                 uint64_t seed);
std::vector<SteeringSequence> PrepareSequences(std::span<const RawSequence> raw,
                                               const ModelConfig& cfg,
                                               uint64_t seed);

// Generates the synthetic dataset in memory, in sequence order.
std::vector<RawSequence> GenerateSyntheticDataset(const SyntheticDatasetSpec& spec);

// Writes every drive under `directory/seq_XX` plus `directory/manifest.txt`
// with the default split.
void WriteSyntheticDataset(const SyntheticDatasetSpec& spec,
                           const std::string& directory);

struct LoadedSplits {
  std::vector<RawSequence> train;
  std::vector<RawSequence> val;
  std::vector<RawSequence> test;
};
LoadedSplits LoadManifest(const std::string& manifest_path);

}  // namespace semsteer

#endif  // SEMSTEER_DATASET_H_
