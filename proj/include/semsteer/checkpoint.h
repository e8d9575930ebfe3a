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

#ifndef SEMSTEER_CHECKPOINT_H_
#define SEMSTEER_CHECKPOINT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "semsteer/model.h"
#include "semsteer/training.h"

namespace semsteer {

inline constexpr uint32_t kCheckpointVersion = 1;

// Layout (all integers and reals little-endian):
//   "SSCK" u32 version
//   string preset, u32 n, n x (string key, string value)   model config
//   u64 seed, u64 epochs_completed
//   u32 n, n x (string name, u32 rows, u32 cols, rows*cols f64 row-major)
//   u8 has_train_state, then optionally:
//     f64 best_val, u32 best_epoch, u32 bad_epochs,
//     u64 step, f64 beta1, f64 beta2, f64 epsilon, per parameter m then v,
//     u32 n, n x (u32 epoch, f64 train_mse, f64 val_mse)
// Strings are u32-length-prefixed bytes.
struct Checkpoint {
  ModelConfig config;
  uint64_t seed = 0;
  std::vector<std::string> names;
  std::vector<ad::Matrix> values;
  std::optional<TrainState> train_state;
};

Checkpoint CaptureCheckpoint(const SteeringModel& model, uint64_t seed,
                             const TrainState* state);
std::string EncodeCheckpoint(const Checkpoint& ckpt);
Checkpoint DecodeCheckpoint(std::string_view bytes);

// Builds the model described by the checkpoint and loads its weights.
SteeringModel RestoreModel(const Checkpoint& ckpt);

void SaveCheckpoint(const std::string& path, const SteeringModel& model,
                    uint64_t seed, const TrainState* state = nullptr);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace semsteer

#endif  // SEMSTEER_CHECKPOINT_H_
