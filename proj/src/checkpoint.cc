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

#include "semsteer/checkpoint.h"

#include "semsteer/byte_io.h"
#include "semsteer/error.h"

namespace semsteer {
namespace {

constexpr std::string_view kMagic = "SSCK";

void PutMatrix(ByteWriter& w, const ad::Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.PutF64(m(r, c));
  }
}

ad::Matrix GetMatrix(ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
  ad::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.GetF64();
  }
  return m;
}

}  // namespace

Checkpoint CaptureCheckpoint(const SteeringModel& model, uint64_t seed,
                             const TrainState* state) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.seed = seed;
  for (const ad::ParamTensor* p : model.Parameters()) {
    ckpt.names.push_back(p->name());
    ckpt.values.push_back(p->value());
  }
  if (state != nullptr) ckpt.train_state = *state;
  return ckpt;
}

std::string EncodeCheckpoint(const Checkpoint& ckpt) {
  if (ckpt.names.size() != ckpt.values.size()) {
    throw DimensionError("checkpoint names and values differ in count");
  }
  ByteWriter w;
  w.PutBytes(kMagic);
  w.PutU32(kCheckpointVersion);
  w.PutString(ckpt.config.preset);
  const auto kv = ModelConfigToMap(ckpt.config);
  w.PutU32(static_cast<uint32_t>(kv.size()));
  for (const auto& [k, v] : kv) {
    w.PutString(k);
    w.PutString(v);
  }
  w.PutU64(ckpt.seed);
  w.PutU64(ckpt.train_state ? static_cast<uint64_t>(ckpt.train_state->epoch)
                            : 0);
  w.PutU32(static_cast<uint32_t>(ckpt.values.size()));
  for (size_t i = 0; i < ckpt.values.size(); ++i) {
    w.PutString(ckpt.names[i]);
    w.PutU32(static_cast<uint32_t>(ckpt.values[i].rows()));
    w.PutU32(static_cast<uint32_t>(ckpt.values[i].cols()));
    PutMatrix(w, ckpt.values[i]);
  }
  w.PutBytes(std::string_view(ckpt.train_state ? "\x01" : "\x00", 1));
  if (ckpt.train_state) {
    const TrainState& st = *ckpt.train_state;
    const OptimizerState& opt = st.optimizer;
    if (opt.m.size() != ckpt.values.size() ||
        opt.v.size() != ckpt.values.size()) {
      throw DimensionError("optimizer state does not match checkpoint tensors");
    }
    w.PutF64(st.best_val);
    w.PutU32(static_cast<uint32_t>(st.best_epoch));
    w.PutU32(static_cast<uint32_t>(st.bad_epochs));
    w.PutU64(opt.step);
    w.PutF64(opt.beta1);
    w.PutF64(opt.beta2);
    w.PutF64(opt.epsilon);
    for (size_t i = 0; i < opt.m.size(); ++i) {
      PutMatrix(w, opt.m[i]);
      PutMatrix(w, opt.v[i]);
    }
    w.PutU32(static_cast<uint32_t>(st.history.size()));
    for (const EpochRecord& r : st.history) {
      w.PutU32(static_cast<uint32_t>(r.epoch));
      w.PutF64(r.train_mse);
      w.PutF64(r.val_mse);
    }
    w.PutBytes(std::string_view(st.last_params.empty() ? "\x00" : "\x01", 1));
    if (!st.last_params.empty()) {
      if (st.last_params.size() != ckpt.values.size()) {
        throw DimensionError("last-epoch weights do not match checkpoint tensors");
      }
      for (size_t i = 0; i < st.last_params.size(); ++i) {
        if (st.last_params[i].rows() != ckpt.values[i].rows() ||
            st.last_params[i].cols() != ckpt.values[i].cols()) {
          throw DimensionError("last-epoch weights for " + ckpt.names[i] +
                               " have the wrong shape");
        }
        PutMatrix(w, st.last_params[i]);
      }
    }
  }
  return w.Take();
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.remaining() < kMagic.size() || r.GetBytes(kMagic.size()) != kMagic) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const uint32_t version = r.GetU32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version));
  }
  Checkpoint ckpt;
  const std::string preset = r.GetString();
  std::map<std::string, std::string> kv;
  const uint32_t n_kv = r.GetU32();
  for (uint32_t i = 0; i < n_kv; ++i) {
    std::string k = r.GetString();
    kv[k] = r.GetString();
  }
  ckpt.config = ModelConfigFromMap(kv);
  ckpt.config.preset = preset;
  ckpt.seed = r.GetU64();
  const uint64_t epochs = r.GetU64();
  const uint32_t n_params = r.GetU32();
  for (uint32_t i = 0; i < n_params; ++i) {
    ckpt.names.push_back(r.GetString());
    const uint32_t rows = r.GetU32();
    const uint32_t cols = r.GetU32();
    if (static_cast<uint64_t>(rows) * cols * 8 > r.remaining()) {
      throw FormatError("tensor " + ckpt.names.back() + " (" +
                        std::to_string(rows) + "x" + std::to_string(cols) +
                        ") overruns the file at byte offset " +
                        std::to_string(r.offset()));
    }
    ckpt.values.push_back(GetMatrix(r, rows, cols));
  }
  const uint8_t has_state = static_cast<uint8_t>(r.GetBytes(1)[0]);
  if (has_state > 1) throw FormatError("bad train-state flag");
  if (has_state) {
    TrainState st;
    st.epoch = static_cast<int>(epochs);
    st.best_val = r.GetF64();
    st.best_epoch = static_cast<int>(r.GetU32());
    st.bad_epochs = static_cast<int>(r.GetU32());
    OptimizerState& opt = st.optimizer;
    opt.step = r.GetU64();
    opt.beta1 = r.GetF64();
    opt.beta2 = r.GetF64();
    opt.epsilon = r.GetF64();
    for (const ad::Matrix& v : ckpt.values) {
      opt.m.push_back(GetMatrix(r, v.rows(), v.cols()));
      opt.v.push_back(GetMatrix(r, v.rows(), v.cols()));
    }
    const uint32_t n_hist = r.GetU32();
    for (uint32_t i = 0; i < n_hist; ++i) {
      EpochRecord rec;
      rec.epoch = static_cast<int>(r.GetU32());
      rec.train_mse = r.GetF64();
      rec.val_mse = r.GetF64();
      st.history.push_back(rec);
    }
    const uint8_t has_last = static_cast<uint8_t>(r.GetBytes(1)[0]);
    if (has_last > 1) throw FormatError("bad last-weights flag");
    if (has_last) {
      for (const ad::Matrix& v : ckpt.values) {
        st.last_params.push_back(GetMatrix(r, v.rows(), v.cols()));
      }
    }
    ckpt.train_state = std::move(st);
  }
  if (!r.done()) {
    throw FormatError("trailing bytes after checkpoint at offset " +
                      std::to_string(r.offset()));
  }
  return ckpt;
}

SteeringModel RestoreModel(const Checkpoint& ckpt) {
  SteeringModel model(ckpt.config);
  std::vector<ad::ParamTensor*> params = model.Parameters();
  if (params.size() != ckpt.values.size()) {
    throw FormatError("checkpoint holds " + std::to_string(ckpt.values.size()) +
                      " tensors, model expects " +
                      std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i]->name() != ckpt.names[i] ||
        params[i]->rows() != ckpt.values[i].rows() ||
        params[i]->cols() != ckpt.values[i].cols()) {
      throw FormatError("checkpoint tensor " + ckpt.names[i] +
                        " does not match model tensor " + params[i]->name());
    }
    params[i]->value() = ckpt.values[i];
  }
  return model;
}

void SaveCheckpoint(const std::string& path, const SteeringModel& model,
                    uint64_t seed, const TrainState* state) {
  WriteFileBytes(path, EncodeCheckpoint(CaptureCheckpoint(model, seed, state)));
}

Checkpoint LoadCheckpoint(const std::string& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

}  // namespace semsteer
