// Copyright 2026 The ucorr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ucorr/checkpoint.hpp"

#include <stdexcept>
#include <unordered_map>

#include "binary_io.hpp"

namespace ucorr {
namespace {

void put_records(detail::ByteWriter& w, const std::vector<TensorRecord>& records) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(r.name.size()));
    w.bytes(r.name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(r.shape.rank()));
    for (auto e : r.shape.extents()) w.put<std::uint32_t>(static_cast<std::uint32_t>(e));
    w.floats(r.values);
  }
}

std::vector<TensorRecord> get_records(detail::ByteReader& r) {
  const auto count = r.get<std::uint32_t>();
  std::vector<TensorRecord> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord rec;
    rec.name = r.bytes(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    if (rank > Shape::kMaxRank) throw std::runtime_error(r.source() + ": bad rank for " + rec.name);
    std::vector<std::int64_t> extents(rank);
    for (auto& e : extents) e = r.get<std::uint32_t>();
    rec.shape = Shape(std::move(extents));
    rec.values = r.floats(static_cast<std::size_t>(rec.shape.numel()));
    out.push_back(std::move(rec));
  }
  return out;
}

const std::vector<float>& buffer_for(
    const std::unordered_map<std::string, const TensorRecord*>& records,
    const NamedParameter<float>& p, const std::string& what) {
  auto it = records.find(p.name);
  if (it == records.end()) throw std::runtime_error("checkpoint lacks " + what + " for " + p.name);
  if (it->second->shape != p.tensor.shape()) {
    throw ShapeError("checkpoint " + what + " " + p.name + " shape mismatch");
  }
  return it->second->values;
}

}  // namespace

Checkpoint capture_checkpoint(const ParameterList<float>& params, const OptimizerState& state,
                              std::uint32_t epoch, std::uint64_t step) {
  Checkpoint ckpt;
  ckpt.epoch = epoch;
  ckpt.step = step;
  ckpt.learning_rate = state.learning_rate;
  ckpt.optimizer_steps = state.steps;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    ckpt.parameters.push_back(
        {p.name, p.tensor.shape(), std::vector<float>(p.tensor.data().begin(), p.tensor.data().end())});
    if (i < state.velocity.size()) {
      ckpt.velocities.push_back({p.name, p.tensor.shape(), state.velocity[i]});
    }
    if (i < state.second_moment.size()) {
      ckpt.second_moments.push_back({p.name, p.tensor.shape(), state.second_moment[i]});
    }
  }
  return ckpt;
}

void restore_checkpoint(const Checkpoint& ckpt, ParameterList<float>& params, OptimizerState* state) {
  std::unordered_map<std::string, const TensorRecord*> by_name, vel_by_name, second_by_name;
  for (const auto& r : ckpt.parameters) by_name[r.name] = &r;
  for (const auto& r : ckpt.velocities) vel_by_name[r.name] = &r;
  for (const auto& r : ckpt.second_moments) second_by_name[r.name] = &r;
  const bool adam = state && state->kind == OptimizerKind::kAdam;
  if (state) state->velocity.resize(params.size());
  if (adam) state->second_moment.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw std::runtime_error("checkpoint lacks parameter " + p.name);
    if (it->second->shape != p.tensor.shape()) {
      throw ShapeError("checkpoint parameter " + p.name + " has shape " +
                       it->second->shape.str() + ", model expects " + p.tensor.shape().str());
    }
    std::copy(it->second->values.begin(), it->second->values.end(), p.tensor.mutable_data().begin());
    if (state) state->velocity[i] = buffer_for(vel_by_name, p, "velocity");
    if (adam) state->second_moment[i] = buffer_for(second_by_name, p, "second moment");
  }
  if (state) {
    state->learning_rate = ckpt.learning_rate;
    state->steps = ckpt.optimizer_steps;
  }
}

std::vector<char> encode_checkpoint(const Checkpoint& ckpt) {
  detail::ByteWriter w;
  w.bytes(std::string_view(kCheckpointMagic, 4));
  w.put<std::uint32_t>(kCheckpointVersion);
  put_records(w, ckpt.parameters);
  put_records(w, ckpt.velocities);
  put_records(w, ckpt.second_moments);
  w.put<std::uint32_t>(ckpt.epoch);
  w.put<std::uint64_t>(ckpt.step);
  w.put<float>(ckpt.learning_rate);
  w.put<std::uint64_t>(ckpt.optimizer_steps);
  return w.buffer();
}

Checkpoint decode_checkpoint(std::vector<char> bytes, const std::string& source) {
  detail::ByteReader r(std::move(bytes), source);
  if (r.bytes(4) != std::string_view(kCheckpointMagic, 4)) {
    throw std::runtime_error(source + ": not a checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error(source + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.parameters = get_records(r);
  ckpt.velocities = get_records(r);
  ckpt.second_moments = get_records(r);
  ckpt.epoch = r.get<std::uint32_t>();
  ckpt.step = r.get<std::uint64_t>();
  ckpt.learning_rate = r.get<float>();
  ckpt.optimizer_steps = r.get<std::uint64_t>();
  if (!r.at_end()) throw std::runtime_error(source + ": trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  detail::write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path), path.string());
}

}  // namespace ucorr
