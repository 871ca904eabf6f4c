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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ucorr/image.hpp"
#include "ucorr/synth.hpp"

namespace ucorr {

// 8-bit PNG, grayscale for 1 channel and RGB for 3. Values are clamped to
// [0, 1] and rounded to the nearest of 256 levels.
std::vector<char> encode_png(const Image& img);
Image decode_png(const std::vector<char>& bytes, const std::string& source = "png");
void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

// Tensor file: "UCTF", u32 version, u32 rank, u32 extents, f32 payload,
// little-endian. Single-channel images are stored as rank 2 (H, W),
// otherwise rank 3 (H, W, C).
std::vector<char> encode_tensor_file(const Image& img);
Image decode_tensor_file(const std::vector<char>& bytes, const std::string& source = "tensor");
void write_tensor_file(const std::filesystem::path& path, const Image& img);
Image read_tensor_file(const std::filesystem::path& path);

inline constexpr std::array<const char*, 3> kSplits = {"train", "val", "test"};

struct DatasetConfig {
  SceneConfig scene;
  int train_flights = 30;
  int val_flights = 5;
  int test_flights = 5;
  int frames_per_flight = 10;
  std::uint64_t seed = 0;

  int flights(const std::string& split) const;
  void validate() const;
};

struct ManifestEntry {
  std::string split;
  std::string flight_id;
  int frames = 0;
  std::uint64_t seed = 0;
  std::uint32_t checksum = 0;  // CRC-32 over the flight's files in name order
};

struct DatasetSummary {
  std::array<int, 3> flights{};  // per kSplits entry
  int frames = 0;
  double wire_pixel_rate = 0.0;
  std::uint32_t manifest_checksum = 0;
  std::vector<ManifestEntry> entries;
};

std::string flight_name(int index);

/// Writes one flight's frames, masks and depth maps into root/split/flight_id.
ManifestEntry write_flight(const std::filesystem::path& root, const std::string& split,
                           const std::string& flight_id, const std::vector<RenderedView>& views);

/// Generates every split. A non-empty root is rejected unless `force`.
DatasetSummary write_dataset(const DatasetConfig& cfg, const std::filesystem::path& root, bool force);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& root);

/// Consecutive-frame samples of one split, never spanning two flights.
/// `context` frames per sample (2 for pairs). Frames with a missing mask
/// or depth file are skipped with a warning.
std::vector<Sample> read_dataset(const std::filesystem::path& root, const std::string& split, int context = 2);

std::string format_summary(const DatasetSummary& summary);

}  // namespace ucorr
