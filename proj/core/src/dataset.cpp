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

#include "ucorr/dataset.hpp"

#include <png.h>
#include <spdlog/spdlog.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "binary_io.hpp"
#include "ucorr/rng.hpp"

namespace ucorr {
namespace fs = std::filesystem;
namespace {

constexpr char kTensorMagic[] = "UCTF";
constexpr std::uint32_t kTensorVersion = 1;
constexpr char kManifestName[] = "manifest.txt";
constexpr char kManifestFormat[] = "ucorr-synth 1";

std::uint32_t crc_update(std::uint32_t crc, const std::vector<char>& bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::string indexed(const char* stem, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", stem, i, ext);
  return buf;
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

bool is_empty_dir(const fs::path& p) { return !fs::exists(p) || (fs::is_directory(p) && fs::is_empty(p)); }

}  // namespace

std::vector<char> encode_png(const Image& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw std::invalid_argument("PNG export supports 1 or 3 channels, got " + std::to_string(img.channels));
  }
  std::vector<png_byte> pixels(img.data.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<png_byte>(std::lround(std::clamp(img.data[i], 0.0f, 1.0f) * 255.0f));
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + image.message);
  }
  std::vector<char> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(const std::vector<char>& bytes, const std::string& source) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw std::runtime_error(source + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw std::runtime_error(source + ": " + image.message);
  }
  Image out(static_cast<int>(image.height), static_cast<int>(image.width), color ? 3 : 1);
  for (std::size_t i = 0; i < pixels.size(); ++i) out.data[i] = static_cast<float>(pixels[i]) / 255.0f;
  return out;
}

void write_png(const fs::path& path, const Image& img) { detail::write_file_atomic(path, encode_png(img)); }

Image read_png(const fs::path& path) { return decode_png(detail::read_file(path), path.string()); }

std::vector<char> encode_tensor_file(const Image& img) {
  detail::ByteWriter w;
  w.bytes(std::string_view(kTensorMagic, 4));
  w.put<std::uint32_t>(kTensorVersion);
  if (img.channels == 1) {
    w.put<std::uint32_t>(2);
  } else {
    w.put<std::uint32_t>(3);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(img.height));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(img.width));
  if (img.channels != 1) w.put<std::uint32_t>(static_cast<std::uint32_t>(img.channels));
  w.floats(img.data);
  return w.buffer();
}

Image decode_tensor_file(const std::vector<char>& bytes, const std::string& source) {
  detail::ByteReader r(bytes, source);
  if (r.bytes(4) != std::string_view(kTensorMagic, 4)) throw std::runtime_error(source + ": bad magic");
  const auto version = r.get<std::uint32_t>();
  if (version != kTensorVersion) {
    throw std::runtime_error(source + ": unsupported version " + std::to_string(version));
  }
  const auto rank = r.get<std::uint32_t>();
  if (rank != 2 && rank != 3) throw std::runtime_error(source + ": unsupported rank " + std::to_string(rank));
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  const std::uint32_t c = rank == 3 ? r.get<std::uint32_t>() : 1;
  Image out(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  out.data = r.floats(out.data.size());
  if (!r.at_end()) throw std::runtime_error(source + ": trailing bytes");
  return out;
}

void write_tensor_file(const fs::path& path, const Image& img) {
  detail::write_file_atomic(path, encode_tensor_file(img));
}

Image read_tensor_file(const fs::path& path) {
  return decode_tensor_file(detail::read_file(path), path.string());
}

int DatasetConfig::flights(const std::string& split) const {
  if (split == "train") return train_flights;
  if (split == "val") return val_flights;
  if (split == "test") return test_flights;
  throw std::invalid_argument("unknown split '" + split + "'");
}

void DatasetConfig::validate() const {
  scene.validate();
  if (train_flights < 0 || val_flights < 0 || test_flights < 0) {
    throw std::invalid_argument("flight counts must be non-negative");
  }
  if (frames_per_flight < 2) throw std::invalid_argument("flights need at least two frames");
}

std::string flight_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "flight_%04d", index);
  return buf;
}

ManifestEntry write_flight(const fs::path& root, const std::string& split, const std::string& flight_id,
                           const std::vector<RenderedView>& views) {
  const fs::path dir = root / split / flight_id;
  fs::create_directories(dir);
  ManifestEntry entry{split, flight_id, static_cast<int>(views.size()), 0, 0};
  std::uint32_t crc = 0;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const int idx = static_cast<int>(i);
    Image mask = views[i].wire_mask;
    for (auto& v : mask.data) v = v > 0.5f ? 1.0f : 0.0f;
    const auto frame = encode_png(views[i].rgb);
    const auto wire = encode_png(mask);
    const auto depth = encode_tensor_file(views[i].depth);
    detail::write_file_atomic(dir / indexed("frame", idx, "png"), frame);
    detail::write_file_atomic(dir / indexed("wire", idx, "png"), wire);
    detail::write_file_atomic(dir / indexed("depth", idx, "utf"), depth);
    crc = crc_update(crc_update(crc_update(crc, frame), wire), depth);
  }
  entry.checksum = crc;
  return entry;
}

DatasetSummary write_dataset(const DatasetConfig& cfg, const fs::path& root, bool force) {
  cfg.validate();
  if (!is_empty_dir(root)) {
    if (!force) throw std::runtime_error(root.string() + " is not empty (use --force to overwrite)");
    for (const char* split : kSplits) fs::remove_all(root / split);
    fs::remove(root / kManifestName);
  }
  fs::create_directories(root);

  DatasetSummary summary;
  std::size_t wire_pixels = 0;
  std::size_t pixels = 0;
  int global = 0;
  for (std::size_t s = 0; s < kSplits.size(); ++s) {
    const std::string split = kSplits[s];
    fs::create_directories(root / split);
    for (int f = 0; f < cfg.flights(split); ++f, ++global) {
      const auto seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(global)});
      const auto views = generate_flight(cfg.scene, seed, cfg.frames_per_flight);
      for (const auto& v : views) {
        for (float m : v.wire_mask.data) wire_pixels += m > 0.5f ? 1 : 0;
        pixels += v.wire_mask.data.size();
      }
      auto entry = write_flight(root, split, flight_name(global), views);
      entry.seed = seed;
      summary.entries.push_back(entry);
      ++summary.flights[s];
      summary.frames += entry.frames;
    }
  }
  summary.wire_pixel_rate = pixels ? static_cast<double>(wire_pixels) / static_cast<double>(pixels) : 0.0;

  std::ostringstream m;
  m << "# ucorr synthetic dataset\n";
  m << "format " << kManifestFormat << "\n";
  m << "seed " << cfg.seed << "\n";
  m << "size " << cfg.scene.height << " " << cfg.scene.width << "\n";
  m << "baseline " << cfg.scene.baseline << "\n";
  m << "frames_per_flight " << cfg.frames_per_flight << "\n";
  for (const auto& e : summary.entries) {
    m << "flight " << e.split << " " << e.flight_id << " " << e.frames << " " << e.seed << " "
      << hex32(e.checksum) << "\n";
  }
  const std::string text = m.str();
  const std::vector<char> bytes(text.begin(), text.end());
  detail::write_file_atomic(root / kManifestName, bytes);
  summary.manifest_checksum = crc_update(0, bytes);
  return summary;
}

std::vector<ManifestEntry> read_manifest(const fs::path& root) {
  std::ifstream in(root / kManifestName);
  if (!in) throw std::runtime_error("no manifest in " + root.string());
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != "flight") continue;
    ManifestEntry e;
    std::string crc;
    ls >> e.split >> e.flight_id >> e.frames >> e.seed >> crc;
    if (!ls) throw std::runtime_error("malformed manifest line: " + line);
    e.checksum = static_cast<std::uint32_t>(std::stoul(crc, nullptr, 16));
    out.push_back(e);
  }
  return out;
}

std::vector<Sample> read_dataset(const fs::path& root, const std::string& split, int context) {
  if (context < 2) throw std::invalid_argument("samples need at least two frames");
  const fs::path split_dir = root / split;
  if (!fs::is_directory(split_dir)) throw std::runtime_error("missing split '" + split + "' in " + root.string());

  std::vector<ManifestEntry> flights;
  double baseline = 0.0;
  if (fs::exists(root / kManifestName)) {
    for (auto& e : read_manifest(root)) {
      if (e.split == split) flights.push_back(e);
    }
    std::ifstream in(root / kManifestName);
    std::string key;
    while (in >> key) {
      if (key == "baseline") in >> baseline;
    }
  } else {
    std::set<std::string> names;
    for (const auto& d : fs::directory_iterator(split_dir)) {
      if (d.is_directory()) names.insert(d.path().filename().string());
    }
    for (const auto& n : names) flights.push_back(ManifestEntry{split, n, 0, 0, 0});
  }

  std::vector<Sample> out;
  int height = -1, width = -1;
  for (const auto& flight : flights) {
    const fs::path dir = split_dir / flight.flight_id;
    std::set<int> indices;
    for (const auto& f : fs::directory_iterator(dir)) {
      int idx = 0;
      char tail = 0;
      if (std::sscanf(f.path().filename().string().c_str(), "frame_%d.pn%c", &idx, &tail) == 2 && tail == 'g') {
        indices.insert(idx);
      }
    }
    std::map<int, RenderedView> frames;
    for (int idx : indices) {
      const auto wire_path = dir / indexed("wire", idx, "png");
      const auto depth_path = dir / indexed("depth", idx, "utf");
      if (!fs::exists(wire_path) || !fs::exists(depth_path)) {
        spdlog::warn("{}/{}: frame {} has no {} file, skipping", split, flight.flight_id, idx,
                     fs::exists(wire_path) ? "depth" : "wire mask");
        continue;
      }
      RenderedView v{read_png(dir / indexed("frame", idx, "png")), read_png(wire_path), read_tensor_file(depth_path)};
      if (v.rgb.channels != 3 || v.wire_mask.channels != 1 || v.depth.channels != 1 ||
          v.rgb.height != v.wire_mask.height || v.rgb.width != v.wire_mask.width ||
          v.depth.height != v.rgb.height || v.depth.width != v.rgb.width) {
        throw std::runtime_error(dir.string() + ": inconsistent files for frame " + std::to_string(idx));
      }
      if (height < 0) {
        height = v.rgb.height;
        width = v.rgb.width;
      } else if (height != v.rgb.height || width != v.rgb.width) {
        throw std::runtime_error(dir.string() + ": frame size differs from the rest of the split");
      }
      for (auto& m : v.wire_mask.data) m = m >= 0.5f ? 1.0f : 0.0f;
      frames.emplace(idx, std::move(v));
    }
    for (const auto& [idx, view] : frames) {
      bool complete = true;
      for (int j = idx - context + 1; j <= idx; ++j) complete = complete && frames.count(j) > 0;
      if (!complete) continue;
      Sample s;
      for (int j = idx - context + 1; j <= idx; ++j) s.frames.push_back(frames.at(j).rgb);
      s.wire_mask = view.wire_mask;
      s.depth = view.depth;
      s.meta.scene_seed = flight.seed;
      s.meta.baseline = baseline;
      s.meta.flight_id = flight.flight_id;
      s.meta.frame_index = idx;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string format_summary(const DatasetSummary& summary) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "flights: train=%d val=%d test=%d (%d total)\nframes: %d\nwire-pixel rate: %.4f%%\n"
                "manifest crc32: %s\n",
                summary.flights[0], summary.flights[1], summary.flights[2],
                summary.flights[0] + summary.flights[1] + summary.flights[2], summary.frames,
                100.0 * summary.wire_pixel_rate, hex32(summary.manifest_checksum).c_str());
  return buf;
}

}  // namespace ucorr
