// Copyright 2026 The avrnnt Authors.
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

// File formats: 16-bit PCM WAV, the checksummed tensor container, JSONL
// manifests, model checkpoints, key-value config files and CSV reports.

#ifndef AVRNNT_IO_H_
#define AVRNNT_IO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avrnnt/audio_frontend.h"
#include "avrnnt/corruption.h"
#include "avrnnt/rnnt_model.h"
#include "avrnnt/types.h"
#include "avrnnt/video_frontend.h"

namespace avrnnt::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path &path);
// Writes to a temporary sibling and renames it over the target.
void write_file_atomic(const fs::path &path, const std::string &bytes);

dsp::Waveform read_wav(const fs::path &path);
std::string encode_wav(const dsp::Waveform &w);
void write_wav(const fs::path &path, const dsp::Waveform &w);

enum class DType : uint8_t { kU8 = 0, kF32 = 1, kF64 = 2 };

struct TensorEntry {
  std::string name;
  DType dtype = DType::kF64;
  std::vector<int64_t> shape;
  std::string payload;  // row-major, little-endian

  int64_t num_elements() const;
};

// Magic "AVTC", format version, then entries each carrying a CRC-32 of their
// header and payload.
struct TensorContainer {
  static constexpr uint32_t kVersion = 1;
  std::vector<TensorEntry> entries;

  void add_matrix(const std::string &name, const Matrix &m, DType dtype = DType::kF64);
  void add_bytes(const std::string &name, const std::vector<uint8_t> &bytes,
                 const std::vector<int64_t> &shape);
  void add_text(const std::string &name, const std::string &text);
  const TensorEntry *find(const std::string &name) const;
  const TensorEntry &at(const std::string &name) const;
  Matrix matrix(const std::string &name) const;  // rank 1 or 2, any dtype
  std::string text(const std::string &name) const;
};

std::string serialize(const TensorContainer &c);
TensorContainer parse_container(const std::string &bytes);
void write_container(const fs::path &path, const TensorContainer &c);
TensorContainer read_container(const fs::path &path);

// Video files are containers with a u8 "frames" tensor of shape T x H x W x 3.
video::VideoClip read_video(const fs::path &path, const Rational &fps);
void write_video(const fs::path &path, const video::VideoClip &clip);

enum class Split { kTrain, kHeldout, kTest };
std::string to_string(Split s);
Split parse_split(const std::string &s);

struct ManifestEntry {
  std::string utt_id;
  std::string audio_path;
  std::optional<std::string> video_path;
  std::string transcript;
  std::optional<Rational> video_fps;
  std::optional<eval::FaceMetadata> face_meta;
  Split split = Split::kTrain;
};

struct Manifest {
  fs::path base_dir;  // relative media paths resolve against this
  std::vector<ManifestEntry> entries;

  fs::path resolve(const std::string &p) const;
};

Manifest read_manifest(const fs::path &path);
std::string manifest_line(const ManifestEntry &e);
void write_manifest(const fs::path &path, const std::vector<ManifestEntry> &entries);
// Duplicate ids, missing transcripts, fps/video mismatches and (optionally)
// dangling media paths; all problems are collected into one error.
void validate_manifest(const Manifest &m, bool check_paths = true);

std::string config_to_json(const model::ModelConfig &c);
model::ModelConfig config_from_json(const std::string &json);

struct Checkpoint {
  model::TransducerModel model;
  std::map<std::string, std::string> metadata;
};

void save_checkpoint(const fs::path &path, const model::TransducerModel &model,
                     const std::map<std::string, std::string> &metadata = {});
Checkpoint load_checkpoint(const fs::path &path);
// Throws IncompatibleCheckpoint when the stored config differs from expected.
Checkpoint load_checkpoint(const fs::path &path, const model::ModelConfig &expected);

// "key = value" lines, '#' comments, and a mandatory "version" key.
class KeyValueConfig {
 public:
  static constexpr int kVersion = 1;

  static KeyValueConfig parse(const std::string &text);
  static KeyValueConfig load(const fs::path &path);

  bool has(const std::string &key) const { return values_.count(key) > 0; }
  std::string get(const std::string &key, const std::string &fallback) const;
  double get_double(const std::string &key, double fallback) const;
  int64_t get_int(const std::string &key, int64_t fallback) const;
  bool get_bool(const std::string &key, bool fallback) const;
  // Keys that no getter has asked for; catches typos in config files.
  std::vector<std::string> unused() const;

 private:
  struct Value {
    std::string text;
    int line = 0;
  };
  std::map<std::string, Value> values_;
  mutable std::map<std::string, bool> used_;

  [[noreturn]] void fail(const std::string &key, const std::string &why) const;
};

std::string csv_escape(const std::string &field);
std::string csv_row(const std::vector<std::string> &fields);

// Rows are conditions, columns are evaluation modes; cells "wer +- ci".
struct ScoreGrid {
  std::vector<std::string> modes;
  std::vector<std::string> conditions;
  std::map<std::pair<std::string, std::string>, eval::WerReport> cells;

  std::string to_csv() const;
  std::string to_text() const;
};

}  // namespace avrnnt::io

#endif  // AVRNNT_IO_H_
