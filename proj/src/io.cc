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

#include "avrnnt/io.h"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "avrnnt/error.h"
#include "json.hpp"

namespace avrnnt::io {

using nlohmann::json;

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path &path, const std::string &bytes) {
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

namespace {

void put_u16(std::string &s, uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u32(std::string &s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string &s, uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Bounds-checked little-endian reader.
class Reader {
 public:
  Reader(const std::string &bytes, std::string what) : b_(bytes), what_(std::move(what)) {}

  uint64_t uint(int width) {
    need(static_cast<size_t>(width));
    uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<uint64_t>(static_cast<uint8_t>(b_[pos_ + static_cast<size_t>(i)])) << (8 * i);
    }
    pos_ += static_cast<size_t>(width);
    return v;
  }
  std::string take(size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  size_t pos() const { return pos_; }
  size_t remaining() const { return b_.size() - pos_; }
  void skip(size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(size_t n) const {
    if (b_.size() - pos_ < n) throw Error(ErrorCode::kFormatError, what_ + " is truncated");
  }
  const std::string &b_;
  std::string what_;
  size_t pos_ = 0;
};

size_t dtype_size(DType d) {
  switch (d) {
    case DType::kU8:
      return 1;
    case DType::kF32:
      return 4;
    case DType::kF64:
      return 8;
  }
  throw Error(ErrorCode::kFormatError, "unknown dtype");
}

}  // namespace

dsp::Waveform read_wav(const fs::path &path) {
  const std::string bytes = read_file(path);
  Reader r(bytes, "WAV file " + path.string());
  if (r.take(4) != "RIFF") throw Error(ErrorCode::kFormatError, path.string() + " is not RIFF");
  r.uint(4);
  if (r.take(4) != "WAVE") throw Error(ErrorCode::kFormatError, path.string() + " is not WAVE");
  int format = 0, channels = 0, bits = 0;
  int64_t rate = 0;
  std::optional<std::string> data;
  while (r.remaining() >= 8) {
    const std::string id = r.take(4);
    const auto size = static_cast<size_t>(r.uint(4));
    if (id == "fmt ") {
      const std::string body = r.take(size);
      Reader f(body, "fmt chunk");
      format = static_cast<int>(f.uint(2));
      channels = static_cast<int>(f.uint(2));
      rate = static_cast<int64_t>(f.uint(4));
      f.uint(4);
      f.uint(2);
      bits = static_cast<int>(f.uint(2));
    } else if (id == "data") {
      data = r.take(std::min(size, r.remaining()));
    } else {
      r.skip(std::min(size, r.remaining()));
    }
    // Chunks are padded to an even length.
    if (size & 1 && r.remaining() > 0) r.skip(1);
  }
  if (!data || channels < 1) throw Error(ErrorCode::kFormatError, path.string() + " lacks fmt/data");
  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  if (!pcm16 && !float32) {
    throw Error(ErrorCode::kFormatError, path.string() + ": only 16-bit PCM or 32-bit float WAV");
  }
  const size_t width = pcm16 ? 2 : 4;
  const size_t frames = data->size() / (width * static_cast<size_t>(channels));
  dsp::Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(frames);
  Reader d(*data, "WAV data");
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      if (pcm16) {
        acc += static_cast<int16_t>(d.uint(2)) / 32768.0;
      } else {
        const auto bitsv = static_cast<uint32_t>(d.uint(4));
        float f;
        std::memcpy(&f, &bitsv, 4);
        acc += f;
      }
    }
    w.samples[i] = acc / channels;
  }
  return w;
}

std::string encode_wav(const dsp::Waveform &w) {
  std::string s = "RIFF";
  const auto data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  put_u32(s, 36 + data_bytes);
  s += "WAVEfmt ";
  put_u32(s, 16);
  put_u16(s, 1);
  put_u16(s, 1);
  put_u32(s, static_cast<uint32_t>(w.sample_rate));
  put_u32(s, static_cast<uint32_t>(w.sample_rate) * 2);
  put_u16(s, 2);
  put_u16(s, 16);
  s += "data";
  put_u32(s, data_bytes);
  for (double v : w.samples) {
    const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
    put_u16(s, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  return s;
}

void write_wav(const fs::path &path, const dsp::Waveform &w) { write_file_atomic(path, encode_wav(w)); }

int64_t TensorEntry::num_elements() const {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

void TensorContainer::add_matrix(const std::string &name, const Matrix &m, DType dtype) {
  TensorEntry e{name, dtype, {m.rows(), m.cols()}, {}};
  e.payload.reserve(static_cast<size_t>(m.size()) * dtype_size(dtype));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    if (dtype == DType::kF64) {
      uint64_t bits;
      std::memcpy(&bits, &v, 8);
      put_u64(e.payload, bits);
    } else if (dtype == DType::kF32) {
      const auto f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(e.payload, bits);
    } else {
      e.payload.push_back(static_cast<char>(static_cast<uint8_t>(std::clamp(std::round(v), 0.0, 255.0))));
    }
  }
  entries.push_back(std::move(e));
}

void TensorContainer::add_bytes(const std::string &name, const std::vector<uint8_t> &bytes,
                                const std::vector<int64_t> &shape) {
  TensorEntry e{name, DType::kU8, shape, std::string(bytes.begin(), bytes.end())};
  if (e.num_elements() != static_cast<int64_t>(bytes.size())) {
    throw Error(ErrorCode::kShapeError, "byte tensor " + name + " does not match its shape");
  }
  entries.push_back(std::move(e));
}

void TensorContainer::add_text(const std::string &name, const std::string &text) {
  entries.push_back({name, DType::kU8, {static_cast<int64_t>(text.size())}, text});
}

const TensorEntry *TensorContainer::find(const std::string &name) const {
  for (const auto &e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const TensorEntry &TensorContainer::at(const std::string &name) const {
  const TensorEntry *e = find(name);
  if (!e) throw Error(ErrorCode::kFormatError, "container has no entry " + name);
  return *e;
}

Matrix TensorContainer::matrix(const std::string &name) const {
  const TensorEntry &e = at(name);
  if (e.shape.empty() || e.shape.size() > 2) {
    throw Error(ErrorCode::kShapeError, name + " is not a vector or matrix");
  }
  const Eigen::Index rows = e.shape.size() == 2 ? e.shape[0] : 1;
  const Eigen::Index cols = e.shape.back();
  Matrix m(rows, cols);
  Reader r(e.payload, name);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (e.dtype == DType::kF64) {
      const uint64_t bits = r.uint(8);
      std::memcpy(m.data() + i, &bits, 8);
    } else if (e.dtype == DType::kF32) {
      const auto bits = static_cast<uint32_t>(r.uint(4));
      float f;
      std::memcpy(&f, &bits, 4);
      m.data()[i] = f;
    } else {
      m.data()[i] = static_cast<double>(r.uint(1));
    }
  }
  return m;
}

std::string TensorContainer::text(const std::string &name) const { return at(name).payload; }

std::string serialize(const TensorContainer &c) {
  std::string out = "AVTC";
  put_u32(out, TensorContainer::kVersion);
  put_u32(out, static_cast<uint32_t>(c.entries.size()));
  for (const TensorEntry &e : c.entries) {
    for (int64_t d : e.shape) {
      if (d < 0) throw Error(ErrorCode::kShapeError, "negative dimension in " + e.name);
    }
    if (static_cast<int64_t>(e.payload.size()) !=
        e.num_elements() * static_cast<int64_t>(dtype_size(e.dtype))) {
      throw Error(ErrorCode::kShapeError, "payload of " + e.name + " does not match its shape");
    }
    std::string body;
    put_u32(body, static_cast<uint32_t>(e.name.size()));
    body += e.name;
    body.push_back(static_cast<char>(e.dtype));
    put_u32(body, static_cast<uint32_t>(e.shape.size()));
    for (int64_t d : e.shape) put_u64(body, static_cast<uint64_t>(d));
    put_u64(body, e.payload.size());
    body += e.payload;
    const auto crc = crc32(0L, reinterpret_cast<const Bytef *>(body.data()),
                           static_cast<uInt>(body.size()));
    out += body;
    put_u32(out, static_cast<uint32_t>(crc));
  }
  return out;
}

TensorContainer parse_container(const std::string &bytes) {
  Reader r(bytes, "tensor container");
  if (r.take(4) != "AVTC") throw Error(ErrorCode::kFormatError, "bad container magic");
  const auto version = r.uint(4);
  if (version != TensorContainer::kVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported container version " + std::to_string(version));
  }
  const auto count = r.uint(4);
  TensorContainer c;
  for (uint64_t k = 0; k < count; ++k) {
    const size_t start = r.pos();
    TensorEntry e;
    e.name = r.take(static_cast<size_t>(r.uint(4)));
    const auto dt = r.uint(1);
    if (dt > 2) throw Error(ErrorCode::kFormatError, "unknown dtype in " + e.name);
    e.dtype = static_cast<DType>(dt);
    const auto rank = r.uint(4);
    if (rank > 8) throw Error(ErrorCode::kFormatError, "implausible rank in " + e.name);
    for (uint64_t i = 0; i < rank; ++i) e.shape.push_back(static_cast<int64_t>(r.uint(8)));
    const auto size = r.uint(8);
    e.payload = r.take(static_cast<size_t>(size));
    const auto crc = crc32(0L, reinterpret_cast<const Bytef *>(bytes.data() + start),
                           static_cast<uInt>(r.pos() - start));
    if (r.uint(4) != static_cast<uint32_t>(crc)) {
      throw Error(ErrorCode::kFormatError, "checksum mismatch in entry " + e.name);
    }
    if (static_cast<int64_t>(e.payload.size()) !=
        e.num_elements() * static_cast<int64_t>(dtype_size(e.dtype))) {
      throw Error(ErrorCode::kFormatError, "payload size mismatch in " + e.name);
    }
    c.entries.push_back(std::move(e));
  }
  if (r.remaining() != 0) throw Error(ErrorCode::kFormatError, "trailing bytes after container");
  return c;
}

void write_container(const fs::path &path, const TensorContainer &c) {
  write_file_atomic(path, serialize(c));
}

TensorContainer read_container(const fs::path &path) { return parse_container(read_file(path)); }

video::VideoClip read_video(const fs::path &path, const Rational &fps) {
  const TensorContainer c = read_container(path);
  const TensorEntry &e = c.at("frames");
  if (e.dtype != DType::kU8 || e.shape.size() != 4 || e.shape[3] != 3) {
    throw Error(ErrorCode::kFormatError, path.string() + ": frames must be u8 T x H x W x 3");
  }
  const std::vector<uint8_t> px(e.payload.begin(), e.payload.end());
  return video::clip_from_u8(px, e.shape[0], static_cast<int>(e.shape[1]),
                             static_cast<int>(e.shape[2]), fps);
}

void write_video(const fs::path &path, const video::VideoClip &clip) {
  const auto &p = clip.pixels;
  std::vector<uint8_t> px;
  px.reserve(static_cast<size_t>(p.num_frames() * p.height * p.width * 3));
  for (const Matrix &f : p.frames) {
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      px.push_back(static_cast<uint8_t>(std::clamp(std::round(f.data()[i] * 255.0), 0.0, 255.0)));
    }
  }
  TensorContainer c;
  c.add_bytes("frames", px, {p.num_frames(), p.height, p.width, 3});
  write_container(path, c);
}

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kHeldout:
      return "heldout";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(const std::string &s) {
  if (s == "train") return Split::kTrain;
  if (s == "heldout") return Split::kHeldout;
  if (s == "test") return Split::kTest;
  throw Error(ErrorCode::kFormatError, "unknown split '" + s + "'");
}

fs::path Manifest::resolve(const std::string &p) const {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

Manifest read_manifest(const fs::path &path) {
  Manifest m;
  m.base_dir = path.parent_path();
  std::istringstream in(read_file(path));
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.utt_id = j.at("utt_id").get<std::string>();
      e.audio_path = j.at("audio_path").get<std::string>();
      e.transcript = j.value("transcript", "");
      e.split = parse_split(j.value("split", "train"));
      if (j.contains("video_path") && !j["video_path"].is_null()) {
        e.video_path = j["video_path"].get<std::string>();
      }
      if (j.contains("video_fps") && !j["video_fps"].is_null()) {
        const json &f = j["video_fps"];
        e.video_fps = parse_rational(f.is_string() ? f.get<std::string>() : f.dump());
      }
      if (j.contains("face_meta") && j["face_meta"].is_object()) {
        const json &f = j["face_meta"];
        eval::FaceMetadata meta;
        auto field = [&](const char *k) -> std::optional<double> {
          if (f.contains(k) && f[k].is_number()) return f[k].get<double>();
          return std::nullopt;
        };
        meta.eye_distance_px = field("eye_distance_px");
        meta.bbox_diagonal_px = field("bbox_diagonal_px");
        meta.pan_deg = field("pan_deg");
        meta.tilt_deg = field("tilt_deg");
        e.face_meta = meta;
      }
      m.entries.push_back(std::move(e));
    } catch (const json::exception &ex) {
      throw Error(ErrorCode::kFormatError, where + ex.what());
    } catch (const Error &ex) {
      throw Error(ErrorCode::kFormatError, where + ex.what());
    }
  }
  return m;
}

std::string manifest_line(const ManifestEntry &e) {
  json j;
  j["utt_id"] = e.utt_id;
  j["audio_path"] = e.audio_path;
  if (e.video_path) j["video_path"] = *e.video_path;
  j["transcript"] = e.transcript;
  if (e.video_fps) j["video_fps"] = to_string(*e.video_fps);
  if (e.face_meta) {
    json f = json::object();
    if (e.face_meta->eye_distance_px) f["eye_distance_px"] = *e.face_meta->eye_distance_px;
    if (e.face_meta->bbox_diagonal_px) f["bbox_diagonal_px"] = *e.face_meta->bbox_diagonal_px;
    if (e.face_meta->pan_deg) f["pan_deg"] = *e.face_meta->pan_deg;
    if (e.face_meta->tilt_deg) f["tilt_deg"] = *e.face_meta->tilt_deg;
    j["face_meta"] = f;
  }
  j["split"] = to_string(e.split);
  return j.dump();
}

void write_manifest(const fs::path &path, const std::vector<ManifestEntry> &entries) {
  std::string out;
  for (const auto &e : entries) out += manifest_line(e) + "\n";
  write_file_atomic(path, out);
}

void validate_manifest(const Manifest &m, bool check_paths) {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const ManifestEntry &e : m.entries) {
    if (e.utt_id.empty()) problems.push_back("empty utt_id");
    if (!seen.insert(e.utt_id).second) problems.push_back("duplicate utt_id " + e.utt_id);
    if (e.split != Split::kTest && e.transcript.empty()) {
      problems.push_back(e.utt_id + ": empty transcript in " + to_string(e.split) + " split");
    }
    if (e.video_path.has_value() != e.video_fps.has_value()) {
      problems.push_back(e.utt_id + ": video_fps must be given exactly when video_path is");
    }
    if (check_paths) {
      if (!fs::exists(m.resolve(e.audio_path))) {
        problems.push_back(e.utt_id + ": missing audio " + e.audio_path);
      }
      if (e.video_path && !fs::exists(m.resolve(*e.video_path))) {
        problems.push_back(e.utt_id + ": missing video " + *e.video_path);
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " manifest problem(s):";
    for (const auto &p : problems) msg += "\n  " + p;
    throw Error(ErrorCode::kFormatError, msg);
  }
}

std::string config_to_json(const model::ModelConfig &c) {
  json j;
  j["format"] = "avrnnt-model";
  j["version"] = 1;
  j["audio_dim"] = c.audio_dim;
  j["video"] = {{"input_size", c.video.input_size},
                {"channels", c.video.channels},
                {"groups", c.video.groups}};
  j["encoder_layers"] = c.encoder_layers;
  j["encoder_units"] = c.encoder_units;
  j["decoder_layers"] = c.decoder_layers;
  j["decoder_units"] = c.decoder_units;
  j["decoder_projection"] = c.decoder_projection;
  j["joint_dim"] = c.joint_dim;
  j["vocab_size"] = c.vocab_size;
  j["blank"] = c.blank;
  return j.dump(2);
}

model::ModelConfig config_from_json(const std::string &text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "avrnnt-model" || j.value("version", 0) != 1) {
      throw Error(ErrorCode::kIncompatibleCheckpoint, "unknown model config format or version");
    }
    model::ModelConfig c;
    c.audio_dim = j.at("audio_dim").get<int>();
    c.video.input_size = j.at("video").at("input_size").get<int>();
    c.video.channels = j.at("video").at("channels").get<std::vector<int>>();
    c.video.groups = j.at("video").at("groups").get<int>();
    c.encoder_layers = j.at("encoder_layers").get<int>();
    c.encoder_units = j.at("encoder_units").get<int>();
    c.decoder_layers = j.at("decoder_layers").get<int>();
    c.decoder_units = j.at("decoder_units").get<int>();
    c.decoder_projection = j.at("decoder_projection").get<int>();
    c.joint_dim = j.at("joint_dim").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.blank = j.at("blank").get<int>();
    c.validate();
    return c;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kIncompatibleCheckpoint, std::string("model config: ") + e.what());
  }
}

void save_checkpoint(const fs::path &path, const model::TransducerModel &model,
                     const std::map<std::string, std::string> &metadata) {
  TensorContainer c;
  c.add_text("checkpoint/config", config_to_json(model.config));
  c.add_text("checkpoint/metadata", json(metadata).dump());
  for (const auto &[name, t] : model::named_tensors(model.weights)) {
    c.add_matrix("weights/" + name, *t, DType::kF64);
  }
  write_container(path, c);
}

Checkpoint load_checkpoint(const fs::path &path) {
  const TensorContainer c = read_container(path);
  if (!c.find("checkpoint/config")) {
    throw Error(ErrorCode::kIncompatibleCheckpoint, path.string() + " is not a checkpoint");
  }
  Checkpoint ck;
  ck.model.config = config_from_json(c.text("checkpoint/config"));
  ck.model.weights = model::zero_weights(ck.model.config);
  if (const auto *meta = c.find("checkpoint/metadata")) {
    ck.metadata = json::parse(meta->payload).get<std::map<std::string, std::string>>();
  }
  size_t expected = 2;
  for (auto &[name, t] : model::named_tensors(ck.model.weights)) {
    const TensorEntry *e = c.find("weights/" + name);
    if (!e) throw Error(ErrorCode::kIncompatibleCheckpoint, "checkpoint lacks tensor " + name);
    const Matrix m = c.matrix("weights/" + name);
    if (m.rows() != t->rows() || m.cols() != t->cols()) {
      throw Error(ErrorCode::kIncompatibleCheckpoint, "tensor " + name + " has the wrong shape");
    }
    *t = m;
    ++expected;
  }
  if (c.entries.size() != expected) {
    throw Error(ErrorCode::kIncompatibleCheckpoint, "checkpoint has unexpected extra tensors");
  }
  return ck;
}

Checkpoint load_checkpoint(const fs::path &path, const model::ModelConfig &expected) {
  Checkpoint ck = load_checkpoint(path);
  if (config_to_json(ck.model.config) != config_to_json(expected)) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                path.string() + " was trained with a different model configuration");
  }
  return ck;
}

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string &text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kConfigError,
                  "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    if (cfg.values_.count(key)) {
      throw Error(ErrorCode::kConfigError,
                  "line " + std::to_string(lineno) + ": field '" + key + "' set twice");
    }
    cfg.values_[key] = {trim(line.substr(eq + 1)), lineno};
  }
  if (!cfg.has("version")) throw Error(ErrorCode::kConfigError, "field 'version' is missing");
  if (cfg.get_int("version", 0) != kVersion) {
    cfg.fail("version", "unsupported version (expected " + std::to_string(kVersion) + ")");
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const fs::path &path) {
  try {
    return parse(read_file(path));
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kConfigError) throw;
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.detail());
  }
}

void KeyValueConfig::fail(const std::string &key, const std::string &why) const {
  const auto it = values_.find(key);
  const std::string where = it == values_.end() ? "" : "line " + std::to_string(it->second.line) + ": ";
  throw Error(ErrorCode::kConfigError, where + "field '" + key + "': " + why);
}

std::string KeyValueConfig::get(const std::string &key, const std::string &fallback) const {
  used_[key] = true;
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second.text;
}

double KeyValueConfig::get_double(const std::string &key, double fallback) const {
  if (!has(key)) return get(key, ""), fallback;
  const std::string v = get(key, "");
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) fail(key, "trailing characters in '" + v + "'");
    return d;
  } catch (const std::logic_error &) {
    fail(key, "'" + v + "' is not a number");
  }
}

int64_t KeyValueConfig::get_int(const std::string &key, int64_t fallback) const {
  if (!has(key)) return get(key, ""), fallback;
  const std::string v = get(key, "");
  try {
    size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) fail(key, "'" + v + "' is not an integer");
    return i;
  } catch (const std::logic_error &) {
    fail(key, "'" + v + "' is not an integer");
  }
}

bool KeyValueConfig::get_bool(const std::string &key, bool fallback) const {
  if (!has(key)) return get(key, ""), fallback;
  const std::string v = get(key, "");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "'" + v + "' is not a boolean");
}

std::vector<std::string> KeyValueConfig::unused() const {
  std::vector<std::string> out;
  for (const auto &[key, value] : values_) {
    if (key != "version" && !used_.count(key)) out.push_back(key);
  }
  return out;
}

std::string csv_escape(const std::string &field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string> &fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_escape(fields[i]);
  return out + "\n";
}

namespace {

std::string fixed1(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(1) << v;
  return ss.str();
}

}  // namespace

std::string ScoreGrid::to_csv() const {
  std::vector<std::string> header{"condition"};
  for (const auto &m : modes) {
    header.push_back(m + "_wer");
    header.push_back(m + "_ci95");
  }
  std::string out = csv_row(header);
  for (const auto &c : conditions) {
    std::vector<std::string> row{c};
    for (const auto &m : modes) {
      const auto it = cells.find({c, m});
      if (it == cells.end()) {
        row.insert(row.end(), {"", ""});
        continue;
      }
      row.push_back(fixed1(it->second.wer));
      row.push_back(it->second.ci_halfwidth_95 ? fixed1(*it->second.ci_halfwidth_95) : "");
    }
    out += csv_row(row);
  }
  return out;
}

std::string ScoreGrid::to_text() const {
  size_t first = 9;
  for (const auto &c : conditions) first = std::max(first, c.size());
  std::ostringstream ss;
  ss << std::left << std::setw(static_cast<int>(first)) << "condition";
  for (const auto &m : modes) ss << "  " << std::setw(14) << m;
  ss << "\n";
  for (const auto &c : conditions) {
    ss << std::setw(static_cast<int>(first)) << c;
    for (const auto &m : modes) {
      const auto it = cells.find({c, m});
      std::string cell;
      if (it != cells.end()) {
        cell = fixed1(it->second.wer);
        if (it->second.ci_halfwidth_95) cell += " +- " + fixed1(*it->second.ci_halfwidth_95);
      }
      ss << "  " << std::setw(14) << cell;
    }
    ss << "\n";
  }
  return ss.str();
}

}  // namespace avrnnt::io
