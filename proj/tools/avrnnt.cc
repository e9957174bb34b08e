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

// avrnnt: command-line front end for featurization, toy corpora, training,
// decoding, scoring, corruption and parameter accounting.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "avrnnt/audio_frontend.h"
#include "avrnnt/corruption.h"
#include "avrnnt/error.h"
#include "avrnnt/io.h"
#include "avrnnt/param_count.h"
#include "avrnnt/rnnt_model.h"
#include "avrnnt/toy_task.h"
#include "avrnnt/trainer.h"

namespace {

using namespace avrnnt;
namespace fs = std::filesystem;

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must not depend
// on scheduling, so callers derive any randomness from i.
void parallel_for(size_t n, int jobs, const std::function<void(size_t)> &fn) {
  const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto &t : pool) t.join();
}

uint64_t mix_seed(uint64_t seed, uint64_t index) {
  uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

dsp::FrameRateMode parse_mode(const std::string &s) {
  if (s == "variable") return dsp::FrameRateMode::kVariableThirdOfVideoFrame;
  if (s == "fixed") return dsp::FrameRateMode::kFixed10msDecimate3;
  throw Error(ErrorCode::kUsage, "mode must be 'variable' or 'fixed', got '" + s + "'");
}

std::string mode_name(dsp::FrameRateMode m) {
  return m == dsp::FrameRateMode::kFixed10msDecimate3 ? "fixed" : "variable";
}

model::ModalitySwitch parse_modalities(const std::string &s) {
  if (s == "a" || s == "A") return {true, false};
  if (s == "v" || s == "V") return {false, true};
  if (s == "av" || s == "A+V" || s == "a+v") return {true, true};
  throw Error(ErrorCode::kUsage, "modalities must be a, v or av, got '" + s + "'");
}

std::string modality_name(const model::ModalitySwitch &sw) {
  return sw.audio_on && sw.video_on ? "A+V" : sw.audio_on ? "A" : "V";
}

// Token inventory; label k + 1 is vocab[k], 0 is blank.
struct Vocabulary {
  std::vector<std::string> tokens;

  static Vocabulary from_transcripts(const std::vector<io::ManifestEntry> &entries) {
    std::set<std::string> seen;
    for (const auto &e : entries) {
      for (const auto &t : eval::tokenize(e.transcript)) seen.insert(t);
    }
    return {std::vector<std::string>(seen.begin(), seen.end())};
  }
  static Vocabulary parse(const std::string &joined) { return {eval::tokenize(joined, false)}; }
  std::string join() const {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) out += (i ? " " : "") + tokens[i];
    return out;
  }
  std::vector<int> encode(const std::string &text, const std::string &utt) const {
    std::vector<int> labels;
    for (const auto &t : eval::tokenize(text)) {
      const auto it = std::lower_bound(tokens.begin(), tokens.end(), t);
      if (it == tokens.end() || *it != t) {
        throw Error(ErrorCode::kInvalidLabel, utt + ": token '" + t + "' is not in the vocabulary");
      }
      labels.push_back(static_cast<int>(it - tokens.begin()) + 1);
    }
    return labels;
  }
  std::string decode(const std::vector<int> &labels) const {
    std::string out;
    for (size_t i = 0; i < labels.size(); ++i) {
      out += (i ? " " : "") + tokens.at(static_cast<size_t>(labels[i] - 1));
    }
    return out;
  }
};

struct Media {
  dsp::Waveform audio;
  std::optional<video::VideoClip> video;
};

Media load_media(const io::Manifest &m, const io::ManifestEntry &e, bool need_video) {
  Media media;
  media.audio = io::read_wav(m.resolve(e.audio_path));
  if (e.video_path) {
    media.video = io::read_video(m.resolve(*e.video_path), *e.video_fps);
  } else if (need_video) {
    throw Error(ErrorCode::kShapeError, e.utt_id + " has no video but the video modality is on");
  }
  return media;
}

std::vector<size_t> select_split(const io::Manifest &m, const std::string &split) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < m.entries.size(); ++i) {
    if (split == "all" || io::to_string(m.entries[i].split) == split) idx.push_back(i);
  }
  return idx;
}

io::Manifest load_valid_manifest(const std::string &path) {
  io::Manifest m = io::read_manifest(path);
  io::validate_manifest(m);
  return m;
}

// ---- featurize -------------------------------------------------------------

struct FeaturizeArgs {
  std::string manifest, out, mode = "variable";
  int filters = dsp::kNumFilters;
  int jobs = 1;
};

int cmd_featurize(const FeaturizeArgs &a) {
  const io::Manifest m = load_valid_manifest(a.manifest);
  const dsp::FrameRateMode mode = parse_mode(a.mode);
  if (m.entries.empty()) {
    std::cerr << "warning: manifest is empty, nothing to do\n";
    return kExitOk;
  }
  fs::create_directories(a.out);
  struct Row {
    std::string id, error;
    int64_t hops = 0, stft = 0, audio = 0, video = 0;
    double duration = 0.0;
  };
  std::vector<Row> rows(m.entries.size());
  parallel_for(m.entries.size(), a.jobs, [&](size_t i) {
    const auto &e = m.entries[i];
    Row &r = rows[i];
    r.id = e.utt_id;
    try {
      const Media media = load_media(m, e, mode == dsp::FrameRateMode::kVariableThirdOfVideoFrame);
      train::FeatureOptions fo{mode, a.filters, false};
      const auto in = train::prepare_input(media.audio, media.video, fo);
      const auto n = static_cast<int64_t>(media.audio.samples.size());
      const dsp::FramingPlan plan =
          mode == dsp::FrameRateMode::kFixed10msDecimate3
              ? dsp::make_fixed_plan(n, media.audio.sample_rate)
              : dsp::make_variable_hop_schedule(media.video->fps, media.video->pixels.num_frames(),
                                                media.audio.sample_rate);
      r.hops = static_cast<int64_t>(plan.offsets.size());
      for (int64_t off : plan.offsets) r.stft += off + dsp::kWindowLength <= n;
      r.audio = in.audio.rows();
      r.video = media.video ? media.video->pixels.num_frames() : 0;
      r.duration = media.audio.duration();
      io::TensorContainer c;
      c.add_matrix("audio/features", in.audio, io::DType::kF32);
      if (!in.video_index.empty()) {
        Matrix idx(1, static_cast<Eigen::Index>(in.video_index.size()));
        for (size_t k = 0; k < in.video_index.size(); ++k) idx(0, static_cast<Eigen::Index>(k)) = in.video_index[k];
        c.add_matrix("video/index", idx);
      }
      c.add_text("meta/mode", mode_name(mode));
      io::write_container(fs::path(a.out) / (e.utt_id + ".avt"), c);
    } catch (const Error &err) {
      r.error = err.what();
    }
  });
  int failures = 0;
  double hop_total = 0, stft_total = 0, video_total = 0, audio_total = 0, seconds = 0;
  std::printf("utt_id\tstft_frames\taudio_frames\tvideo_frames\tstatus\n");
  for (const Row &r : rows) {
    if (!r.error.empty()) {
      ++failures;
      std::printf("%s\t-\t-\t-\terror: %s\n", r.id.c_str(), r.error.c_str());
      continue;
    }
    std::printf("%s\t%lld\t%lld\t%lld\tok\n", r.id.c_str(), static_cast<long long>(r.stft),
                static_cast<long long>(r.audio), static_cast<long long>(r.video));
    hop_total += static_cast<double>(r.hops);
    stft_total += static_cast<double>(r.stft);
    audio_total += static_cast<double>(r.audio);
    video_total += static_cast<double>(r.video);
    seconds += r.duration;
  }
  std::printf("# mode %s: %zu ok, %d failed\n", mode_name(mode).c_str(), rows.size() - failures,
              failures);
  if (video_total > 0) {
    // Windows that would run past the last sample are dropped, so the realised
    // STFT count can fall slightly short of the schedule.
    std::printf("# scheduled stft hops per video frame %.3f:1 (realised %.3f:1), "
                "audio:video feature ratio %.3f:1\n",
                hop_total / video_total, stft_total / video_total, audio_total / video_total);
  }
  if (seconds > 0) std::printf("# audio feature rate %.2f fps\n", audio_total / seconds);
  return failures == static_cast<int>(rows.size()) ? kExitData : kExitOk;
}

// ---- make-toy --------------------------------------------------------------

struct MakeToyArgs {
  std::string out;
  int train = 200, heldout = 40, test = 60;
  uint64_t seed = 1;
  int thumbnail = 16;
  bool all_audible = false;
};

int cmd_make_toy(const MakeToyArgs &a) {
  toy::ToyTaskSpec spec;
  spec.num_utterances = a.train + a.heldout + a.test;
  spec.seed = a.seed;
  spec.thumbnail_size = a.thumbnail;
  if (a.all_audible) spec.tone_hz = {400.0, 700.0, 1000.0, 1500.0, 2200.0};
  const auto corpus = toy::generate_corpus(spec);
  const fs::path out(a.out);
  fs::create_directories(out / "media");
  std::vector<io::ManifestEntry> entries;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto &u = corpus[i];
    io::ManifestEntry e;
    e.utt_id = u.id;
    e.audio_path = "media/" + u.id + ".wav";
    e.video_path = "media/" + u.id + ".avt";
    e.video_fps = u.video.fps;
    e.transcript = u.text;
    e.face_meta = eval::FaceMetadata{100.0, 320.0, 0.0, 0.0};
    const auto k = static_cast<int>(i);
    e.split = k < a.train ? io::Split::kTrain
              : k < a.train + a.heldout ? io::Split::kHeldout
                                        : io::Split::kTest;
    io::write_wav(out / e.audio_path, u.audio);
    io::write_video(out / *e.video_path, u.video);
    entries.push_back(e);
  }
  io::write_manifest(out / "manifest.jsonl", entries);
  std::printf("wrote %zu utterances to %s\n", entries.size(), (out / "manifest.jsonl").c_str());
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

std::vector<int> parse_int_list(const std::string &s) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stoi(item));
  return out;
}

struct TrainArgs {
  std::string manifest, config, out;
  int jobs = 1;
};

int cmd_train(const TrainArgs &a) {
  const io::KeyValueConfig cfg = io::KeyValueConfig::load(a.config);
  const io::Manifest m = load_valid_manifest(a.manifest);

  train::TrainConfig tc;
  tc.seed = static_cast<uint64_t>(cfg.get_int("seed", 1));
  tc.steps = cfg.get_int("steps", 2000);
  tc.batch_size = static_cast<int>(cfg.get_int("batch_size", 8));
  tc.eval_every = cfg.get_int("eval_every", 200);
  tc.eval_beam = static_cast<int>(cfg.get_int("eval_beam", 4));
  tc.max_grad_norm = cfg.get_double("max_grad_norm", 5.0);
  tc.schedule.peak = cfg.get_double("lr.peak", 2e-3);
  tc.schedule.warmup_steps = cfg.get_int("lr.warmup_steps", 200);
  tc.schedule.hold_steps = cfg.get_int("lr.hold_steps", 800);
  tc.schedule.decay_half_life = cfg.get_double("lr.half_life", 500.0);
  tc.dropout.p_drop_audio = cfg.get_double("dropout.audio", 0.0);
  tc.dropout.p_drop_video = cfg.get_double("dropout.video", 0.0);
  tc.modalities = parse_modalities(cfg.get("modalities", "av"));
  const double ms = cfg.get_double("multistyle.probability", 0.0);
  if (ms > 0.0) {
    tc.multistyle = eval::MultistyleOptions{ms, cfg.get_double("multistyle.min_snr_db", 0.0),
                                            cfg.get_double("multistyle.max_snr_db", 20.0)};
  }
  tc.features.mode = parse_mode(cfg.get("features.mode", "variable"));
  tc.features.num_filters = static_cast<int>(cfg.get_int("features.filters", 20));

  std::vector<io::ManifestEntry> train_entries;
  for (const auto &e : m.entries) {
    if (e.split != io::Split::kTest) train_entries.push_back(e);
  }
  const Vocabulary vocab = Vocabulary::from_transcripts(train_entries);

  model::ModelConfig mc;
  mc.audio_dim = 5 * tc.features.num_filters;
  mc.video.input_size = static_cast<int>(cfg.get_int("model.video_size", 16));
  mc.video.channels = parse_int_list(cfg.get("model.video_channels", "8,16"));
  mc.video.groups = static_cast<int>(cfg.get_int("model.video_groups", 4));
  mc.encoder_layers = static_cast<int>(cfg.get_int("model.encoder_layers", 2));
  mc.encoder_units = static_cast<int>(cfg.get_int("model.encoder_units", 24));
  mc.decoder_layers = static_cast<int>(cfg.get_int("model.decoder_layers", 1));
  mc.decoder_units = static_cast<int>(cfg.get_int("model.decoder_units", 32));
  mc.decoder_projection = static_cast<int>(cfg.get_int("model.decoder_projection", 0));
  mc.joint_dim = static_cast<int>(cfg.get_int("model.joint_dim", 32));
  mc.vocab_size = static_cast<int>(vocab.tokens.size()) + 1;
  mc.validate();
  for (const auto &key : cfg.unused()) std::cerr << "warning: unknown config field '" << key << "'\n";

  const bool need_video = tc.modalities.video_on;
  std::vector<train::Example> tr(train_entries.size());
  std::vector<bool> is_train(train_entries.size());
  parallel_for(train_entries.size(), a.jobs, [&](size_t i) {
    const auto &e = train_entries[i];
    Media media = load_media(m, e, need_video);
    tr[i] = {e.utt_id, vocab.encode(e.transcript, e.utt_id),
             train::prepare_input(media.audio, media.video, tc.features), media.audio};
    is_train[i] = e.split == io::Split::kTrain;
  });
  std::vector<train::Example> train_set, heldout;
  for (size_t i = 0; i < tr.size(); ++i) (is_train[i] ? train_set : heldout).push_back(std::move(tr[i]));

  const fs::path out(a.out);
  fs::create_directories(out);
  std::map<std::string, std::string> meta{{"vocab", vocab.join()},
                                          {"features.mode", mode_name(tc.features.mode)},
                                          {"features.filters", std::to_string(tc.features.num_filters)},
                                          {"modalities", modality_name(tc.modalities)},
                                          {"seed", std::to_string(tc.seed)}};
  model::TransducerModel model{mc, model::init_weights(mc, tc.seed)};
  std::string metrics = io::csv_row({"step", "loss", "lr", "heldout_wer"});
  auto progress = [&](const train::MetricsRow &r) {
    char lr[32], loss[32];
    std::snprintf(lr, sizeof lr, "%.6g", r.lr);
    std::snprintf(loss, sizeof loss, "%.6f", r.loss);
    metrics += io::csv_row({std::to_string(r.step), loss, lr,
                            r.heldout_wer ? std::to_string(*r.heldout_wer) : ""});
    if (r.heldout_wer) {
      std::fprintf(stderr, "step %lld loss %.4f lr %.3g heldout WER %.2f\n",
                   static_cast<long long>(r.step), r.loss, r.lr, *r.heldout_wer);
    }
  };
  auto on_eval = [&](const train::MetricsRow &r, const model::TransducerModel &snapshot) {
    char name[64];
    std::snprintf(name, sizeof name, "step_%07lld.ckpt", static_cast<long long>(r.step));
    auto step_meta = meta;
    step_meta["step"] = std::to_string(r.step);
    if (r.heldout_wer) step_meta["heldout_wer"] = std::to_string(*r.heldout_wer);
    io::save_checkpoint(out / name, snapshot, step_meta);
  };
  const train::TrainResult result = train::train(model, train_set, heldout, tc, progress, on_eval);
  meta["step"] = std::to_string(result.best_step);
  meta["heldout_wer"] = std::to_string(result.best_wer);
  io::save_checkpoint(out / "best.ckpt", model, meta);
  io::write_file_atomic(out / "metrics.csv", metrics);
  std::printf("best checkpoint: step %lld, held-out WER %.2f -> %s\n",
              static_cast<long long>(result.best_step), result.best_wer,
              (out / "best.ckpt").c_str());
  return kExitOk;
}

// ---- decode ----------------------------------------------------------------

struct DecodeArgs {
  std::string manifest, checkpoint, out, modalities, split = "test";
  int beam = 4, nbest = 1, jobs = 1;
};

int cmd_decode(const DecodeArgs &a) {
  const io::Checkpoint ck = io::load_checkpoint(a.checkpoint);
  const io::Manifest m = load_valid_manifest(a.manifest);
  auto meta = [&](const std::string &k) {
    const auto it = ck.metadata.find(k);
    if (it == ck.metadata.end()) {
      throw Error(ErrorCode::kIncompatibleCheckpoint, "checkpoint metadata lacks " + k);
    }
    return it->second;
  };
  const Vocabulary vocab = Vocabulary::parse(meta("vocab"));
  if (static_cast<int>(vocab.tokens.size()) + 1 != ck.model.config.vocab_size) {
    throw Error(ErrorCode::kIncompatibleCheckpoint, "vocabulary does not match the model");
  }
  const train::FeatureOptions fo{parse_mode(meta("features.mode")),
                                 std::stoi(meta("features.filters")), true};
  const model::ModalitySwitch sw =
      parse_modalities(a.modalities.empty() ? meta("modalities") : a.modalities);
  if (a.beam < 1 || a.nbest < 1) throw Error(ErrorCode::kUsage, "--beam and --nbest must be >= 1");

  const auto idx = select_split(m, a.split);
  std::vector<std::string> lines(idx.size());
  std::atomic<int> failures{0};
  std::mutex err_mu;
  parallel_for(idx.size(), a.jobs, [&](size_t k) {
    const auto &e = m.entries[idx[k]];
    try {
      const Media media = load_media(m, e, sw.video_on);
      const auto in = train::prepare_input(media.audio, media.video, fo);
      std::string out;
      if (in.audio.rows() == 0) {
        out = e.utt_id + "\t1\t0\t\n";
      } else {
        const auto hyps = model::decode(in, sw, ck.model, {a.beam, 10});
        for (size_t r = 0; r < hyps.size() && static_cast<int>(r) < a.nbest; ++r) {
          char score[32];
          std::snprintf(score, sizeof score, "%.6f", hyps[r].log_score);
          out += e.utt_id + "\t" + std::to_string(r + 1) + "\t" + score + "\t" +
                 vocab.decode(hyps[r].labels) + "\n";
        }
      }
      lines[k] = out;
    } catch (const Error &err) {
      ++failures;
      std::lock_guard<std::mutex> lock(err_mu);
      std::cerr << "error: " << e.utt_id << ": " << err.what() << "\n";
    }
  });
  std::string all;
  for (const auto &l : lines) all += l;
  if (a.out.empty() || a.out == "-") {
    std::cout << all;
  } else {
    io::write_file_atomic(a.out, all);
  }
  if (!idx.empty() && failures == static_cast<int>(idx.size())) return kExitData;
  return kExitOk;
}

// ---- score -----------------------------------------------------------------

// Rank-1 hypotheses from "utt<TAB>rank<TAB>score<TAB>text" or "utt<TAB>text".
std::map<std::string, std::string> read_hypotheses(const std::string &path) {
  std::map<std::string, std::string> out;
  std::istringstream in(io::read_file(path));
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, '\t');) f.push_back(x);
    if (line.back() == '\t') f.push_back("");
    if (f.size() == 4) {
      if (f[1] == "1") out[f[0]] = f[3];
    } else if (f.size() == 2) {
      out[f[0]] = f[1];
    } else {
      throw Error(ErrorCode::kFormatError, path + ":" + std::to_string(lineno) + ": expected 2 or 4 tab-separated fields");
    }
  }
  return out;
}

struct ScoreArgs {
  std::string manifest, split = "test", csv;
  std::vector<std::string> hyps;  // condition:mode=path
  int resamples = 10000;
  uint64_t seed = 17;
  bool no_normalize = false;
};

int cmd_score(const ScoreArgs &a) {
  const io::Manifest m = io::read_manifest(a.manifest);
  io::validate_manifest(m, false);
  const auto idx = select_split(m, a.split);
  io::ScoreGrid grid;
  for (const std::string &spec : a.hyps) {
    const auto eq = spec.rfind('=');
    const auto colon = spec.rfind(':', eq);
    if (eq == std::string::npos || colon == std::string::npos) {
      throw Error(ErrorCode::kUsage, "--hyp expects condition:mode=path, got '" + spec + "'");
    }
    const std::string condition = spec.substr(0, colon);
    const std::string mode = spec.substr(colon + 1, eq - colon - 1);
    const auto hyp = read_hypotheses(spec.substr(eq + 1));
    std::vector<eval::WerReport> reports;
    std::vector<int64_t> errs, words;
    for (size_t i : idx) {
      const auto &e = m.entries[i];
      const auto it = hyp.find(e.utt_id);
      const auto r = eval::word_error_rate(eval::tokenize(e.transcript, !a.no_normalize),
                                           eval::tokenize(it == hyp.end() ? "" : it->second, !a.no_normalize));
      reports.push_back(r);
      errs.push_back(r.errors());
      words.push_back(r.num_ref_words);
    }
    eval::WerReport total = eval::aggregate(reports);
    if (reports.size() >= 2 && total.num_ref_words > 0) {
      total.ci_halfwidth_95 = eval::confidence_interval_95(
          errs, words, {eval::CiMethod::kBootstrap, a.resamples, a.seed});
    }
    if (std::find(grid.conditions.begin(), grid.conditions.end(), condition) == grid.conditions.end()) {
      grid.conditions.push_back(condition);
    }
    if (std::find(grid.modes.begin(), grid.modes.end(), mode) == grid.modes.end()) {
      grid.modes.push_back(mode);
    }
    grid.cells[{condition, mode}] = total;
  }
  std::cout << grid.to_text();
  if (!a.csv.empty()) io::write_file_atomic(a.csv, grid.to_csv());
  return kExitOk;
}

// ---- corrupt ---------------------------------------------------------------

struct CorruptArgs {
  std::string manifest, out, type = "babble", noise, position = "begin", split = "all";
  double snr = 0.0, duration = 2.0;
  uint64_t seed = 1;
  int jobs = 1;
};

int cmd_corrupt(const CorruptArgs &a) {
  const io::Manifest m = load_valid_manifest(a.manifest);
  if (a.type != "babble" && a.type != "overlap") {
    throw Error(ErrorCode::kUsage, "--type must be babble or overlap");
  }
  if (a.position != "begin" && a.position != "end") {
    throw Error(ErrorCode::kUsage, "--position must be begin or end");
  }
  const auto idx = select_split(m, a.split);
  const fs::path out(a.out);
  fs::create_directories(out / "media");
  std::optional<dsp::Waveform> noise;
  if (!a.noise.empty()) noise = io::read_wav(a.noise);

  std::vector<io::ManifestEntry> entries(idx.size());
  std::vector<std::string> records(idx.size());
  parallel_for(idx.size(), a.jobs, [&](size_t k) {
    const auto &e = m.entries[idx[k]];
    const dsp::Waveform speech = io::read_wav(m.resolve(e.audio_path));
    nlohmann::json rec;
    rec["utt_id"] = e.utt_id;
    rec["type"] = a.type;
    dsp::Waveform result;
    if (a.type == "babble") {
      const dsp::Waveform n =
          noise ? *noise
                : eval::synthetic_babble(static_cast<int64_t>(speech.samples.size()), mix_seed(a.seed, idx[k]),
                                         6, speech.sample_rate);
      const auto mix = eval::mix_at_snr(speech, n, a.snr);
      result = mix.audio;
      rec["snr_db"] = a.snr;
      rec["gain"] = mix.noise_gain;
      rec["clip_scale"] = mix.clip_scale;
    } else {
      // The competing talker is another utterance of the same manifest.
      const size_t other = idx[(k + 1 + mix_seed(a.seed, idx[k]) % std::max<size_t>(idx.size() - 1, 1)) % idx.size()];
      dsp::Waveform comp = io::read_wav(m.resolve(m.entries[other].audio_path));
      const auto need = static_cast<size_t>(std::llround(a.duration * comp.sample_rate));
      if (comp.samples.size() < need && !comp.samples.empty()) {
        const size_t n0 = comp.samples.size();
        for (size_t i = n0; i < need; ++i) comp.samples.push_back(comp.samples[i % n0]);
      }
      const auto ov = eval::splice_overlap(
          speech, comp,
          {a.position == "begin" ? eval::OverlapPosition::kBegin : eval::OverlapPosition::kEnd, a.duration});
      result = ov.audio;
      rec["position"] = a.position;
      rec["duration"] = a.duration;
      rec["competing_utt"] = m.entries[other].utt_id;
      rec["gain"] = ov.gain;
      rec["clip_scale"] = 1.0;
    }
    io::ManifestEntry ne = e;
    ne.audio_path = "media/" + e.utt_id + ".wav";
    if (e.video_path) {
      // Video is reused as is; point at it from the new manifest's directory.
      ne.video_path = fs::relative(fs::absolute(m.resolve(*e.video_path)), fs::absolute(out)).string();
    }
    io::write_wav(out / ne.audio_path, result);
    entries[k] = ne;
    records[k] = rec.dump() + "\n";
  });
  io::write_manifest(out / "manifest.jsonl", entries);
  std::string log;
  for (const auto &r : records) log += r;
  io::write_file_atomic(out / "corruption.jsonl", log);
  std::printf("wrote %zu corrupted utterances to %s\n", entries.size(), out.c_str());
  return kExitOk;
}

// ---- count-params ----------------------------------------------------------

int cmd_count_params(const std::string &config_path, bool diff) {
  model::ModelConfig c = model::ModelConfig::full_scale();
  if (!config_path.empty()) c = io::config_from_json(io::read_file(config_path));
  const auto table = model::count_parameters(c);
  std::cout << model::render_table(table, diff);
  if (diff) {
    for (const auto &row : model::compare_with_published(table)) {
      if (!row.matches) return kExitData;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Audio-visual RNN-T toolkit"};
  app.require_subcommand(1);

  FeaturizeArgs fa;
  auto *feat = app.add_subcommand("featurize", "Compute synchronized audio features for a manifest");
  feat->add_option("--manifest", fa.manifest)->required();
  feat->add_option("--out", fa.out, "Output directory for per-utterance containers")->required();
  feat->add_option("--mode", fa.mode, "variable or fixed")->capture_default_str();
  feat->add_option("--filters", fa.filters, "Mel filters")->capture_default_str();
  feat->add_option("--jobs", fa.jobs)->capture_default_str();

  MakeToyArgs ta;
  auto *toy_cmd = app.add_subcommand("make-toy", "Write a seeded synthetic audio-visual corpus");
  toy_cmd->add_option("--out", ta.out)->required();
  toy_cmd->add_option("--train", ta.train)->capture_default_str();
  toy_cmd->add_option("--heldout", ta.heldout)->capture_default_str();
  toy_cmd->add_option("--test", ta.test)->capture_default_str();
  toy_cmd->add_option("--seed", ta.seed)->capture_default_str();
  toy_cmd->add_option("--thumbnail", ta.thumbnail)->capture_default_str();
  toy_cmd->add_flag("--all-audible", ta.all_audible, "Give every symbol its own tone");

  TrainArgs tra;
  auto *train_cmd = app.add_subcommand("train", "Train a model; keeps the best held-out checkpoint");
  train_cmd->add_option("--manifest", tra.manifest)->required();
  train_cmd->add_option("--config", tra.config, "Key-value training config")->required();
  train_cmd->add_option("--out", tra.out, "Output directory")->required();
  train_cmd->add_option("--jobs", tra.jobs, "Threads for loading data")->capture_default_str();

  DecodeArgs da;
  auto *dec = app.add_subcommand("decode", "Beam-search decode a manifest split");
  dec->add_option("--manifest", da.manifest)->required();
  dec->add_option("--checkpoint", da.checkpoint)->required();
  dec->add_option("--out", da.out, "n-best TSV (default stdout)");
  dec->add_option("--modalities", da.modalities, "a, v or av (default: as trained)");
  dec->add_option("--split", da.split, "train, heldout, test or all")->capture_default_str();
  dec->add_option("--beam", da.beam)->capture_default_str();
  dec->add_option("--nbest", da.nbest)->capture_default_str();
  dec->add_option("--jobs", da.jobs)->capture_default_str();

  ScoreArgs sa;
  auto *score = app.add_subcommand("score", "WER with 95% confidence intervals as a condition x mode grid");
  score->add_option("--manifest", sa.manifest, "Reference transcripts")->required();
  score->add_option("--hyp", sa.hyps, "condition:mode=hyp.tsv (repeatable)")->required();
  score->add_option("--split", sa.split)->capture_default_str();
  score->add_option("--csv", sa.csv, "Also write the grid as CSV");
  score->add_option("--resamples", sa.resamples)->capture_default_str();
  score->add_option("--seed", sa.seed)->capture_default_str();
  score->add_flag("--no-normalize", sa.no_normalize, "Score raw whitespace tokens");

  CorruptArgs ca;
  auto *cor = app.add_subcommand("corrupt", "Add babble noise or overlapping speech");
  cor->add_option("--manifest", ca.manifest)->required();
  cor->add_option("--out", ca.out)->required();
  cor->add_option("--type", ca.type, "babble or overlap")->capture_default_str();
  cor->add_option("--snr", ca.snr, "Babble SNR in dB")->capture_default_str();
  cor->add_option("--noise", ca.noise, "Noise WAV (default: synthetic babble)");
  cor->add_option("--position", ca.position, "Overlap at begin or end")->capture_default_str();
  cor->add_option("--duration", ca.duration, "Overlap seconds")->capture_default_str();
  cor->add_option("--split", ca.split)->capture_default_str();
  cor->add_option("--seed", ca.seed)->capture_default_str();
  cor->add_option("--jobs", ca.jobs)->capture_default_str();

  std::string count_config;
  bool no_diff = false;
  auto *count = app.add_subcommand("count-params", "Parameter ledger compared with the published table");
  count->add_option("--config", count_config, "Model config JSON (default: full scale)");
  count->add_flag("--no-diff", no_diff);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*feat) return cmd_featurize(fa);
    if (*toy_cmd) return cmd_make_toy(ta);
    if (*train_cmd) return cmd_train(tra);
    if (*dec) return cmd_decode(da);
    if (*score) return cmd_score(sa);
    if (*cor) return cmd_corrupt(ca);
    if (*count) return cmd_count_params(count_config, !no_diff);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
