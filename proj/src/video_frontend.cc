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

#include "avrnnt/video_frontend.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "avrnnt/error.h"

namespace avrnnt::video {

std::vector<ConvBlockSpec> VideoFrontendConfig::blocks() const {
  std::vector<ConvBlockSpec> specs;
  int in = 3;
  for (int out : channels) {
    specs.push_back({in, out, groups});
    in = out;
  }
  return specs;
}

void VideoFrontendConfig::validate() const {
  if (channels.empty()) throw Error(ErrorCode::kConfigError, "video front end needs a block");
  int size = input_size;
  for (const ConvBlockSpec &b : blocks()) {
    if (b.groups < 1 || b.out_channels % b.groups != 0) {
      throw Error(ErrorCode::kConfigError, std::to_string(b.groups) + " groups do not divide " +
                                               std::to_string(b.out_channels) + " channels");
    }
    if (size < 2 || size % 2 != 0) {
      throw Error(ErrorCode::kConfigError,
                  "spatial size " + std::to_string(size) + " cannot be pooled 2x2");
    }
    size /= 2;
  }
}

Matrix group_norm(const Matrix &x, int groups, Matrix *inv_std) {
  const Eigen::Index per_group = x.cols() / groups;
  Matrix out(x.rows(), x.cols());
  if (inv_std) inv_std->resize(1, groups);
  for (int g = 0; g < groups; ++g) {
    auto block = x.middleCols(g * per_group, per_group);
    const double mean = block.mean();
    const double var = (block.array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + kGroupNormEpsilon);
    out.middleCols(g * per_group, per_group) = (block.array() - mean) * inv;
    if (inv_std) (*inv_std)(0, g) = inv;
  }
  return out;
}

namespace {

void check_block_input(const FeatureMaps &x, const ConvBlockSpec &spec) {
  if (spec.groups < 1 || spec.out_channels % spec.groups != 0) {
    throw Error(ErrorCode::kConfigError, "group count must divide out_channels");
  }
  if (x.num_frames() > 0 && x.channels() != spec.in_channels) {
    throw Error(ErrorCode::kConfigError, "block expects " + std::to_string(spec.in_channels) +
                                             " channels, got " + std::to_string(x.channels()));
  }
  if (x.height % 2 != 0 || x.width % 2 != 0) {
    throw Error(ErrorCode::kConfigError, "spatial dims must be even for 2x2 pooling");
  }
}

// Gathers the 3x3x3 neighbourhood of every output position of frame t.
// Time is padded by replicating the edge frames, space by zeros.
Matrix im2col(const FeatureMaps &x, int64_t t) {
  const int h = x.height, w = x.width;
  const int64_t c = x.channels();
  const int64_t last = x.num_frames() - 1;
  Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(h) * w, kKernelTaps * c);
  for (int kt = 0; kt < 3; ++kt) {
    const Matrix &src = x.frames[std::clamp<int64_t>(t + kt - 1, 0, last)];
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const int64_t col = ((kt * 3 + ky) * 3 + kx) * c;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int xx = 0; xx < w; ++xx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= w) continue;
            cols.block(y * w + xx, col, 1, c) = src.row(sy * w + sx);
          }
        }
      }
    }
  }
  return cols;
}

void col2im_add(const Matrix &dcols, int64_t t, FeatureMaps &dx) {
  const int h = dx.height, w = dx.width;
  const int64_t c = dx.channels();
  const int64_t last = dx.num_frames() - 1;
  for (int kt = 0; kt < 3; ++kt) {
    Matrix &dst = dx.frames[std::clamp<int64_t>(t + kt - 1, 0, last)];
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const int64_t col = ((kt * 3 + ky) * 3 + kx) * c;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int xx = 0; xx < w; ++xx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= w) continue;
            dst.row(sy * w + sx) += dcols.block(y * w + xx, col, 1, c);
          }
        }
      }
    }
  }
}

}  // namespace

FeatureMaps conv3d_block(const FeatureMaps &x, const ConvBlockSpec &spec,
                         const ConvBlockWeights &weights, BlockCache *cache) {
  check_block_input(x, spec);
  if (weights.kernel.rows() != kKernelTaps * spec.in_channels ||
      weights.kernel.cols() != spec.out_channels) {
    throw Error(ErrorCode::kConfigError, "kernel shape does not match block spec");
  }
  const int h = x.height, w = x.width;
  const int oh = h / 2, ow = w / 2;
  const int cout = spec.out_channels;
  FeatureMaps y{oh, ow, {}};
  y.frames.reserve(x.frames.size());
  if (cache) {
    *cache = BlockCache{};
    cache->in_height = h;
    cache->in_width = w;
  }
  for (int64_t t = 0; t < x.num_frames(); ++t) {
    Matrix cols = im2col(x, t);
    Matrix conv = cols * weights.kernel;
    conv.rowwise() += weights.bias.row(0);
    Matrix inv_std;
    Matrix normalized = group_norm(conv, spec.groups, &inv_std);
    Matrix activated = (normalized.array().rowwise() * weights.gn_gamma.row(0).array())
                           .rowwise() +
                       weights.gn_beta.row(0).array();

    Matrix pooled(static_cast<Eigen::Index>(oh) * ow, cout);
    std::vector<int> argmax(static_cast<size_t>(oh) * ow * cout);
    for (int py = 0; py < oh; ++py) {
      for (int px = 0; px < ow; ++px) {
        const int orow = py * ow + px;
        for (int ch = 0; ch < cout; ++ch) {
          int best = (2 * py) * w + 2 * px;
          double best_v = std::max(0.0, activated(best, ch));
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const int r = (2 * py + dy) * w + 2 * px + dx;
              const double v = std::max(0.0, activated(r, ch));
              if (v > best_v) {
                best_v = v;
                best = r;
              }
            }
          }
          pooled(orow, ch) = best_v;
          argmax[static_cast<size_t>(orow) * cout + ch] = best;
        }
      }
    }
    y.frames.push_back(std::move(pooled));
    if (cache) {
      cache->cols.push_back(std::move(cols));
      cache->normalized.push_back(std::move(normalized));
      cache->inv_std.push_back(std::move(inv_std));
      cache->activated.push_back(std::move(activated));
      cache->pool_argmax.push_back(std::move(argmax));
    }
  }
  return y;
}

FeatureMaps conv3d_block_backward(const FeatureMaps &grad_out, const ConvBlockSpec &spec,
                                  const ConvBlockWeights &weights, const BlockCache &cache,
                                  ConvBlockWeights &grads) {
  const int h = cache.in_height, w = cache.in_width;
  const int cin = spec.in_channels, cout = spec.out_channels;
  const int per_group = cout / spec.groups;
  const Eigen::Index area = static_cast<Eigen::Index>(h) * w;
  FeatureMaps dx{h, w, {}};
  for (int64_t t = 0; t < grad_out.num_frames(); ++t) dx.frames.push_back(Matrix::Zero(area, cin));

  for (int64_t t = 0; t < grad_out.num_frames(); ++t) {
    const Matrix &g = grad_out.frames[t];
    const Matrix &act = cache.activated[t];
    const std::vector<int> &argmax = cache.pool_argmax[t];
    Matrix dact = Matrix::Zero(area, cout);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      for (int ch = 0; ch < cout; ++ch) {
        const int src = argmax[static_cast<size_t>(r) * cout + ch];
        if (act(src, ch) > 0.0) dact(src, ch) += g(r, ch);
      }
    }
    const Matrix &norm = cache.normalized[t];
    grads.gn_gamma.row(0) += (dact.array() * norm.array()).colwise().sum().matrix();
    grads.gn_beta.row(0) += dact.colwise().sum();
    Matrix dnorm = dact.array().rowwise() * weights.gn_gamma.row(0).array();

    Matrix dconv(area, cout);
    for (int grp = 0; grp < spec.groups; ++grp) {
      auto dn = dnorm.middleCols(grp * per_group, per_group).array();
      auto n = norm.middleCols(grp * per_group, per_group).array();
      const double mean_dn = dn.mean();
      const double mean_dn_n = (dn * n).mean();
      dconv.middleCols(grp * per_group, per_group) =
          cache.inv_std[t](0, grp) * (dn - mean_dn - n * mean_dn_n);
    }
    grads.bias.row(0) += dconv.colwise().sum();
    grads.kernel.noalias() += cache.cols[t].transpose() * dconv;
    Matrix dcols = dconv * weights.kernel.transpose();
    col2im_add(dcols, t, dx);
  }
  return dx;
}

VideoEmbeddingSequence embed_clip(const VideoClip &clip, const VideoFrontendConfig &config,
                                  const std::vector<ConvBlockWeights> &weights,
                                  VideoCache *cache) {
  config.validate();
  const FeatureMaps &px = clip.pixels;
  if (px.num_frames() < 1) throw Error(ErrorCode::kEmptyInput, "video clip has no frames");
  if (px.height != config.input_size || px.width != config.input_size || px.channels() != 3) {
    throw Error(ErrorCode::kConfigError,
                "expected " + std::to_string(config.input_size) + "x" +
                    std::to_string(config.input_size) + "x3 thumbnails");
  }
  const auto specs = config.blocks();
  if (weights.size() != specs.size()) {
    throw Error(ErrorCode::kConfigError, "weights for " + std::to_string(weights.size()) +
                                             " blocks, config has " +
                                             std::to_string(specs.size()));
  }
  if (cache) {
    cache->blocks.assign(specs.size(), BlockCache{});
  }
  FeatureMaps x = px;
  for (size_t b = 0; b < specs.size(); ++b) {
    x = conv3d_block(x, specs[b], weights[b], cache ? &cache->blocks[b] : nullptr);
  }
  if (cache) {
    cache->final_height = x.height;
    cache->final_width = x.width;
  }
  VideoEmbeddingSequence out;
  out.fps = clip.fps;
  out.embeddings.resize(x.num_frames(), x.channels());
  for (int64_t t = 0; t < x.num_frames(); ++t) out.embeddings.row(t) = x.frames[t].colwise().mean();
  return out;
}

void embed_clip_backward(const Matrix &grad_embeddings, const VideoFrontendConfig &config,
                         const std::vector<ConvBlockWeights> &weights, const VideoCache &cache,
                         std::vector<ConvBlockWeights> &grads) {
  const auto specs = config.blocks();
  const Eigen::Index area = static_cast<Eigen::Index>(cache.final_height) * cache.final_width;
  FeatureMaps g{cache.final_height, cache.final_width, {}};
  for (Eigen::Index t = 0; t < grad_embeddings.rows(); ++t) {
    g.frames.push_back(grad_embeddings.row(t).replicate(area, 1) / static_cast<double>(area));
  }
  for (size_t b = specs.size(); b-- > 0;) {
    g = conv3d_block_backward(g, specs[b], weights[b], cache.blocks[b], grads[b]);
  }
}

LandmarkTrack smooth_landmarks(const LandmarkTrack &track, double sigma_seconds,
                               const Rational &fps) {
  if (!(sigma_seconds > 0.0)) throw Error(ErrorCode::kConfigError, "sigma must be positive");
  const double sigma = sigma_seconds * fps.value();
  const Eigen::Index frames = track.coords.rows();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * (k / sigma) * (k / sigma));
  }
  LandmarkTrack out = track;
  for (Eigen::Index t = 0; t < frames; ++t) {
    RowVector acc = RowVector::Zero(track.coords.cols());
    double mass = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      const Eigen::Index s = t + k;
      if (s < 0 || s >= frames) continue;
      acc += kernel[k + radius] * track.coords.row(s);
      mass += kernel[k + radius];
    }
    out.coords.row(t) = acc / mass;
  }
  return out;
}

VideoClip clip_from_u8(const std::vector<uint8_t> &pixels, int64_t frames, int height, int width,
                       Rational fps) {
  const size_t per_frame = static_cast<size_t>(height) * width * 3;
  if (pixels.size() != per_frame * static_cast<size_t>(frames)) {
    throw Error(ErrorCode::kShapeError, "pixel buffer does not match T x H x W x 3");
  }
  VideoClip clip;
  clip.fps = fps;
  clip.pixels.height = height;
  clip.pixels.width = width;
  for (int64_t t = 0; t < frames; ++t) {
    Matrix f(static_cast<Eigen::Index>(height) * width, 3);
    const uint8_t *p = pixels.data() + per_frame * t;
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = p[i] / 255.0;
    clip.pixels.frames.push_back(std::move(f));
  }
  return clip;
}

}  // namespace avrnnt::video
