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

// 3-D convolutional mouth-thumbnail encoder: conv(3x3x3) -> group norm
// (per frame, over space and the channels of each group) -> ReLU -> 2x2
// spatial max pool, repeated per block, then a spatial average pool. The
// temporal axis is never pooled or strided, so there is one embedding per
// input frame.

#ifndef AVRNNT_VIDEO_FRONTEND_H_
#define AVRNNT_VIDEO_FRONTEND_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "avrnnt/types.h"

namespace avrnnt::video {

inline constexpr int kThumbnailSize = 128;
inline constexpr int kKernelTaps = 27;  // 3 x 3 x 3
inline constexpr double kGroupNormEpsilon = 1e-6;

// A sequence of C-channel H x W maps; each frame is (H*W) x C with
// row index y*W + x.
struct FeatureMaps {
  int height = 0;
  int width = 0;
  std::vector<Matrix> frames;

  int64_t num_frames() const { return static_cast<int64_t>(frames.size()); }
  int64_t channels() const { return frames.empty() ? 0 : frames.front().cols(); }
};

struct LandmarkTrack {
  int num_points = 0;
  Matrix coords;  // T x (num_points * 2), (x, y) interleaved
};

struct VideoClip {
  FeatureMaps pixels;  // RGB in [0, 1]
  Rational fps{30, 1};
  std::optional<LandmarkTrack> landmarks;
};

struct ConvBlockSpec {
  int in_channels = 3;
  int out_channels = 64;
  int groups = 32;
};

struct VideoFrontendConfig {
  int input_size = kThumbnailSize;
  std::vector<int> channels{64, 128, 256, 512, 512};
  int groups = 32;

  std::vector<ConvBlockSpec> blocks() const;
  int embedding_dim() const { return channels.empty() ? 3 : channels.back(); }
  // Throws ConfigError unless every group count divides its channels and the
  // spatial size halves cleanly through every block.
  void validate() const;
};

struct ConvBlockWeights {
  Matrix kernel;    // (27 * in) x out, row ((kt*3 + ky)*3 + kx) * in + c
  Matrix bias;      // 1 x out
  Matrix gn_gamma;  // 1 x out
  Matrix gn_beta;   // 1 x out
};

struct BlockCache {
  int in_height = 0, in_width = 0;
  std::vector<Matrix> cols;        // per frame im2col, (H*W) x (27 * in)
  std::vector<Matrix> normalized;  // per frame pre-affine group-norm output
  std::vector<Matrix> inv_std;     // per frame 1 x groups
  std::vector<Matrix> activated;   // per frame post-affine, pre-ReLU
  std::vector<std::vector<int>> pool_argmax;
};

struct VideoCache {
  std::vector<BlockCache> blocks;
  int final_height = 0, final_width = 0;
};

// Per-frame group normalization before the affine step; inv_std receives
// 1 / sqrt(var + eps) for each group.
Matrix group_norm(const Matrix &x, int groups, Matrix *inv_std = nullptr);

FeatureMaps conv3d_block(const FeatureMaps &x, const ConvBlockSpec &spec,
                         const ConvBlockWeights &weights, BlockCache *cache = nullptr);

// Returns d loss / d input and accumulates weight gradients into grads.
FeatureMaps conv3d_block_backward(const FeatureMaps &grad_out, const ConvBlockSpec &spec,
                                  const ConvBlockWeights &weights, const BlockCache &cache,
                                  ConvBlockWeights &grads);

struct VideoEmbeddingSequence {
  Matrix embeddings;  // T x embedding_dim
  Rational fps{30, 1};
};

VideoEmbeddingSequence embed_clip(const VideoClip &clip, const VideoFrontendConfig &config,
                                  const std::vector<ConvBlockWeights> &weights,
                                  VideoCache *cache = nullptr);

void embed_clip_backward(const Matrix &grad_embeddings, const VideoFrontendConfig &config,
                         const std::vector<ConvBlockWeights> &weights, const VideoCache &cache,
                         std::vector<ConvBlockWeights> &grads);

// Gaussian smoothing along time; the kernel is truncated at 3 sigma and
// renormalized where it runs off either end of the track.
LandmarkTrack smooth_landmarks(const LandmarkTrack &track, double sigma_seconds,
                               const Rational &fps);

// Converts T x H x W x 3 uint8 pixels (row-major) into a clip in [0, 1].
VideoClip clip_from_u8(const std::vector<uint8_t> &pixels, int64_t frames, int height,
                       int width, Rational fps);

}  // namespace avrnnt::video

#endif  // AVRNNT_VIDEO_FRONTEND_H_
