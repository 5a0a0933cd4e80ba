// Copyright 2026 The longvid Authors
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
//
// Frame sampling and clip assembly. Clips are encoded behind the
// ClipEncoder interface; the shipped encoder is a deterministic mock so
// the whole stack runs without any pretrained backbone or video decoding.

#ifndef LONGVID_VIDEO_PIPELINE_HPP_
#define LONGVID_VIDEO_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "longvid/tensor.hpp"

namespace longvid {

struct SamplingPlan {
  std::size_t total_frames = 0;  // frames available in the source video
  std::size_t k = 16;            // clips
  std::size_t t = 8;             // frames per clip
  std::size_t n = 96;            // tokens per clip

  void validate() const;
};

/// Bin-center uniform sampling: index_i = floor((i + 0.5) * total / (k*t)).
/// Indices are nondecreasing and may repeat when the video is shorter than
/// k*t frames.
std::vector<std::size_t> uniform_sample(const SamplingPlan& plan);

/// Chronological split into k clips of t indices each.
std::vector<std::vector<std::size_t>> segment(const std::vector<std::size_t>& indices,
                                              std::size_t k, std::size_t t);

/// Vertical concatenation of k token matrices (each n x c_q) in clip order.
Tensor2D assemble(const std::vector<Tensor2D>& clips);

class ClipEncoder {
 public:
  virtual ~ClipEncoder() = default;
  virtual Tensor2D encode(std::span<const std::size_t> clip_frames) const = 0;
};

/// Deterministic stand-in for the video encoder + connector: features are
/// pseudo-random doubles in [-1, 1) keyed by (seed, frame index list).
class MockClipEncoder : public ClipEncoder {
 public:
  MockClipEncoder(std::uint64_t seed, std::size_t tokens_per_clip, std::size_t channels)
      : seed_(seed), n_(tokens_per_clip), c_q_(channels) {}

  Tensor2D encode(std::span<const std::size_t> clip_frames) const override;

 private:
  std::uint64_t seed_;
  std::size_t n_;
  std::size_t c_q_;
};

/// One line of the frame-count manifest.
struct ManifestEntry {
  std::string video_id;
  std::size_t total_frames = 0;
  double duration_s = 0.0;
};

/// Reads a JSONL manifest ({video_id, total_frames, duration_s} per line).
/// Parse failures report the 1-based line number.
std::vector<ManifestEntry> read_manifest(std::istream& in);
std::vector<ManifestEntry> read_manifest_file(const std::string& path);

}  // namespace longvid

#endif  // LONGVID_VIDEO_PIPELINE_HPP_
