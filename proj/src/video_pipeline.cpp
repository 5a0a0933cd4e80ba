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

#include "longvid/video_pipeline.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "longvid/rng.hpp"

namespace longvid {

using nlohmann::json;

void SamplingPlan::validate() const {
  if (total_frames == 0) throw std::invalid_argument("sampling: video has zero frames");
  if (k < 1 || t < 1 || n < 1) throw std::invalid_argument("sampling: k, t, n must be >= 1");
}

std::vector<std::size_t> uniform_sample(const SamplingPlan& plan) {
  plan.validate();
  const std::size_t count = plan.k * plan.t;
  std::vector<std::size_t> indices(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pos = (static_cast<double>(i) + 0.5) * static_cast<double>(plan.total_frames) /
                       static_cast<double>(count);
    std::size_t idx = static_cast<std::size_t>(pos);
    if (idx >= plan.total_frames) idx = plan.total_frames - 1;
    indices[i] = idx;
  }
  return indices;
}

std::vector<std::vector<std::size_t>> segment(const std::vector<std::size_t>& indices,
                                              std::size_t k, std::size_t t) {
  if (indices.size() != k * t)
    throw std::invalid_argument("segment: expected " + std::to_string(k * t) + " indices, got " +
                                std::to_string(indices.size()));
  std::vector<std::vector<std::size_t>> clips(k);
  for (std::size_t j = 0; j < k; ++j)
    clips[j].assign(indices.begin() + static_cast<std::ptrdiff_t>(j * t),
                    indices.begin() + static_cast<std::ptrdiff_t>((j + 1) * t));
  return clips;
}

Tensor2D assemble(const std::vector<Tensor2D>& clips) {
  if (clips.empty()) throw std::invalid_argument("assemble: no clips");
  const std::size_t n = clips.front().rows();
  const std::size_t c = clips.front().cols();
  for (const Tensor2D& clip : clips)
    if (clip.rows() != n || clip.cols() != c)
      throw std::invalid_argument("assemble: ragged clip shapes (" + clip.shape_str() + " vs " +
                                  clips.front().shape_str() + ")");
  Tensor2D out(n * clips.size(), c);
  for (std::size_t j = 0; j < clips.size(); ++j)
    std::memcpy(out.data() + j * n * c, clips[j].data(), n * c * sizeof(double));
  return out;
}

Tensor2D MockClipEncoder::encode(std::span<const std::size_t> clip_frames) const {
  std::uint64_t key = hash_combine(seed_, 0x6d6f636b656e63ULL);
  key = hash_combine(key, clip_frames.size());
  for (std::size_t f : clip_frames) key = hash_combine(key, f);
  SplitMix64 rng(key);
  Tensor2D out(n_, c_q_);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = rng.next_symmetric(1.0);
  return out;
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
      ManifestEntry e;
      e.video_id = record.at("video_id").get<std::string>();
      e.total_frames = record.at("total_frames").get<std::size_t>();
      e.duration_s = record.at("duration_s").get<double>();
      entries.push_back(std::move(e));
    } catch (const json::exception& err) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return entries;
}

std::vector<ManifestEntry> read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  return read_manifest(in);
}

}  // namespace longvid
