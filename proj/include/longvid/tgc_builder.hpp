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
// Grounded-caption instruction data pipeline, four stages:
//   1. duration filter   - drop spans that are too short or too long
//   2. title summary     - condense each caption into a brief scene title
//   3. similarity dedup  - drop near-duplicate segments within one video
//   4. review sample     - seeded sample of the survivors for manual QA
// Titles and embeddings come from pluggable interfaces; the shipped
// fallbacks are rule-based so the pipeline runs fully offline.

#ifndef LONGVID_TGC_BUILDER_HPP_
#define LONGVID_TGC_BUILDER_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "longvid/grounding_eval.hpp"
#include "longvid/tensor.hpp"

namespace longvid {

struct SourceRecord {
  std::string video_id;
  TimeSpan span;
  std::string detailed_caption;
  double video_duration_s = 0.0;

  void validate() const;
};

struct TgcRecord {
  std::string video_id;
  TimeSpan span;
  std::string scene_title;
  std::string detailed_caption;
};

struct TgcPipelineConfig {
  double min_span_s = 5.0;
  double max_span_s = 120.0;
  std::size_t title_max_tokens = 8;
  double sim_threshold = 0.85;
  std::size_t review_sample_n = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

class Summarizer {
 public:
  virtual ~Summarizer() = default;
  virtual std::string summarize(const std::string& caption, std::size_t max_tokens) const = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// Must return a unit-norm vector, deterministic per text.
  virtual std::vector<double> embed(const std::string& text) const = 0;
};

/// Rule-based fallback: the first clause of the caption, truncated to the
/// token budget; when the clause is shorter, stop-word-stripped keywords
/// from the rest of the caption are appended until the budget is spent.
class FirstClauseSummarizer : public Summarizer {
 public:
  std::string summarize(const std::string& caption, std::size_t max_tokens) const override;
};

/// Hashed bag-of-words embedding, L2-normalized, fixed dimension.
class BagOfWordsEmbedder : public Embedder {
 public:
  explicit BagOfWordsEmbedder(std::size_t dim = 256) : dim_(dim) {}
  std::vector<double> embed(const std::string& text) const override;

 private:
  std::size_t dim_;
};

struct RejectedRecord {
  SourceRecord record;
  std::string reason;
};

struct QuarantinedRecord {
  SourceRecord record;
  std::string error;
};

struct StageReport {
  std::string stage;
  std::size_t input_count = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> rejection_reasons;
};

/// Stage 1. Keeps records with min_span_s <= span length <= max_span_s
/// (closed on both ends).
void filter_by_duration(const std::vector<SourceRecord>& records, const TgcPipelineConfig& config,
                        std::vector<SourceRecord>& kept, std::vector<RejectedRecord>& rejected);

/// Stage 2. Summarizer failures quarantine the record instead of dropping it.
std::string summarize_title(const SourceRecord& record, const Summarizer& summarizer,
                            const TgcPipelineConfig& config);

/// Stage 3a. Cosine similarity of title-plus-caption embeddings between
/// all segments of one video; diagonal fixed at 1.
Tensor2D cross_segment_similarity(const std::vector<TgcRecord>& records, const Embedder& embedder);

/// Stage 3b. Greedy sweep in the given (temporal) order; a record stays
/// only if its similarity to every previously kept record is below the
/// threshold (strict).
std::vector<TgcRecord> dedup_segments(const std::vector<TgcRecord>& records,
                                      const Tensor2D& similarity, double sim_threshold);

/// Stage 4. Seeded uniform sample without replacement, n >= corpus keeps
/// everything. Order of the sample follows corpus order.
std::vector<TgcRecord> sample_for_review(const std::vector<TgcRecord>& records,
                                         const TgcPipelineConfig& config);

struct InstructionRecord {
  std::string video_id;
  TimeSpan span;
  std::string query;
  std::string answer;
};

/// Instantiates the instruction template; timestamps render with one
/// decimal place and the answer always re-parses to the span.
InstructionRecord emit_tgc(const TgcRecord& record);
std::string instruction_to_jsonl(const InstructionRecord& record);

struct TgcPipelineResult {
  std::vector<TgcRecord> records;
  std::vector<InstructionRecord> instructions;
  std::vector<TgcRecord> review_sample;
  std::vector<StageReport> stages;
  std::vector<QuarantinedRecord> quarantine;
};

/// Runs all four stages. Deterministic for fixed (input, config, seed).
TgcPipelineResult run_tgc_pipeline(const std::vector<SourceRecord>& input,
                                   const TgcPipelineConfig& config, const Summarizer& summarizer,
                                   const Embedder& embedder);

std::vector<SourceRecord> read_source_records(std::istream& in);

/// Whitespace tokens of `text` (used for title budgets).
std::size_t token_count(const std::string& text);

}  // namespace longvid

#endif  // LONGVID_TGC_BUILDER_HPP_
