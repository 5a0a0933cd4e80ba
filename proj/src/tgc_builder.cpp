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

#include "longvid/tgc_builder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "longvid/rng.hpp"

namespace longvid {

using nlohmann::json;

void SourceRecord::validate() const {
  span.validate();
  if (detailed_caption.empty()) throw std::invalid_argument("source record: empty caption");
  if (span.end_s > video_duration_s)
    throw std::invalid_argument("source record: span [" + std::to_string(span.start_s) + ", " +
                                std::to_string(span.end_s) + "] exceeds video duration " +
                                std::to_string(video_duration_s));
}

void TgcPipelineConfig::validate() const {
  if (!(min_span_s > 0.0) || !(min_span_s < max_span_s))
    throw std::invalid_argument("tgc config: need 0 < min_span_s < max_span_s");
  if (!(sim_threshold > 0.0) || sim_threshold > 1.0)
    throw std::invalid_argument("tgc config: sim_threshold must be in (0, 1]");
  if (title_max_tokens == 0) throw std::invalid_argument("tgc config: title_max_tokens must be >= 1");
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

std::string normalize_token(const std::string& token) {
  std::size_t begin = 0, end = token.size();
  while (begin < end && std::ispunct(static_cast<unsigned char>(token[begin]))) ++begin;
  while (end > begin && std::ispunct(static_cast<unsigned char>(token[end - 1]))) --end;
  std::string out = token.substr(begin, end - begin);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_stop_word(const std::string& normalized) {
  static const std::unordered_set<std::string> kStopWords = {
      "a",    "an",   "and",  "are",  "as",   "at",    "be",    "by",   "for", "from",
      "he",   "her",  "his",  "in",   "is",   "it",    "its",   "of",   "on",  "or",
      "she",  "that", "the",  "their", "then", "there", "they",  "this", "to",  "was",
      "were", "while", "with", "who",  "which"};
  return kStopWords.count(normalized) > 0;
}

}  // namespace

std::size_t token_count(const std::string& text) { return tokenize(text).size(); }

std::string FirstClauseSummarizer::summarize(const std::string& caption,
                                             std::size_t max_tokens) const {
  const std::size_t clause_end = caption.find_first_of(",;:.!?");
  const std::string clause =
      clause_end == std::string::npos ? caption : caption.substr(0, clause_end);

  std::vector<std::string> title_tokens = tokenize(clause);
  if (title_tokens.size() > max_tokens) title_tokens.resize(max_tokens);

  if (title_tokens.size() < max_tokens && clause_end != std::string::npos) {
    std::unordered_set<std::string> present;
    for (const std::string& t : title_tokens) present.insert(normalize_token(t));
    for (const std::string& t : tokenize(caption.substr(clause_end + 1))) {
      if (title_tokens.size() >= max_tokens) break;
      const std::string norm = normalize_token(t);
      if (norm.empty() || is_stop_word(norm) || present.count(norm)) continue;
      title_tokens.push_back(norm);
      present.insert(norm);
    }
  }

  std::string title;
  for (std::size_t i = 0; i < title_tokens.size(); ++i) {
    if (i) title += ' ';
    title += title_tokens[i];
  }
  return title;
}

std::string summarize_title(const SourceRecord& record, const Summarizer& summarizer,
                            const TgcPipelineConfig& config) {
  if (record.detailed_caption.empty())
    throw std::invalid_argument("summarize_title: empty caption");
  const std::string title = summarizer.summarize(record.detailed_caption, config.title_max_tokens);
  if (title.empty()) throw std::runtime_error("summarizer returned an empty title");
  if (token_count(title) > config.title_max_tokens)
    throw std::runtime_error("summarizer exceeded the token budget");
  if (token_count(title) > token_count(record.detailed_caption))
    throw std::runtime_error("summarizer produced a title longer than the caption");
  return title;
}

std::vector<double> BagOfWordsEmbedder::embed(const std::string& text) const {
  std::vector<double> v(dim_, 0.0);
  for (const std::string& token : tokenize(text)) {
    const std::string norm = normalize_token(token);
    if (norm.empty()) continue;
    // FNV-1a 64
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : norm) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    v[h % dim_] += 1.0;
  }
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  if (norm_sq == 0.0) {
    v[0] = 1.0;  // unit-norm convention for token-free text
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

void filter_by_duration(const std::vector<SourceRecord>& records, const TgcPipelineConfig& config,
                        std::vector<SourceRecord>& kept, std::vector<RejectedRecord>& rejected) {
  config.validate();
  for (const SourceRecord& rec : records) {
    rec.validate();
    const double len = rec.span.length();
    if (len < config.min_span_s)
      rejected.push_back({rec, "too_short"});
    else if (len > config.max_span_s)
      rejected.push_back({rec, "too_long"});
    else
      kept.push_back(rec);
  }
}

Tensor2D cross_segment_similarity(const std::vector<TgcRecord>& records, const Embedder& embedder) {
  if (records.empty()) throw std::invalid_argument("cross_segment_similarity: no records");
  std::vector<std::vector<double>> embeddings;
  embeddings.reserve(records.size());
  for (const TgcRecord& rec : records)
    embeddings.push_back(embedder.embed(rec.scene_title + " " + rec.detailed_caption));

  Tensor2D sim(records.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    sim(i, i) = 1.0;
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      if (embeddings[i].size() != embeddings[j].size())
        throw std::invalid_argument("embedder returned inconsistent dimensions");
      double dot = 0.0;
      for (std::size_t d = 0; d < embeddings[i].size(); ++d) dot += embeddings[i][d] * embeddings[j][d];
      dot = std::clamp(dot, -1.0, 1.0);
      sim(i, j) = dot;
      sim(j, i) = dot;
    }
  }
  return sim;
}

std::vector<TgcRecord> dedup_segments(const std::vector<TgcRecord>& records,
                                      const Tensor2D& similarity, double sim_threshold) {
  if (similarity.rows() != records.size() || similarity.cols() != records.size())
    throw std::invalid_argument("dedup_segments: similarity matrix does not match record count");
  std::vector<TgcRecord> kept;
  std::vector<std::size_t> kept_idx;
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool duplicate = false;
    for (std::size_t j : kept_idx) {
      if (similarity(i, j) >= sim_threshold) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      kept.push_back(records[i]);
      kept_idx.push_back(i);
    }
  }
  return kept;
}

std::vector<TgcRecord> sample_for_review(const std::vector<TgcRecord>& records,
                                         const TgcPipelineConfig& config) {
  if (config.review_sample_n >= records.size()) return records;
  // Partial Fisher-Yates over the index set, then restore corpus order.
  std::vector<std::size_t> idx(records.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SplitMix64 rng(hash_combine(config.seed, 0x726576696577ULL));
  for (std::size_t i = 0; i < config.review_sample_n; ++i)
    std::swap(idx[i], idx[i + rng.next_index(idx.size() - i)]);
  idx.resize(config.review_sample_n);
  std::sort(idx.begin(), idx.end());
  std::vector<TgcRecord> sample;
  sample.reserve(idx.size());
  for (std::size_t i : idx) sample.push_back(records[i]);
  return sample;
}

namespace {

std::string render_1dp(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", seconds);
  return buf;
}

}  // namespace

InstructionRecord emit_tgc(const TgcRecord& record) {
  InstructionRecord out;
  out.video_id = record.video_id;
  out.span = record.span;
  out.query = "When does the scene '" + record.scene_title +
              "' occur in the video? Describe it in detail.";
  out.answer = "From " + render_1dp(record.span.start_s) + " to " + render_1dp(record.span.end_s) +
               " seconds, " + record.detailed_caption;
  return out;
}

std::string instruction_to_jsonl(const InstructionRecord& record) {
  json j;
  j["video_id"] = record.video_id;
  j["start"] = record.span.start_s;
  j["end"] = record.span.end_s;
  j["query"] = record.query;
  j["answer"] = record.answer;
  return j.dump();
}

TgcPipelineResult run_tgc_pipeline(const std::vector<SourceRecord>& input,
                                   const TgcPipelineConfig& config, const Summarizer& summarizer,
                                   const Embedder& embedder) {
  config.validate();
  TgcPipelineResult result;

  // Stage 1: duration filter.
  std::vector<SourceRecord> surviving;
  std::vector<RejectedRecord> rejected;
  filter_by_duration(input, config, surviving, rejected);
  StageReport s1{"duration_filter", input.size(), surviving.size(), {}};
  for (const RejectedRecord& r : rejected) ++s1.rejection_reasons[r.reason];
  result.stages.push_back(std::move(s1));

  // Stage 2: scene titles. Failures quarantine the record.
  std::vector<TgcRecord> titled;
  for (const SourceRecord& rec : surviving) {
    try {
      TgcRecord t;
      t.video_id = rec.video_id;
      t.span = rec.span;
      t.detailed_caption = rec.detailed_caption;
      t.scene_title = summarize_title(rec, summarizer, config);
      titled.push_back(std::move(t));
    } catch (const std::exception& err) {
      result.quarantine.push_back({rec, err.what()});
    }
  }
  StageReport s2{"title_summary", surviving.size(), titled.size(), {}};
  if (!result.quarantine.empty()) s2.rejection_reasons["quarantined"] = result.quarantine.size();
  result.stages.push_back(std::move(s2));

  // Stage 3: within-video similarity dedup. Videos are processed in order
  // of first appearance; records within a video in temporal order.
  std::vector<std::string> video_order;
  std::map<std::string, std::vector<TgcRecord>> by_video;
  for (const TgcRecord& rec : titled) {
    if (!by_video.count(rec.video_id)) video_order.push_back(rec.video_id);
    by_video[rec.video_id].push_back(rec);
  }
  std::size_t deduped_total = 0;
  for (const std::string& vid : video_order) {
    std::vector<TgcRecord>& group = by_video[vid];
    std::stable_sort(group.begin(), group.end(), [](const TgcRecord& a, const TgcRecord& b) {
      if (a.span.start_s != b.span.start_s) return a.span.start_s < b.span.start_s;
      return a.span.end_s < b.span.end_s;
    });
    const Tensor2D sim = cross_segment_similarity(group, embedder);
    std::vector<TgcRecord> kept = dedup_segments(group, sim, config.sim_threshold);
    deduped_total += group.size() - kept.size();
    for (TgcRecord& rec : kept) result.records.push_back(std::move(rec));
  }
  StageReport s3{"similarity_dedup", titled.size(), result.records.size(), {}};
  if (deduped_total) s3.rejection_reasons["near_duplicate"] = deduped_total;
  result.stages.push_back(std::move(s3));

  // Stage 4: review sample (does not filter the corpus).
  result.review_sample = sample_for_review(result.records, config);
  result.stages.push_back(
      {"review_sample", result.records.size(), result.review_sample.size(), {}});

  result.instructions.reserve(result.records.size());
  for (const TgcRecord& rec : result.records) result.instructions.push_back(emit_tgc(rec));
  return result;
}

std::vector<SourceRecord> read_source_records(std::istream& in) {
  std::vector<SourceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json r = json::parse(line);
      SourceRecord rec;
      rec.video_id = r.at("video_id").get<std::string>();
      rec.span = {r.at("start").get<double>(), r.at("end").get<double>()};
      rec.detailed_caption = r.at("caption").get<std::string>();
      rec.video_duration_s = r.at("video_duration_s").get<double>();
      rec.validate();
      records.push_back(std::move(rec));
    } catch (const std::exception& err) {
      throw std::runtime_error("source line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return records;
}

}  // namespace longvid
