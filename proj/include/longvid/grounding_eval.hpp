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
// Temporal grounding and highlight metrics: free-text timestamp parsing,
// interval IoU, recall@1 at IoU thresholds, per-query average precision /
// mAP / HIT@1 over clip saliency rankings, and the similarity-to-saliency
// discretization used to build highlight ground truth.

#ifndef LONGVID_GROUNDING_EVAL_HPP_
#define LONGVID_GROUNDING_EVAL_HPP_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace longvid {

struct TimeSpan {
  double start_s = 0.0;
  double end_s = 0.0;

  double length() const { return end_s - start_s; }
  void validate() const;
  bool operator==(const TimeSpan&) const = default;
};

/// Standard temporal intersection-over-union. Zero-length conventions:
/// identical point spans give 1, otherwise a zero-length union gives 0.
double iou(const TimeSpan& a, const TimeSpan& b);

struct ParsedSpan {
  TimeSpan span;
  bool swapped = false;  // set when the text had end before start
};

/// Extracts a timespan from free text. Patterns are tried in a fixed
/// priority order, case-insensitively:
///   1. "from X to Y seconds"
///   2. "X - Y seconds"
///   3. "X to Y"
///   4. "start: X, end: Y"
///   5. "X, Y"
/// The first pattern with a match anywhere in the text wins (earliest
/// occurrence). Returns nullopt when nothing matches; callers score such
/// responses as IoU 0.
std::optional<ParsedSpan> parse_timespan(const std::string& text);

struct GroundingItem {
  std::string id;
  std::string video_id;
  std::string query;
  TimeSpan gt;
  std::optional<TimeSpan> pred;  // pre-parsed prediction, if present
  std::string response_text;     // raw model response otherwise
};

/// Fraction of items whose top-1 prediction reaches each IoU threshold.
/// Unparseable or missing responses count as failures, never dropped.
std::map<double, double> recall_at_1(const std::vector<GroundingItem>& items,
                                     const std::vector<double>& thresholds);

struct HighlightItem {
  std::string id;
  double clip_duration_s = 0.0;
  std::vector<double> pred_scores;
  std::vector<double> gt_saliency;  // levels on the {1.0, 1.5, ..., 5.0} grid

  void validate() const;
};

/// Ranking AP for one query: clips sorted by predicted score descending
/// (ties broken by clip index ascending), positives are clips with
/// gt_saliency >= positive_level, AP is the mean of precision-at-rank
/// over positive ranks. nullopt when the item has no positive clip.
std::optional<double> highlight_average_precision(const HighlightItem& item,
                                                  double positive_level);

/// Mean AP over evaluable items; throws std::invalid_argument when none is.
double highlight_map(const std::vector<HighlightItem>& items, double positive_level);

/// Fraction of evaluable items whose top-scored clip is a positive.
double hit_at_1(const std::vector<HighlightItem>& items, double positive_level);

/// Maps a [0,1] similarity onto the 9-level saliency grid:
/// 1 + 0.5 * round(8 * clamp(sim, 0, 1)), round half to even.
double saliency_discretize(double similarity);

struct EvalReport {
  std::optional<double> r1_03, r1_05, r1_07;
  std::optional<double> map, hit1;
  std::size_t n_items = 0;
  std::size_t n_unparsed = 0;

  std::string to_json() const;
  std::string to_table() const;
};

EvalReport evaluate_grounding(const std::vector<GroundingItem>& items,
                              const std::vector<double>& thresholds);
EvalReport evaluate_highlight(const std::vector<HighlightItem>& items, double positive_level);

// JSONL readers; format errors carry the 1-based line number.
std::vector<GroundingItem> read_grounding_items(std::istream& pred, std::istream& gt);
std::vector<HighlightItem> read_highlight_items(std::istream& in);

}  // namespace longvid

#endif  // LONGVID_GROUNDING_EVAL_HPP_
