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

#include "longvid/grounding_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace longvid {

using nlohmann::json;

void TimeSpan::validate() const {
  if (!std::isfinite(start_s) || !std::isfinite(end_s))
    throw std::invalid_argument("timespan: values must be finite");
  if (start_s < 0.0 || end_s < start_s)
    throw std::invalid_argument("timespan: need 0 <= start <= end, got [" +
                                std::to_string(start_s) + ", " + std::to_string(end_s) + "]");
}

double iou(const TimeSpan& a, const TimeSpan& b) {
  a.validate();
  b.validate();
  const double inter = std::max(0.0, std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s));
  const double uni = a.length() + b.length() - inter;
  if (uni <= 0.0) return (a == b) ? 1.0 : 0.0;
  return inter / uni;
}

namespace {

const char* kNumber = R"((\d+(?:\.\d+)?))";

std::vector<std::regex> build_patterns() {
  const std::string num = kNumber;
  const auto flags = std::regex::icase | std::regex::optimize;
  return {
      std::regex("from\\s+" + num + "\\s+to\\s+" + num + "\\s+seconds?", flags),
      std::regex(num + "\\s*-\\s*" + num + "\\s+seconds?", flags),
      std::regex(num + "\\s+to\\s+" + num, flags),
      std::regex("start\\s*:\\s*" + num + "\\s*,\\s*end\\s*:\\s*" + num, flags),
      std::regex(num + "\\s*,\\s*" + num, flags),
  };
}

}  // namespace

std::optional<ParsedSpan> parse_timespan(const std::string& text) {
  static const std::vector<std::regex> patterns = build_patterns();
  for (const std::regex& pattern : patterns) {
    std::smatch m;
    if (!std::regex_search(text, m, pattern)) continue;
    double a = std::stod(m[1].str());
    double b = std::stod(m[2].str());
    ParsedSpan result;
    result.swapped = a > b;
    if (result.swapped) std::swap(a, b);
    result.span = {a, b};
    return result;
  }
  return std::nullopt;
}

std::map<double, double> recall_at_1(const std::vector<GroundingItem>& items,
                                     const std::vector<double>& thresholds) {
  if (items.empty()) throw std::invalid_argument("recall_at_1: empty item list");
  std::vector<double> ious;
  ious.reserve(items.size());
  for (const GroundingItem& item : items) {
    item.gt.validate();
    std::optional<TimeSpan> pred = item.pred;
    if (!pred) {
      if (auto parsed = parse_timespan(item.response_text)) pred = parsed->span;
    }
    ious.push_back(pred ? iou(*pred, item.gt) : 0.0);
  }
  std::map<double, double> result;
  for (double thr : thresholds) {
    std::size_t hits = 0;
    for (double v : ious)
      if (v >= thr) ++hits;
    result[thr] = static_cast<double>(hits) / static_cast<double>(items.size());
  }
  return result;
}

void HighlightItem::validate() const {
  if (pred_scores.empty() || pred_scores.size() != gt_saliency.size())
    throw std::invalid_argument("highlight item " + id + ": score/saliency lengths differ or empty");
  for (double level : gt_saliency) {
    const double doubled = level * 2.0;
    if (level < 1.0 || level > 5.0 || doubled != std::floor(doubled))
      throw std::invalid_argument("highlight item " + id + ": saliency level " +
                                  std::to_string(level) + " off the {1.0,1.5,...,5.0} grid");
  }
}

namespace {

/// Clip order by descending score, index ascending on ties.
std::vector<std::size_t> ranked_clips(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

std::optional<double> highlight_average_precision(const HighlightItem& item,
                                                  double positive_level) {
  item.validate();
  const std::vector<std::size_t> order = ranked_clips(item.pred_scores);
  double sum_precision = 0.0;
  std::size_t positives_seen = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (item.gt_saliency[order[rank]] >= positive_level) {
      ++positives_seen;
      sum_precision += static_cast<double>(positives_seen) / static_cast<double>(rank + 1);
    }
  }
  if (positives_seen == 0) return std::nullopt;  // not evaluable
  return sum_precision / static_cast<double>(positives_seen);
}

double highlight_map(const std::vector<HighlightItem>& items, double positive_level) {
  double sum = 0.0;
  std::size_t evaluable = 0;
  for (const HighlightItem& item : items) {
    if (auto ap = highlight_average_precision(item, positive_level)) {
      sum += *ap;
      ++evaluable;
    }
  }
  if (evaluable == 0) throw std::invalid_argument("highlight_map: no evaluable items");
  return sum / static_cast<double>(evaluable);
}

double hit_at_1(const std::vector<HighlightItem>& items, double positive_level) {
  std::size_t hits = 0;
  std::size_t evaluable = 0;
  for (const HighlightItem& item : items) {
    item.validate();
    bool has_positive = false;
    for (double level : item.gt_saliency)
      if (level >= positive_level) has_positive = true;
    if (!has_positive) continue;
    ++evaluable;
    const std::size_t top = ranked_clips(item.pred_scores).front();
    if (item.gt_saliency[top] >= positive_level) ++hits;
  }
  if (evaluable == 0) throw std::invalid_argument("hit_at_1: no evaluable items");
  return static_cast<double>(hits) / static_cast<double>(evaluable);
}

double saliency_discretize(double similarity) {
  if (!std::isfinite(similarity))
    throw std::invalid_argument("saliency_discretize: similarity must be finite");
  const double clamped = std::clamp(similarity, 0.0, 1.0);
  // nearbyint under the default rounding mode is round-half-to-even.
  return 1.0 + 0.5 * std::nearbyint(8.0 * clamped);
}

namespace {

std::string opt_to_json(const std::optional<double>& v) {
  if (!v) return "null";
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

std::string fmt4(const std::optional<double>& v) {
  if (!v) return "   -  ";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%6.4f", *v);
  return buf;
}

}  // namespace

std::string EvalReport::to_json() const {
  std::ostringstream os;
  os << "{\"r1_03\": " << opt_to_json(r1_03) << ", \"r1_05\": " << opt_to_json(r1_05)
     << ", \"r1_07\": " << opt_to_json(r1_07) << ", \"map\": " << opt_to_json(map)
     << ", \"hit1\": " << opt_to_json(hit1) << ", \"n_items\": " << n_items
     << ", \"n_unparsed\": " << n_unparsed << "}";
  return os.str();
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << "metric        value\n"
     << "------------  ------\n";
  if (r1_03) os << "R@1 IoU=0.3   " << fmt4(r1_03) << "\n";
  if (r1_05) os << "R@1 IoU=0.5   " << fmt4(r1_05) << "\n";
  if (r1_07) os << "R@1 IoU=0.7   " << fmt4(r1_07) << "\n";
  if (map) os << "mAP           " << fmt4(map) << "\n";
  if (hit1) os << "HIT@1         " << fmt4(hit1) << "\n";
  os << "items         " << n_items << "\n"
     << "unparsed      " << n_unparsed << "\n";
  return os.str();
}

EvalReport evaluate_grounding(const std::vector<GroundingItem>& items,
                              const std::vector<double>& thresholds) {
  EvalReport report;
  report.n_items = items.size();
  for (const GroundingItem& item : items)
    if (!item.pred && !parse_timespan(item.response_text)) ++report.n_unparsed;
  const auto recalls = recall_at_1(items, thresholds);
  for (const auto& [thr, value] : recalls) {
    if (thr == 0.3) report.r1_03 = value;
    if (thr == 0.5) report.r1_05 = value;
    if (thr == 0.7) report.r1_07 = value;
  }
  return report;
}

EvalReport evaluate_highlight(const std::vector<HighlightItem>& items, double positive_level) {
  EvalReport report;
  report.n_items = items.size();
  report.map = highlight_map(items, positive_level);
  report.hit1 = hit_at_1(items, positive_level);
  return report;
}

namespace {

json parse_line(const std::string& line, std::size_t line_no, const char* what) {
  try {
    return json::parse(line);
  } catch (const json::exception& err) {
    throw std::runtime_error(std::string(what) + " line " + std::to_string(line_no) + ": " +
                             err.what());
  }
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::vector<GroundingItem> read_grounding_items(std::istream& pred, std::istream& gt) {
  struct GtRecord {
    std::string video_id, query;
    TimeSpan span;
  };
  std::unordered_map<std::string, GtRecord> gt_by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(gt, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json r = parse_line(line, line_no, "ground truth");
    try {
      const std::string id = r.at("id").get<std::string>();
      if (gt_by_id.count(id))
        throw std::runtime_error("ground truth line " + std::to_string(line_no) +
                                 ": duplicate id '" + id + "'");
      GtRecord rec;
      rec.video_id = r.value("video_id", "");
      rec.query = r.value("query", "");
      rec.span = {r.at("start").get<double>(), r.at("end").get<double>()};
      rec.span.validate();
      gt_by_id.emplace(id, std::move(rec));
    } catch (const json::exception& err) {
      throw std::runtime_error("ground truth line " + std::to_string(line_no) + ": " + err.what());
    }
  }

  std::vector<GroundingItem> items;
  std::size_t pred_no = 0;
  while (std::getline(pred, line)) {
    ++pred_no;
    if (blank(line)) continue;
    const json r = parse_line(line, pred_no, "predictions");
    try {
      GroundingItem item;
      item.id = r.at("id").get<std::string>();
      const auto it = gt_by_id.find(item.id);
      if (it == gt_by_id.end())
        throw std::runtime_error("predictions line " + std::to_string(pred_no) + ": id '" +
                                 item.id + "' not in ground truth");
      item.video_id = it->second.video_id;
      item.query = it->second.query;
      item.gt = it->second.span;
      if (r.contains("pred_start") && r.contains("pred_end")) {
        TimeSpan span{r.at("pred_start").get<double>(), r.at("pred_end").get<double>()};
        if (span.start_s > span.end_s) std::swap(span.start_s, span.end_s);
        item.pred = span;
      } else {
        item.response_text = r.at("response_text").get<std::string>();
      }
      items.push_back(std::move(item));
      gt_by_id.erase(it);
    } catch (const json::exception& err) {
      throw std::runtime_error("predictions line " + std::to_string(pred_no) + ": " + err.what());
    }
  }
  if (!gt_by_id.empty())
    throw std::runtime_error("predictions missing for " + std::to_string(gt_by_id.size()) +
                             " ground-truth item(s), e.g. id '" + gt_by_id.begin()->first + "'");
  return items;
}

std::vector<HighlightItem> read_highlight_items(std::istream& in) {
  std::vector<HighlightItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json r = parse_line(line, line_no, "highlight");
    try {
      HighlightItem item;
      item.id = r.at("id").get<std::string>();
      item.clip_duration_s = r.value("clip_duration_s", 0.0);
      item.pred_scores = r.at("pred_scores").get<std::vector<double>>();
      item.gt_saliency = r.at("gt_saliency").get<std::vector<double>>();
      item.validate();
      items.push_back(std::move(item));
    } catch (const std::exception& err) {
      throw std::runtime_error("highlight line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return items;
}

}  // namespace longvid
