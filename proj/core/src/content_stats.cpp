/**
 * Copyright 2026 The CARE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "care/content_stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace care::content {
namespace {

using nlohmann::json;

void require_shared_classes(const DetectionDataset& source, const DetectionDataset& target) {
  if (source.classes != target.classes) {
    throw std::invalid_argument("source and target class vocabularies differ");
  }
}

std::vector<std::vector<Point2>> per_class_points(const DetectionDataset& dataset, bool size) {
  std::vector<std::vector<Point2>> out(dataset.num_classes());
  for (const BoxAnnotation& a : dataset.annotations) {
    out.at(static_cast<std::size_t>(a.class_id))
        .push_back(size ? Point2{a.w, a.h} : Point2{a.cx, a.cy});
  }
  return out;
}

std::optional<Moments2> moments(const std::vector<Point2>& points) {
  if (points.empty()) return std::nullopt;
  const auto n = static_cast<double>(points.size());
  Moments2 m;
  for (const Point2& p : points) {
    m.mean[0] += p.x;
    m.mean[1] += p.y;
  }
  m.mean[0] /= n;
  m.mean[1] /= n;
  if (points.size() >= 2) {
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const Point2& p : points) {
      const double dx = p.x - m.mean[0];
      const double dy = p.y - m.mean[1];
      sxx += dx * dx;
      sxy += dx * dy;
      syy += dy * dy;
    }
    m.covariance = {sxx / (n - 1.0), sxy / (n - 1.0), sxy / (n - 1.0), syy / (n - 1.0)};
  }
  return m;
}

Summary3 summarize(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double median =
      n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return {values.front(), median, values.back()};
}

DomainSummary summarize_domain(const DetectionDataset& dataset, Domain domain) {
  DomainSummary out;
  out.histogram = class_counts(dataset);
  const auto total = static_cast<double>(dataset.annotations.size());
  for (std::int64_t count : out.histogram) {
    out.frequencies.push_back(total > 0.0 ? static_cast<double>(count) / total : 0.0);
  }
  if (total > 0.0) {
    out.weights = inverse_frequency_weights(out.histogram, domain);
  } else {
    out.weights.domain = domain;
    out.weights.counts = out.histogram;
    out.weights.weights.assign(out.histogram.size(), 1.0);
    out.weights.zero_count.assign(out.histogram.size(), true);
  }
  const auto sizes = per_class_points(dataset, true);
  const auto locations = per_class_points(dataset, false);
  for (std::size_t c = 0; c < dataset.num_classes(); ++c) {
    out.geometry.push_back({out.histogram[c], moments(sizes[c]), moments(locations[c])});
  }
  return out;
}

json optional_number(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

json moments_json(const std::optional<Moments2>& m) {
  if (!m) return nullptr;
  return {{"mean", m->mean}, {"covariance", m->covariance}};
}

json summary_json(const std::optional<Summary3>& s) {
  if (!s) return nullptr;
  return {{"min", s->min}, {"median", s->median}, {"max", s->max}};
}

json domain_json(const DomainSummary& d) {
  json geometry = json::array();
  for (const ClassGeometry& g : d.geometry) {
    geometry.push_back(
        {{"count", g.count}, {"size", moments_json(g.size)}, {"location", moments_json(g.location)}});
  }
  return {{"histogram", d.histogram},
          {"frequencies", d.frequencies},
          {"class_weights", d.weights},
          {"geometry", geometry}};
}

}  // namespace

std::vector<std::int64_t> class_counts(const DetectionDataset& dataset) {
  std::vector<std::int64_t> counts(dataset.num_classes(), 0);
  for (const BoxAnnotation& a : dataset.annotations) {
    ++counts.at(static_cast<std::size_t>(a.class_id));
  }
  return counts;
}

std::int64_t ClassWeights::total() const {
  std::int64_t sum = 0;
  for (std::int64_t c : counts) sum += c;
  return sum;
}

ClassWeights inverse_frequency_weights(std::span<const std::int64_t> counts, Domain domain) {
  std::int64_t total = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw std::invalid_argument("class counts must be non-negative");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("class counts are all zero");
  const auto k = static_cast<double>(counts.size());
  ClassWeights out;
  out.domain = domain;
  out.counts.assign(counts.begin(), counts.end());
  for (std::int64_t c : counts) {
    out.zero_count.push_back(c == 0);
    out.weights.push_back(c == 0 ? 1.0 : static_cast<double>(total) / (k * static_cast<double>(c)));
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double smooth_ratio(double ratio, const SmoothingParams& params) {
  const double value = params.alpha * sigmoid(ratio) + params.beta;
  // sigmoid saturates to exactly 1 in double precision for large ratios.
  const double upper = params.alpha + params.beta;
  return params.alpha > 0.0 ? std::min(value, std::nextafter(upper, -std::numeric_limits<double>::infinity()))
                            : value;
}

std::string_view to_string(RatioStatus status) {
  switch (status) {
    case RatioStatus::kSmoothed: return "smoothed";
    case RatioStatus::kRaw: return "raw";
    case RatioStatus::kBelowThreshold: return "below_threshold";
    case RatioStatus::kFlaggedClass: return "flagged_class";
  }
  return "unknown";
}

BoxRatioModel::BoxRatioModel(ConditionalKde size_source, ConditionalKde size_target,
                             ConditionalKde loc_source, ConditionalKde loc_target,
                             SmoothingParams smoothing)
    : size_source_(std::move(size_source)),
      size_target_(std::move(size_target)),
      loc_source_(std::move(loc_source)),
      loc_target_(std::move(loc_target)),
      smoothing_(smoothing) {}

bool BoxRatioModel::flagged(std::size_t c) const {
  return !(size_source_.has_class(c) && size_target_.has_class(c) && loc_source_.has_class(c) &&
           loc_target_.has_class(c));
}

const ConditionalKde& BoxRatioModel::size_kde(Domain domain) const {
  return domain == Domain::kSource ? size_source_ : size_target_;
}

const ConditionalKde& BoxRatioModel::location_kde(Domain domain) const {
  return domain == Domain::kSource ? loc_source_ : loc_target_;
}

double BoxRatioModel::log_raw_ratio(const BoxAnnotation& box) const {
  return evaluate(box).log_raw_ratio;
}

RatioEvaluation BoxRatioModel::evaluate(const BoxAnnotation& box) const {
  RatioEvaluation out;
  if (box.class_id < 0 || flagged(static_cast<std::size_t>(box.class_id))) {
    out.weight = smoothing_.floor;
    out.status = RatioStatus::kFlaggedClass;
    return out;
  }
  const auto c = static_cast<std::size_t>(box.class_id);
  const Point2 size{box.w, box.h};
  const Point2 loc{box.cx, box.cy};
  const double log_size_t = size_target_.component(c).log_pdf(size);
  const double log_loc_t = loc_target_.component(c).log_pdf(loc);
  const double log_size_s = size_source_.component(c).log_pdf(size);
  const double log_loc_s = loc_source_.component(c).log_pdf(loc);

  out.log_raw_ratio = (log_size_t - log_size_s) + (log_loc_t - log_loc_s);
  out.raw_ratio = std::exp(out.log_raw_ratio);
  out.log_target_density = log_size_t + log_loc_t;

  if (smoothing_.raw_ratio) {
    out.weight = out.raw_ratio;
    out.status = RatioStatus::kRaw;
  } else if (out.log_target_density > std::log(smoothing_.tau)) {
    out.weight = smooth_ratio(out.raw_ratio, smoothing_);
    out.status = RatioStatus::kSmoothed;
  } else {
    out.weight = smoothing_.floor;
    out.status = RatioStatus::kBelowThreshold;
  }
  return out;
}

BoxRatioModel fit_box_ratio_model(const DetectionDataset& source, const DetectionDataset& target,
                                  const SmoothingParams& smoothing, double min_bandwidth) {
  require_shared_classes(source, target);
  return {ConditionalKde::fit(per_class_points(source, true), min_bandwidth),
          ConditionalKde::fit(per_class_points(target, true), min_bandwidth),
          ConditionalKde::fit(per_class_points(source, false), min_bandwidth),
          ConditionalKde::fit(per_class_points(target, false), min_bandwidth), smoothing};
}

GapReport gap_report(const DetectionDataset& source, const DetectionDataset& target,
                     const SmoothingParams& smoothing) {
  require_shared_classes(source, target);
  GapReport report;
  report.classes = source.classes;
  report.smoothing = smoothing;
  report.source = summarize_domain(source, Domain::kSource);
  report.target = summarize_domain(target, Domain::kTarget);
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    const double fs = report.source.frequencies[c];
    report.class_frequency_ratio.push_back(
        report.source.histogram[c] > 0 ? std::optional<double>(report.target.frequencies[c] / fs)
                                       : std::nullopt);
  }

  SmoothingParams smoothed = smoothing;
  smoothed.raw_ratio = false;
  const BoxRatioModel model = fit_box_ratio_model(source, target, smoothed);
  std::vector<std::vector<double>> weights(report.classes.size());
  std::vector<std::vector<double>> raws(report.classes.size());
  report.box_ratio.resize(report.classes.size());
  for (const BoxAnnotation& box : target.annotations) {
    const auto c = static_cast<std::size_t>(box.class_id);
    if (model.flagged(c)) continue;
    const RatioEvaluation e = model.evaluate(box);
    weights[c].push_back(e.weight);
    raws[c].push_back(e.raw_ratio);
    if (e.status == RatioStatus::kBelowThreshold) ++report.box_ratio[c].below_threshold;
  }
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    BoxRatioSummary& s = report.box_ratio[c];
    s.flagged = model.flagged(c);
    s.evaluated = static_cast<std::int64_t>(weights[c].size());
    if (!weights[c].empty()) {
      s.smoothed = summarize(weights[c]);
      s.raw = summarize(raws[c]);
    }
  }
  return report;
}

void to_json(json& out, const ClassWeights& weights) {
  out = {{"domain", std::string(to_string(weights.domain))},
         {"weights", weights.weights},
         {"counts", weights.counts},
         {"zero_count", weights.zero_count}};
}

void to_json(json& out, const SmoothingParams& params) {
  out = {{"alpha", params.alpha},
         {"beta", params.beta},
         {"tau", params.tau},
         {"floor", params.floor},
         {"raw_ratio", params.raw_ratio}};
}

void to_json(json& out, const GapReport& report) {
  json ratios = json::array();
  for (const BoxRatioSummary& s : report.box_ratio) {
    ratios.push_back({{"flagged", s.flagged},
                      {"evaluated", s.evaluated},
                      {"below_threshold", s.below_threshold},
                      {"smoothed", summary_json(s.smoothed)},
                      {"raw", summary_json(s.raw)}});
  }
  json freq_ratio = json::array();
  for (const auto& r : report.class_frequency_ratio) freq_ratio.push_back(optional_number(r));
  out = {{"schema", "care.gap_report"},
         {"schema_version", GapReport::kSchemaVersion},
         {"classes", report.classes},
         {"source", domain_json(report.source)},
         {"target", domain_json(report.target)},
         {"class_frequency_ratio", freq_ratio},
         {"box_ratio", {{"evaluated_on", "target_annotations"},
                        {"smoothing", report.smoothing},
                        {"per_class", ratios}}}};
}

std::vector<AnnotationWeight> annotation_weights(const DetectionDataset& dataset,
                                                 const ClassWeights& class_weights,
                                                 const BoxRatioModel& model) {
  std::vector<AnnotationWeight> rows;
  rows.reserve(dataset.annotations.size());
  for (std::size_t i = 0; i < dataset.annotations.size(); ++i) {
    const BoxAnnotation& box = dataset.annotations[i];
    const auto c = static_cast<std::size_t>(box.class_id);
    AnnotationWeight row;
    row.image_id = box.image_id;
    row.annotation_index = i;
    row.class_name = dataset.classes.at(c);
    row.w_class = class_weights.weights.at(c);
    row.v_box = model.weight(box);
    row.combined = row.w_class * row.v_box;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return {buffer, result.ptr};
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

}  // namespace

void write_weights_csv(std::span<const AnnotationWeight> rows, std::ostream& out) {
  out << "image_id,annotation_index,class,w_class,v_box,combined\n";
  for (const AnnotationWeight& row : rows) {
    out << csv_field(row.image_id) << ',' << row.annotation_index << ',' << csv_field(row.class_name)
        << ',' << format_double(row.w_class) << ',' << format_double(row.v_box) << ','
        << format_double(row.combined) << '\n';
  }
}

}  // namespace care::content
