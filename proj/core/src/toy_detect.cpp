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
#include "care/toy_detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "care/content_stats.hpp"
#include "care/json_config.hpp"
#include "care/random.hpp"

namespace care::toy {
namespace {

using nlohmann::json;

Matrix matrix_from_json(const json& value, const std::string& path, Eigen::Index rows,
                        Eigen::Index cols) {
  if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != rows) {
    throw ConfigError(path, "'" + path + "' must be an array of " + std::to_string(rows) + " rows");
  }
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = value[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(path, "'" + path + "' rows must have " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number()) throw ConfigError(path, "'" + path + "' entries must be numbers");
      out(r, c) = x.get<double>();
    }
  }
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const json& value, const std::string& path, Eigen::Index n) {
  if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != n) {
    throw ConfigError(path, "'" + path + "' must be an array of " + std::to_string(n) + " numbers");
  }
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& x = value[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw ConfigError(path, "'" + path + "' entries must be numbers");
    out[i] = x.get<double>();
  }
  return out;
}

std::array<double, 2> pair_from(ObjectReader& reader, const std::string& key,
                                std::array<double, 2> fallback) {
  if (!reader.has(key)) return fallback;
  const Vector v = vector_from_json(reader.raw(key), reader.child(key), 2);
  return {v[0], v[1]};
}

BoxDistribution box_from_json(const json& value, const std::string& path) {
  ObjectReader reader(value, path);
  BoxDistribution box;
  box.size_log_mean = pair_from(reader, "size_log_mean", box.size_log_mean);
  box.size_log_sigma = pair_from(reader, "size_log_sigma", box.size_log_sigma);
  box.location_mean = pair_from(reader, "location_mean", box.location_mean);
  box.location_sigma = pair_from(reader, "location_sigma", box.location_sigma);
  reader.finish();
  return box;
}

// {"random": {"seed": s, "scale": a}} -> a * N(0, 1) entries, plus `base`.
Matrix random_matrix(const json& value, const std::string& path, Eigen::Index rows,
                     Eigen::Index cols, const Matrix& base) {
  ObjectReader outer(value, path);
  ObjectReader reader(outer.raw("random"), outer.child("random"));
  const auto seed = reader.require<std::uint64_t>("seed");
  const double scale = reader.get<double>("scale", 1.0);
  reader.finish();
  outer.finish();
  Rng rng(seed);
  Matrix out = base;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) += scale * rng.normal();
  }
  return out;
}

Matrix matrix_or_random(const json& value, const std::string& path, Eigen::Index rows,
                        Eigen::Index cols, const Matrix& base) {
  if (value.is_object()) return random_matrix(value, path, rows, cols, base);
  return matrix_from_json(value, path, rows, cols);
}

DomainGenerator domain_from_json(const json& value, const std::string& path, int k, int raw_dim,
                                 int latent_dim) {
  ObjectReader reader(value, path);
  DomainGenerator out;
  const Vector probs = vector_from_json(reader.raw("class_probs"), reader.child("class_probs"), k);
  out.class_probs.assign(probs.data(), probs.data() + probs.size());

  const json& boxes = reader.raw("boxes");
  if (!boxes.is_array() || static_cast<int>(boxes.size()) != k) {
    throw ConfigError(reader.child("boxes"), "'" + reader.child("boxes") + "' must list one box distribution per class");
  }
  for (std::size_t c = 0; c < boxes.size(); ++c) {
    out.boxes.push_back(box_from_json(boxes[c], reader.child("boxes") + "[" + std::to_string(c) + "]"));
  }

  ObjectReader app(reader.raw("appearance"), reader.child("appearance"));
  const Matrix identity = Matrix::Identity(raw_dim, latent_dim);
  out.appearance.transform =
      app.has("transform")
          ? matrix_or_random(app.raw("transform"), app.child("transform"), raw_dim, latent_dim, identity)
          : identity;
  out.appearance.offset =
      app.has("offset")
          ? (app.raw("offset").is_object()
                 ? Vector(random_matrix(app.raw("offset"), app.child("offset"), raw_dim, 1,
                                        Matrix::Zero(raw_dim, 1)))
                 : vector_from_json(app.raw("offset"), app.child("offset"), raw_dim))
          : Vector::Zero(raw_dim);
  out.appearance.noise = app.get<double>("noise", 0.1);
  app.finish();
  reader.finish();
  return out;
}

json domain_to_json(const DomainGenerator& d) {
  json boxes = json::array();
  for (const BoxDistribution& b : d.boxes) {
    boxes.push_back({{"size_log_mean", b.size_log_mean},
                     {"size_log_sigma", b.size_log_sigma},
                     {"location_mean", b.location_mean},
                     {"location_sigma", b.location_sigma}});
  }
  json offset = json::array();
  for (Eigen::Index i = 0; i < d.appearance.offset.size(); ++i) offset.push_back(d.appearance.offset[i]);
  return {{"class_probs", d.class_probs},
          {"boxes", boxes},
          {"appearance",
           {{"transform", matrix_to_json(d.appearance.transform)},
            {"offset", offset},
            {"noise", d.appearance.noise}}}};
}

void validate_domain(const DomainGenerator& d, const ToyDomainSpec& spec, const std::string& name) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("toy spec " + name + ": " + what);
  };
  if (static_cast<int>(d.class_probs.size()) != spec.num_classes) fail("class_probs length != K");
  double total = 0.0;
  for (double p : d.class_probs) {
    if (!(p >= 0.0)) fail("class_probs must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("class_probs must sum to 1");
  if (static_cast<int>(d.boxes.size()) != spec.num_classes) fail("need one box distribution per class");
  for (const BoxDistribution& b : d.boxes) {
    for (double s : {b.size_log_sigma[0], b.size_log_sigma[1], b.location_sigma[0], b.location_sigma[1]}) {
      if (!(s > 0.0)) fail("box sigmas must be positive");
    }
  }
  if (d.appearance.transform.rows() != spec.raw_dim ||
      d.appearance.transform.cols() != spec.latent_dim()) {
    fail("appearance transform must be raw_dim x (class_dim + 4)");
  }
  if (d.appearance.offset.size() != spec.raw_dim) fail("appearance offset must have raw_dim entries");
  if (!(d.appearance.noise > 0.0)) fail("appearance noise must be positive");
}

double tanh_grad(double activated) { return 1.0 - activated * activated; }

}  // namespace

void ToyDomainSpec::validate() const {
  if (num_classes < 1) throw std::invalid_argument("toy spec: num_classes must be >= 1");
  if (static_cast<int>(class_names.size()) != num_classes) {
    throw std::invalid_argument("toy spec: class_names must have num_classes entries");
  }
  if (class_dim < 1 || raw_dim < 1) throw std::invalid_argument("toy spec: dimensions must be >= 1");
  if (!(latent_noise > 0.0)) throw std::invalid_argument("toy spec: latent_noise must be positive");
  if (prototypes.rows() != num_classes || prototypes.cols() != class_dim) {
    throw std::invalid_argument("toy spec: prototypes must be num_classes x class_dim");
  }
  validate_domain(source, *this, "source");
  validate_domain(target, *this, "target");
}

ToyDomainSpec spec_from_json(const json& config) {
  ObjectReader reader(config, "");
  ToyDomainSpec spec;
  spec.num_classes = reader.require<int>("num_classes");
  if (spec.num_classes < 1) throw ConfigError("num_classes", "num_classes must be >= 1");
  if (reader.has("class_names")) {
    spec.class_names = reader.require<std::vector<std::string>>("class_names");
  } else {
    for (int c = 0; c < spec.num_classes; ++c) spec.class_names.push_back("class" + std::to_string(c));
  }
  spec.class_dim = reader.get<int>("class_dim", spec.class_dim);
  spec.raw_dim = reader.get<int>("raw_dim", spec.raw_dim);
  spec.latent_noise = reader.get<double>("latent_noise", spec.latent_noise);
  spec.box_feature_scale = reader.get<double>("box_feature_scale", spec.box_feature_scale);
  if (spec.class_dim < 1 || spec.raw_dim < 1) {
    throw ConfigError("raw_dim", "class_dim and raw_dim must be >= 1");
  }
  spec.prototypes = matrix_or_random(reader.raw("prototypes"), "prototypes", spec.num_classes,
                                     spec.class_dim, Matrix::Zero(spec.num_classes, spec.class_dim));
  spec.source = domain_from_json(reader.raw("source"), "source", spec.num_classes, spec.raw_dim,
                                 spec.latent_dim());
  spec.target = domain_from_json(reader.raw("target"), "target", spec.num_classes, spec.raw_dim,
                                 spec.latent_dim());
  reader.finish();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return spec;
}

json spec_to_json(const ToyDomainSpec& spec) {
  return {{"num_classes", spec.num_classes},
          {"class_names", spec.class_names},
          {"class_dim", spec.class_dim},
          {"raw_dim", spec.raw_dim},
          {"latent_noise", spec.latent_noise},
          {"box_feature_scale", spec.box_feature_scale},
          {"prototypes", matrix_to_json(spec.prototypes)},
          {"source", domain_to_json(spec.source)},
          {"target", domain_to_json(spec.target)}};
}

std::vector<ToyInstance> generate_domain(const ToyDomainSpec& spec, Domain domain, std::size_t n,
                                         std::uint64_t seed) {
  spec.validate();
  const DomainGenerator& gen = spec.domain(domain);
  Rng rng(seed);
  std::vector<ToyInstance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ToyInstance inst;
    inst.domain = domain;
    const auto c = rng.categorical(gen.class_probs);
    const BoxDistribution& bd = gen.boxes[c];

    BoxAnnotation& box = inst.box;
    box.class_id = static_cast<int>(c);
    box.w = std::clamp(std::exp(rng.normal(bd.size_log_mean[0], bd.size_log_sigma[0])), 1e-3, 1.0);
    box.h = std::clamp(std::exp(rng.normal(bd.size_log_mean[1], bd.size_log_sigma[1])), 1e-3, 1.0);
    box.cx = std::clamp(rng.normal(bd.location_mean[0], bd.location_sigma[0]), 0.5 * box.w,
                        1.0 - 0.5 * box.w);
    box.cy = std::clamp(rng.normal(bd.location_mean[1], bd.location_sigma[1]), 0.5 * box.h,
                        1.0 - 0.5 * box.h);

    Vector latent(spec.latent_dim());
    for (int j = 0; j < spec.class_dim; ++j) {
      latent[j] = spec.prototypes(static_cast<Eigen::Index>(c), j) + spec.latent_noise * rng.normal();
    }
    const Vector geometry = box_target(box);
    for (int j = 0; j < 4; ++j) latent[spec.class_dim + j] = spec.box_feature_scale * (geometry[j] - 0.5);

    inst.features = gen.appearance.transform * latent + gen.appearance.offset;
    for (int j = 0; j < spec.raw_dim; ++j) inst.features[j] += gen.appearance.noise * rng.normal();
    out.push_back(std::move(inst));
  }
  return out;
}

annotations::DetectionDataset to_dataset(std::span<const ToyInstance> instances,
                                         const ToyDomainSpec& spec, Domain domain,
                                         const std::string& prefix) {
  annotations::DetectionDataset ds;
  ds.domain = domain;
  ds.classes = spec.class_names;
  for (int c = 0; c < spec.num_classes; ++c) ds.original_class_ids.push_back(c);
  ds.images.reserve(instances.size());
  ds.annotations.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::string id = prefix + std::to_string(i);
    ds.images.push_back({id, kToyImageWidth, kToyImageHeight});
    BoxAnnotation box = instances[i].box;
    box.image_id = id;
    ds.annotations.push_back(std::move(box));
  }
  return ds;
}

void write_features_csv(std::span<const ToyInstance> instances, std::ostream& out,
                        const std::string& prefix) {
  const Eigen::Index dim = instances.empty() ? 0 : instances.front().features.size();
  out << "image_id";
  for (Eigen::Index j = 0; j < dim; ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < instances.size(); ++i) {
    out << prefix << i;
    for (Eigen::Index j = 0; j < dim; ++j) out << ',' << content::format_double(instances[i].features[j]);
    out << '\n';
  }
}

ToyModel ToyModel::zeros(int raw_dim, int hidden_dim, int embed_dim, int num_classes) {
  ToyModel m;
  m.enc1_w = Matrix::Zero(hidden_dim, raw_dim);
  m.enc1_b = Vector::Zero(hidden_dim);
  m.enc2_w = Matrix::Zero(embed_dim, hidden_dim);
  m.enc2_b = Vector::Zero(embed_dim);
  m.cls_w = Matrix::Zero(num_classes, embed_dim);
  m.cls_b = Vector::Zero(num_classes);
  m.box_w = Matrix::Zero(4, embed_dim);
  m.box_b = Vector::Zero(4);
  return m;
}

ToyModel ToyModel::random(int raw_dim, int hidden_dim, int embed_dim, int num_classes,
                          std::uint64_t seed, double scale) {
  ToyModel m = zeros(raw_dim, hidden_dim, embed_dim, num_classes);
  Rng rng(seed);
  auto fill = [&](Matrix& w) {
    const double sd = scale / std::sqrt(static_cast<double>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = sd * rng.normal();
    }
  };
  fill(m.enc1_w);
  fill(m.enc2_w);
  fill(m.cls_w);
  fill(m.box_w);
  return m;
}

namespace {

template <typename Model, typename Fn>
void for_each_tensor(Model& m, Fn fn) {
  fn(m.enc1_w);
  fn(m.enc1_b);
  fn(m.enc2_w);
  fn(m.enc2_b);
  fn(m.cls_w);
  fn(m.cls_b);
  fn(m.box_w);
  fn(m.box_b);
}

}  // namespace

Eigen::Index ToyModel::parameter_count() const {
  Eigen::Index n = 0;
  for_each_tensor(*this, [&](const auto& t) { n += t.size(); });
  return n;
}

Vector ToyModel::pack() const {
  Vector flat(parameter_count());
  Eigen::Index offset = 0;
  for_each_tensor(*this, [&](const auto& t) {
    flat.segment(offset, t.size()) = t.reshaped();
    offset += t.size();
  });
  return flat;
}

void ToyModel::unpack(const Vector& flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("ToyModel::unpack: size mismatch");
  Eigen::Index offset = 0;
  for_each_tensor(*this, [&](auto& t) {
    t.reshaped() = flat.segment(offset, t.size());
    offset += t.size();
  });
}

bool ToyModel::all_finite() const {
  bool ok = true;
  for_each_tensor(*this, [&](const auto& t) { ok = ok && t.allFinite(); });
  return ok;
}

ForwardResult forward(const ToyModel& model, const Vector& features) {
  ForwardResult out;
  out.hidden = (model.enc1_w * features + model.enc1_b).array().tanh().matrix();
  out.embedding = (model.enc2_w * out.hidden + model.enc2_b).array().tanh().matrix();
  out.logits = model.cls_w * out.embedding + model.cls_b;
  out.box = model.box_w * out.embedding + model.box_b;
  return out;
}

Vector box_target(const BoxAnnotation& box) {
  Vector t(4);
  t << box.cx, box.cy, box.w, box.h;
  return t;
}

double smooth_l1(double diff) {
  const double a = std::abs(diff);
  return a < 1.0 ? 0.5 * a * a : a - 0.5;
}

namespace {

double smooth_l1_grad(double diff) { return std::abs(diff) < 1.0 ? diff : (diff > 0.0 ? 1.0 : -1.0); }

double log_sum_exp(const Vector& v) {
  const double peak = v.maxCoeff();
  return peak + std::log((v.array() - peak).exp().sum());
}

}  // namespace

double cls_loss(const Vector& logits, int label) { return log_sum_exp(logits) - logits[label]; }

double box_loss(const Vector& predicted, const BoxAnnotation& box) {
  const Vector diff = predicted - box_target(box);
  double sum = 0.0;
  for (int j = 0; j < 4; ++j) sum += smooth_l1(diff[j]);
  return sum;
}

double det_loss(const Vector& logits, const Vector& predicted_box, const BoxAnnotation& box) {
  return cls_loss(logits, box.class_id) + box_loss(predicted_box, box);
}

std::string_view to_string(AlignmentKind kind) {
  switch (kind) {
    case AlignmentKind::kNone: return "none";
    case AlignmentKind::kCycle: return "cycle";
    case AlignmentKind::kMmd: return "mmd";
  }
  return "none";
}

AlignmentKind alignment_kind_from_string(std::string_view name) {
  if (name == "none") return AlignmentKind::kNone;
  if (name == "cycle") return AlignmentKind::kCycle;
  if (name == "mmd") return AlignmentKind::kMmd;
  throw std::invalid_argument("unknown alignment kind '" + std::string(name) + "'");
}

ObjectiveResult model_gradients(const ToyModel& model, std::span<const WeightedInstance> batch,
                                const ObjectiveOptions& options) {
  ObjectiveResult result;
  ModelGradients& grad = result.gradients;
  grad = ToyModel::zeros(model.raw_dim(), static_cast<int>(model.enc1_w.rows()), model.embed_dim(),
                         model.num_classes());

  std::size_t n_source = 0;
  std::size_t n_target = 0;
  for (const WeightedInstance& item : batch) {
    (item.instance->domain == Domain::kSource ? n_source : n_target) += 1;
  }

  std::vector<ForwardResult> passes;
  passes.reserve(batch.size());
  for (const WeightedInstance& item : batch) passes.push_back(forward(model, item.instance->features));

  // d objective / d embedding, filled by the detection heads and alignment.
  std::vector<Vector> grad_embedding(batch.size(), Vector::Zero(model.embed_dim()));

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ToyInstance& inst = *batch[i].instance;
    const ForwardResult& f = passes[i];
    const bool is_source = inst.domain == Domain::kSource;
    const double coef = batch[i].weight / static_cast<double>(is_source ? n_source : n_target);
    const double loss = det_loss(f.logits, f.box, inst.box);
    (is_source ? result.terms.source_det : result.terms.target_det) += coef * loss;

    Vector grad_logits = alignment::softmax(f.logits);
    grad_logits[inst.box.class_id] -= 1.0;
    grad_logits *= coef;
    const Vector diff = f.box - box_target(inst.box);
    Vector grad_box(4);
    for (int j = 0; j < 4; ++j) grad_box[j] = coef * smooth_l1_grad(diff[j]);

    grad.cls_w += grad_logits * f.embedding.transpose();
    grad.cls_b += grad_logits;
    grad.box_w += grad_box * f.embedding.transpose();
    grad.box_b += grad_box;
    grad_embedding[i] = model.cls_w.transpose() * grad_logits + model.box_w.transpose() * grad_box;
  }

  if (options.alignment != AlignmentKind::kNone) {
    // Group embedding rows by class and domain, remembering batch positions.
    std::map<int, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> members;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      auto& slot = members[batch[i].instance->box.class_id];
      (batch[i].instance->domain == Domain::kSource ? slot.first : slot.second).push_back(i);
    }
    alignment::FeatureBatch features;
    features.dim = model.embed_dim();
    for (const auto& [cls, idx] : members) {
      alignment::ClassFeatures cf;
      cf.source.resize(static_cast<Eigen::Index>(idx.first.size()), features.dim);
      cf.target.resize(static_cast<Eigen::Index>(idx.second.size()), features.dim);
      for (std::size_t r = 0; r < idx.first.size(); ++r) {
        cf.source.row(static_cast<Eigen::Index>(r)) = passes[idx.first[r]].embedding.transpose();
      }
      for (std::size_t r = 0; r < idx.second.size(); ++r) {
        cf.target.row(static_cast<Eigen::Index>(r)) = passes[idx.second[r]].embedding.transpose();
      }
      features.classes.emplace(cls, std::move(cf));
    }
    const alignment::AlignmentResult aligned =
        options.alignment == AlignmentKind::kCycle
            ? alignment::cycle_consistency_loss(features, options.align)
            : alignment::linear_mmd(features, options.align);
    result.terms.alignment = aligned.loss;
    for (const auto& [cls, g] : aligned.gradients.classes) {
      const auto& idx = members.at(cls);
      for (std::size_t r = 0; r < idx.first.size(); ++r) {
        grad_embedding[idx.first[r]] += options.lambda * g.source.row(static_cast<Eigen::Index>(r)).transpose();
      }
      for (std::size_t r = 0; r < idx.second.size(); ++r) {
        grad_embedding[idx.second[r]] += options.lambda * g.target.row(static_cast<Eigen::Index>(r)).transpose();
      }
    }
  }

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ForwardResult& f = passes[i];
    const Vector grad_pre2 = grad_embedding[i].cwiseProduct(f.embedding.unaryExpr(&tanh_grad));
    grad.enc2_w += grad_pre2 * f.hidden.transpose();
    grad.enc2_b += grad_pre2;
    const Vector grad_hidden = model.enc2_w.transpose() * grad_pre2;
    const Vector grad_pre1 = grad_hidden.cwiseProduct(f.hidden.unaryExpr(&tanh_grad));
    grad.enc1_w += grad_pre1 * batch[i].instance->features.transpose();
    grad.enc1_b += grad_pre1;
  }

  result.terms.total =
      result.terms.source_det + result.terms.target_det + options.lambda * result.terms.alignment;
  return result;
}

EvalMetrics evaluate(const ToyModel& model, std::span<const ToyInstance> instances) {
  const int k = model.num_classes();
  EvalMetrics m;
  m.per_class_count.assign(static_cast<std::size_t>(k), 0);
  m.per_class_det_loss.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<std::int64_t> correct(static_cast<std::size_t>(k), 0);
  std::int64_t total_correct = 0;
  for (const ToyInstance& inst : instances) {
    const ForwardResult f = forward(model, inst.features);
    Eigen::Index predicted = 0;
    f.logits.maxCoeff(&predicted);
    const auto c = static_cast<std::size_t>(inst.box.class_id);
    ++m.per_class_count[c];
    const bool hit = predicted == inst.box.class_id;
    correct[c] += hit;
    total_correct += hit;
    const double box = box_loss(f.box, inst.box);
    const double det = cls_loss(f.logits, inst.box.class_id) + box;
    m.mean_box_loss += box;
    m.mean_det_loss += det;
    m.per_class_det_loss[c] += det;
  }
  const auto n = static_cast<double>(instances.size());
  if (n > 0) {
    m.accuracy = static_cast<double>(total_correct) / n;
    m.mean_box_loss /= n;
    m.mean_det_loss /= n;
  }
  double balanced = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    if (m.per_class_count[c] == 0) {
      m.per_class_accuracy.emplace_back(std::nullopt);
      continue;
    }
    const double acc = static_cast<double>(correct[c]) / static_cast<double>(m.per_class_count[c]);
    m.per_class_accuracy.emplace_back(acc);
    m.per_class_det_loss[c] /= static_cast<double>(m.per_class_count[c]);
    balanced += acc;
    ++present;
  }
  m.balanced_accuracy = present > 0 ? balanced / present : 0.0;
  return m;
}

}  // namespace care::toy
