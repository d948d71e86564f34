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
#include "care/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "care/random.hpp"

namespace care {

std::string_view to_string(Domain domain) {
  return domain == Domain::kSource ? "source" : "target";
}

Domain domain_from_string(std::string_view name) {
  if (name == "source") return Domain::kSource;
  if (name == "target") return Domain::kTarget;
  throw std::invalid_argument("unknown domain '" + std::string(name) + "'");
}

namespace annotations {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AnnotationError("cannot open annotation file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const json& require(const json& object, const char* key, const std::string& where) {
  if (!object.is_object()) throw AnnotationError(where + ": expected a JSON object");
  auto it = object.find(key);
  if (it == object.end()) {
    throw AnnotationError(where + ": missing required field '" + key + "'");
  }
  return *it;
}

double require_number(const json& object, const char* key, const std::string& where) {
  const json& value = require(object, key, where);
  if (!value.is_number()) {
    throw AnnotationError(where + ": field '" + key + "' must be a number");
  }
  return value.get<double>();
}

std::string image_id_string(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
  throw AnnotationError(where + ": image id must be a string or integer");
}

PixelBox parse_bbox(const json& object, const std::string& where) {
  const json& bbox = require(object, "bbox", where);
  if (!bbox.is_array() || bbox.size() != 4 ||
      !std::all_of(bbox.begin(), bbox.end(), [](const json& v) { return v.is_number(); })) {
    throw AnnotationError(where + ": bbox must be an array of 4 numbers");
  }
  return {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
          bbox[3].get<double>()};
}

ImageInfo parse_image(const json& object, const char* id_key, const std::string& where) {
  ImageInfo image;
  image.image_id = image_id_string(require(object, id_key, where), where);
  image.width = require_number(object, "width", where);
  image.height = require_number(object, "height", where);
  if (!(image.width > 0.0) || !(image.height > 0.0)) {
    throw AnnotationError(where + ": image '" + image.image_id + "' has non-positive dimensions");
  }
  return image;
}

json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw AnnotationError(where + ": malformed JSON: " + e.what());
  }
}

}  // namespace

BoxAnnotation normalize_box(const PixelBox& box, const ImageInfo& image, int class_id,
                            bool clamp) {
  if (!(box.w > 0.0) || !(box.h > 0.0)) {
    throw AnnotationError("non-positive box dimensions");
  }
  double x0 = box.x / image.width;
  double y0 = box.y / image.height;
  double x1 = (box.x + box.w) / image.width;
  double y1 = (box.y + box.h) / image.height;
  const bool outside = x0 < -kBoundsEpsilon || y0 < -kBoundsEpsilon || x1 > 1.0 + kBoundsEpsilon ||
                       y1 > 1.0 + kBoundsEpsilon;
  if (outside && !clamp) throw AnnotationError("box exceeds image bounds");
  if (clamp) {
    x0 = std::clamp(x0, 0.0, 1.0);
    y0 = std::clamp(y0, 0.0, 1.0);
    x1 = std::clamp(x1, 0.0, 1.0);
    y1 = std::clamp(y1, 0.0, 1.0);
    if (!(x1 > x0) || !(y1 > y0)) throw AnnotationError("box lies entirely outside the image");
  }
  BoxAnnotation out;
  out.image_id = image.image_id;
  out.class_id = class_id;
  if (clamp) {
    out.w = x1 - x0;
    out.h = y1 - y0;
    out.cx = 0.5 * (x0 + x1);
    out.cy = 0.5 * (y0 + y1);
  } else {
    out.w = box.w / image.width;
    out.h = box.h / image.height;
    out.cx = (box.x + 0.5 * box.w) / image.width;
    out.cy = (box.y + 0.5 * box.h) / image.height;
  }
  return out;
}

PixelBox denormalize_box(const BoxAnnotation& box, const ImageInfo& image) {
  return {(box.cx - 0.5 * box.w) * image.width, (box.cy - 0.5 * box.h) * image.height,
          box.w * image.width, box.h * image.height};
}

DetectionDataset parse_coco(std::string_view text, const LoadOptions& options) {
  const json root = parse_json(text, "COCO file");
  if (!root.is_object()) throw AnnotationError("COCO file: top level must be an object");

  DetectionDataset dataset;
  dataset.domain = options.domain;

  const json& categories = require(root, "categories", "COCO file");
  if (!categories.is_array()) throw AnnotationError("COCO file: 'categories' must be an array");
  std::map<std::int64_t, std::string> by_id;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const std::string where = "category " + std::to_string(i);
    const json& id = require(categories[i], "id", where);
    const json& name = require(categories[i], "name", where);
    if (!id.is_number_integer() || !name.is_string()) {
      throw AnnotationError(where + ": id must be an integer and name a string");
    }
    if (!by_id.emplace(id.get<std::int64_t>(), name.get<std::string>()).second) {
      throw AnnotationError(where + ": duplicate category id " + id.dump());
    }
  }
  std::unordered_map<std::int64_t, int> dense;
  for (const auto& [id, name] : by_id) {
    dense.emplace(id, static_cast<int>(dataset.classes.size()));
    dataset.classes.push_back(name);
    dataset.original_class_ids.push_back(id);
  }

  const json& images = require(root, "images", "COCO file");
  if (!images.is_array()) throw AnnotationError("COCO file: 'images' must be an array");
  std::unordered_map<std::string, std::size_t> image_index;
  for (std::size_t i = 0; i < images.size(); ++i) {
    ImageInfo image = parse_image(images[i], "id", "image " + std::to_string(i));
    if (!image_index.emplace(image.image_id, dataset.images.size()).second) {
      throw AnnotationError("image " + std::to_string(i) + ": duplicate image id '" +
                            image.image_id + "'");
    }
    dataset.images.push_back(std::move(image));
  }

  const json& anns = require(root, "annotations", "COCO file");
  if (!anns.is_array()) throw AnnotationError("COCO file: 'annotations' must be an array");
  dataset.annotations.reserve(anns.size());
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string where = "annotation " + std::to_string(i);
    const std::string image_id = image_id_string(require(anns[i], "image_id", where), where);
    auto image = image_index.find(image_id);
    if (image == image_index.end()) {
      throw AnnotationError(where + ": references unknown image '" + image_id + "'");
    }
    const json& category = require(anns[i], "category_id", where);
    if (!category.is_number_integer()) throw AnnotationError(where + ": category_id must be an integer");
    auto cls = dense.find(category.get<std::int64_t>());
    if (cls == dense.end()) {
      throw AnnotationError(where + ": unknown category id " + category.dump());
    }
    const PixelBox box = parse_bbox(anns[i], where);
    try {
      dataset.annotations.push_back(
          normalize_box(box, dataset.images[image->second], cls->second, options.clamp));
    } catch (const AnnotationError& e) {
      throw AnnotationError(where + " (image '" + image_id + "'): " + e.what());
    }
  }
  return dataset;
}

DetectionDataset load_coco(const std::filesystem::path& path, const LoadOptions& options) {
  try {
    return parse_coco(read_file(path), options);
  } catch (const AnnotationError& e) {
    throw AnnotationError(path.string() + ": " + e.what());
  }
}

DetectionDataset parse_jsonl(std::string_view text, const LoadOptions& options) {
  DetectionDataset dataset;
  dataset.domain = options.domain;
  bool explicit_classes = false;
  std::unordered_map<std::string, int> class_index;
  std::unordered_map<std::string, std::size_t> image_index;

  std::size_t line_number = 0;
  bool seen_record = false;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_number);
    const json record = parse_json(line, where);
    if (!record.is_object()) throw AnnotationError(where + ": expected a JSON object");

    if (record.contains("classes")) {
      if (seen_record || explicit_classes) {
        throw AnnotationError(where + ": class header must be the first line");
      }
      const json& classes = record["classes"];
      if (!classes.is_array()) throw AnnotationError(where + ": 'classes' must be an array");
      for (const json& name : classes) {
        if (!name.is_string()) throw AnnotationError(where + ": class names must be strings");
        const auto id = static_cast<int>(dataset.classes.size());
        if (!class_index.emplace(name.get<std::string>(), id).second) {
          throw AnnotationError(where + ": duplicate class '" + name.get<std::string>() + "'");
        }
        dataset.classes.push_back(name.get<std::string>());
        dataset.original_class_ids.push_back(id);
      }
      explicit_classes = true;
      if (end == text.size()) break;
      continue;
    }
    seen_record = true;

    ImageInfo image = parse_image(record, "image_id", where);
    auto [slot, inserted] = image_index.emplace(image.image_id, dataset.images.size());
    if (inserted) {
      dataset.images.push_back(image);
    } else {
      const ImageInfo& known = dataset.images[slot->second];
      if (known.width != image.width || known.height != image.height) {
        throw AnnotationError(where + ": image '" + image.image_id +
                              "' redeclared with different dimensions");
      }
    }

    const bool has_class = record.contains("class");
    const bool has_bbox = record.contains("bbox");
    if (has_class != has_bbox) {
      throw AnnotationError(where + ": annotation lines need both 'class' and 'bbox'");
    }
    if (has_class) {
      const json& name = record["class"];
      if (!name.is_string()) throw AnnotationError(where + ": 'class' must be a string");
      auto cls = class_index.find(name.get<std::string>());
      if (cls == class_index.end()) {
        if (explicit_classes) {
          throw AnnotationError(where + ": unknown class '" + name.get<std::string>() + "'");
        }
        const auto id = static_cast<int>(dataset.classes.size());
        cls = class_index.emplace(name.get<std::string>(), id).first;
        dataset.classes.push_back(name.get<std::string>());
        dataset.original_class_ids.push_back(id);
      }
      const PixelBox box = parse_bbox(record, where);
      try {
        dataset.annotations.push_back(normalize_box(box, dataset.images[slot->second],
                                                    cls->second, options.clamp));
      } catch (const AnnotationError& e) {
        throw AnnotationError(where + " (image '" + image.image_id + "'): " + e.what());
      }
    }
    if (end == text.size()) break;
  }
  return dataset;
}

DetectionDataset load_jsonl(const std::filesystem::path& path, const LoadOptions& options) {
  try {
    return parse_jsonl(read_file(path), options);
  } catch (const AnnotationError& e) {
    throw AnnotationError(path.string() + ": " + e.what());
  }
}

void write_jsonl(const DetectionDataset& dataset, std::ostream& out) {
  out << json{{"classes", dataset.classes}}.dump() << '\n';
  std::unordered_map<std::string, const ImageInfo*> images;
  for (const ImageInfo& image : dataset.images) {
    images.emplace(image.image_id, &image);
    json line = json::object();
    line["image_id"] = image.image_id;
    line["width"] = image.width;
    line["height"] = image.height;
    out << line.dump() << '\n';
  }
  for (const BoxAnnotation& ann : dataset.annotations) {
    const ImageInfo& image = *images.at(ann.image_id);
    const PixelBox box = denormalize_box(ann, image);
    json line = json::object();
    line["image_id"] = ann.image_id;
    line["width"] = image.width;
    line["height"] = image.height;
    line["class"] = dataset.classes.at(static_cast<std::size_t>(ann.class_id));
    line["bbox"] = {box.x, box.y, box.w, box.h};
    out << line.dump() << '\n';
  }
}

std::vector<std::string> validate(const DetectionDataset& dataset) {
  std::vector<std::string> violations;
  const std::size_t k = dataset.num_classes();
  if (k == 0) violations.emplace_back("dataset has no classes");
  std::set<std::string> names;
  for (const std::string& name : dataset.classes) {
    if (!names.insert(name).second) violations.push_back("duplicate class name '" + name + "'");
  }
  std::set<std::string> image_ids;
  for (const ImageInfo& image : dataset.images) {
    if (!image_ids.insert(image.image_id).second) {
      violations.push_back("duplicate image id '" + image.image_id + "'");
    }
    if (!(image.width > 0.0) || !(image.height > 0.0)) {
      violations.push_back("image '" + image.image_id + "' has non-positive dimensions");
    }
  }
  for (std::size_t i = 0; i < dataset.annotations.size(); ++i) {
    const BoxAnnotation& a = dataset.annotations[i];
    const std::string name = "annotation " + std::to_string(i) + " (image '" + a.image_id + "')";
    std::vector<std::string> problems;
    if (!image_ids.count(a.image_id)) problems.emplace_back("unknown image");
    if (a.class_id < 0 || static_cast<std::size_t>(a.class_id) >= k) {
      problems.push_back("class_id " + std::to_string(a.class_id) + " outside [0, " +
                         std::to_string(k) + ")");
    }
    if (!(a.cx >= 0.0 && a.cx <= 1.0) || !(a.cy >= 0.0 && a.cy <= 1.0)) {
      problems.emplace_back("center outside [0, 1]");
    }
    if (!(a.w > 0.0 && a.w <= 1.0)) problems.emplace_back("width not in (0, 1]");
    if (!(a.h > 0.0 && a.h <= 1.0)) problems.emplace_back("height not in (0, 1]");
    if (a.cx - 0.5 * a.w < -kBoundsEpsilon || a.cx + 0.5 * a.w > 1.0 + kBoundsEpsilon ||
        a.cy - 0.5 * a.h < -kBoundsEpsilon || a.cy + 0.5 * a.h > 1.0 + kBoundsEpsilon) {
      problems.emplace_back("box exceeds image bounds");
    }
    if (!problems.empty()) {
      std::string joined = name + ": ";
      for (std::size_t p = 0; p < problems.size(); ++p) {
        if (p) joined += "; ";
        joined += problems[p];
      }
      violations.push_back(std::move(joined));
    }
  }
  return violations;
}

void harmonize_classes(DetectionDataset& first, DetectionDataset& second) {
  if (first.classes == second.classes) return;
  std::unordered_map<std::string, int> index;
  for (std::size_t c = 0; c < first.classes.size(); ++c) {
    index.emplace(first.classes[c], static_cast<int>(c));
  }
  std::vector<int> remap(second.classes.size());
  for (std::size_t c = 0; c < second.classes.size(); ++c) {
    auto [it, inserted] = index.emplace(second.classes[c], static_cast<int>(first.classes.size()));
    if (inserted) {
      first.classes.push_back(second.classes[c]);
      first.original_class_ids.push_back(second.original_class_ids.at(c));
    }
    remap[c] = it->second;
  }
  for (BoxAnnotation& ann : second.annotations) {
    ann.class_id = remap.at(static_cast<std::size_t>(ann.class_id));
  }
  second.classes = first.classes;
  second.original_class_ids = first.original_class_ids;
}

std::size_t subsample_count(std::size_t n, double fraction) {
  // The slack absorbs products such as 0.1 * 30 landing one ulp above 3.
  const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n);
}

DetectionDataset subsample(const DetectionDataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("subsample fraction must lie in (0, 1]");
  }
  if (dataset.images.empty()) throw std::invalid_argument("cannot subsample an empty dataset");
  const std::size_t n = dataset.images.size();
  const std::size_t keep = subsample_count(n, fraction);
  if (keep == n) return dataset;

  Rng rng(seed);
  const std::vector<std::size_t> chosen = rng.sample_without_replacement(n, keep);
  DetectionDataset out;
  out.domain = dataset.domain;
  out.classes = dataset.classes;
  out.original_class_ids = dataset.original_class_ids;
  std::set<std::string> kept_ids;
  for (std::size_t index : chosen) {
    out.images.push_back(dataset.images[index]);
    kept_ids.insert(dataset.images[index].image_id);
  }
  for (const BoxAnnotation& ann : dataset.annotations) {
    if (kept_ids.count(ann.image_id)) out.annotations.push_back(ann);
  }
  return out;
}

}  // namespace annotations
}  // namespace care
