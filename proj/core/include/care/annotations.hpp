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
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace care {

enum class Domain { kSource, kTarget };

std::string_view to_string(Domain domain);
Domain domain_from_string(std::string_view name);

namespace annotations {

/// Boundary slack used by the image-bounds check, in normalized units.
inline constexpr double kBoundsEpsilon = 1e-6;

/// One labeled box in normalized center form.
struct BoxAnnotation {
  std::string image_id;
  int class_id = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool operator==(const BoxAnnotation&) const = default;
};

struct ImageInfo {
  std::string image_id;
  double width = 0.0;   // pixels
  double height = 0.0;  // pixels

  bool operator==(const ImageInfo&) const = default;
};

/// Absolute top-left pixel box, as stored in COCO and JSONL files.
struct PixelBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct DetectionDataset {
  Domain domain = Domain::kSource;
  std::vector<std::string> classes;
  // Original category id for each dense class index (COCO ids, or the
  // dense index itself for JSONL input).
  std::vector<std::int64_t> original_class_ids;
  std::vector<ImageInfo> images;
  std::vector<BoxAnnotation> annotations;

  std::size_t num_classes() const { return classes.size(); }
  bool operator==(const DetectionDataset&) const = default;
};

class AnnotationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadOptions {
  Domain domain = Domain::kSource;
  // Clip boxes that overshoot the image instead of rejecting them.
  bool clamp = false;
};

DetectionDataset load_coco(const std::filesystem::path& path, const LoadOptions& options = {});
DetectionDataset parse_coco(std::string_view text, const LoadOptions& options = {});

DetectionDataset load_jsonl(const std::filesystem::path& path, const LoadOptions& options = {});
DetectionDataset parse_jsonl(std::string_view text, const LoadOptions& options = {});

/// Writes the JSONL format: a class header line, one bare line per image
/// ({image_id, width, height}), then one line per annotation.
void write_jsonl(const DetectionDataset& dataset, std::ostream& out);

/// Converts an absolute pixel box into normalized center form. Throws on
/// non-positive dimensions or bounds overshoot (unless clamping).
BoxAnnotation normalize_box(const PixelBox& box, const ImageInfo& image, int class_id, bool clamp);
PixelBox denormalize_box(const BoxAnnotation& box, const ImageInfo& image);

/// Human-readable invariant violations; empty iff the dataset is well formed.
std::vector<std::string> validate(const DetectionDataset& dataset);

/// Image-level uniform subsample keeping ceil(fraction * |images|) images
/// and all of their annotations, in original order.
DetectionDataset subsample(const DetectionDataset& dataset, double fraction, std::uint64_t seed);

/// Rewrites both datasets onto one class vocabulary: the first dataset's
/// classes in order, followed by classes only the second one uses.
void harmonize_classes(DetectionDataset& first, DetectionDataset& second);

/// Number of items kept by subsample() for a pool of n.
std::size_t subsample_count(std::size_t n, double fraction);

}  // namespace annotations
}  // namespace care
