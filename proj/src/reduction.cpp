#include "oboi/reduction.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "oboi/error.h"

namespace oboi {
namespace {

constexpr double kScaleFloor = 1e-12;

// Writes the R moments of `values` into out[0], out[stride], ...
// `values` is sorted in place.
void moments_into(std::span<double> values, int order, double* out, std::size_t stride) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  out[0] = mean;
  if (order == 1) return;

  double acc[8] = {};
  for (double v : values) {
    const double dev = v - mean;
    double p = dev;
    for (int k = 1; k < order; ++k) {
      p *= dev;
      acc[k] += p;
    }
  }
  for (int k = 1; k < order; ++k) out[k * stride] = acc[k] / n;
}

void check_order(int order) {
  if (order < 1 || order > 8) {
    throw Error(ErrorCode::kInvalidConfig, "moment order must be in [1, 8], got " + std::to_string(order));
  }
}

}  // namespace

Mask Mask::full(std::size_t rows, std::size_t cols) {
  return Mask{rows, cols, std::vector<std::uint8_t>(rows * cols, 1)};
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

Mask build_mask(const BoundingBox& bbox, const ImageSize& image, std::size_t feature_rows,
                std::size_t feature_cols) {
  if (!box_is_valid(bbox, image)) throw Error(ErrorCode::kInvalidBox, "bounding box outside image or empty");
  if (feature_rows == 0 || feature_cols == 0) {
    throw Error(ErrorCode::kShapeMismatch, "feature grid must be non-empty");
  }
  Mask mask{feature_rows, feature_cols, std::vector<std::uint8_t>(feature_rows * feature_cols, 0)};
  const double cell_h = image.height / static_cast<double>(feature_rows);
  const double cell_w = image.width / static_cast<double>(feature_cols);
  bool any = false;
  for (std::size_t r = 0; r < feature_rows; ++r) {
    const double cy = (static_cast<double>(r) + 0.5) * cell_h;
    if (cy < bbox.y1 || cy >= bbox.y2) continue;
    for (std::size_t c = 0; c < feature_cols; ++c) {
      const double cx = (static_cast<double>(c) + 0.5) * cell_w;
      if (cx >= bbox.x1 && cx < bbox.x2) {
        mask.cells[r * feature_cols + c] = 1;
        any = true;
      }
    }
  }
  if (!any) {
    auto clamp_cell = [](double pos, double cell, std::size_t n) {
      double idx = std::floor(pos / cell);
      return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(n - 1)));
    };
    std::size_t r = clamp_cell(0.5 * (bbox.y1 + bbox.y2), cell_h, feature_rows);
    std::size_t c = clamp_cell(0.5 * (bbox.x1 + bbox.x2), cell_w, feature_cols);
    mask.cells[r * feature_cols + c] = 1;
  }
  return mask;
}

std::vector<double> central_moments(std::span<const double> values, int order) {
  check_order(order);
  if (values.empty()) throw Error(ErrorCode::kEmptySupport, "central moments of an empty set");
  std::vector<double> scratch(values.begin(), values.end());
  std::vector<double> out(static_cast<std::size_t>(order));
  moments_into(scratch, order, out.data(), 1);
  return out;
}

Embedding reduce(const FeatureMap& features, const Mask& mask, const ReductionConfig& config,
                 std::optional<std::span<const float>> logits) {
  if (config.mode == ReductionMode::kLogits) {
    if (!logits) throw Error(ErrorCode::kMissingLogits, "mode=logits requires a logits vector");
    return Embedding(logits->begin(), logits->end());
  }
  const int order = config.mode == ReductionMode::kEe ? 1 : config.order;
  check_order(order);
  if (features.height * features.width * features.depth != features.data.size() ||
      features.data.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "feature map dims do not match its data");
  }
  if (mask.rows != features.height || mask.cols != features.width ||
      mask.cells.size() != mask.rows * mask.cols) {
    throw Error(ErrorCode::kShapeMismatch, "mask dims do not match the feature grid");
  }

  std::vector<std::size_t> cells;
  for (std::size_t k = 0; k < mask.cells.size(); ++k) {
    if (!config.use_mask || mask.cells[k]) cells.push_back(k);
  }
  if (cells.empty()) throw Error(ErrorCode::kEmptySupport, "mask selects no cells");

  const std::size_t depth = features.depth;
  Embedding out(static_cast<std::size_t>(order) * depth);
  std::vector<double> column(cells.size());
  for (std::size_t d = 0; d < depth; ++d) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      column[j] = static_cast<double>(features.data[cells[j] * depth + d]);
    }
    moments_into(column, order, out.data() + d, depth);
  }
  return out;
}

Embedding Standardizer::apply(std::span<const double> x) const {
  if (x.size() != shift.size()) throw Error(ErrorCode::kShapeMismatch, "embedding size differs from standardizer");
  Embedding y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - shift[i]) / scale[i];
  return y;
}

Standardizer standardizer_fit(std::span<const Embedding> embeddings) {
  if (embeddings.empty()) throw Error(ErrorCode::kEmptySupport, "standardizer fitted on no embeddings");
  const std::size_t dims = embeddings.front().size();
  for (const auto& e : embeddings) {
    if (e.size() != dims) throw Error(ErrorCode::kShapeMismatch, "embeddings differ in size");
  }
  const double n = static_cast<double>(embeddings.size());
  Standardizer s{Embedding(dims, 0.0), Embedding(dims, 0.0)};
  for (const auto& e : embeddings) {
    for (std::size_t i = 0; i < dims; ++i) s.shift[i] += e[i];
  }
  for (auto& v : s.shift) v /= n;
  for (const auto& e : embeddings) {
    for (std::size_t i = 0; i < dims; ++i) {
      const double dev = e[i] - s.shift[i];
      s.scale[i] += dev * dev;
    }
  }
  for (auto& v : s.scale) {
    v = std::sqrt(v / n);
    if (v < kScaleFloor) v = 1.0;
  }
  return s;
}

}  // namespace oboi
