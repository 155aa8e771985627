#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "oboi/types.h"

namespace oboi {

// Binary spatial grid over the feature map; at least one cell is set.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> cells;  // row-major, 0/1

  static Mask full(std::size_t rows, std::size_t cols);
  bool at(std::size_t r, std::size_t c) const { return cells[r * cols + c] != 0; }
  std::size_t count() const;
};

// Rescales the box onto the feature grid (x by W'/W, y by H'/H) and marks
// every cell whose center lies in [x1, x2) x [y1, y2). When no center
// qualifies, only the cell holding the box center is marked.
// Throws Error(kInvalidBox).
Mask build_mask(const BoundingBox& bbox, const ImageSize& image, std::size_t feature_rows,
                std::size_t feature_cols);

// [mean, m_2, ..., m_R]: raw mean followed by population central moments.
// Summation runs over the values in ascending order so the result depends
// only on the multiset of inputs. Throws kEmptySupport / kInvalidConfig.
std::vector<double> central_moments(std::span<const double> values, int order);

// Embedding for one detection. ee gives the masked per-channel mean (D),
// aee gives R blocks of D (block n = n-th moment of every channel), logits
// returns the logits unchanged. use_mask=false replaces the mask by the full
// grid. Throws kShapeMismatch, kMissingLogits, kInvalidConfig.
Embedding reduce(const FeatureMap& features, const Mask& mask, const ReductionConfig& config,
                 std::optional<std::span<const float>> logits = std::nullopt);

// Per-dimension standardization fitted on a support set.
struct Standardizer {
  Embedding shift;
  Embedding scale;

  Embedding apply(std::span<const double> x) const;
  bool operator==(const Standardizer&) const = default;
};

// shift = mean, scale = population std (values below 1e-12 become 1).
// Throws kEmptySupport on an empty list, kShapeMismatch on ragged input.
Standardizer standardizer_fit(std::span<const Embedding> embeddings);

}  // namespace oboi
