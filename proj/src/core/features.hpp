#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "image.hpp"

namespace opstego {

enum class FeatureSet { Spam686, MiniRm };

std::string_view to_string(FeatureSet set);
std::optional<FeatureSet> parse_feature_set(std::string_view name);

inline constexpr int kSpamTruncation = 3;
inline constexpr int kSpamBlockDim = 343;  // (2T+1)^3
inline constexpr int kSpamDim = 2 * kSpamBlockDim;

inline constexpr int kMiniRmTruncation = 2;
inline constexpr int kMiniRmBins = 625;  // (2T+1)^4
inline constexpr int kMiniRmResiduals = 6;
inline constexpr int kMiniRmQuantizers = 2;
inline constexpr int kMiniRmDim = kMiniRmResiduals * kMiniRmQuantizers * kMiniRmBins;

int feature_dim(FeatureSet set);

struct FeatureVector {
  FeatureSet set = FeatureSet::Spam686;
  std::vector<double> values;
  std::size_t dim() const noexcept { return values.size(); }
};

/// Second-order SPAM. Block 0 averages the horizontal and vertical
/// directions, block 1 the diagonals. Entry a*49 + b*7 + c (each shifted by
/// +3) holds Pr(D3 = c | D1 = a, D2 = b) for consecutive differences along
/// the direction, clamped to [-3, 3].
FeatureVector spam_extract(const GrayImage& img);

/// Reduced residual co-occurrence model. Residuals, in block order:
/// first-order horizontal and vertical, second-order horizontal and
/// vertical, 3x3 square predictor, 3x3 median predictor; each quantized with
/// q = 1 then q = 2, truncated to [-2, 2], and summarized as a normalized
/// 625-bin histogram of four horizontally adjacent samples.
FeatureVector minirm_extract(const GrayImage& img);

FeatureVector extract(FeatureSet set, const GrayImage& img);

/// Row-major count x dim matrix.
struct FeatureMatrix {
  FeatureSet set = FeatureSet::Spam686;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

FeatureMatrix feature_matrix(std::span<const GrayImage> imgs, FeatureSet set);

/// Feature file: one JSON header line {"set_id", "dim", "count", "labels"}
/// followed by count * dim little-endian float64 values, row-major.
struct FeatureFile {
  FeatureMatrix matrix;
  std::vector<int> labels;
};

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file);
FeatureFile decode_feature_file(std::span<const std::uint8_t> bytes);
void write_feature_file(const std::string& path, const FeatureFile& file);
FeatureFile read_feature_file(const std::string& path);

}  // namespace opstego
