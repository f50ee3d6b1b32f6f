#include "features.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "error.hpp"
#include "parallel.hpp"

namespace opstego {

namespace {

struct Direction {
  int dr, dc;
};

// Horizontal/vertical group first, then diagonals. Within a group, each pair
// of directions that swaps under a left-right mirror is summed first.
constexpr std::array<Direction, 8> kSpamDirections = {{
    {0, 1}, {0, -1}, {1, 0}, {-1, 0},    // straight
    {1, 1}, {1, -1}, {-1, -1}, {-1, 1},  // diagonal
}};

using SpamMatrix = std::array<double, kSpamBlockDim>;

SpamMatrix spam_direction(const GrayImage& img, Direction d) {
  constexpr int T = kSpamTruncation;
  constexpr int S = 2 * T + 1;
  std::array<std::uint64_t, kSpamBlockDim> counts{};
  const int w = img.width(), h = img.height();
  auto in_range = [&](int r, int c) { return r >= 0 && r < h && c >= 0 && c < w; };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const int r3 = r + 3 * d.dr, c3 = c + 3 * d.dc;
      if (!in_range(r3, c3)) continue;
      const int p0 = img.at(r, c), p1 = img.at(r + d.dr, c + d.dc);
      const int p2 = img.at(r + 2 * d.dr, c + 2 * d.dc), p3 = img.at(r3, c3);
      const int a = std::clamp(p0 - p1, -T, T) + T;
      const int b = std::clamp(p1 - p2, -T, T) + T;
      const int e = std::clamp(p2 - p3, -T, T) + T;
      ++counts[std::size_t((a * S + b) * S + e)];
    }
  SpamMatrix m{};
  for (int ab = 0; ab < S * S; ++ab) {
    std::uint64_t total = 0;
    for (int e = 0; e < S; ++e) total += counts[std::size_t(ab * S + e)];
    if (total == 0) continue;
    for (int e = 0; e < S; ++e) m[std::size_t(ab * S + e)] = double(counts[std::size_t(ab * S + e)]) / double(total);
  }
  return m;
}

void require_size(const GrayImage& img, int min_side, const char* what) {
  if (img.width() < min_side || img.height() < min_side)
    fail(ErrorCode::InvalidArgument, std::string(what) + ": image too small");
}

std::vector<double> residual(const GrayImage& img, int type) {
  const int h = img.height() - 2, w = img.width() - 2;
  std::vector<double> out(std::size_t(h) * std::size_t(w));
  auto I = [&](int r, int c) { return double(img.at(r + 1, c + 1)); };
  std::array<std::uint8_t, 9> window{};
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double v = 0.0;
      switch (type) {
        case 0: v = I(r, c + 1) - I(r, c); break;
        case 1: v = I(r + 1, c) - I(r, c); break;
        case 2: v = I(r, c - 1) - 2.0 * I(r, c) + I(r, c + 1); break;
        case 3: v = I(r - 1, c) - 2.0 * I(r, c) + I(r + 1, c); break;
        case 4: {
          const double corners = I(r - 1, c - 1) + I(r - 1, c + 1) + I(r + 1, c - 1) + I(r + 1, c + 1);
          const double edges = I(r - 1, c) + I(r + 1, c) + I(r, c - 1) + I(r, c + 1);
          v = (2.0 * edges - corners - 4.0 * I(r, c)) / 4.0;
          break;
        }
        default: {
          std::size_t n = 0;
          for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) window[n++] = img.at(r + 1 + dr, c + 1 + dc);
          std::nth_element(window.begin(), window.begin() + 4, window.end());
          v = double(window[4]) - I(r, c);
          break;
        }
      }
      out[std::size_t(r) * std::size_t(w) + std::size_t(c)] = v;
    }
  return out;
}

void cooccurrence(const std::vector<double>& res, int rows, int cols, double q, std::span<double> block) {
  constexpr int T = kMiniRmTruncation;
  constexpr int S = 2 * T + 1;
  std::vector<int> quantized(res.size());
  for (std::size_t i = 0; i < res.size(); ++i)
    quantized[i] = std::clamp(int(std::round(res[i] / q)), -T, T) + T;
  std::array<std::uint64_t, kMiniRmBins> counts{};
  std::uint64_t total = 0;
  for (int r = 0; r < rows; ++r) {
    const int* row = &quantized[std::size_t(r) * std::size_t(cols)];
    for (int c = 0; c + 3 < cols; ++c) {
      ++counts[std::size_t(((row[c] * S + row[c + 1]) * S + row[c + 2]) * S + row[c + 3])];
      ++total;
    }
  }
  for (std::size_t i = 0; i < counts.size(); ++i) block[i] = double(counts[i]) / double(total);
}

}  // namespace

std::string_view to_string(FeatureSet set) { return set == FeatureSet::Spam686 ? "spam686" : "minirm"; }

std::optional<FeatureSet> parse_feature_set(std::string_view name) {
  if (name == "spam686") return FeatureSet::Spam686;
  if (name == "minirm") return FeatureSet::MiniRm;
  return std::nullopt;
}

int feature_dim(FeatureSet set) { return set == FeatureSet::Spam686 ? kSpamDim : kMiniRmDim; }

FeatureVector spam_extract(const GrayImage& img) {
  require_size(img, 4, "spam686");
  std::array<SpamMatrix, 8> per_dir;
  for (std::size_t d = 0; d < kSpamDirections.size(); ++d) per_dir[d] = spam_direction(img, kSpamDirections[d]);
  FeatureVector fv{FeatureSet::Spam686, std::vector<double>(kSpamDim)};
  for (std::size_t group = 0; group < 2; ++group) {
    const auto& m = per_dir;
    const std::size_t g = group * 4;
    for (std::size_t i = 0; i < std::size_t(kSpamBlockDim); ++i)
      fv.values[group * kSpamBlockDim + i] = ((m[g][i] + m[g + 1][i]) + (m[g + 2][i] + m[g + 3][i])) / 4.0;
  }
  return fv;
}

FeatureVector minirm_extract(const GrayImage& img) {
  require_size(img, 8, "minirm");
  const int rows = img.height() - 2, cols = img.width() - 2;
  FeatureVector fv{FeatureSet::MiniRm, std::vector<double>(kMiniRmDim)};
  std::span<double> out(fv.values);
  for (int type = 0; type < kMiniRmResiduals; ++type) {
    const auto res = residual(img, type);
    for (int qi = 0; qi < kMiniRmQuantizers; ++qi) {
      const std::size_t offset = std::size_t(type * kMiniRmQuantizers + qi) * kMiniRmBins;
      cooccurrence(res, rows, cols, double(qi + 1), out.subspan(offset, kMiniRmBins));
    }
  }
  return fv;
}

FeatureVector extract(FeatureSet set, const GrayImage& img) {
  return set == FeatureSet::Spam686 ? spam_extract(img) : minirm_extract(img);
}

FeatureMatrix feature_matrix(std::span<const GrayImage> imgs, FeatureSet set) {
  if (imgs.empty()) fail(ErrorCode::InvalidArgument, "feature_matrix needs at least one image");
  FeatureMatrix m{set, imgs.size(), std::size_t(feature_dim(set)), {}};
  m.data.resize(m.rows * m.cols);
  parallel_for(imgs.size(), [&](std::size_t i) {
    const auto fv = extract(set, imgs[i]);
    std::copy(fv.values.begin(), fv.values.end(), m.data.begin() + long(i * m.cols));
  });
  return m;
}

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file) {
  const auto& m = file.matrix;
  if (file.labels.size() != m.rows) fail(ErrorCode::InvalidArgument, "label count does not match feature rows");
  nlohmann::ordered_json header;
  header["set_id"] = std::string(to_string(m.set));
  header["dim"] = m.cols;
  header["count"] = m.rows;
  header["labels"] = file.labels;
  const std::string line = header.dump() + "\n";
  std::vector<std::uint8_t> out(line.begin(), line.end());
  out.reserve(out.size() + m.data.size() * 8);
  for (double v : m.data) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(std::uint8_t(bits >> (8 * b)));
  }
  return out;
}

FeatureFile decode_feature_file(std::span<const std::uint8_t> bytes) {
  const auto newline = std::find(bytes.begin(), bytes.end(), std::uint8_t('\n'));
  if (newline == bytes.end()) fail(ErrorCode::Parse, "feature file: missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin(), newline);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("feature file header: ") + e.what());
  }
  FeatureFile file;
  try {
    const auto set = parse_feature_set(header.at("set_id").get<std::string>());
    if (!set) fail(ErrorCode::Parse, "feature file: unknown set_id");
    file.matrix.set = *set;
    file.matrix.cols = header.at("dim").get<std::size_t>();
    file.matrix.rows = header.at("count").get<std::size_t>();
    file.labels = header.at("labels").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("feature file header: ") + e.what());
  }
  if (file.labels.size() != file.matrix.rows) fail(ErrorCode::Parse, "feature file: label count mismatch");
  if (int(file.matrix.cols) != feature_dim(file.matrix.set)) fail(ErrorCode::Parse, "feature file: dim mismatch");
  const auto payload = bytes.subspan(std::size_t(newline - bytes.begin()) + 1);
  const std::size_t n = file.matrix.rows * file.matrix.cols;
  if (payload.size() != n * 8) fail(ErrorCode::Parse, "feature file: payload size mismatch");
  file.matrix.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t(payload[i * 8 + std::size_t(b)]) << (8 * b);
    file.matrix.data[i] = std::bit_cast<double>(bits);
  }
  return file;
}

void write_feature_file(const std::string& path, const FeatureFile& file) {
  const auto bytes = encode_feature_file(file);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

FeatureFile read_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_feature_file(bytes);
}

}  // namespace opstego
