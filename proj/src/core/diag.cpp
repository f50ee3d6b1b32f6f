#include "diag.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "error.hpp"

namespace opstego {

namespace {

void require_width(const GrayImage& img) {
  if (img.width() < 3) fail(ErrorCode::InvalidArgument, "difference fields need width >= 3");
}

}  // namespace

DiffFields diff_fields(const GrayImage& img) {
  require_width(img);
  DiffFields f;
  f.rows = img.height();
  f.cols = img.width() - 2;
  f.backward.reserve(std::size_t(f.rows) * std::size_t(f.cols));
  f.forward.reserve(f.backward.capacity());
  for (int r = 0; r < img.height(); ++r)
    for (int c = 1; c + 1 < img.width(); ++c) {
      f.backward.push_back(int(img.at(r, c)) - int(img.at(r, c - 1)));
      f.forward.push_back(int(img.at(r, c)) - int(img.at(r, c + 1)));
    }
  return f;
}

JointProb::JointProb(int bound, std::vector<double> table, std::uint64_t total_pairs)
    : bound_(bound), table_(std::move(table)), total_pairs_(total_pairs) {
  if (bound < 1) fail(ErrorCode::InvalidArgument, "support bound must be positive");
  if (table_.size() != std::size_t(side()) * std::size_t(side()))
    fail(ErrorCode::InvalidArgument, "joint probability table has wrong size");
}

JointProb joint_probability(const GrayImage& img, int bound) {
  if (bound < 1) fail(ErrorCode::InvalidArgument, "support bound must be positive");
  const auto f = diff_fields(img);
  const int side = 2 * bound + 1;
  std::vector<std::uint64_t> counts(std::size_t(side) * std::size_t(side), 0);
  for (std::size_t i = 0; i < f.backward.size(); ++i) {
    const int x = std::clamp(f.backward[i], -bound, bound) + bound;
    const int y = std::clamp(f.forward[i], -bound, bound) + bound;
    ++counts[std::size_t(x) * std::size_t(side) + std::size_t(y)];
  }
  const auto total = std::uint64_t(f.backward.size());
  std::vector<double> table(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) table[i] = double(counts[i]) / double(total);
  return JointProb(bound, std::move(table), total);
}

JointProb average_joint_probability(const std::vector<JointProb>& tables) {
  if (tables.empty()) fail(ErrorCode::InvalidArgument, "no tables to average");
  const int bound = tables.front().bound();
  std::vector<double> sum(tables.front().table().size(), 0.0);
  std::uint64_t pairs = 0;
  for (const auto& t : tables) {
    if (t.bound() != bound) fail(ErrorCode::DimensionMismatch, "tables differ in support bound");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += t.table()[i];
    pairs += t.total_pairs();
  }
  for (auto& v : sum) v /= double(tables.size());
  return JointProb(bound, std::move(sum), pairs);
}

double quadrant_mass(const JointProb& jp) {
  double mass = 0.0;
  for (int x = -jp.bound(); x <= jp.bound(); ++x)
    for (int y = -jp.bound(); y <= jp.bound(); ++y)
      if ((x > 0 && y > 0) || (x < 0 && y < 0)) mass += jp(x, y);
  return mass;
}

double far_mass(const JointProb& jp, int radius) {
  double mass = 0.0;
  for (int x = -jp.bound(); x <= jp.bound(); ++x)
    for (int y = -jp.bound(); y <= jp.bound(); ++y)
      if (std::max(std::abs(x), std::abs(y)) >= radius) mass += jp(x, y);
  return mass;
}

double extrema_ratio(const GrayImage& img) {
  const auto f = diff_fields(img);
  std::size_t extrema = 0;
  for (std::size_t i = 0; i < f.backward.size(); ++i) extrema += f.backward[i] * f.forward[i] > 0;
  return double(extrema) / double(f.backward.size());
}

std::string export_jointprob(const JointProb& jp) {
  std::string out;
  char buf[32];
  for (int x = -jp.bound(); x <= jp.bound(); ++x) {
    for (int y = -jp.bound(); y <= jp.bound(); ++y) {
      if (y != -jp.bound()) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", jp(x, y));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

JointProb parse_jointprob_csv(std::string_view csv) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    ++rows;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string_view::npos) comma = line.size();
      const std::string cell(line.substr(start, comma - start));
      char* parse_end = nullptr;
      const double v = std::strtod(cell.c_str(), &parse_end);
      if (cell.empty() || parse_end != cell.c_str() + cell.size()) fail(ErrorCode::Parse, "bad CSV cell: " + cell);
      values.push_back(v);
      start = comma + 1;
    }
  }
  if (rows == 0 || rows % 2 == 0 || values.size() != rows * rows)
    fail(ErrorCode::Parse, "joint probability CSV must be a square grid of odd side");
  return JointProb(int(rows / 2), std::move(values), 0);
}

}  // namespace opstego
