#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "core/diag.hpp"
#include "core/error.hpp"
#include "core/image.hpp"
#include "core/ops.hpp"

using namespace opstego;

namespace {

GrayImage row_image(std::initializer_list<int> values) {
  GrayImage img(int(values.size()), 1);
  int c = 0;
  for (int v : values) img.at(0, c++) = std::uint8_t(v);
  return img;
}

double table_sum(const JointProb& jp) { return std::accumulate(jp.table().begin(), jp.table().end(), 0.0); }

}  // namespace

TEST_CASE("difference fields") {
  const auto flat = diff_fields(GrayImage(6, 4, 50));
  CHECK(flat.rows == 4);
  CHECK(flat.cols == 4);
  for (int v : flat.backward) CHECK(v == 0);
  for (int v : flat.forward) CHECK(v == 0);

  const auto a = diff_fields(row_image({10, 12, 11}));
  REQUIRE(a.backward.size() == 1);
  CHECK(a.backward[0] == 2);
  CHECK(a.forward[0] == 1);

  const auto b = diff_fields(row_image({0, 1, 0}));
  CHECK(b.backward[0] == 1);
  CHECK(b.forward[0] == 1);
  CHECK_THROWS_AS(diff_fields(row_image({1, 2})), Error);
}

TEST_CASE("joint probability examples") {
  const auto flat = joint_probability(GrayImage(8, 8, 90));
  CHECK(flat.bound() == kDefaultSupportBound);
  CHECK(flat(0, 0) == 1.0);
  CHECK(table_sum(flat) == 1.0);

  const auto peak = joint_probability(row_image({0, 1, 0}));
  CHECK(peak(1, 1) == 1.0);
  CHECK(peak.total_pairs() == 1);
  CHECK(quadrant_mass(peak) == 1.0);
  CHECK(quadrant_mass(flat) == 0.0);

  const auto img = synth_image(64, 64, 2, 0);
  CHECK(table_sum(joint_probability(img)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(table_sum(joint_probability(img, 2)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("clamping to the support bound") {
  const auto jp = joint_probability(row_image({0, 200, 0}), 4);
  CHECK(jp(4, 4) == 1.0);
  const auto jp2 = joint_probability(row_image({255, 0, 255}), 4);
  CHECK(jp2(-4, -4) == 1.0);
}

TEST_CASE("extrema ratio") {
  CHECK(extrema_ratio(GrayImage(5, 5, 3)) == 0.0);
  CHECK(extrema_ratio(row_image({0, 1, 0})) == 1.0);
  CHECK(extrema_ratio(row_image({0, 1, 2, 3})) == 0.0);
  CHECK(extrema_ratio(row_image({5, 1, 5, 1, 5})) == 1.0);
  CHECK(extrema_ratio(row_image({0, 1, 1, 0})) == 0.0);
}

TEST_CASE("far mass") {
  const auto jp = joint_probability(row_image({0, 6, 0, 1, 0}), 16);
  // Pixels: (6,6), (-6,-1), (1,1).
  CHECK(far_mass(jp, 5) == doctest::Approx(2.0 / 3.0));
  CHECK(far_mass(jp, 7) == 0.0);
  CHECK(far_mass(jp, 0) == doctest::Approx(1.0));
}

TEST_CASE("CSV export and parse") {
  const auto jp = joint_probability(GrayImage(6, 6, 9), 1);
  CHECK(export_jointprob(jp) == "0,0,0\n0,1,0\n0,0,0\n");
  const auto img = synth_image(48, 40, 8, 1);
  const auto full = joint_probability(img, 6);
  const auto back = parse_jointprob_csv(export_jointprob(full));
  CHECK(back.bound() == 6);
  CHECK(back.table() == full.table());
  CHECK_THROWS_AS(parse_jointprob_csv("1,0\n0,0,0\n"), Error);
  CHECK_THROWS_AS(parse_jointprob_csv("a,b\nc,d\n"), Error);
}

TEST_CASE("averaging tables") {
  const auto a = joint_probability(GrayImage(4, 4, 1), 2);
  const auto b = joint_probability(row_image({0, 1, 0}), 2);
  const auto avg = average_joint_probability({a, b});
  CHECK(avg(0, 0) == 0.5);
  CHECK(avg(1, 1) == 0.5);
  CHECK_THROWS_AS(average_joint_probability({a, joint_probability(GrayImage(4, 4, 1), 3)}), Error);
  CHECK_THROWS_AS(average_joint_probability({}), Error);
}

TEST_CASE("invariant to a global offset without saturation") {
  for (std::uint64_t i = 0; i < 5; ++i) {
    auto img = synth_image(64, 64, 3, i);
    for (auto& p : img.pixels()) p = std::uint8_t(20 + p * 200 / 255);
    auto shifted = img;
    for (auto& p : shifted.pixels()) p = std::uint8_t(p + 30);
    CHECK(joint_probability(img).table() == joint_probability(shifted).table());
  }
}

TEST_CASE("tendencies on a small corpus") {
  const auto corpus = synth_corpus(20, 96, 96, 13);
  int med = 0, mean = 0, sharp = 0;
  for (const auto& img : corpus) {
    const auto jp = joint_probability(img);
    med += quadrant_mass(joint_probability(median_filter(img, 3))) <= quadrant_mass(jp);
    mean += extrema_ratio(mean_filter(img, 3)) < extrema_ratio(img);
    sharp += far_mass(joint_probability(unsharp_mask(img, 1.0, 1.0)), 5) >= far_mass(jp, 5);
  }
  CHECK(med >= 18);
  CHECK(mean >= 18);
  CHECK(sharp >= 18);
}
