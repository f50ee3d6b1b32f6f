#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/error.hpp"
#include "core/image.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"

using namespace opstego;

namespace {

GrayImage random_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = std::uint8_t(rng.below(256));
  return img;
}

GrayImage ramp(int w, int h) {
  GrayImage img(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) img.at(r, c) = std::uint8_t((r * w + c) * 255 / (w * h - 1));
  return img;
}

double variance(const GrayImage& img) {
  double m = 0;
  for (auto p : img.pixels()) m += p;
  m /= double(img.size());
  double v = 0;
  for (auto p : img.pixels()) v += (p - m) * (p - m);
  return v / double(img.size());
}

// Window extremes of the symmetric-padded input.
std::pair<int, int> window_range(const GrayImage& img, int r, int c, int hsize) {
  int lo = 255, hi = 0;
  const int h = hsize / 2;
  for (int dr = -h; dr <= h; ++dr)
    for (int dc = -h; dc <= h; ++dc) {
      const int v = img.mirrored(r + dr, c + dc);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return {lo, hi};
}

// Standard luminance table, row-major.
constexpr std::array<int, 64> kStandardLuma = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,  14, 13, 16, 24, 40,  57,
    69, 56, 14, 17, 22,  29,  51,  87,  80, 62, 18, 22, 37,  56,  68,  109, 103, 77, 24, 35, 55,  64,
    81, 104, 113, 92, 49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

}  // namespace

TEST_CASE("gamma correction") {
  const auto img = random_image(16, 16, 1);
  CHECK(gamma_correct(img, 1.0) == img);
  CHECK(apply({OpKind::GC, params::Gamma{1.0}}, img) == img);

  const GrayImage v64(1, 1, 64), v128(1, 1, 128);
  const long expect_a = std::lround(255.0 * std::sqrt(64.0 / 255.0));
  const long expect_b = std::lround(255.0 * (128.0 / 255.0) * (128.0 / 255.0));
  CHECK(expect_a == 128);
  CHECK(expect_b == 64);
  CHECK(gamma_correct(v64, 0.5).at(0, 0) == expect_a);
  CHECK(gamma_correct(v128, 2.0).at(0, 0) == expect_b);
  CHECK_THROWS_AS(gamma_correct(img, 0.0), Error);
}

TEST_CASE("gamma round trip on smooth gradients") {
  GrayImage g(256, 64);
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 256; ++c) g.at(r, c) = std::uint8_t(c);
  for (double gamma : kGammaValues) {
    CAPTURE(gamma);
    const auto back = gamma_correct(gamma_correct(g, gamma), 1.0 / gamma);
    std::size_t ok = 0;
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 256; ++c) {
        const bool close = std::abs(int(back.at(r, c)) - c) <= 2;
        ok += close;
        // Steep gammas merge the darkest levels in the forward pass; those
        // are the only pixels allowed to miss.
        if (!close) CHECK(c < 24);
      }
    if (gamma <= 1.4) CHECK(double(ok) / double(g.size()) >= 0.99);
  }
  // A gradient clear of the collapsed dark end round-trips for every gamma.
  GrayImage h(232, 8);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 232; ++c) h.at(r, c) = std::uint8_t(24 + c);
  for (double gamma : kGammaValues) {
    const auto back = gamma_correct(gamma_correct(h, gamma), 1.0 / gamma);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(int(back.pixels()[i]) - int(h.pixels()[i])) <= 2);
  }
}

TEST_CASE("histogram equalization") {
  GrayImage two(2, 1);
  two.at(0, 1) = 255;
  const auto out = hist_equalize(two);
  CHECK(out.at(0, 0) == 128);
  CHECK(out.at(0, 1) == 255);
  CHECK(hist_equalize(GrayImage(5, 5, 40)) == GrayImage(5, 5, 255));

  const auto img = random_image(32, 32, 3);
  const auto eq = hist_equalize(img);
  for (std::size_t i = 0; i < img.size(); ++i)
    for (std::size_t j = 0; j < img.size(); j += 37)
      if (img.pixels()[i] <= img.pixels()[j]) CHECK(eq.pixels()[i] <= eq.pixels()[j]);
}

TEST_CASE("histogram equalization modifies most pixels of synthetic images") {
  const auto corpus = synth_corpus(30, 128, 128, 11);
  double total = 0;
  for (const auto& img : corpus) total += modification_ratio(img, hist_equalize(img));
  CHECK(total / double(corpus.size()) >= 0.95);
}

TEST_CASE("unsharp mask") {
  CHECK(unsharp_mask(GrayImage(12, 12, 90), 1.0, 1.0) == GrayImage(12, 12, 90));
  GrayImage dot(9, 9, 0);
  dot.at(4, 4) = 255;
  CHECK(unsharp_mask(dot, 1.0, 1.0).at(4, 4) == 255);
  // Sharpening raises contrast across an edge.
  GrayImage edge(12, 12, 80);
  for (int r = 0; r < 12; ++r)
    for (int c = 6; c < 12; ++c) edge.at(r, c) = 160;
  const auto s = unsharp_mask(edge, 1.0, 1.0);
  CHECK(s.at(5, 5) < 80);
  CHECK(s.at(5, 6) > 160);
}

TEST_CASE("linear filters") {
  const GrayImage flat(10, 10, 33);
  CHECK(linear_filter(flat, mean_kernel(5)) == flat);
  CHECK(linear_filter(flat, gaussian_kernel(7, 1.3)) == flat);

  GrayImage nine(3, 3);
  for (int i = 0; i < 9; ++i) nine.pixels()[std::size_t(i)] = std::uint8_t(i);
  CHECK(mean_filter(nine, 3).at(1, 1) == 4);

  const auto k = gaussian_kernel(5, 1.0);
  double sum = 0;
  for (double v : k) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k[12] > k[11]);
  CHECK(k[0] == doctest::Approx(k[24]));
  CHECK_THROWS_AS(mean_kernel(4), Error);
}

TEST_CASE("median filter") {
  CHECK(median_filter(GrayImage(9, 9, 17), 5) == GrayImage(9, 9, 17));
  GrayImage nine(3, 3);
  for (int i = 0; i < 9; ++i) nine.pixels()[std::size_t(i)] = std::uint8_t(i + 1);
  CHECK(median_filter(nine, 3).at(1, 1) == 5);
  GrayImage impulse(3, 3, 0);
  impulse.at(1, 1) = 255;
  CHECK(median_filter(impulse, 3).at(1, 1) == 0);
}

TEST_CASE("wiener filter") {
  CHECK(wiener_filter(GrayImage(10, 10, 200), 3) == GrayImage(10, 10, 200));
  GrayImage board(16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) board.at(r, c) = (r + c) % 2 ? 255 : 0;
  CHECK(variance(wiener_filter(board, 3)) < variance(board));
}

TEST_CASE("window filters stay within the padded window range") {
  const auto img = random_image(20, 14, 9);
  for (int hsize : kWindowSizes) {
    const std::vector<GrayImage> outs = {mean_filter(img, hsize), gaussian_filter(img, hsize, 1.2),
                                         median_filter(img, hsize), wiener_filter(img, hsize)};
    for (const auto& out : outs)
      for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) {
          const auto [lo, hi] = window_range(img, r, c, hsize);
          CHECK(int(out.at(r, c)) >= lo);
          CHECK(int(out.at(r, c)) <= hi);
        }
  }
}

TEST_CASE("scaling") {
  const auto img = random_image(20, 16, 4);
  CHECK(scale_image(img, 1.0) == img);

  GrayImage tiny(2, 2, 0);
  tiny.at(1, 0) = tiny.at(1, 1) = 255;
  const auto up = scale_image(tiny, 2.0);
  REQUIRE(up.width() == 4);
  REQUIRE(up.height() == 4);
  // Half-pixel centers: output row y samples source row (y + 0.5) / 2 - 0.5,
  // clamped to [0, 1], then blends rows 0 and 1.
  for (int y = 0; y < 4; ++y) {
    const double src = std::clamp((y + 0.5) / 2.0 - 0.5, 0.0, 1.0);
    const auto expected = std::uint8_t(std::lround(255.0 * src));
    for (int x = 0; x < 4; ++x) CHECK(up.at(y, x) == expected);
  }
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y + 1 < 4; ++y) CHECK(up.at(y, x) <= up.at(y + 1, x));

  const auto down = scale_image(random_image(100, 60, 1), 0.55);
  CHECK(down.width() == 55);
  CHECK(down.height() == 33);
  CHECK_THROWS_AS(scale_image(random_image(10, 10, 1), 0.5), Error);
}

TEST_CASE("rotation") {
  const auto img = random_image(24, 18, 5);
  CHECK(rotate_image(img, 0.0) == img);
  CHECK(rotated_crop_size(24, 18, 0.0) == std::pair{24, 18});
  for (int deg : kRotationDegrees) {
    const auto [w, h] = rotated_crop_size(256, 256, deg);
    CHECK(w > 0);
    CHECK(w <= 256);
    CHECK(h <= 256);
    const auto out = rotate_image(synth_image(64, 64, 1, 0), deg);
    CHECK(out.width() == rotated_crop_size(64, 64, deg).first);
  }
  CHECK(rotated_crop_size(256, 256, 45).first < rotated_crop_size(256, 256, 10).first);
}

TEST_CASE("jpeg quantization tables") {
  CHECK(jpeg_quant_table(50) == kStandardLuma);
  const auto q100 = jpeg_quant_table(100);
  CHECK(std::all_of(q100.begin(), q100.end(), [](int v) { return v == 1; }));
  const auto q10 = jpeg_quant_table(10);
  for (std::size_t i = 0; i < 64; ++i) CHECK(q10[i] == std::clamp((kStandardLuma[i] * 500 + 50) / 100, 1, 255));
}

TEST_CASE("jpeg dequantized coefficients are multiples of the step") {
  Rng rng(8);
  const auto table = jpeg_quant_table(60);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<double, 64> block{};
    for (auto& v : block) v = double(rng.below(256)) - 128.0;
    const auto coeffs = jpeg_quantize_block(block, table);
    for (std::size_t i = 0; i < 64; ++i) {
      const double m = coeffs[i] / table[i];
      CHECK(m == std::round(m));
    }
  }
}

TEST_CASE("jpeg proxy") {
  CHECK(jpeg_proxy(GrayImage(16, 16, 128), 30) == GrayImage(16, 16, 128));
  const auto img = random_image(21, 13, 2);
  const auto out = jpeg_proxy(img, 100);
  CHECK(out.width() == 21);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < img.size(); ++i) ok += std::abs(int(out.pixels()[i]) - int(img.pixels()[i])) <= 1;
  CHECK(double(ok) / double(img.size()) >= 0.999);
  const auto smooth = synth_image(64, 64, 3, 0);
  CHECK(psnr(smooth, jpeg_proxy(smooth, 90)) > psnr(smooth, jpeg_proxy(smooth, 20)));
}

TEST_CASE("jp2 proxy") {
  const auto img = synth_image(64, 48, 4, 1);
  CHECK(jp2_proxy(img, 1.0) == img);
  CHECK(jp2_proxy(random_image(32, 32, 6), 1.0) == random_image(32, 32, 6));
  CHECK(jp2_proxy(GrayImage(16, 16, 77), 6.0) == GrayImage(16, 16, 77));
  double previous = kPsnrInfinity;
  for (double r : {2.0, 4.0, 6.0, 8.0}) {
    const double p = psnr(img, jp2_proxy(img, r));
    CHECK(p <= previous);
    previous = p;
  }
  CHECK(jp2_step(2.4) == 2);
  CHECK(jp2_step(7.5) == 8);
  // Sizes not divisible by 4 go through apply's padding.
  const auto odd = synth_image(30, 27, 4, 2);
  const auto out = apply({OpKind::JP2, params::Jp2{1.0}}, odd);
  CHECK(out == odd);
}

TEST_CASE("sample_spec draws from the table ranges") {
  const std::set<double> gammas(kGammaValues.begin(), kGammaValues.end());
  const std::set<int> degrees(kRotationDegrees.begin(), kRotationDegrees.end());
  std::set<double> scale_factors;
  for (int p : kUpscalePercent) scale_factors.insert(1.0 + p / 100.0);
  for (int p : kDownscalePercent) scale_factors.insert(1.0 - p / 100.0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    CHECK(gammas.count(std::get<params::Gamma>(sample_spec(OpKind::GC, seed).params).gamma) == 1);
    CHECK(degrees.count(int(std::get<params::Rotate>(sample_spec(OpKind::Rot, seed).params).degrees)) == 1);
    CHECK(scale_factors.count(std::get<params::Scale>(sample_spec(OpKind::Sca, seed).params).factor) == 1);
    const auto um = std::get<params::Unsharp>(sample_spec(OpKind::UM, seed).params);
    CHECK(um.sigma >= 0.5);
    CHECK(um.sigma <= 1.5);
    CHECK(um.lambda >= 0.5);
    CHECK(um.lambda <= 1.5);
    const auto gf = std::get<params::Gaussian>(sample_spec(OpKind::GF, seed).params);
    CHECK(gf.sigma >= 0.8);
    CHECK(gf.sigma <= 1.6);
    const int q = std::get<params::Jpeg>(sample_spec(OpKind::JPEG, seed).params).quality;
    CHECK(q >= 75);
    CHECK(q <= 99);
    const double ratio = std::get<params::Jp2>(sample_spec(OpKind::JP2, seed).params).ratio;
    CHECK(ratio >= 2.0);
    CHECK(ratio <= 8.0);
    for (OpKind k : {OpKind::MeanF, OpKind::MedF, OpKind::WF})
      CHECK(std::get<params::Window>(sample_spec(k, seed).params).hsize % 2 == 1);
  }
  for (OpKind k : kAllOpKinds) CHECK(spec_to_json(sample_spec(k, 9)) == spec_to_json(sample_spec(k, 9)));
}

TEST_CASE("operation spec JSON round trip") {
  for (OpKind k : kAllOpKinds)
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto spec = sample_spec(k, seed);
      const auto json = spec_to_json(spec);
      CHECK(spec_to_json(spec_from_json(json)) == json);
      CHECK(spec_from_json(json).kind == k);
    }
  CHECK(spec_to_json({OpKind::GC, params::Gamma{0.5}}) == R"({"kind":"GC","params":{"gamma":0.5}})");
  CHECK_THROWS_AS(spec_from_json(R"({"kind":"XX","params":{}})"), Error);
  CHECK_THROWS_AS(spec_from_json("not json"), Error);
  CHECK(parse_op_kind("MedF") == OpKind::MedF);
  CHECK(!parse_op_kind("medf").has_value());
}

TEST_CASE("apply is pure and keeps pixel range") {
  const auto img = synth_image(64, 64, 12, 0);
  CHECK(apply({OpKind::MedF, params::Window{3}}, GrayImage(10, 10, 9)) == GrayImage(10, 10, 9));
  for (OpKind k : kAllOpKinds) {
    const auto spec = sample_spec(k, 3);
    const auto a = apply(spec, img);
    CHECK(a == apply(spec, img));
    CHECK(a.size() == std::size_t(a.width()) * std::size_t(a.height()));
    if (k != OpKind::Sca && k != OpKind::Rot) {
      CHECK(a.width() == img.width());
      CHECK(a.height() == img.height());
    }
  }
  CHECK_THROWS_AS(apply({OpKind::GC, params::Window{3}}, img), Error);
}
