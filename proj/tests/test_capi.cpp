#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include "opstego/opstego.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  opstego_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::string(opstego_version()) == "1.0.0");
  opstego_image* img = nullptr;
  CHECK(opstego_image_create(0, 4, nullptr, &img) == OPSTEGO_E_INVALID_ARGUMENT);
  CHECK(img == nullptr);
  CHECK(std::string(opstego_last_error()).size() > 0);
  CHECK(opstego_image_create(2, 2, nullptr, nullptr) == OPSTEGO_E_INVALID_ARGUMENT);
  const std::uint8_t bad[] = {'P', '5', '\n', '1', ' ', '1', '\n', '6', '5', '5', '3', '5', '\n', 0, 0};
  CHECK(opstego_image_decode_pgm(bad, sizeof bad, &img) == OPSTEGO_E_PARSE);
  CHECK(std::string(opstego_last_error()).find("unsupported maxval") != std::string::npos);
  CHECK(opstego_image_load_pgm("/nonexistent/x.pgm", &img) == OPSTEGO_E_IO);
  opstego_image_destroy(nullptr);
  opstego_string_free(nullptr);
}

TEST_CASE("image handles") {
  const std::uint8_t px[] = {0, 1, 2, 3};
  opstego_image* img = nullptr;
  REQUIRE(opstego_image_create(2, 2, px, &img) == OPSTEGO_OK);
  CHECK(opstego_image_width(img) == 2);
  CHECK(opstego_image_height(img) == 2);
  CHECK(opstego_image_pixels(img)[3] == 3);

  const fs::path path = fs::temp_directory_path() / "opstego_capi.pgm";
  REQUIRE(opstego_image_save_pgm(img, path.string().c_str()) == OPSTEGO_OK);
  opstego_image* back = nullptr;
  REQUIRE(opstego_image_load_pgm(path.string().c_str(), &back) == OPSTEGO_OK);
  double ratio = -1, psnr = -1;
  REQUIRE(opstego_pair_stats(img, back, &ratio, &psnr) == OPSTEGO_OK);
  CHECK(ratio == 0.0);
  CHECK(psnr == OPSTEGO_PSNR_INFINITY);
  fs::remove(path);
  opstego_image_destroy(back);
  opstego_image_destroy(img);
}

TEST_CASE("operations and diagnostics") {
  opstego_image* img = nullptr;
  REQUIRE(opstego_synth_image(32, 32, 1, 0, &img) == OPSTEGO_OK);
  char* spec = nullptr;
  REQUIRE(opstego_sample_spec("MedF", 3, &spec) == OPSTEGO_OK);
  const auto spec_json = take(spec);
  CHECK(spec_json.find("\"MedF\"") != std::string::npos);
  CHECK(opstego_sample_spec("Nope", 3, &spec) == OPSTEGO_E_INVALID_ARGUMENT);

  opstego_image* out = nullptr;
  REQUIRE(opstego_apply(img, spec_json.c_str(), &out) == OPSTEGO_OK);
  double before = 0, after = 0;
  REQUIRE(opstego_extrema_ratio(img, &before) == OPSTEGO_OK);
  REQUIRE(opstego_extrema_ratio(out, &after) == OPSTEGO_OK);
  CHECK(after < before);
  CHECK(opstego_apply(img, "{bad", &out) == OPSTEGO_E_PARSE);

  char* csv = nullptr;
  REQUIRE(opstego_jointprob_csv(img, 1, &csv) == OPSTEGO_OK);
  const auto grid = take(csv);
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 3);
  opstego_image_destroy(out);
  opstego_image_destroy(img);
}

TEST_CASE("feature extraction") {
  size_t dim = 0;
  REQUIRE(opstego_feature_dim("spam686", &dim) == OPSTEGO_OK);
  CHECK(dim == 686);
  REQUIRE(opstego_feature_dim("minirm", &dim) == OPSTEGO_OK);
  CHECK(dim == 7500);
  CHECK(opstego_feature_dim("srm", &dim) == OPSTEGO_E_INVALID_ARGUMENT);

  opstego_image* img = nullptr;
  REQUIRE(opstego_synth_image(32, 32, 1, 0, &img) == OPSTEGO_OK);
  std::vector<double> small(10);
  CHECK(opstego_extract(img, "spam686", small.data(), small.size(), &dim) == OPSTEGO_E_DIMENSION);
  CHECK(dim == 686);
  std::vector<double> full(686);
  CHECK(opstego_extract(img, "spam686", full.data(), full.size(), &dim) == OPSTEGO_OK);
  opstego_image_destroy(img);
}

TEST_CASE("pipeline stages through the C API") {
  const fs::path dir = fs::temp_directory_path() / "opstego_capi_pipeline";
  fs::remove_all(dir);
  const std::string config = R"({"corpus":{"count":8,"width":32,"height":32,"seed":2},"operations":["MedF","HE"],)"
                             R"("feature_set":"spam686","trials":1,"classifier":{"L_candidates":[11]},)"
                             R"("output_dir":")" + dir.string() + R"("})";
  char* normalized = nullptr;
  REQUIRE(opstego_config_normalize(config.c_str(), &normalized) == OPSTEGO_OK);
  CHECK(take(normalized).find("\"split_seed\"") != std::string::npos);

  opstego_set_threads(2);
  REQUIRE(opstego_gen(config.c_str()) == OPSTEGO_OK);
  const auto manifest = (dir / "manifest.json").string();
  REQUIRE(opstego_stats(manifest.c_str(), dir.string().c_str()) == OPSTEGO_OK);
  REQUIRE(opstego_diag(manifest.c_str(), 2, 8, dir.string().c_str()) == OPSTEGO_OK);
  REQUIRE(opstego_extract_manifest(manifest.c_str(), "spam686", dir.string().c_str()) == OPSTEGO_OK);
  const auto features = (dir / "features_spam686.bin").string();
  char* report = nullptr;
  REQUIRE(opstego_train(features.c_str(), config.c_str(), dir.string().c_str(), &report) == OPSTEGO_OK);
  CHECK(take(report).find("oob_error") != std::string::npos);
  const auto model_path = (dir / "model_spam686.json").string();
  char* metrics = nullptr;
  REQUIRE(opstego_eval(model_path.c_str(), features.c_str(), 0, dir.string().c_str(), &metrics) == OPSTEGO_OK);
  CHECK(take(metrics).find("diagonal_average") != std::string::npos);
  REQUIRE(opstego_eval(model_path.c_str(), features.c_str(), 0, dir.string().c_str(), nullptr) == OPSTEGO_OK);
  for (const char* name : {"stats.csv", "jointprob_2.csv", "confusion.csv", "metrics.json", "corpus.txt"})
    CHECK(fs::exists(dir / name));

  opstego_model* model = nullptr;
  REQUIRE(opstego_model_load(model_path.c_str(), &model) == OPSTEGO_OK);
  CHECK(opstego_model_classes(model) == 3);
  CHECK(opstego_model_pair_count(model) == 3);
  CHECK(opstego_model_dim(model) == 686);
  opstego_image* img = nullptr;
  REQUIRE(opstego_image_load_pgm((dir / "images" / "original_00000.pgm").string().c_str(), &img) == OPSTEGO_OK);
  std::vector<double> f(686);
  size_t dim = 0;
  REQUIRE(opstego_extract(img, "spam686", f.data(), f.size(), &dim) == OPSTEGO_OK);
  int label = 0;
  REQUIRE(opstego_model_predict(model, f.data(), dim, &label) == OPSTEGO_OK);
  CHECK(label >= 1);
  CHECK(label <= 3);
  CHECK(opstego_model_predict(model, f.data(), 5, &label) == OPSTEGO_E_DIMENSION);
  opstego_image_destroy(img);
  opstego_model_destroy(model);

  CHECK(opstego_stats("/nonexistent/manifest.json", dir.string().c_str()) == OPSTEGO_E_IO);
  opstego_set_threads(0);
  fs::remove_all(dir);
}
