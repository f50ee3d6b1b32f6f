// opstego command-line driver. All work goes through the C interface.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "opstego/opstego.h"

namespace {

using json = nlohmann::ordered_json;

struct Common {
  std::string config_path;
  std::string out;
  unsigned threads = 0;
};

json load_config(const Common& common) {
  if (common.config_path.empty()) return json::object();
  std::ifstream in(common.config_path);
  if (!in) throw std::runtime_error("cannot open config " + common.config_path);
  return json::parse(in);
}

std::string out_dir(const Common& common, const json& config) {
  if (!common.out.empty()) return common.out;
  return config.value("output_dir", std::string("out"));
}

int check(opstego_status status) {
  if (status != OPSTEGO_OK) {
    std::cerr << "error: " << opstego_last_error() << "\n";
    return int(status);
  }
  return 0;
}

void print_and_free(char* s) {
  if (!s) return;
  std::cout << s << "\n";
  opstego_string_free(s);
}

std::string split_list(const std::string& csv, json& target) {
  target = json::array();
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) target.push_back(item);
  return csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect and identify image processing operations with steganalytic features"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Experiment config (JSON)");
    sub->add_option("--out", common.out, "Output directory");
  };

  // gen
  auto* gen = app.add_subcommand("gen", "Synthesize or import originals and write operated counterparts");
  add_common(gen);
  std::optional<std::uint64_t> gen_seed;
  std::optional<int> gen_count, gen_width, gen_height, gen_crop;
  std::string gen_ops, gen_sources;
  bool gen_downsample = false;
  gen->add_option("--seed", gen_seed, "Corpus seed");
  gen->add_option("--count", gen_count, "Number of originals");
  gen->add_option("--width", gen_width, "Image width");
  gen->add_option("--height", gen_height, "Image height");
  gen->add_option("--ops", gen_ops, "Comma-separated operation kinds (default: all)");
  gen->add_option("--source-list", gen_sources, "Import PGM originals listed one per line");
  gen->add_option("--crop", gen_crop, "Center-crop imported images to this side");
  gen->add_flag("--downsample", gen_downsample, "Downsample imported images by 2");

  // apply
  auto* apply = app.add_subcommand("apply", "Apply one operation to a PGM image");
  std::string apply_in, apply_out, apply_op, apply_kind;
  std::uint64_t apply_seed = 0;
  apply->add_option("--input", apply_in, "Input PGM")->required();
  apply->add_option("--out", apply_out, "Output PGM")->required();
  auto* op_opt = apply->add_option("--op", apply_op, "Operation spec JSON");
  auto* kind_opt = apply->add_option("--kind", apply_kind, "Operation kind with sampled parameters");
  apply->add_option("--seed", apply_seed, "Seed for parameter sampling");
  op_opt->excludes(kind_opt);

  // stats
  auto* stats = app.add_subcommand("stats", "Modification ratio and PSNR per operation kind");
  add_common(stats);
  std::string stats_manifest;
  stats->add_option("--manifest", stats_manifest, "Dataset manifest");

  // diag
  auto* diag = app.add_subcommand("diag", "Average difference joint probability of one class");
  add_common(diag);
  std::string diag_manifest;
  int diag_label = 1;
  std::optional<int> diag_bound;
  diag->add_option("--manifest", diag_manifest, "Dataset manifest");
  diag->add_option("--label", diag_label, "Class label (1 = original)");
  diag->add_option("--bound", diag_bound, "Difference clamp bound");

  // extract
  auto* extract = app.add_subcommand("extract", "Extract features for every manifest entry");
  add_common(extract);
  std::string extract_manifest, extract_set;
  extract->add_option("--manifest", extract_manifest, "Dataset manifest");
  extract->add_option("--feature-set", extract_set, "spam686 or minirm");

  // train
  auto* train = app.add_subcommand("train", "Train the pairwise ensemble on the training half");
  add_common(train);
  std::string train_features, train_set;
  std::optional<std::uint64_t> train_seed;
  std::optional<int> train_trials;
  train->add_option("--features", train_features, "Feature file");
  train->add_option("--feature-set", train_set, "spam686 or minirm");
  train->add_option("--seed", train_seed, "Split seed");
  train->add_option("--trials", train_trials, "Trials recorded for evaluation");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model on its held-out half");
  add_common(eval);
  std::string eval_model, eval_features, eval_set;
  int eval_trials = 0;
  eval->add_option("--model", eval_model, "Model file");
  eval->add_option("--features", eval_features, "Feature file");
  eval->add_option("--feature-set", eval_set, "spam686 or minirm");
  eval->add_option("--trials", eval_trials, "Repetitions with reseeded splits (default: from model)");

  CLI11_PARSE(app, argc, argv);
  opstego_set_threads(common.threads);

  try {
    json config = load_config(common);
    const std::string dir = out_dir(common, config);
    auto feature_set = [&](const std::string& flag) {
      return flag.empty() ? config.value("feature_set", std::string("spam686")) : flag;
    };

    if (*gen) {
      config["output_dir"] = dir;
      auto& corpus = config["corpus"];
      if (!corpus.is_object()) corpus = json::object();
      if (gen_seed) corpus["seed"] = *gen_seed;
      if (gen_count) corpus["count"] = *gen_count;
      if (gen_width) corpus["width"] = *gen_width;
      if (gen_height) corpus["height"] = *gen_height;
      if (!gen_sources.empty()) corpus["source_list"] = gen_sources;
      if (gen_crop) corpus["crop"] = *gen_crop;
      if (gen_downsample) corpus["downsample"] = true;
      if (!gen_ops.empty()) split_list(gen_ops, config["operations"]);
      return check(opstego_gen(config.dump().c_str()));
    }
    if (*apply) {
      std::string spec = apply_op;
      if (spec.empty()) {
        if (apply_kind.empty()) throw std::runtime_error("apply needs --op or --kind");
        char* sampled = nullptr;
        if (int rc = check(opstego_sample_spec(apply_kind.c_str(), apply_seed, &sampled))) return rc;
        spec = sampled;
        opstego_string_free(sampled);
      }
      if (int rc = check(opstego_apply_file(apply_in.c_str(), spec.c_str(), apply_out.c_str()))) return rc;
      std::cout << spec << "\n";
      return 0;
    }
    if (*stats) {
      const auto manifest = stats_manifest.empty() ? dir + "/manifest.json" : stats_manifest;
      return check(opstego_stats(manifest.c_str(), dir.c_str()));
    }
    if (*diag) {
      const auto manifest = diag_manifest.empty() ? dir + "/manifest.json" : diag_manifest;
      const int bound = diag_bound.value_or(config.value("diag_bound", 16));
      return check(opstego_diag(manifest.c_str(), diag_label, bound, dir.c_str()));
    }
    if (*extract) {
      const auto manifest = extract_manifest.empty() ? dir + "/manifest.json" : extract_manifest;
      return check(opstego_extract_manifest(manifest.c_str(), feature_set(extract_set).c_str(), dir.c_str()));
    }
    if (*train) {
      const auto set = feature_set(train_set);
      const auto features = train_features.empty() ? dir + "/features_" + set + ".bin" : train_features;
      if (train_seed) config["split_seed"] = *train_seed;
      if (train_trials) config["classifier"]["trials"] = *train_trials;
      char* report = nullptr;
      if (int rc = check(opstego_train(features.c_str(), config.dump().c_str(), dir.c_str(), &report))) return rc;
      print_and_free(report);
      return 0;
    }
    if (*eval) {
      const auto set = feature_set(eval_set);
      const auto model = eval_model.empty() ? dir + "/model_" + set + ".json" : eval_model;
      const auto features = eval_features.empty() ? dir + "/features_" + set + ".bin" : eval_features;
      char* metrics = nullptr;
      if (int rc = check(opstego_eval(model.c_str(), features.c_str(), eval_trials, dir.c_str(), &metrics))) return rc;
      print_and_free(metrics);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
