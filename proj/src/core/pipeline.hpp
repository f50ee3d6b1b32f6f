#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classify.hpp"
#include "diag.hpp"
#include "features.hpp"
#include "ops.hpp"

namespace opstego {

struct CorpusConfig {
  int count = 300;
  int width = 256;
  int height = 256;
  std::uint64_t seed = 1;
  /// Optional list of real PGM files (one path per line, relative to the
  /// list) used instead of synthesis.
  std::string source_list;
  int crop = 0;  // center crop side before downsampling; 0 keeps full size
  bool downsample = false;
};

struct ExperimentConfig {
  CorpusConfig corpus;
  std::vector<OpKind> operations{kAllOpKinds.begin(), kAllOpKinds.end()};
  FeatureSet feature_set = FeatureSet::Spam686;
  ClassifierConfig classifier;
  int trials = 3;
  std::uint64_t split_seed = 7;
  std::string output_dir = "out";
  int diag_bound = kDefaultSupportBound;
};

/// Missing keys keep their defaults. classifier.seed defaults to split_seed.
ExperimentConfig config_from_json(std::string_view json);
std::string config_to_json(const ExperimentConfig& config);

struct ManifestEntry {
  std::string path;  // relative to the manifest directory
  int class_label = 1;
  std::optional<OperationSpec> op;  // nullopt for originals
  std::size_t source_index = 0;
};

struct DatasetManifest {
  std::vector<std::string> class_names;  // index 0 is label 1 ("original")
  std::vector<ManifestEntry> entries;
};

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view json);
DatasetManifest read_manifest(const std::string& path);

/// Labels 2.. follow table order of the selected kinds.
std::vector<std::string> class_names_for(const std::vector<OpKind>& operations);

/// Spec used for original `index` under operation `kind`.
OperationSpec counterpart_spec(std::uint64_t corpus_seed, OpKind kind, std::size_t index);

// Stages. Each reads and writes only files under the given directories.
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kCorpusListName = "corpus.txt";
inline constexpr const char* kStatsName = "stats.csv";
inline constexpr const char* kConfusionName = "confusion.csv";
inline constexpr const char* kMetricsName = "metrics.json";
std::string features_name(FeatureSet set);
std::string model_name(FeatureSet set);
std::string jointprob_name(int label);

/// Writes originals and operated counterparts plus manifest.json and
/// corpus.txt into config.output_dir. Returns the manifest.
DatasetManifest cmd_gen(const ExperimentConfig& config);

void cmd_apply(const std::string& input, const OperationSpec& spec, const std::string& output);

struct StatsRow {
  std::string kind;
  std::size_t pairs = 0;
  std::optional<double> modification_ratio;  // empty when sizes differ
  std::optional<double> psnr_db;
};
std::vector<StatsRow> compute_stats(const std::string& manifest_path);
std::string stats_to_csv(const std::vector<StatsRow>& rows);
void cmd_stats(const std::string& manifest_path, const std::string& out_dir);

JointProb class_joint_probability(const std::string& manifest_path, int class_label, int bound);
void cmd_diag(const std::string& manifest_path, int class_label, int bound, const std::string& out_dir);

FeatureFile extract_manifest(const std::string& manifest_path, FeatureSet set);
void cmd_extract(const std::string& manifest_path, FeatureSet set, const std::string& out_dir);

struct TrainOutcome {
  PairwiseModel model;
  std::string model_json;
  std::string report_json;
};

/// Stratified 50/50 split with `split_seed`, pairwise training on the
/// training half.
TrainOutcome train_on_split(const FeatureFile& features, const ClassifierConfig& classifier, std::uint64_t split_seed,
                            int trials);
std::string cmd_train(const std::string& feature_path, const ExperimentConfig& config, const std::string& out_dir);

struct EvalOutcome {
  Evaluation first_trial;
  std::vector<Evaluation> trials;
  double mean_accuracy = 0.0;
  double mean_diagonal_average = 0.0;
  std::string metrics_json;
};

/// Evaluates the stored model on its test half; trials beyond the first
/// reseed the split and retrain with the stored classifier settings.
EvalOutcome evaluate_model(const std::string& model_json, const FeatureFile& features, std::optional<int> trials);
std::string cmd_eval(const std::string& model_path, const std::string& feature_path, std::optional<int> trials,
                     const std::string& out_dir);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace opstego
