#include "pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace fs = std::filesystem;

namespace opstego {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::uint64_t kSpecStream = 0x6f70737370656373ULL;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string manifest_dir(const std::string& manifest_path) {
  const auto parent = fs::path(manifest_path).parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

ojson classifier_json(const ClassifierConfig& c) {
  ojson j;
  j["L_candidates"] = c.learner_candidates;
  j["d_sub_candidates"] = c.d_sub_candidates;
  j["seed"] = c.seed;
  return j;
}

template <class J>
ClassifierConfig classifier_from(const J& j, ClassifierConfig c) {
  if (j.contains("L_candidates")) c.learner_candidates = j["L_candidates"].template get<std::vector<int>>();
  if (j.contains("d_sub_candidates"))
    c.d_sub_candidates = j["d_sub_candidates"].template get<std::vector<std::size_t>>();
  if (c.learner_candidates.empty()) fail(ErrorCode::InvalidArgument, "classifier.L_candidates is empty");
  for (int l : c.learner_candidates)
    if (l < 1 || l % 2 == 0) fail(ErrorCode::InvalidArgument, "classifier.L_candidates must be positive odd integers");
  for (auto d : c.d_sub_candidates)
    if (d == 0) fail(ErrorCode::InvalidArgument, "classifier.d_sub_candidates must be positive");
  if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].template get<std::uint64_t>();
  return c;
}

FeatureFile subset(const FeatureFile& f, const std::vector<std::size_t>& rows) {
  FeatureFile out;
  out.matrix.set = f.matrix.set;
  out.matrix.cols = f.matrix.cols;
  out.matrix.rows = rows.size();
  out.matrix.data.reserve(rows.size() * f.matrix.cols);
  for (auto r : rows) {
    const auto row = f.matrix.row(r);
    out.matrix.data.insert(out.matrix.data.end(), row.begin(), row.end());
    out.labels.push_back(f.labels[r]);
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  return trial == 0 ? base : derive_seed(base, std::uint64_t(trial));
}

ojson evaluation_json(const Evaluation& ev) {
  ojson j;
  j["accuracy"] = ev.accuracy;
  j["diagonal_average"] = ev.diagonal_average;
  return j;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

ExperimentConfig config_from_json(std::string_view text) {
  ExperimentConfig c;
  bool classifier_seed_given = false;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("corpus")) {
      const auto& cj = j["corpus"];
      c.corpus.count = cj.value("count", c.corpus.count);
      c.corpus.width = cj.value("width", c.corpus.width);
      c.corpus.height = cj.value("height", c.corpus.height);
      c.corpus.seed = cj.value("seed", c.corpus.seed);
      c.corpus.source_list = cj.value("source_list", c.corpus.source_list);
      c.corpus.crop = cj.value("crop", c.corpus.crop);
      c.corpus.downsample = cj.value("downsample", c.corpus.downsample);
    }
    if (j.contains("operations")) {
      c.operations.clear();
      for (const auto& k : j["operations"]) {
        const auto kind = parse_op_kind(k.get<std::string>());
        if (!kind) fail(ErrorCode::InvalidArgument, "unknown operation kind " + k.get<std::string>());
        c.operations.push_back(*kind);
      }
    }
    if (j.contains("feature_set")) {
      const auto set = parse_feature_set(j["feature_set"].get<std::string>());
      if (!set) fail(ErrorCode::InvalidArgument, "unknown feature set " + j["feature_set"].get<std::string>());
      c.feature_set = *set;
    }
    c.split_seed = j.value("split_seed", c.split_seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.diag_bound = j.value("diag_bound", c.diag_bound);
    if (j.contains("classifier")) {
      const auto& cj = j["classifier"];
      c.classifier = classifier_from(cj, c.classifier);
      classifier_seed_given = cj.contains("seed") && !cj["seed"].is_null();
      c.trials = cj.value("trials", c.trials);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("config: ") + e.what());
  }
  if (!classifier_seed_given) c.classifier.seed = c.split_seed;
  if (c.trials < 1) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (c.operations.empty()) fail(ErrorCode::InvalidArgument, "operations must be non-empty");
  std::sort(c.operations.begin(), c.operations.end());
  c.operations.erase(std::unique(c.operations.begin(), c.operations.end()), c.operations.end());
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  ojson j;
  j["corpus"] = {{"count", c.corpus.count},     {"width", c.corpus.width},
                 {"height", c.corpus.height},   {"seed", c.corpus.seed},
                 {"source_list", c.corpus.source_list}, {"crop", c.corpus.crop},
                 {"downsample", c.corpus.downsample}};
  auto& ops = j["operations"] = ojson::array();
  for (auto k : c.operations) ops.push_back(std::string(to_string(k)));
  j["feature_set"] = std::string(to_string(c.feature_set));
  auto cls = classifier_json(c.classifier);
  cls["trials"] = c.trials;
  j["classifier"] = cls;
  j["split_seed"] = c.split_seed;
  j["output_dir"] = c.output_dir;
  j["diag_bound"] = c.diag_bound;
  return j.dump(2);
}

std::vector<std::string> class_names_for(const std::vector<OpKind>& operations) {
  std::vector<OpKind> sorted = operations;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> names{"original"};
  for (auto k : sorted) names.emplace_back(to_string(k));
  return names;
}

std::string manifest_to_json(const DatasetManifest& m) {
  ojson j;
  j["classes"] = m.class_names;
  auto& entries = j["entries"] = ojson::array();
  for (const auto& e : m.entries) {
    ojson ej;
    ej["path"] = e.path;
    ej["class_label"] = e.class_label;
    ej["op_spec"] = e.op ? ojson::parse(spec_to_json(*e.op)) : ojson("original");
    ej["source_index"] = e.source_index;
    entries.push_back(std::move(ej));
  }
  return j.dump(1) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text) {
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.class_names = j.value("classes", std::vector<std::string>{});
    for (const auto& ej : j.at("entries")) {
      ManifestEntry e;
      e.path = ej.at("path").get<std::string>();
      e.class_label = ej.at("class_label").get<int>();
      e.source_index = ej.at("source_index").get<std::size_t>();
      const auto& spec = ej.at("op_spec");
      if (spec.is_object()) e.op = spec_from_json(spec.dump());
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
  for (const auto& e : m.entries)
    if (e.class_label < 1) fail(ErrorCode::Parse, "manifest: class labels start at 1");
  return m;
}

DatasetManifest read_manifest(const std::string& path) { return manifest_from_json(read_text_file(path)); }

OperationSpec counterpart_spec(std::uint64_t corpus_seed, OpKind kind, std::size_t index) {
  return sample_spec(kind, derive_seed(corpus_seed ^ kSpecStream, index));
}

std::string features_name(FeatureSet set) { return "features_" + std::string(to_string(set)) + ".bin"; }
std::string model_name(FeatureSet set) { return "model_" + std::string(to_string(set)) + ".json"; }
std::string jointprob_name(int label) { return "jointprob_" + std::to_string(label) + ".csv"; }

DatasetManifest cmd_gen(const ExperimentConfig& config) {
  const auto& cc = config.corpus;
  if (config.operations.empty()) fail(ErrorCode::InvalidArgument, "operations must be non-empty");
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir / "images");

  std::vector<std::string> sources;
  if (!cc.source_list.empty()) {
    const auto base = fs::path(cc.source_list).parent_path();
    for (const auto& line : read_lines(cc.source_list)) sources.push_back((base / line).string());
    if (sources.empty()) fail(ErrorCode::InvalidArgument, "source list is empty");
  } else if (cc.count < 1) {
    fail(ErrorCode::InvalidArgument, "corpus count must be >= 1");
  }
  const std::size_t count = sources.empty() ? std::size_t(cc.count) : sources.size();

  std::vector<OpKind> kinds = config.operations;
  std::sort(kinds.begin(), kinds.end());

  DatasetManifest manifest;
  manifest.class_names = class_names_for(kinds);
  auto name = [](const std::string& tag, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05zu", i);
    return "images/" + tag + "_" + buf + ".pgm";
  };
  for (std::size_t i = 0; i < count; ++i) manifest.entries.push_back({name("original", i), 1, std::nullopt, i});
  for (std::size_t k = 0; k < kinds.size(); ++k)
    for (std::size_t i = 0; i < count; ++i)
      manifest.entries.push_back({name(std::string(to_string(kinds[k])), i), int(k) + 2,
                                  counterpart_spec(cc.seed, kinds[k], i), i});

  parallel_for(count, [&](std::size_t i) {
    GrayImage img;
    if (sources.empty()) {
      img = synth_image(cc.width, cc.height, cc.seed, i);
    } else {
      img = read_pgm_file(sources[i]);
      if (cc.crop > 0) img = center_crop(img, cc.crop);
      if (cc.downsample) img = downsample2(img);
    }
    write_pgm_file((out_dir / manifest.entries[i].path).string(), img);
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      const auto& entry = manifest.entries[(k + 1) * count + i];
      write_pgm_file((out_dir / entry.path).string(), apply(*entry.op, img));
    }
  });

  write_text_file((out_dir / kManifestName).string(), manifest_to_json(manifest));
  std::string list;
  for (std::size_t i = 0; i < count; ++i) list += manifest.entries[i].path + "\n";
  write_text_file((out_dir / kCorpusListName).string(), list);
  return manifest;
}

void cmd_apply(const std::string& input, const OperationSpec& spec, const std::string& output) {
  write_pgm_file(output, apply(spec, read_pgm_file(input)));
}

std::vector<StatsRow> compute_stats(const std::string& manifest_path) {
  const auto manifest = read_manifest(manifest_path);
  const fs::path dir = manifest_dir(manifest_path);
  std::vector<const ManifestEntry*> originals;
  for (const auto& e : manifest.entries)
    if (!e.op) {
      if (originals.size() <= e.source_index) originals.resize(e.source_index + 1, nullptr);
      originals[e.source_index] = &e;
    }

  struct Pending {
    OpKind kind;
    const ManifestEntry* original;
    const ManifestEntry* operated;
  };
  std::vector<Pending> work;
  for (const auto& e : manifest.entries) {
    if (!e.op) continue;
    if (e.source_index >= originals.size() || !originals[e.source_index])
      fail(ErrorCode::InvalidArgument, "missing original for " + e.path);
    work.push_back({e.op->kind, originals[e.source_index], &e});
  }
  std::vector<std::optional<PairStats>> results(work.size());
  parallel_for(work.size(), [&](std::size_t i) {
    const auto a = read_pgm_file((dir / work[i].original->path).string());
    const auto b = read_pgm_file((dir / work[i].operated->path).string());
    if (a.width() == b.width() && a.height() == b.height()) results[i] = pair_stats(a, b);
  });

  std::vector<StatsRow> rows;
  for (auto kind : kAllOpKinds) {
    StatsRow row;
    row.kind = std::string(to_string(kind));
    double ratio_sum = 0.0, psnr_sum = 0.0;
    std::size_t synced = 0, finite = 0;
    for (std::size_t i = 0; i < work.size(); ++i) {
      if (work[i].kind != kind) continue;
      ++row.pairs;
      if (!results[i]) continue;
      ++synced;
      ratio_sum += results[i]->modification_ratio;
      if (results[i]->psnr_db != kPsnrInfinity) {
        ++finite;
        psnr_sum += results[i]->psnr_db;
      }
    }
    if (row.pairs == 0) continue;
    if (synced == row.pairs) {
      row.modification_ratio = ratio_sum / double(synced);
      row.psnr_db = finite ? psnr_sum / double(finite) : kPsnrInfinity;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string stats_to_csv(const std::vector<StatsRow>& rows) {
  std::string out = "kind,pairs,modification_ratio,psnr_db\n";
  for (const auto& r : rows) {
    out += r.kind + "," + std::to_string(r.pairs) + ",";
    out += r.modification_ratio ? format_double(*r.modification_ratio) : "NA";
    out += ",";
    out += r.psnr_db ? format_double(*r.psnr_db) : "NA";
    out += "\n";
  }
  return out;
}

void cmd_stats(const std::string& manifest_path, const std::string& out_dir) {
  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / kStatsName).string(), stats_to_csv(compute_stats(manifest_path)));
}

JointProb class_joint_probability(const std::string& manifest_path, int class_label, int bound) {
  const auto manifest = read_manifest(manifest_path);
  const fs::path dir = manifest_dir(manifest_path);
  std::vector<std::string> paths;
  for (const auto& e : manifest.entries)
    if (e.class_label == class_label) paths.push_back((dir / e.path).string());
  if (paths.empty()) fail(ErrorCode::InvalidArgument, "no images with class label " + std::to_string(class_label));
  std::vector<JointProb> tables(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) { tables[i] = joint_probability(read_pgm_file(paths[i]), bound); });
  return average_joint_probability(tables);
}

void cmd_diag(const std::string& manifest_path, int class_label, int bound, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto jp = class_joint_probability(manifest_path, class_label, bound);
  write_text_file((fs::path(out_dir) / jointprob_name(class_label)).string(), export_jointprob(jp));
}

FeatureFile extract_manifest(const std::string& manifest_path, FeatureSet set) {
  const auto manifest = read_manifest(manifest_path);
  if (manifest.entries.empty()) fail(ErrorCode::InvalidArgument, "manifest has no entries");
  const fs::path dir = manifest_dir(manifest_path);
  FeatureFile file;
  file.matrix.set = set;
  file.matrix.rows = manifest.entries.size();
  file.matrix.cols = std::size_t(feature_dim(set));
  file.matrix.data.resize(file.matrix.rows * file.matrix.cols);
  parallel_for(manifest.entries.size(), [&](std::size_t i) {
    const auto fv = extract(set, read_pgm_file((dir / manifest.entries[i].path).string()));
    std::copy(fv.values.begin(), fv.values.end(), file.matrix.data.begin() + long(i * file.matrix.cols));
  });
  for (const auto& e : manifest.entries) file.labels.push_back(e.class_label);
  return file;
}

void cmd_extract(const std::string& manifest_path, FeatureSet set, const std::string& out_dir) {
  fs::create_directories(out_dir);
  write_feature_file((fs::path(out_dir) / features_name(set)).string(), extract_manifest(manifest_path, set));
}

TrainOutcome train_on_split(const FeatureFile& features, const ClassifierConfig& classifier, std::uint64_t split_seed,
                            int trials) {
  const auto split = stratified_split(features.labels, split_seed);
  const auto train = subset(features, split.train);
  TrainOutcome out;
  out.model = pairwise_train(train.matrix, train.labels, features.matrix.set, classifier);

  ojson extra;
  extra["split_seed"] = split_seed;
  extra["trials"] = trials;
  extra["classifier"] = classifier_json(classifier);
  out.model_json = model_to_json(out.model, extra.dump());

  ojson report;
  report["train_count"] = split.train.size();
  report["test_count"] = split.test.size();
  auto& pairs = report["pairs"] = ojson::array();
  for (const auto& p : out.model.pairs)
    pairs.push_back({{"i", p.i}, {"j", p.j}, {"L", p.model.learners.size()}, {"d_sub", p.model.d_sub},
                     {"oob_error", p.oob_error}});
  out.report_json = report.dump();
  return out;
}

std::string cmd_train(const std::string& feature_path, const ExperimentConfig& config, const std::string& out_dir) {
  const auto features = read_feature_file(feature_path);
  const auto outcome = train_on_split(features, config.classifier, config.split_seed, config.trials);
  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / model_name(features.matrix.set)).string(), outcome.model_json);
  return outcome.report_json;
}

EvalOutcome evaluate_model(const std::string& model_json, const FeatureFile& features, std::optional<int> trials) {
  const auto model = model_from_json(model_json);
  if (model.set != features.matrix.set || model.dim != features.matrix.cols)
    fail(ErrorCode::DimensionMismatch, "model and features disagree on feature set or dimension");
  ClassifierConfig classifier;
  std::uint64_t split_seed = 0;
  int n_trials = 1;
  try {
    const auto j = nlohmann::json::parse(model_json);
    split_seed = j.at("split_seed").get<std::uint64_t>();
    n_trials = trials.value_or(j.value("trials", 1));
    classifier = classifier_from(j.at("classifier"), classifier);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("model JSON: missing split metadata: ") + e.what());
  }
  if (n_trials < 1) fail(ErrorCode::InvalidArgument, "trials must be >= 1");

  EvalOutcome out;
  for (int t = 0; t < n_trials; ++t) {
    const std::uint64_t seed = trial_seed(split_seed, t);
    const auto split = stratified_split(features.labels, seed);
    const auto test = subset(features, split.test);
    if (t == 0) {
      out.trials.push_back(evaluate(model, test.matrix, test.labels));
    } else {
      ClassifierConfig c = classifier;
      c.seed = trial_seed(classifier.seed, t);
      const auto train = subset(features, split.train);
      const auto retrained = pairwise_train(train.matrix, train.labels, features.matrix.set, c);
      out.trials.push_back(evaluate(retrained, test.matrix, test.labels));
    }
  }
  out.first_trial = out.trials.front();
  for (const auto& ev : out.trials) {
    out.mean_accuracy += ev.accuracy;
    out.mean_diagonal_average += ev.diagonal_average;
  }
  out.mean_accuracy /= double(out.trials.size());
  out.mean_diagonal_average /= double(out.trials.size());

  ojson metrics;
  metrics["accuracy"] = out.mean_accuracy;
  metrics["diagonal_average"] = out.mean_diagonal_average;
  auto& per_trial = metrics["per_trial"] = ojson::array();
  for (const auto& ev : out.trials) per_trial.push_back(evaluation_json(ev));
  out.metrics_json = metrics.dump(2) + "\n";
  return out;
}

std::string cmd_eval(const std::string& model_path, const std::string& feature_path, std::optional<int> trials,
                     const std::string& out_dir) {
  const auto outcome = evaluate_model(read_text_file(model_path), read_feature_file(feature_path), trials);
  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / kConfusionName).string(), confusion_to_csv(outcome.first_trial.confusion));
  write_text_file((fs::path(out_dir) / kMetricsName).string(), outcome.metrics_json);
  return outcome.metrics_json;
}

}  // namespace opstego
