#include "classify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace opstego {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ClassStats {
  Eigen::VectorXd mean;
  RowMatrix centered;
};

ClassStats class_stats(RowMatrix rows) {
  ClassStats s;
  s.mean = rows.colwise().mean().transpose();
  rows.rowwise() -= s.mean.transpose();
  s.centered = std::move(rows);
  return s;
}

/// Core solve shared by fld_train and the ensemble. A negative ridge selects
/// the relative rule.
FldFit fld_fit(RowMatrix class0, RowMatrix class1, double ridge) {
  if (class0.rows() == 0 || class1.rows() == 0) fail(ErrorCode::InvalidArgument, "FLD needs both classes");
  const auto dim = class0.cols();
  const auto c0 = class_stats(std::move(class0));
  const auto c1 = class_stats(std::move(class1));
  Eigen::MatrixXd scatter = c0.centered.transpose() * c0.centered;
  scatter.noalias() += c1.centered.transpose() * c1.centered;
  if (ridge < 0.0) ridge = kRelativeRidge * scatter.trace() / double(dim);
  scatter.diagonal().array() += ridge;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(scatter);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14))
    fail(ErrorCode::Degenerate, "within-class scatter is singular");
  const Eigen::VectorXd w = ldlt.solve(c1.mean - c0.mean);
  if (!w.allFinite()) fail(ErrorCode::Degenerate, "FLD weights are not finite");

  FldFit fit;
  fit.weights.assign(w.data(), w.data() + w.size());
  fit.bias = -0.5 * (w.dot(c0.mean) + w.dot(c1.mean));
  return fit;
}

RowMatrix to_eigen(MatrixView m) {
  RowMatrix out(Eigen::Index(m.rows), Eigen::Index(m.cols));
  std::copy(m.data, m.data + m.rows * m.cols, out.data());
  return out;
}

RowMatrix gather(MatrixView x, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
  RowMatrix out(Eigen::Index(rows.size()), Eigen::Index(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double* src = x.data + rows[r] * x.cols;
    double* dst = out.data() + r * cols.size();
    for (std::size_t c = 0; c < cols.size(); ++c) dst[c] = src[cols[c]];
  }
  return out;
}

std::vector<std::size_t> draw_subspace(Rng& rng, std::size_t dim, std::size_t d_sub) {
  std::vector<std::size_t> pool(dim);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < d_sub; ++i) std::swap(pool[i], pool[i + rng.below(dim - i)]);
  pool.resize(d_sub);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct TrainedLearner {
  FldLearner learner;
  std::vector<bool> in_bag;  // per training row
};

TrainedLearner train_learner(MatrixView x, const std::vector<std::size_t>& rows0,
                             const std::vector<std::size_t>& rows1, const EnsembleParams& params,
                             std::uint64_t learner_seed) {
  Rng rng(learner_seed);
  TrainedLearner out;
  out.in_bag.assign(x.rows, !params.bootstrap);
  std::vector<std::size_t> bag0 = rows0, bag1 = rows1;
  if (params.bootstrap) {
    for (auto* bag : {&bag0, &bag1}) {
      const auto source = *bag;
      for (auto& r : *bag) r = source[rng.below(source.size())];
    }
    for (auto r : bag0) out.in_bag[r] = true;
    for (auto r : bag1) out.in_bag[r] = true;
  }
  constexpr int kAttempts = 8;
  for (int attempt = 0;; ++attempt) {
    auto subspace = draw_subspace(rng, x.cols, params.d_sub);
    try {
      auto fit = fld_fit(gather(x, bag0, subspace), gather(x, bag1, subspace), -1.0);
      out.learner = FldLearner{std::move(subspace), std::move(fit.weights), fit.bias};
      return out;
    } catch (const Error& e) {
      // Constant features can make a subspace singular; redraw it.
      if (e.code() != ErrorCode::Degenerate || attempt + 1 == kAttempts) throw;
    }
  }
}

void check_binary(MatrixView x, std::span<const int> y, std::vector<std::size_t>& rows0,
                  std::vector<std::size_t>& rows1) {
  if (y.size() != x.rows) fail(ErrorCode::DimensionMismatch, "label count does not match rows");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0)
      rows0.push_back(i);
    else if (y[i] == 1)
      rows1.push_back(i);
    else
      fail(ErrorCode::InvalidArgument, "binary labels must be 0 or 1");
  }
  if (rows0.empty() || rows1.empty()) fail(ErrorCode::InvalidArgument, "both binary labels must be present");
}

std::vector<TrainedLearner> train_learners(MatrixView x, std::span<const int> y, const EnsembleParams& params) {
  if (params.learners < 1 || params.learners % 2 == 0)
    fail(ErrorCode::InvalidArgument, "ensemble size must be a positive odd number");
  if (params.d_sub < 1 || params.d_sub > x.cols) fail(ErrorCode::InvalidArgument, "d_sub must be in [1, dim]");
  std::vector<std::size_t> rows0, rows1;
  check_binary(x, y, rows0, rows1);
  std::vector<TrainedLearner> learners(static_cast<std::size_t>(params.learners));
  parallel_for(learners.size(), [&](std::size_t l) {
    learners[l] = train_learner(x, rows0, rows1, params, derive_seed(params.seed, l));
  });
  return learners;
}

}  // namespace

FldFit fld_train(MatrixView class0, MatrixView class1, double ridge) {
  if (class0.cols != class1.cols) fail(ErrorCode::DimensionMismatch, "FLD classes differ in dimension");
  if (!(ridge >= 0.0)) fail(ErrorCode::InvalidArgument, "ridge must be non-negative");
  return fld_fit(to_eigen(class0), to_eigen(class1), ridge);
}

double FldLearner::score(std::span<const double> x) const {
  double acc = bias;
  for (std::size_t i = 0; i < subspace.size(); ++i) acc += weights[i] * x[subspace[i]];
  return acc;
}

int majority_vote(std::span<const int> votes) {
  const auto ones = std::count(votes.begin(), votes.end(), 1);
  return 2 * std::size_t(ones) > votes.size() ? 1 : 0;
}

EnsembleModel ensemble_train(MatrixView x, std::span<const int> y, const EnsembleParams& params) {
  auto trained = train_learners(x, y, params);
  EnsembleModel model;
  model.dim = x.cols;
  model.d_sub = params.d_sub;
  model.seed = params.seed;
  for (auto& t : trained) model.learners.push_back(std::move(t.learner));
  return model;
}

int ensemble_predict(const EnsembleModel& model, std::span<const double> x) {
  if (x.size() != model.dim) fail(ErrorCode::DimensionMismatch, "feature dimension does not match model");
  std::size_t ones = 0;
  for (const auto& l : model.learners) ones += std::size_t(l.predict(x));
  return 2 * ones > model.learners.size() ? 1 : 0;
}

std::vector<std::size_t> effective_d_sub_candidates(const ClassifierConfig& config, std::size_t dim,
                                                    std::size_t smallest_class) {
  if (smallest_class < 2) fail(ErrorCode::InvalidArgument, "too few samples: every class needs at least 2 rows");
  std::vector<std::size_t> base = config.d_sub_candidates;
  if (base.empty()) {
    auto ceil_div = [](std::size_t a, std::size_t b) { return (a + b - 1) / b; };
    base = {std::size_t(std::ceil(std::sqrt(double(dim)))), ceil_div(dim, 8), ceil_div(dim, 4)};
  }
  const std::size_t cap = std::min(dim, smallest_class / 2);
  std::vector<std::size_t> out;
  for (auto d : base) {
    if (d == 0) fail(ErrorCode::InvalidArgument, "d_sub candidates must be positive");
    out.push_back(std::min(d, cap));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SearchResult ensemble_search(MatrixView x, std::span<const int> y, const ClassifierConfig& config,
                             std::uint64_t seed) {
  if (config.learner_candidates.empty()) fail(ErrorCode::InvalidArgument, "no ensemble size candidates");
  std::vector<int> sizes = config.learner_candidates;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  const std::size_t n0 = std::size_t(std::count(y.begin(), y.end(), 0));
  const std::size_t n1 = y.size() - n0;
  const auto d_subs = effective_d_sub_candidates(config, x.cols, std::min(n0, n1));

  SearchResult best;
  bool have_best = false;
  for (const auto d_sub : d_subs) {
    const EnsembleParams params{sizes.back(), d_sub, seed, true};
    auto trained = train_learners(x, y, params);

    // OOB decisions of every learner, computed once.
    std::vector<std::vector<signed char>> oob(trained.size(), std::vector<signed char>(x.rows, -1));
    parallel_for(trained.size(), [&](std::size_t l) {
      for (std::size_t r = 0; r < x.rows; ++r)
        if (!trained[l].in_bag[r]) oob[l][r] = static_cast<signed char>(trained[l].learner.predict(x.row(r)));
    });

    for (const int size : sizes) {
      std::size_t counted = 0, wrong = 0;
      for (std::size_t r = 0; r < x.rows; ++r) {
        std::size_t votes = 0, ones = 0;
        for (std::size_t l = 0; l < std::size_t(size); ++l)
          if (oob[l][r] >= 0) {
            ++votes;
            ones += std::size_t(oob[l][r]);
          }
        if (votes == 0) continue;
        ++counted;
        const int decision = 2 * ones > votes ? 1 : 0;
        wrong += decision != y[r];
      }
      const double error = counted ? double(wrong) / double(counted) : 0.5;
      best.table.push_back({size, d_sub, error});
      if (!have_best || error < best.oob_error) {
        have_best = true;
        best.oob_error = error;
        best.model = EnsembleModel{};
        best.model.dim = x.cols;
        best.model.d_sub = d_sub;
        best.model.seed = seed;
        for (std::size_t l = 0; l < std::size_t(size); ++l) best.model.learners.push_back(trained[l].learner);
      }
    }
  }
  return best;
}

std::uint64_t pair_seed(std::uint64_t master, int i, int j) {
  return derive_seed(derive_seed(master, std::uint64_t(i)), std::uint64_t(j));
}

PairwiseModel pairwise_train(MatrixView x, std::span<const int> labels, FeatureSet set,
                             const ClassifierConfig& config) {
  if (labels.size() != x.rows) fail(ErrorCode::DimensionMismatch, "label count does not match rows");
  if (labels.empty()) fail(ErrorCode::InvalidArgument, "no training rows");
  const int classes = *std::max_element(labels.begin(), labels.end());
  if (*std::min_element(labels.begin(), labels.end()) < 1 || classes < 2)
    fail(ErrorCode::InvalidArgument, "labels must be 1..k+1 with k >= 1");
  std::vector<std::vector<std::size_t>> rows(std::size_t(classes) + 1);
  for (std::size_t r = 0; r < labels.size(); ++r) rows[std::size_t(labels[r])].push_back(r);
  for (int c = 1; c <= classes; ++c)
    if (rows[std::size_t(c)].empty()) fail(ErrorCode::InvalidArgument, "missing class " + std::to_string(c));

  PairwiseModel model;
  model.k_plus_1 = classes;
  model.set = set;
  model.dim = x.cols;
  for (int i = 1; i <= classes; ++i)
    for (int j = i + 1; j <= classes; ++j) {
      const auto& ri = rows[std::size_t(i)];
      const auto& rj = rows[std::size_t(j)];
      std::vector<std::size_t> all(ri);
      all.insert(all.end(), rj.begin(), rj.end());
      std::vector<std::size_t> cols(x.cols);
      std::iota(cols.begin(), cols.end(), std::size_t{0});
      const RowMatrix sub = gather(x, all, cols);
      std::vector<int> y(all.size(), 0);
      std::fill(y.begin() + long(ri.size()), y.end(), 1);
      auto result = ensemble_search(MatrixView(sub.data(), all.size(), x.cols), y, config, pair_seed(config.seed, i, j));
      result.model.class_pair = {i, j};
      model.pairs.push_back({i, j, std::move(result.model), result.oob_error});
    }
  return model;
}

int vote_winner(int k_plus_1, std::span<const int> pair_votes) {
  std::vector<int> counts(std::size_t(k_plus_1) + 1, 0);
  for (int v : pair_votes) {
    if (v < 1 || v > k_plus_1) fail(ErrorCode::InvalidArgument, "vote outside label range");
    ++counts[std::size_t(v)];
  }
  int best = 1;
  for (int c = 2; c <= k_plus_1; ++c)
    if (counts[std::size_t(c)] > counts[std::size_t(best)]) best = c;
  return best;
}

int pairwise_predict(const PairwiseModel& model, std::span<const double> x) {
  if (x.size() != model.dim) fail(ErrorCode::DimensionMismatch, "feature dimension does not match model");
  std::vector<int> votes;
  votes.reserve(model.pairs.size());
  for (const auto& p : model.pairs) votes.push_back(ensemble_predict(p.model, x) == 1 ? p.j : p.i);
  return vote_winner(model.k_plus_1, votes);
}

std::vector<int> pairwise_predict_all(const PairwiseModel& model, MatrixView x) {
  if (x.cols != model.dim) fail(ErrorCode::DimensionMismatch, "feature dimension does not match model");
  std::vector<int> out(x.rows);
  parallel_for(x.rows, [&](std::size_t r) { out[r] = pairwise_predict(model, x.row(r)); });
  return out;
}

std::uint64_t ConfusionMatrix::row_sum(int actual) const {
  std::uint64_t s = 0;
  for (int p = 1; p <= classes; ++p) s += (*this)(actual, p);
  return s;
}

Evaluation score_predictions(int classes, std::span<const int> actual, std::span<const int> predicted) {
  if (actual.size() != predicted.size()) fail(ErrorCode::DimensionMismatch, "prediction count mismatch");
  if (actual.empty()) fail(ErrorCode::InvalidArgument, "empty test set");
  Evaluation ev;
  ev.confusion.classes = classes;
  ev.confusion.counts.assign(std::size_t(classes) * std::size_t(classes), 0);
  std::uint64_t correct = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] < 1 || actual[i] > classes) fail(ErrorCode::InvalidArgument, "unseen label " + std::to_string(actual[i]));
    if (predicted[i] < 1 || predicted[i] > classes) fail(ErrorCode::InvalidArgument, "prediction outside label range");
    ++ev.confusion.counts[std::size_t(actual[i] - 1) * std::size_t(classes) + std::size_t(predicted[i] - 1)];
    correct += actual[i] == predicted[i];
  }
  ev.accuracy = double(correct) / double(actual.size());
  double recall_sum = 0.0;
  for (int c = 1; c <= classes; ++c) {
    const auto n = ev.confusion.row_sum(c);
    if (n == 0) fail(ErrorCode::InvalidArgument, "test set has no samples of class " + std::to_string(c));
    recall_sum += double(ev.confusion(c, c)) / double(n);
  }
  ev.diagonal_average = recall_sum / classes;
  return ev;
}

Evaluation evaluate(const PairwiseModel& model, MatrixView x, std::span<const int> labels) {
  if (labels.size() != x.rows) fail(ErrorCode::DimensionMismatch, "label count does not match rows");
  const auto predicted = pairwise_predict_all(model, x);
  return score_predictions(model.k_plus_1, labels, predicted);
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::string out = "actual\\predicted";
  for (int p = 1; p <= cm.classes; ++p) out += "," + std::to_string(p);
  out += '\n';
  for (int a = 1; a <= cm.classes; ++a) {
    out += std::to_string(a);
    for (int p = 1; p <= cm.classes; ++p) out += "," + std::to_string(cm(a, p));
    out += '\n';
  }
  return out;
}

std::string model_to_json(const PairwiseModel& model, const std::string& extra_json) {
  nlohmann::ordered_json j;
  j["k_plus_1"] = model.k_plus_1;
  j["set_id"] = std::string(to_string(model.set));
  j["dim"] = model.dim;
  auto extra = nlohmann::ordered_json::parse(extra_json);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  auto& pairs = j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : model.pairs) {
    nlohmann::ordered_json pj;
    pj["i"] = p.i;
    pj["j"] = p.j;
    pj["L"] = p.model.learners.size();
    pj["d_sub"] = p.model.d_sub;
    pj["seed"] = p.model.seed;
    pj["oob_error"] = p.oob_error;
    auto& learners = pj["learners"] = nlohmann::ordered_json::array();
    for (const auto& l : p.model.learners) {
      nlohmann::ordered_json lj;
      lj["subspace"] = l.subspace;
      lj["weights"] = l.weights;
      lj["bias"] = l.bias;
      learners.push_back(std::move(lj));
    }
    pairs.push_back(std::move(pj));
  }
  return j.dump();
}

PairwiseModel model_from_json(std::string_view text) {
  PairwiseModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    model.k_plus_1 = j.at("k_plus_1").get<int>();
    const auto set = parse_feature_set(j.at("set_id").get<std::string>());
    if (!set) fail(ErrorCode::Parse, "model: unknown set_id");
    model.set = *set;
    model.dim = j.at("dim").get<std::size_t>();
    for (const auto& pj : j.at("pairs")) {
      PairModel p;
      p.i = pj.at("i").get<int>();
      p.j = pj.at("j").get<int>();
      p.model.dim = model.dim;
      p.model.d_sub = pj.at("d_sub").get<std::size_t>();
      p.model.seed = pj.at("seed").get<std::uint64_t>();
      p.model.class_pair = {p.i, p.j};
      p.oob_error = pj.value("oob_error", 0.0);
      for (const auto& lj : pj.at("learners")) {
        FldLearner l{lj.at("subspace").get<std::vector<std::size_t>>(), lj.at("weights").get<std::vector<double>>(),
                     lj.at("bias").get<double>()};
        if (l.subspace.size() != l.weights.size() || l.subspace.size() != p.model.d_sub)
          fail(ErrorCode::Parse, "model: learner subspace/weights size mismatch");
        for (auto idx : l.subspace)
          if (idx >= model.dim) fail(ErrorCode::Parse, "model: subspace index out of range");
        p.model.learners.push_back(std::move(l));
      }
      if (p.model.learners.size() != pj.at("L").get<std::size_t>() || p.model.learners.size() % 2 == 0)
        fail(ErrorCode::Parse, "model: bad learner count");
      model.pairs.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("model JSON: ") + e.what());
  }
  const auto k = std::size_t(model.k_plus_1);
  if (model.k_plus_1 < 2 || model.pairs.size() != k * (k - 1) / 2)
    fail(ErrorCode::Parse, "model: pair count does not match class count");
  return model;
}

Split stratified_split(std::span<const int> labels, std::uint64_t seed) {
  Split split;
  if (labels.empty()) return split;
  const int classes = *std::max_element(labels.begin(), labels.end());
  for (int c = 0; c <= classes; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < labels.size(); ++r)
      if (labels[r] == c) rows.push_back(r);
    if (rows.empty()) continue;
    Rng rng(derive_seed(seed, std::uint64_t(c)));
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.below(i)]);
    const std::size_t n_train = (rows.size() + 1) / 2;
    split.train.insert(split.train.end(), rows.begin(), rows.begin() + long(n_train));
    split.test.insert(split.test.end(), rows.begin() + long(n_train), rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace opstego
