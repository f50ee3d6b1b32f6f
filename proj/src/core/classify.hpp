#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "features.hpp"

namespace opstego {

/// Non-owning row-major matrix.
struct MatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  MatrixView() = default;
  MatrixView(const double* d, std::size_t r, std::size_t c) : data(d), rows(r), cols(c) {}
  MatrixView(const FeatureMatrix& m) : data(m.data.data()), rows(m.rows), cols(m.cols) {}  // NOLINT

  std::span<const double> row(std::size_t i) const { return {data + i * cols, cols}; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct FldFit {
  std::vector<double> weights;
  double bias = 0.0;
};

/// Fisher discriminant between class 0 rows and class 1 rows:
/// w = (S_w + ridge I)^-1 (mu1 - mu0), threshold at the projected midpoint
/// of the class means. Throws Degenerate if the system is singular.
FldFit fld_train(MatrixView class0, MatrixView class1, double ridge);

/// Ridge used by the ensemble: 1e-6 * trace(S_w) / dim.
inline constexpr double kRelativeRidge = 1e-6;

struct FldLearner {
  std::vector<std::size_t> subspace;  // sorted feature indices
  std::vector<double> weights;        // over the subspace
  double bias = 0.0;

  double score(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return score(x) > 0.0 ? 1 : 0; }
};

struct EnsembleParams {
  int learners = 51;  // odd
  std::size_t d_sub = 1;
  std::uint64_t seed = 0;
  bool bootstrap = true;
};

struct EnsembleModel {
  std::vector<FldLearner> learners;
  std::size_t dim = 0;
  std::size_t d_sub = 0;
  std::uint64_t seed = 0;
  std::pair<int, int> class_pair{0, 1};  // labels voted for decision 0 / 1
};

/// Binary ensemble; y holds 0/1 labels. Learner l draws its subspace and
/// bootstrap sample from derive_seed(seed, l).
EnsembleModel ensemble_train(MatrixView x, std::span<const int> y, const EnsembleParams& params);
int ensemble_predict(const EnsembleModel& model, std::span<const double> x);
/// Majority vote over 0/1 decisions (odd count).
int majority_vote(std::span<const int> votes);

struct ClassifierConfig {
  std::vector<int> learner_candidates{11, 31, 51};
  /// Empty selects {ceil(sqrt(dim)), ceil(dim/8), ceil(dim/4)}.
  std::vector<std::size_t> d_sub_candidates;
  std::uint64_t seed = 0;
};

struct OobEntry {
  int learners = 0;
  std::size_t d_sub = 0;
  double oob_error = 0.0;
};

struct SearchResult {
  EnsembleModel model;
  double oob_error = 0.0;
  std::vector<OobEntry> table;
};

/// d_sub candidates after applying the default rule and the sample floor
/// (every class needs at least 2 * d_sub rows).
std::vector<std::size_t> effective_d_sub_candidates(const ClassifierConfig& config, std::size_t dim,
                                                    std::size_t smallest_class);

/// Trains one ensemble per (L, d_sub) candidate and keeps the one with the
/// lowest out-of-bag error; ties prefer smaller d_sub, then smaller L.
SearchResult ensemble_search(MatrixView x, std::span<const int> y, const ClassifierConfig& config,
                             std::uint64_t seed);

/// Seed of the binary model for class pair (i, j).
std::uint64_t pair_seed(std::uint64_t master, int i, int j);

struct PairModel {
  int i = 0;
  int j = 0;
  EnsembleModel model;
  double oob_error = 0.0;
};

struct PairwiseModel {
  int k_plus_1 = 0;
  FeatureSet set = FeatureSet::Spam686;
  std::size_t dim = 0;
  std::vector<PairModel> pairs;
};

/// Labels are 1..k+1. One ensemble per unordered pair, trained on the rows
/// of those two classes only.
PairwiseModel pairwise_train(MatrixView x, std::span<const int> labels, FeatureSet set,
                             const ClassifierConfig& config);
/// Most voted label; ties go to the smallest label.
int pairwise_predict(const PairwiseModel& model, std::span<const double> x);
int vote_winner(int k_plus_1, std::span<const int> pair_votes);
std::vector<int> pairwise_predict_all(const PairwiseModel& model, MatrixView x);

struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::uint64_t> counts;  // row = actual, column = predicted

  std::uint64_t operator()(int actual, int predicted) const {
    return counts[std::size_t(actual - 1) * std::size_t(classes) + std::size_t(predicted - 1)];
  }
  std::uint64_t row_sum(int actual) const;
};

struct Evaluation {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double diagonal_average = 0.0;
};

/// Tallies (actual, predicted) pairs over labels 1..classes.
Evaluation score_predictions(int classes, std::span<const int> actual, std::span<const int> predicted);
Evaluation evaluate(const PairwiseModel& model, MatrixView x, std::span<const int> labels);

std::string confusion_to_csv(const ConfusionMatrix& cm);

std::string model_to_json(const PairwiseModel& model, const std::string& extra_json = "{}");
PairwiseModel model_from_json(std::string_view json);

/// Stratified split: within each class, a seeded shuffle sends the first
/// ceil(n/2) rows to training.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split stratified_split(std::span<const int> labels, std::uint64_t seed);

}  // namespace opstego
