#include "dualkge/classification.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "dualkge/error.hpp"
#include "dualkge/random.hpp"

namespace dualkge {

std::vector<PairExample> parse_pairs(std::istream& in, const Vocabulary& vocab, const std::string& source) {
  std::vector<PairExample> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    const auto f = split_tabs(view);
    if (f.size() != 3) throw ParseError(source, line_no, "expected 3 tab-separated fields, got " + std::to_string(f.size()));
    const auto a = vocab.entities.find(f[0]);
    const auto b = vocab.entities.find(f[1]);
    if (!a) throw ParseError(source, line_no, "unknown entity '" + std::string(f[0]) + "'");
    if (!b) throw ParseError(source, line_no, "unknown entity '" + std::string(f[1]) + "'");
    if (f[2] != "0" && f[2] != "1") throw ParseError(source, line_no, "label must be 0 or 1");
    pairs.push_back({*a, *b, f[2] == "1" ? 1 : 0});
  }
  if (in.bad()) throw IoError("read failure on " + source);
  return pairs;
}

std::vector<PairExample> parse_pairs(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_pairs(in, vocab, path.string());
}

Matrix concat_entity_rows(const EmbeddingModel& pos, const EmbeddingModel& neg) {
  if (pos.entity_count() != neg.entity_count()) throw ArgumentError("models disagree on entity count");
  Matrix out(pos.entity_count(), pos.width() + neg.width());
  for (std::size_t e = 0; e < pos.entity_count(); ++e) {
    auto row = out.row(e);
    std::copy(pos.entities.row(e).begin(), pos.entities.row(e).end(), row.begin());
    std::copy(neg.entities.row(e).begin(), neg.entities.row(e).end(),
              row.begin() + static_cast<std::ptrdiff_t>(pos.width()));
  }
  return out;
}

std::vector<double> pair_features(const Matrix& representations, const PairExample& pair) {
  if (pair.e1 >= representations.rows() || pair.e2 >= representations.rows()) {
    throw ArgumentError("pair entity index out of range");
  }
  const auto a = representations.row(pair.e1);
  const auto b = representations.row(pair.e2);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

std::vector<std::size_t> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("k-fold needs k >= 2");
  if (n < k) throw ArgumentError("k-fold needs at least k examples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = pos % k;
  return fold;
}

std::vector<double> ClassificationReport::metric_values(double ClassificationMetrics::*field) const {
  std::vector<double> values;
  for (const auto& f : folds) {
    if (f.metrics) values.push_back((*f.metrics).*field);
  }
  return values;
}

ClassificationReport evaluate_triple_classification(const Matrix& representations,
                                                    const std::vector<PairExample>& pairs,
                                                    const ForestConfig& forest_cfg,
                                                    const TripleClassificationOptions& options) {
  const bool has_pos = std::any_of(pairs.begin(), pairs.end(), [](const PairExample& p) { return p.label == 1; });
  const bool has_neg = std::any_of(pairs.begin(), pairs.end(), [](const PairExample& p) { return p.label == 0; });
  if (!has_pos || !has_neg) throw ArgumentError("triple classification needs both labels among the pairs");

  const std::size_t width = representations.cols();
  Matrix features(pairs.size(), width);
  std::vector<int> labels(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto f = pair_features(representations, pairs[i]);
    std::copy(f.begin(), f.end(), features.row(i).begin());
    labels[i] = pairs[i].label;
  }
  const auto fold_of = kfold_split(pairs.size(), options.folds, options.seed);

  ClassificationReport report;
  report.fold_count = options.folds;
  for (std::size_t fold = 0; fold < options.folds; ++fold) {
    FoldResult result;
    result.fold = fold;
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < pairs.size(); ++i) (fold_of[i] == fold ? test_idx : train_idx).push_back(i);
    try {
      Matrix train_x(train_idx.size(), width);
      std::vector<int> train_y(train_idx.size());
      for (std::size_t r = 0; r < train_idx.size(); ++r) {
        std::copy(features.row(train_idx[r]).begin(), features.row(train_idx[r]).end(), train_x.row(r).begin());
        train_y[r] = labels[train_idx[r]];
      }
      ForestConfig cfg = forest_cfg;
      cfg.seed = mix_seed(forest_cfg.seed, fold);
      const Forest forest = forest_train(train_x, train_y, cfg);

      std::vector<int> truth, predicted;
      std::vector<double> scores;
      for (const std::size_t i : test_idx) {
        const auto p = forest_predict(forest, features.row(i));
        truth.push_back(labels[i]);
        predicted.push_back(p.label);
        scores.push_back(options.auc_from_labels ? static_cast<double>(p.label) : p.score);
      }
      result.metrics = classification_metrics(truth, predicted, scores);
    } catch (const Error& e) {
      result.error = e.what();
    }
    report.folds.push_back(std::move(result));
  }

  auto med = [&](double ClassificationMetrics::*field) {
    const auto values = report.metric_values(field);
    return values.empty() ? 0.0 : median(values);
  };
  report.median.precision = med(&ClassificationMetrics::precision);
  report.median.recall = med(&ClassificationMetrics::recall);
  report.median.weighted_f1 = med(&ClassificationMetrics::weighted_f1);
  report.median.auc = med(&ClassificationMetrics::auc);
  return report;
}

}  // namespace dualkge
