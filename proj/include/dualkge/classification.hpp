#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dualkge/forest.hpp"
#include "dualkge/kg_store.hpp"
#include "dualkge/matrix.hpp"
#include "dualkge/metrics.hpp"
#include "dualkge/model.hpp"

namespace dualkge {

struct PairExample {
  EntityId e1 = 0;
  EntityId e2 = 0;
  int label = 0;
};

/// `entity1<TAB>entity2<TAB>label` with label 0 or 1; entities must be in `vocab`.
std::vector<PairExample> parse_pairs(std::istream& in, const Vocabulary& vocab, const std::string& source = "<stream>");
std::vector<PairExample> parse_pairs(const std::filesystem::path& path, const Vocabulary& vocab);

/// Row e = [pos row e | neg row e].
Matrix concat_entity_rows(const EmbeddingModel& pos, const EmbeddingModel& neg);

/// Elementwise product of the two entities' representation rows.
std::vector<double> pair_features(const Matrix& representations, const PairExample& pair);

/// Seed-shuffled fold id per example; fold sizes differ by at most one.
std::vector<std::size_t> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct FoldResult {
  std::size_t fold = 0;
  std::optional<ClassificationMetrics> metrics;
  std::string error;
};

struct ClassificationReport {
  std::vector<FoldResult> folds;
  /// Medians over the folds that produced metrics.
  ClassificationMetrics median;
  std::size_t fold_count = 0;

  /// Per-fold values of one metric, in fold order, skipping failed folds.
  std::vector<double> metric_values(double ClassificationMetrics::*field) const;
};

struct TripleClassificationOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  /// Use predicted labels instead of vote fractions as AUC scores.
  bool auc_from_labels = false;
};

/// k-fold cross-validated random forest on Hadamard pair features.
ClassificationReport evaluate_triple_classification(const Matrix& representations,
                                                    const std::vector<PairExample>& pairs,
                                                    const ForestConfig& forest_cfg,
                                                    const TripleClassificationOptions& options = {});

}  // namespace dualkge
