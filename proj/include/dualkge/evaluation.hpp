#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dualkge/kg_store.hpp"
#include "dualkge/model.hpp"

namespace dualkge {

/// Anything that assigns plausibility scores to triples over a fixed entity set.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(const Triple& triple) const = 0;
  virtual std::size_t entity_count() const = 0;
  /// Default: one score() call per candidate.
  virtual void score_corruptions(const Triple& triple, Slot slot, std::span<const EntityId> candidates,
                                 std::span<double> out) const;
};

class ModelScorer final : public Scorer {
 public:
  explicit ModelScorer(const EmbeddingModel& model) : model_(model) {}
  double score(const Triple& triple) const override { return dualkge::score(model_, triple); }
  std::size_t entity_count() const override { return model_.entity_count(); }
  void score_corruptions(const Triple& triple, Slot slot, std::span<const EntityId> candidates,
                         std::span<double> out) const override {
    score_all_corruptions(model_, triple, slot, candidates, out);
  }

 private:
  const EmbeddingModel& model_;
};

/// Sum of two models' scores. Experimental scoring for concatenated representations.
class SummedScorer final : public Scorer {
 public:
  SummedScorer(const EmbeddingModel& first, const EmbeddingModel& second);
  double score(const Triple& triple) const override;
  std::size_t entity_count() const override { return first_.entity_count(); }
  void score_corruptions(const Triple& triple, Slot slot, std::span<const EntityId> candidates,
                         std::span<double> out) const override;

 private:
  const EmbeddingModel& first_;
  const EmbeddingModel& second_;
};

class FunctionScorer final : public Scorer {
 public:
  FunctionScorer(std::function<double(const Triple&)> fn, std::size_t n_entities)
      : fn_(std::move(fn)), n_entities_(n_entities) {}
  double score(const Triple& triple) const override { return fn_(triple); }
  std::size_t entity_count() const override { return n_entities_; }

 private:
  std::function<double(const Triple&)> fn_;
  std::size_t n_entities_;
};

enum class TieMode {
  /// 1 + number of candidates scoring strictly higher.
  Optimistic,
  /// 1 + higher + equal / 2.
  Mean,
};

/// Filtered rank of `test_triple` among corruptions of `slot`. Candidates whose
/// triple is in `known` (other than the test triple itself) are discarded.
double rank_filtered(const Scorer& scorer, const Triple& test_triple, Slot slot,
                     std::span<const EntityId> all_entities, const TripleSet& known,
                     TieMode ties = TieMode::Optimistic);

struct HeadTailAvg {
  double head = 0.0;
  double tail = 0.0;
  double avg = 0.0;
};

struct RankingReport {
  double mrr_head = 0.0;
  double mrr_tail = 0.0;
  double mrr_avg = 0.0;
  std::map<std::size_t, HeadTailAvg> hits;
  std::size_t n_test = 0;
  std::vector<double> head_ranks;
  std::vector<double> tail_ranks;
};

struct LinkPredictionOptions {
  std::vector<std::size_t> ks{1, 10};
  /// Filter only training triples instead of training plus test triples.
  bool filter_train_only = false;
  TieMode ties = TieMode::Optimistic;
  std::size_t threads = 1;
};

RankingReport evaluate_link_prediction(const Scorer& scorer, const KnowledgeGraph& test,
                                       const KnowledgeGraph& train, const LinkPredictionOptions& options = {});

struct SemReport {
  std::size_t k = 0;
  HeadTailAvg sem;
  std::size_t n_head = 0;
  std::size_t n_tail = 0;
  std::size_t n_scored = 0;
  std::vector<std::string> warnings;
};

struct SemOptions {
  /// Skip the known-triple filter when building the top-k pool.
  bool raw = false;
  bool filter_train_only = false;
  std::size_t threads = 1;
};

/// Mean fraction of top-k predictions whose entity shares the ground-truth entity's type.
/// Queries whose ground-truth entity is untyped are left out; untyped predictions count 0.
SemReport sem_at_k(const Scorer& scorer, const KnowledgeGraph& test, const KnowledgeGraph& train,
                   const TypeMap& types, std::size_t k, const SemOptions& options = {});

}  // namespace dualkge
