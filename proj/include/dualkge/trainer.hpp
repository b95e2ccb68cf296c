#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualkge/kg_store.hpp"
#include "dualkge/model.hpp"
#include "dualkge/random.hpp"
#include "dualkge/sampling.hpp"

namespace dualkge {

enum class Optimizer { Sgd, Adagrad };

std::string optimizer_name(Optimizer o);
Optimizer parse_optimizer(const std::string& name);

struct TrainConfig {
  std::size_t epochs = 400;
  std::size_t n_batches = 100;
  std::size_t neg_rate = 1;
  std::size_t cl_phase = 350;
  std::size_t dim = 50;
  ModelKind kind = ModelKind::transe(1);
  /// Unset means the per-kind default: 0.01 for TransE, 0.1 for DistMult/ComplEx.
  std::optional<double> learning_rate;
  double margin = 1.0;
  double reg_lambda = 1e-5;
  /// Unset means SGD for TransE, Adagrad otherwise.
  std::optional<Optimizer> optimizer;
  std::uint64_t seed = 0;
  PoolSize pool_size = PoolSize::all();
  bool normalize_entities = false;
  /// Contrastive negatives are rebuilt every this many epochs once the phase starts.
  std::size_t regen_interval = 1;
  std::size_t threads = 1;

  double effective_learning_rate() const;
  Optimizer effective_optimizer() const;
  void validate() const;
};

/// Per-epoch record of summed losses and which sampler produced the negatives.
struct EpochRecord {
  std::size_t epoch = 0;
  double loss_pos = 0.0;
  double loss_neg = 0.0;
  Provenance provenance_pos = Provenance::Random;
  Provenance provenance_neg = Provenance::Random;
};

struct DualModelState {
  EmbeddingModel pos_model;
  EmbeddingModel neg_model;
  std::size_t epoch = 0;
  Rng rng;
  std::vector<EpochRecord> loss_history;
  /// Negatives used in the most recent epoch, aligned with each graph's triples.
  NegativeSampleSet pos_negatives;
  NegativeSampleSet neg_negatives;
};

struct BaselineState {
  EmbeddingModel model;
  std::size_t epoch = 0;
  Rng rng;
  /// loss_neg is unused (always 0) for single-model runs.
  std::vector<EpochRecord> loss_history;
};

struct LossAndGrad {
  double loss = 0.0;
  SparseGradient grad;
};

/// Summed loss over aligned (positive, negative) pairs and its exact gradient.
/// TransE: margin ranking hinge. DistMult/ComplEx: softplus logistic loss plus
/// reg_lambda times the squared norms of every involved row (per occurrence).
LossAndGrad loss_and_grads(const EmbeddingModel& model, std::span<const Triple> positives,
                           std::span<const Triple> negatives, const TrainConfig& cfg);

/// SGD or Adagrad step on the rows present in `grads`.
void apply_update(EmbeddingModel& model, const SparseGradient& grads, const TrainConfig& cfg);

/// Fresh dual state with both models initialised from cfg.seed.
DualModelState init_dual(const Vocabulary& vocab, const TrainConfig& cfg);

/// Runs one epoch of the lockstep loop on `state`.
void advance_dual(DualModelState& state, const KnowledgeGraph& kg_pos, const KnowledgeGraph& kg_neg,
                  const TrainConfig& cfg);

DualModelState train_dual(const KnowledgeGraph& kg_pos, const KnowledgeGraph& kg_neg, const Vocabulary& vocab,
                          const TrainConfig& cfg);

/// [pos row | neg row] for one entity.
std::vector<double> final_representation(const DualModelState& state, EntityId entity);

/// Single model at twice cfg.dim, random negatives every epoch.
BaselineState init_baseline(const Vocabulary& vocab, const TrainConfig& cfg);
void advance_baseline(BaselineState& state, const KnowledgeGraph& kg, const TrainConfig& cfg);
BaselineState train_baseline(const KnowledgeGraph& kg, const Vocabulary& vocab, const TrainConfig& cfg);

/// Clamps every entity row to the unit L2 ball.
void normalize_entity_rows(EmbeddingModel& model);

}  // namespace dualkge
