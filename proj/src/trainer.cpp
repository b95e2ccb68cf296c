#include "dualkge/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "dualkge/error.hpp"
#include "dualkge/parallel.hpp"

namespace dualkge {

namespace {

constexpr double kAdagradEpsilon = 1e-8;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void add_row_penalty(const EmbeddingModel& model, const Triple& t, double lambda, double& loss, SparseGradient& g) {
  auto penalise = [&](std::span<const double> row, std::span<double> grad_row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      loss += lambda * row[i] * row[i];
      grad_row[i] += 2.0 * lambda * row[i];
    }
  };
  penalise(model.entities.row(t.head), g.entities.row(t.head));
  penalise(model.relations.row(t.relation), g.relations.row(t.relation));
  penalise(model.entities.row(t.tail), g.entities.row(t.tail));
}

void ensure_optimizer_state(EmbeddingModel& model, Optimizer optimizer) {
  if (optimizer != Optimizer::Adagrad || model.has_adagrad_state()) return;
  model.entity_accum = Matrix(model.entities.rows(), model.entities.cols());
  model.relation_accum = Matrix(model.relations.rows(), model.relations.cols());
}

// One pass over the model's positives in a shuffled order, updating per batch.
double train_step(EmbeddingModel& model, const KnowledgeGraph& kg, const NegativeSampleSet& negatives,
                  const std::vector<std::size_t>& order, const TrainConfig& cfg) {
  const std::size_t n = order.size();
  const std::size_t batch = (n + cfg.n_batches - 1) / cfg.n_batches;
  std::vector<Triple> pos_batch, neg_batch;
  double total = 0.0;
  for (std::size_t begin = 0; begin < n; begin += batch) {
    const std::size_t end = std::min(n, begin + batch);
    pos_batch.clear();
    neg_batch.clear();
    for (std::size_t k = begin; k < end; ++k) {
      pos_batch.push_back(kg.triples()[order[k]]);
      neg_batch.push_back(negatives.samples[order[k]]);
    }
    auto step = loss_and_grads(model, pos_batch, neg_batch, cfg);
    total += step.loss;
    apply_update(model, step.grad, cfg);
  }
  if (cfg.normalize_entities && model.kind.family == ModelFamily::TransE) normalize_entity_rows(model);
  return total;
}

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

void require_nonempty(const KnowledgeGraph& kg, const char* what) {
  if (kg.empty()) throw ArgumentError(std::string(what) + " graph is empty");
}

void require_finite(const EmbeddingModel& model, const char* which, std::size_t epoch) {
  auto finite = [](const Matrix& m) {
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
  };
  if (!finite(model.entities) || !finite(model.relations)) {
    throw TrainingError(std::string(which) + " model diverged (non-finite parameters) in epoch " +
                        std::to_string(epoch));
  }
}

}  // namespace

std::string optimizer_name(Optimizer o) { return o == Optimizer::Sgd ? "sgd" : "adagrad"; }

Optimizer parse_optimizer(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sgd") return Optimizer::Sgd;
  if (lower == "adagrad") return Optimizer::Adagrad;
  throw ArgumentError("unknown optimizer '" + name + "'");
}

double TrainConfig::effective_learning_rate() const {
  if (learning_rate) return *learning_rate;
  return kind.family == ModelFamily::TransE ? 0.01 : 0.1;
}

Optimizer TrainConfig::effective_optimizer() const {
  if (optimizer) return *optimizer;
  return kind.family == ModelFamily::TransE ? Optimizer::Sgd : Optimizer::Adagrad;
}

void TrainConfig::validate() const {
  kind.validate();
  if (n_batches < 1) throw ArgumentError("n_batches must be at least 1");
  if (dim < 1) throw ArgumentError("dim must be at least 1");
  if (cl_phase > epochs) throw ArgumentError("cl_phase must not exceed epochs");
  if (neg_rate != 1) throw ArgumentError("only an entity negative rate of 1 is supported");
  if (!(effective_learning_rate() > 0.0)) throw ArgumentError("learning rate must be positive");
  if (!(margin > 0.0)) throw ArgumentError("margin must be positive");
  if (!(reg_lambda >= 0.0)) throw ArgumentError("reg_lambda must be non-negative");
  if (regen_interval < 1) throw ArgumentError("regen_interval must be at least 1");
}

LossAndGrad loss_and_grads(const EmbeddingModel& model, std::span<const Triple> positives,
                           std::span<const Triple> negatives, const TrainConfig& cfg) {
  if (positives.size() != negatives.size()) {
    throw ArgumentError("positive and negative batches are misaligned (" + std::to_string(positives.size()) +
                        " vs " + std::to_string(negatives.size()) + ")");
  }
  LossAndGrad out{0.0, SparseGradient(model.width())};
  const bool hinge = model.kind.family == ModelFamily::TransE;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const double s_pos = score(model, positives[i]);
    const double s_neg = score(model, negatives[i]);
    if (hinge) {
      const double violation = cfg.margin + s_neg - s_pos;
      if (violation > 0.0) {
        out.loss += violation;
        accumulate_score_grad(model, negatives[i], 1.0, out.grad);
        accumulate_score_grad(model, positives[i], -1.0, out.grad);
      }
    } else {
      out.loss += softplus(-s_pos) + softplus(s_neg);
      accumulate_score_grad(model, positives[i], -sigmoid(-s_pos), out.grad);
      accumulate_score_grad(model, negatives[i], sigmoid(s_neg), out.grad);
      if (cfg.reg_lambda > 0.0) {
        add_row_penalty(model, positives[i], cfg.reg_lambda, out.loss, out.grad);
        add_row_penalty(model, negatives[i], cfg.reg_lambda, out.loss, out.grad);
      }
    }
  }
  return out;
}

void apply_update(EmbeddingModel& model, const SparseGradient& grads, const TrainConfig& cfg) {
  const double lr = cfg.effective_learning_rate();
  const Optimizer optimizer = cfg.effective_optimizer();
  ensure_optimizer_state(model, optimizer);
  auto update = [&](const SparseRows& rows, Matrix& params, Matrix& accum) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto id = rows.id_at(k);
      const auto g = rows.values_at(k);
      auto row = params.row(id);
      if (optimizer == Optimizer::Sgd) {
        for (std::size_t i = 0; i < g.size(); ++i) row[i] -= lr * g[i];
      } else {
        auto acc = accum.row(id);
        for (std::size_t i = 0; i < g.size(); ++i) {
          acc[i] += g[i] * g[i];
          row[i] -= lr * g[i] / std::sqrt(acc[i] + kAdagradEpsilon);
        }
      }
    }
  };
  update(grads.entities, model.entities, model.entity_accum);
  update(grads.relations, model.relations, model.relation_accum);
}

void normalize_entity_rows(EmbeddingModel& model) {
  for (std::size_t e = 0; e < model.entities.rows(); ++e) {
    auto row = model.entities.row(e);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    if (sq > 1.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (double& v : row) v *= inv;
    }
  }
}

DualModelState init_dual(const Vocabulary& vocab, const TrainConfig& cfg) {
  cfg.validate();
  DualModelState state;
  state.pos_model = init_model(cfg.kind, cfg.dim, vocab.entity_count(), vocab.relation_count(), mix_seed(cfg.seed, 1));
  state.neg_model = init_model(cfg.kind, cfg.dim, vocab.entity_count(), vocab.relation_count(), mix_seed(cfg.seed, 2));
  state.rng.seed(mix_seed(cfg.seed, 0));
  return state;
}

void advance_dual(DualModelState& state, const KnowledgeGraph& kg_pos, const KnowledgeGraph& kg_neg,
                  const TrainConfig& cfg) {
  require_nonempty(kg_pos, "positive");
  require_nonempty(kg_neg, "negative");
  const std::size_t epoch = state.epoch + 1;  // 1-based

  // Both sample sets are drawn before either model steps, so each model scores
  // against the other's parameters as they stood at the end of the previous epoch.
  if (epoch > cfg.cl_phase) {
    const bool regenerate = (epoch - cfg.cl_phase - 1) % cfg.regen_interval == 0 ||
                            state.pos_negatives.provenance != Provenance::Contrastive ||
                            state.pos_negatives.samples.size() != kg_pos.size() ||
                            state.neg_negatives.samples.size() != kg_neg.size();
    if (regenerate) {
      auto pos_next = contrastive_corrupt(kg_pos, state.neg_model, state.rng, cfg.pool_size, cfg.threads);
      auto neg_next = contrastive_corrupt(kg_neg, state.pos_model, state.rng, cfg.pool_size, cfg.threads);
      state.pos_negatives = std::move(pos_next);
      state.neg_negatives = std::move(neg_next);
    }
  } else {
    state.pos_negatives = random_corrupt(kg_pos, state.rng);
    state.neg_negatives = random_corrupt(kg_neg, state.rng);
  }
  const auto pos_order = shuffled_order(kg_pos.size(), state.rng);
  const auto neg_order = shuffled_order(kg_neg.size(), state.rng);

  double losses[2] = {0.0, 0.0};
  parallel_for(2, cfg.threads, [&](std::size_t which) {
    if (which == 0) {
      losses[0] = train_step(state.pos_model, kg_pos, state.pos_negatives, pos_order, cfg);
    } else {
      losses[1] = train_step(state.neg_model, kg_neg, state.neg_negatives, neg_order, cfg);
    }
  });
  require_finite(state.pos_model, "positive", epoch);
  require_finite(state.neg_model, "negative", epoch);
  state.epoch = epoch;
  state.loss_history.push_back(
      {epoch, losses[0], losses[1], state.pos_negatives.provenance, state.neg_negatives.provenance});
}

DualModelState train_dual(const KnowledgeGraph& kg_pos, const KnowledgeGraph& kg_neg, const Vocabulary& vocab,
                          const TrainConfig& cfg) {
  require_nonempty(kg_pos, "positive");
  require_nonempty(kg_neg, "negative");
  auto state = init_dual(vocab, cfg);
  while (state.epoch < cfg.epochs) advance_dual(state, kg_pos, kg_neg, cfg);
  return state;
}

std::vector<double> final_representation(const DualModelState& state, EntityId entity) {
  if (entity >= state.pos_model.entity_count() || entity >= state.neg_model.entity_count()) {
    throw ArgumentError("entity index " + std::to_string(entity) + " out of range");
  }
  const auto pos = state.pos_model.entities.row(entity);
  const auto neg = state.neg_model.entities.row(entity);
  std::vector<double> out(pos.begin(), pos.end());
  out.insert(out.end(), neg.begin(), neg.end());
  return out;
}

BaselineState init_baseline(const Vocabulary& vocab, const TrainConfig& cfg) {
  cfg.validate();
  BaselineState state;
  state.model = init_model(cfg.kind, 2 * cfg.dim, vocab.entity_count(), vocab.relation_count(), mix_seed(cfg.seed, 1));
  state.rng.seed(mix_seed(cfg.seed, 0));
  return state;
}

void advance_baseline(BaselineState& state, const KnowledgeGraph& kg, const TrainConfig& cfg) {
  require_nonempty(kg, "training");
  const std::size_t epoch = state.epoch + 1;
  const auto negatives = random_corrupt(kg, state.rng);
  const auto order = shuffled_order(kg.size(), state.rng);
  const double loss = train_step(state.model, kg, negatives, order, cfg);
  require_finite(state.model, "baseline", epoch);
  state.epoch = epoch;
  state.loss_history.push_back({epoch, loss, 0.0, Provenance::Random, Provenance::Random});
}

BaselineState train_baseline(const KnowledgeGraph& kg, const Vocabulary& vocab, const TrainConfig& cfg) {
  require_nonempty(kg, "training");
  auto state = init_baseline(vocab, cfg);
  while (state.epoch < cfg.epochs) advance_baseline(state, kg, cfg);
  return state;
}

}  // namespace dualkge
