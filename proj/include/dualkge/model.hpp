#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualkge/kg_store.hpp"
#include "dualkge/matrix.hpp"

namespace dualkge {

enum class ModelFamily { TransE, DistMult, ComplEx };

struct ModelKind {
  ModelFamily family = ModelFamily::TransE;
  /// Norm order for TransE (1 or 2).
  int norm = 1;
  /// ComplEx only: score Re(<h, r, conj(t)>) when true, Re(<h, r, t>) otherwise.
  bool conjugate_tail = true;

  static ModelKind transe(int p = 1) { return {ModelFamily::TransE, p, true}; }
  static ModelKind distmult() { return {ModelFamily::DistMult, 1, true}; }
  static ModelKind complex(bool conjugate = true) { return {ModelFamily::ComplEx, 1, conjugate}; }

  /// Storage width per row for embedding dimension d.
  std::size_t width(std::size_t dim) const noexcept { return family == ModelFamily::ComplEx ? 2 * dim : dim; }

  void validate() const;

  friend bool operator==(const ModelKind&, const ModelKind&) = default;
};

std::string family_name(ModelFamily family);
/// Parses "TransE", "DistMult" or "ComplEx" (case-insensitive).
ModelFamily parse_family(const std::string& name);

struct EmbeddingModel {
  ModelKind kind;
  std::size_t dim = 0;
  Matrix entities;
  Matrix relations;
  /// Adagrad squared-gradient sums; empty unless the model is trained with Adagrad.
  Matrix entity_accum;
  Matrix relation_accum;

  std::size_t width() const noexcept { return entities.cols(); }
  std::size_t entity_count() const noexcept { return entities.rows(); }
  std::size_t relation_count() const noexcept { return relations.rows(); }
  bool has_adagrad_state() const noexcept { return !entity_accum.empty() || !relation_accum.empty(); }

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;
};

/// Xavier-uniform initialisation of both parameter matrices from `seed`.
EmbeddingModel init_model(ModelKind kind, std::size_t dim, std::size_t n_entities, std::size_t n_relations,
                          std::uint64_t seed);

/// Plausibility score; higher is more plausible.
double score(const EmbeddingModel& model, const Triple& triple);

/// out[j] = score of `triple` with `slot` replaced by candidates[j].
void score_all_corruptions(const EmbeddingModel& model, const Triple& triple, Slot slot,
                           std::span<const EntityId> candidates, std::span<double> out);
std::vector<double> score_all_corruptions(const EmbeddingModel& model, const Triple& triple, Slot slot,
                                          std::span<const EntityId> candidates);

/// Row-sparse accumulator keyed by row index. Rows appear in first-touch order.
class SparseRows {
 public:
  explicit SparseRows(std::size_t width = 0) : width_(width) {}

  /// Zero-initialised on first access.
  std::span<double> row(std::uint32_t id);
  const double* find(std::uint32_t id) const;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t width() const noexcept { return width_; }
  std::uint32_t id_at(std::size_t k) const noexcept { return ids_[k]; }
  std::span<const double> values_at(std::size_t k) const noexcept { return {values_.data() + k * width_, width_}; }

 private:
  std::size_t width_;
  std::vector<std::uint32_t> ids_;
  std::vector<double> values_;
  std::unordered_map<std::uint32_t, std::size_t> slot_;
};

struct SparseGradient {
  SparseRows entities;
  SparseRows relations;

  explicit SparseGradient(std::size_t width = 0) : entities(width), relations(width) {}
};

/// Adds coeff * d score(triple) / d params into `out`.
void accumulate_score_grad(const EmbeddingModel& model, const Triple& triple, double coeff, SparseGradient& out);

/// Gradient of score(triple) w.r.t. the rows of h, r and t. A TransE L1 component
/// with h + r - t = 0 uses subgradient 0, as does the whole L2 gradient at h + r = t.
SparseGradient grad(const EmbeddingModel& model, const Triple& triple);

/// Throws ArgumentError if any triple index falls outside the model's matrices.
void check_indices(const EmbeddingModel& model, const Triple& triple);

}  // namespace dualkge
