#include "dualkge/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "dualkge/error.hpp"
#include "dualkge/kernels.hpp"
#include "dualkge/random.hpp"

namespace dualkge {

void ModelKind::validate() const {
  if (family == ModelFamily::TransE && norm != 1 && norm != 2) {
    throw ArgumentError("TransE norm order must be 1 or 2, got " + std::to_string(norm));
  }
}

std::string family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::TransE:
      return "TransE";
    case ModelFamily::DistMult:
      return "DistMult";
    case ModelFamily::ComplEx:
      return "ComplEx";
  }
  return "unknown";
}

ModelFamily parse_family(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "transe") return ModelFamily::TransE;
  if (lower == "distmult") return ModelFamily::DistMult;
  if (lower == "complex") return ModelFamily::ComplEx;
  throw ArgumentError("unknown model kind '" + name + "'");
}

namespace {

void fill_xavier(Matrix& m, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (double& v : m.data()) v = uniform(rng);
}

double score_rows(const ModelKind& kind, std::size_t dim, const double* h, const double* r, const double* t) {
  const auto& k = kernels::active();
  switch (kind.family) {
    case ModelFamily::TransE:
      return kind.norm == 1 ? -k.translation_l1(h, r, t, dim) : -std::sqrt(k.translation_l2sq(h, r, t, dim));
    case ModelFamily::DistMult:
      return k.trilinear(h, r, t, dim);
    case ModelFamily::ComplEx: {
      const double* h_re = h;
      const double* h_im = h + dim;
      const double* r_re = r;
      const double* r_im = r + dim;
      const double* t_re = t;
      const double* t_im = t + dim;
      const double real_part = k.trilinear(h_re, r_re, t_re, dim) - k.trilinear(h_im, r_im, t_re, dim);
      const double cross = k.trilinear(h_im, r_re, t_im, dim) + k.trilinear(h_re, r_im, t_im, dim);
      return kind.conjugate_tail ? real_part + cross : real_part - cross;
    }
  }
  return 0.0;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

EmbeddingModel init_model(ModelKind kind, std::size_t dim, std::size_t n_entities, std::size_t n_relations,
                          std::uint64_t seed) {
  kind.validate();
  if (dim == 0) throw ArgumentError("embedding dimension must be at least 1");
  if (n_entities == 0 || n_relations == 0) throw ArgumentError("entity and relation counts must be at least 1");
  EmbeddingModel model;
  model.kind = kind;
  model.dim = dim;
  const std::size_t width = kind.width(dim);
  model.entities = Matrix(n_entities, width);
  model.relations = Matrix(n_relations, width);
  Rng rng(seed);
  fill_xavier(model.entities, rng);
  fill_xavier(model.relations, rng);
  return model;
}

void check_indices(const EmbeddingModel& model, const Triple& triple) {
  if (triple.head >= model.entity_count() || triple.tail >= model.entity_count()) {
    throw ArgumentError("entity index out of range for model with " + std::to_string(model.entity_count()) +
                        " entities");
  }
  if (triple.relation >= model.relation_count()) {
    throw ArgumentError("relation index out of range for model with " + std::to_string(model.relation_count()) +
                        " relations");
  }
}

double score(const EmbeddingModel& model, const Triple& triple) {
  check_indices(model, triple);
  return score_rows(model.kind, model.dim, model.entities.row(triple.head).data(),
                    model.relations.row(triple.relation).data(), model.entities.row(triple.tail).data());
}

void score_all_corruptions(const EmbeddingModel& model, const Triple& triple, Slot slot,
                           std::span<const EntityId> candidates, std::span<double> out) {
  check_indices(model, triple);
  if (out.size() != candidates.size()) throw ArgumentError("output span size does not match candidate count");
  const double* r = model.relations.row(triple.relation).data();
  const double* fixed = model.entities.row(slot == Slot::Head ? triple.tail : triple.head).data();
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (candidates[j] >= model.entity_count()) throw ArgumentError("candidate entity index out of range");
    const double* c = model.entities.row(candidates[j]).data();
    out[j] = slot == Slot::Head ? score_rows(model.kind, model.dim, c, r, fixed)
                                : score_rows(model.kind, model.dim, fixed, r, c);
  }
}

std::vector<double> score_all_corruptions(const EmbeddingModel& model, const Triple& triple, Slot slot,
                                          std::span<const EntityId> candidates) {
  std::vector<double> out(candidates.size());
  score_all_corruptions(model, triple, slot, candidates, out);
  return out;
}

std::span<double> SparseRows::row(std::uint32_t id) {
  auto [it, inserted] = slot_.try_emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
    values_.resize(values_.size() + width_, 0.0);
  }
  return {values_.data() + it->second * width_, width_};
}

const double* SparseRows::find(std::uint32_t id) const {
  auto it = slot_.find(id);
  return it == slot_.end() ? nullptr : values_.data() + it->second * width_;
}

void accumulate_score_grad(const EmbeddingModel& model, const Triple& triple, double coeff, SparseGradient& out) {
  check_indices(model, triple);
  const std::size_t dim = model.dim;
  const std::size_t width = model.width();
  // Copies guard against aliasing when head == tail.
  const auto h_src = model.entities.row(triple.head);
  const auto r_src = model.relations.row(triple.relation);
  const auto t_src = model.entities.row(triple.tail);
  const std::vector<double> h(h_src.begin(), h_src.end());
  const std::vector<double> r(r_src.begin(), r_src.end());
  const std::vector<double> t(t_src.begin(), t_src.end());

  std::vector<double> gh(width, 0.0), gr(width, 0.0), gt(width, 0.0);
  switch (model.kind.family) {
    case ModelFamily::TransE: {
      if (model.kind.norm == 1) {
        for (std::size_t i = 0; i < dim; ++i) {
          const double s = sign(h[i] + r[i] - t[i]);
          gh[i] = -s;
          gr[i] = -s;
          gt[i] = s;
        }
      } else {
        double sq = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          const double d = h[i] + r[i] - t[i];
          sq += d * d;
        }
        const double norm = std::sqrt(sq);
        if (norm > 0.0) {
          for (std::size_t i = 0; i < dim; ++i) {
            const double u = (h[i] + r[i] - t[i]) / norm;
            gh[i] = -u;
            gr[i] = -u;
            gt[i] = u;
          }
        }
      }
      break;
    }
    case ModelFamily::DistMult:
      for (std::size_t i = 0; i < dim; ++i) {
        gh[i] = r[i] * t[i];
        gr[i] = h[i] * t[i];
        gt[i] = h[i] * r[i];
      }
      break;
    case ModelFamily::ComplEx: {
      // h = a + bi, r = c + di, t = e + fi
      const double sgn = model.kind.conjugate_tail ? 1.0 : -1.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double a = h[i], b = h[dim + i];
        const double c = r[i], d = r[dim + i];
        const double e = t[i], f = t[dim + i];
        gh[i] = c * e + sgn * d * f;
        gh[dim + i] = sgn * c * f - d * e;
        gr[i] = a * e + sgn * b * f;
        gr[dim + i] = sgn * a * f - b * e;
        gt[i] = a * c - b * d;
        gt[dim + i] = sgn * (b * c + a * d);
      }
      break;
    }
  }

  auto add = [coeff](std::span<double> dst, const std::vector<double>& src) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += coeff * src[i];
  };
  add(out.entities.row(triple.head), gh);
  add(out.relations.row(triple.relation), gr);
  add(out.entities.row(triple.tail), gt);
}

SparseGradient grad(const EmbeddingModel& model, const Triple& triple) {
  SparseGradient g(model.width());
  accumulate_score_grad(model, triple, 1.0, g);
  return g;
}

}  // namespace dualkge
