#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dualkge/kg_store.hpp"
#include "dualkge/model.hpp"
#include "dualkge/random.hpp"

namespace dualkge {

enum class Provenance { Random, Contrastive };

std::string provenance_name(Provenance p);

/// One negative per positive triple, aligned index-for-index with kg.triples().
struct NegativeSampleSet {
  std::vector<Triple> samples;
  Provenance provenance = Provenance::Random;
};

/// Candidate pool size for contrastive corruption; 0 means every admissible entity.
struct PoolSize {
  std::size_t value = 0;

  static constexpr PoolSize all() { return {0}; }
  bool is_all() const noexcept { return value == 0; }
};

/// Replace head or tail (fair coin) with a uniform entity of kg.unique_entities()
/// other than the one being replaced.
NegativeSampleSet random_corrupt(const KnowledgeGraph& kg, Rng& rng);

/// For every positive, pick head or tail by a fair coin and emit the admissible
/// candidate that `contr_model` scores highest (ties: smallest entity index).
/// All random draws happen on the calling thread before scoring, so the result
/// does not depend on `threads`.
NegativeSampleSet contrastive_corrupt(const KnowledgeGraph& kg, const EmbeddingModel& contr_model, Rng& rng,
                                      PoolSize pool_size = PoolSize::all(), std::size_t threads = 1);

}  // namespace dualkge
