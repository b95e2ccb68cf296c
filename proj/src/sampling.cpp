#include "dualkge/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "dualkge/error.hpp"
#include "dualkge/parallel.hpp"

namespace dualkge {

std::string provenance_name(Provenance p) { return p == Provenance::Random ? "random" : "contrastive"; }

namespace {

void require_two_entities(const KnowledgeGraph& kg) {
  if (kg.unique_entities().size() < 2) {
    throw SamplingError("negative sampling needs at least 2 distinct entities, graph has " +
                        std::to_string(kg.unique_entities().size()));
  }
}

std::size_t position_of(const std::vector<EntityId>& sorted, EntityId e) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), e) - sorted.begin());
}

}  // namespace

NegativeSampleSet random_corrupt(const KnowledgeGraph& kg, Rng& rng) {
  require_two_entities(kg);
  const auto& entities = kg.unique_entities();
  const std::size_t n = entities.size();
  NegativeSampleSet out;
  out.provenance = Provenance::Random;
  out.samples.reserve(kg.size());
  for (const auto& t : kg.triples()) {
    const Slot slot = fair_coin(rng) ? Slot::Head : Slot::Tail;
    const std::size_t skip = position_of(entities, entity_at(t, slot));
    std::size_t pick = uniform_index(rng, n - 1);
    if (pick >= skip) ++pick;
    out.samples.push_back(with_entity(t, slot, entities[pick]));
  }
  return out;
}

NegativeSampleSet contrastive_corrupt(const KnowledgeGraph& kg, const EmbeddingModel& contr_model, Rng& rng,
                                      PoolSize pool_size, std::size_t threads) {
  if (kg.entity_bound() > contr_model.entity_count() || kg.relation_bound() > contr_model.relation_count()) {
    throw ArgumentError("contrastive model does not cover the graph's vocabulary");
  }
  require_two_entities(kg);
  const auto& entities = kg.unique_entities();
  const std::size_t admissible = entities.size() - 1;
  const bool subsample = !pool_size.is_all() && pool_size.value < admissible;
  const auto& triples = kg.triples();

  // Sequential draws: slot choice plus, when subsampling, the candidate positions.
  std::vector<Slot> slots(triples.size());
  std::vector<std::vector<EntityId>> pools;
  if (subsample) pools.resize(triples.size());
  std::vector<std::size_t> scratch;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    slots[i] = fair_coin(rng) ? Slot::Head : Slot::Tail;
    if (!subsample) continue;
    const std::size_t skip = position_of(entities, entity_at(triples[i], slots[i]));
    scratch.resize(admissible);
    std::iota(scratch.begin(), scratch.end(), std::size_t{0});
    for (std::size_t k = 0; k < pool_size.value; ++k) {
      const std::size_t j = k + uniform_index(rng, admissible - k);
      std::swap(scratch[k], scratch[j]);
    }
    auto& pool = pools[i];
    pool.reserve(pool_size.value);
    for (std::size_t k = 0; k < pool_size.value; ++k) {
      const std::size_t p = scratch[k] >= skip ? scratch[k] + 1 : scratch[k];
      pool.push_back(entities[p]);
    }
    std::sort(pool.begin(), pool.end());
  }

  NegativeSampleSet out;
  out.provenance = Provenance::Contrastive;
  out.samples.resize(triples.size());
  parallel_for(triples.size(), threads, [&](std::size_t i) {
    const Triple& t = triples[i];
    const Slot slot = slots[i];
    std::vector<EntityId> candidates;
    if (subsample) {
      candidates = pools[i];
    } else {
      const EntityId original = entity_at(t, slot);
      candidates.reserve(admissible);
      for (const EntityId e : entities) {
        if (e != original) candidates.push_back(e);
      }
    }
    const auto scores = score_all_corruptions(contr_model, t, slot, candidates);
    // Candidates are ascending, so strict '>' keeps the smallest index among ties.
    std::size_t best = 0;
    for (std::size_t j = 1; j < candidates.size(); ++j) {
      if (scores[j] > scores[best]) best = j;
    }
    out.samples[i] = with_entity(t, slot, candidates[best]);
  });
  return out;
}

}  // namespace dualkge
