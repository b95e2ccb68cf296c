#include "dualkge/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "dualkge/error.hpp"
#include "dualkge/parallel.hpp"

namespace dualkge {

void Scorer::score_corruptions(const Triple& triple, Slot slot, std::span<const EntityId> candidates,
                               std::span<double> out) const {
  for (std::size_t j = 0; j < candidates.size(); ++j) out[j] = score(with_entity(triple, slot, candidates[j]));
}

SummedScorer::SummedScorer(const EmbeddingModel& first, const EmbeddingModel& second)
    : first_(first), second_(second) {
  if (first.entity_count() != second.entity_count() || first.relation_count() != second.relation_count()) {
    throw ArgumentError("summed scorer needs models over the same vocabulary");
  }
}

double SummedScorer::score(const Triple& triple) const {
  return dualkge::score(first_, triple) + dualkge::score(second_, triple);
}

void SummedScorer::score_corruptions(const Triple& triple, Slot slot, std::span<const EntityId> candidates,
                                     std::span<double> out) const {
  std::vector<double> other(candidates.size());
  score_all_corruptions(first_, triple, slot, candidates, out);
  score_all_corruptions(second_, triple, slot, candidates, other);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += other[j];
}

namespace {

std::vector<EntityId> entity_range(std::size_t n) {
  std::vector<EntityId> all(n);
  std::iota(all.begin(), all.end(), EntityId{0});
  return all;
}

TripleSet filter_set(const KnowledgeGraph& test, const KnowledgeGraph& train, bool train_only) {
  TripleSet known = train.triple_set();
  if (!train_only) known.insert(test.triples().begin(), test.triples().end());
  return known;
}

double rank_from_scores(const Triple& test_triple, Slot slot, std::span<const EntityId> candidates,
                        std::span<const double> scores, double target, const TripleSet* known, TieMode ties) {
  const EntityId truth = entity_at(test_triple, slot);
  std::size_t higher = 0;
  std::size_t equal = 0;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (candidates[j] == truth) continue;
    if (known && known->contains(with_entity(test_triple, slot, candidates[j]))) continue;
    if (scores[j] > target) {
      ++higher;
    } else if (scores[j] == target) {
      ++equal;
    }
  }
  const double rank = 1.0 + static_cast<double>(higher);
  return ties == TieMode::Mean ? rank + 0.5 * static_cast<double>(equal) : rank;
}

double target_score(const Scorer& scorer, const Triple& test_triple, Slot slot, std::span<const EntityId> candidates,
                    std::span<const double> scores) {
  const EntityId truth = entity_at(test_triple, slot);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (candidates[j] == truth) return scores[j];
  }
  return scorer.score(test_triple);
}

}  // namespace

double rank_filtered(const Scorer& scorer, const Triple& test_triple, Slot slot,
                     std::span<const EntityId> all_entities, const TripleSet& known, TieMode ties) {
  std::vector<double> scores(all_entities.size());
  scorer.score_corruptions(test_triple, slot, all_entities, scores);
  const double target = target_score(scorer, test_triple, slot, all_entities, scores);
  return rank_from_scores(test_triple, slot, all_entities, scores, target, &known, ties);
}

RankingReport evaluate_link_prediction(const Scorer& scorer, const KnowledgeGraph& test,
                                       const KnowledgeGraph& train, const LinkPredictionOptions& options) {
  if (test.empty()) throw ArgumentError("link prediction needs a non-empty test set");
  const auto all = entity_range(scorer.entity_count());
  const TripleSet known = filter_set(test, train, options.filter_train_only);
  const auto& triples = test.triples();

  RankingReport report;
  report.n_test = triples.size();
  report.head_ranks.resize(triples.size());
  report.tail_ranks.resize(triples.size());
  parallel_for(triples.size(), options.threads, [&](std::size_t i) {
    report.head_ranks[i] = rank_filtered(scorer, triples[i], Slot::Head, all, known, options.ties);
    report.tail_ranks[i] = rank_filtered(scorer, triples[i], Slot::Tail, all, known, options.ties);
  });

  const double n = static_cast<double>(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    report.mrr_head += 1.0 / report.head_ranks[i];
    report.mrr_tail += 1.0 / report.tail_ranks[i];
  }
  report.mrr_head /= n;
  report.mrr_tail /= n;
  report.mrr_avg = 0.5 * (report.mrr_head + report.mrr_tail);
  for (const std::size_t k : options.ks) {
    HeadTailAvg h;
    for (std::size_t i = 0; i < triples.size(); ++i) {
      h.head += report.head_ranks[i] <= static_cast<double>(k) ? 1.0 : 0.0;
      h.tail += report.tail_ranks[i] <= static_cast<double>(k) ? 1.0 : 0.0;
    }
    h.head /= n;
    h.tail /= n;
    h.avg = 0.5 * (h.head + h.tail);
    report.hits[k] = h;
  }
  return report;
}

SemReport sem_at_k(const Scorer& scorer, const KnowledgeGraph& test, const KnowledgeGraph& train,
                   const TypeMap& types, std::size_t k, const SemOptions& options) {
  if (k < 1) throw ArgumentError("Sem@K needs k >= 1");
  const auto all = entity_range(scorer.entity_count());
  const TripleSet known = filter_set(test, train, options.filter_train_only);
  const auto& triples = test.triples();

  struct Query {
    double value = 0.0;
    bool scored = false;
    bool short_pool = false;
  };
  std::vector<Query> head(triples.size()), tail(triples.size());

  auto evaluate = [&](const Triple& q, Slot slot) {
    Query out;
    const EntityId truth = entity_at(q, slot);
    if (!types.typed(truth)) return out;
    out.scored = true;
    std::vector<double> scores(all.size());
    scorer.score_corruptions(q, slot, all, scores);
    std::vector<std::size_t> pool;
    pool.reserve(all.size());
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (!options.raw && all[j] != truth && known.contains(with_entity(q, slot, all[j]))) continue;
      pool.push_back(j);
    }
    // Score descending; ties favour the ground truth, then the smaller entity index.
    const std::size_t take = std::min(k, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (scores[a] != scores[b]) return scores[a] > scores[b];
                        if ((all[a] == truth) != (all[b] == truth)) return all[a] == truth;
                        return all[a] < all[b];
                      });
    const int truth_type = types.type_of(truth);
    std::size_t compatible = 0;
    for (std::size_t j = 0; j < take; ++j) {
      if (types.type_of(all[pool[j]]) == truth_type) ++compatible;
    }
    out.value = static_cast<double>(compatible) / static_cast<double>(k);
    out.short_pool = take < k;
    return out;
  };

  parallel_for(triples.size(), options.threads, [&](std::size_t i) {
    head[i] = evaluate(triples[i], Slot::Head);
    tail[i] = evaluate(triples[i], Slot::Tail);
  });

  SemReport report;
  report.k = k;
  std::size_t short_pools = 0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (head[i].scored) {
      report.sem.head += head[i].value;
      ++report.n_head;
      short_pools += head[i].short_pool ? 1 : 0;
    }
    if (tail[i].scored) {
      report.sem.tail += tail[i].value;
      ++report.n_tail;
      short_pools += tail[i].short_pool ? 1 : 0;
    }
  }
  if (report.n_head) report.sem.head /= static_cast<double>(report.n_head);
  if (report.n_tail) report.sem.tail /= static_cast<double>(report.n_tail);
  report.sem.avg = 0.5 * (report.sem.head + report.sem.tail);
  report.n_scored = report.n_head + report.n_tail;
  if (short_pools) {
    report.warnings.push_back(std::to_string(short_pools) + " queries had fewer than k=" + std::to_string(k) +
                              " candidates; their sums were still divided by k");
  }
  if (report.n_scored == 0) report.warnings.push_back("no test query has a typed ground-truth entity");
  return report;
}

}  // namespace dualkge
