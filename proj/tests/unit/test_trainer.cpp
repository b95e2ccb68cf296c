#include <doctest.h>

#include <cmath>
#include <random>

#include "dualkge/error.hpp"
#include "dualkge/trainer.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace dualkge;

namespace {

double oracle_softplus(double x) { return std::log(1.0 + std::exp(x)); }

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double oracle_loss(const EmbeddingModel& m, const std::vector<Triple>& pos, const std::vector<Triple>& neg,
                   const TrainConfig& cfg) {
  double loss = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const double sp = oracle::score(m, pos[i]), sn = oracle::score(m, neg[i]);
    if (m.kind.family == ModelFamily::TransE) {
      loss += std::max(0.0, cfg.margin + sn - sp);
    } else {
      loss += oracle_softplus(-sp) + oracle_softplus(sn);
      for (const Triple& t : {pos[i], neg[i]}) {
        loss += cfg.reg_lambda * (sq_norm(m.entities.row(t.head)) + sq_norm(m.relations.row(t.relation)) +
                                  sq_norm(m.entities.row(t.tail)));
      }
    }
  }
  return loss;
}

TrainConfig small_config(ModelKind kind, std::size_t epochs, std::size_t cl_phase) {
  TrainConfig cfg;
  cfg.kind = kind;
  cfg.epochs = epochs;
  cfg.cl_phase = cl_phase;
  cfg.dim = 6;
  cfg.n_batches = 5;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("loss examples") {
  SUBCASE("hinge is inactive past the margin") {
    EmbeddingModel m = init_model(ModelKind::transe(1), 1, 3, 1, 0);
    m.entities(0, 0) = 0.0;
    m.entities(1, 0) = 1.0;
    m.entities(2, 0) = 3.0;
    m.relations(0, 0) = 1.0;
    TrainConfig cfg;
    const Triple pos[] = {{0, 0, 1}};  // score 0
    const Triple neg[] = {{0, 0, 2}};  // score -2
    const auto out = loss_and_grads(m, pos, neg, cfg);
    CHECK(out.loss == 0.0);
    CHECK(out.grad.entities.size() == 0);
    CHECK(out.grad.relations.size() == 0);
  }
  SUBCASE("softplus at zero") {
    EmbeddingModel m = init_model(ModelKind::distmult(), 3, 3, 1, 0);
    for (auto& x : m.entities.data()) x = 0.0;
    for (auto& x : m.relations.data()) x = 0.0;
    TrainConfig cfg;
    cfg.kind = ModelKind::distmult();
    cfg.reg_lambda = 0.0;
    const Triple pos[] = {{0, 0, 1}, {1, 0, 2}};
    const Triple neg[] = {{0, 0, 2}, {0, 0, 2}};
    CHECK(loss_and_grads(m, pos, neg, cfg).loss == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("misaligned batches") {
    const auto m = init_model(ModelKind::distmult(), 3, 3, 1, 0);
    const Triple pos[] = {{0, 0, 1}};
    CHECK_THROWS_AS(loss_and_grads(m, pos, std::span<const Triple>{}, TrainConfig{}), ArgumentError);
  }
}

TEST_CASE("loss_and_grads matches central finite differences of the loss") {
  std::mt19937_64 rng(41);
  const double eps = 1e-5;
  for (const auto kind : {ModelKind::transe(1), ModelKind::transe(2), ModelKind::distmult(), ModelKind::complex(),
                          ModelKind::complex(false)}) {
    for (int draw = 0; draw < 100; ++draw) {
      auto m = init_model(kind, 1 + draw % 6, 6, 2, rng());
      TrainConfig cfg;
      cfg.kind = kind;
      cfg.reg_lambda = 0.05;
      cfg.margin = 2.0;  // keeps the hinge active for most draws
      std::uniform_int_distribution<std::uint32_t> e(0, 5), r(0, 1);
      std::vector<Triple> pos, neg;
      for (int i = 0; i < 3; ++i) {
        const Triple p{e(rng), r(rng), e(rng)};
        pos.push_back(p);
        neg.push_back(with_entity(p, i % 2 ? Slot::Head : Slot::Tail, e(rng)));
      }
      const auto out = loss_and_grads(m, pos, neg, cfg);
      CHECK(out.loss == doctest::Approx(oracle_loss(m, pos, neg, cfg)).epsilon(1e-10));
      auto check = [&](Matrix& params, const SparseRows& rows) {
        for (std::size_t row = 0; row < params.rows(); ++row) {
          const double* analytic = rows.find(static_cast<std::uint32_t>(row));
          for (std::size_t c = 0; c < params.cols(); ++c) {
            const double saved = params(row, c);
            params(row, c) = saved + eps;
            const double up = oracle_loss(m, pos, neg, cfg);
            params(row, c) = saved - eps;
            const double down = oracle_loss(m, pos, neg, cfg);
            params(row, c) = saved;
            const double fd = (up - down) / (2 * eps);
            const double a = analytic ? analytic[c] : 0.0;
            CHECK(std::fabs(a - fd) / std::max(1.0, std::max(std::fabs(a), std::fabs(fd))) < 1e-4);
          }
        }
      };
      check(m.entities, out.grad.entities);
      check(m.relations, out.grad.relations);
    }
  }
}

TEST_CASE("apply_update examples") {
  SUBCASE("SGD step") {
    EmbeddingModel m = init_model(ModelKind::transe(), 2, 1, 1, 0);
    m.entities(0, 0) = 1.0;
    m.entities(0, 1) = 1.0;
    SparseGradient g(2);
    g.entities.row(0)[0] = 1.0;
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    const auto relations = m.relations;
    apply_update(m, g, cfg);
    CHECK(m.entities(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(m.entities(0, 1) == 1.0);
    CHECK(m.relations == relations);
    CHECK_FALSE(m.has_adagrad_state());
  }
  SUBCASE("Adagrad step from a fresh accumulator") {
    EmbeddingModel m = init_model(ModelKind::distmult(), 1, 1, 1, 0);
    const double before = m.entities(0, 0);
    SparseGradient g(1);
    g.entities.row(0)[0] = 2.0;
    TrainConfig cfg;
    cfg.kind = ModelKind::distmult();
    apply_update(m, g, cfg);
    CHECK(m.entity_accum(0, 0) == 4.0);
    CHECK(m.entities(0, 0) - before == doctest::Approx(-0.1 * 2.0 / std::sqrt(4.0 + 1e-8)).epsilon(1e-12));
  }
  SUBCASE("zero gradient leaves the model unchanged") {
    EmbeddingModel m = init_model(ModelKind::transe(), 3, 4, 2, 1);
    const auto copy = m;
    SparseGradient g(3);
    g.entities.row(2);
    apply_update(m, g, TrainConfig{});
    CHECK(m == copy);
  }
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.cl_phase = cfg.epochs + 1;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = TrainConfig{};
  cfg.n_batches = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = TrainConfig{};
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = TrainConfig{};
  cfg.neg_rate = 2;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  CHECK(TrainConfig{}.effective_learning_rate() == 0.01);
  TrainConfig dm;
  dm.kind = ModelKind::complex();
  CHECK(dm.effective_learning_rate() == 0.1);
  CHECK(dm.effective_optimizer() == Optimizer::Adagrad);
}

TEST_CASE("train_dual with zero epochs returns the initialisation") {
  const auto toy = testing::make_toy(1);
  const auto cfg = small_config(ModelKind::distmult(), 0, 0);
  const auto state = train_dual(toy.pos, toy.neg, toy.vocab, cfg);
  const auto init = init_dual(toy.vocab, cfg);
  CHECK(state.pos_model == init.pos_model);
  CHECK(state.neg_model == init.neg_model);
  CHECK(state.loss_history.empty());
}

TEST_CASE("provenance switch, lockstep and determinism") {
  const auto toy = testing::make_toy(2);
  for (const auto kind : {ModelKind::transe(), ModelKind::distmult(), ModelKind::complex()}) {
    {
      const auto state = train_dual(toy.pos, toy.neg, toy.vocab, small_config(kind, 6, 6));
      for (const auto& rec : state.loss_history) {
        CHECK(rec.provenance_pos == Provenance::Random);
        CHECK(rec.provenance_neg == Provenance::Random);
      }
    }
    {
      const auto cfg = small_config(kind, 8, 5);
      const auto state = train_dual(toy.pos, toy.neg, toy.vocab, cfg);
      REQUIRE(state.loss_history.size() == 8);
      for (const auto& rec : state.loss_history) {
        const auto expected = rec.epoch > 5 ? Provenance::Contrastive : Provenance::Random;
        CHECK(rec.provenance_pos == expected);
        CHECK(rec.provenance_neg == expected);
        CHECK(std::isfinite(rec.loss_pos));
        CHECK(std::isfinite(rec.loss_neg));
      }
      const auto again = train_dual(toy.pos, toy.neg, toy.vocab, cfg);
      CHECK(again.pos_model == state.pos_model);
      CHECK(again.neg_model == state.neg_model);
      auto threaded = cfg;
      threaded.threads = 4;
      const auto par = train_dual(toy.pos, toy.neg, toy.vocab, threaded);
      CHECK(par.pos_model == state.pos_model);
      CHECK(par.neg_model == state.neg_model);
    }
  }
}

TEST_CASE("first contrastive epoch uses the other model's initial snapshot") {
  // 4-entity graphs, cl_phase = 0: negatives come from the untrained opposite model.
  Vocabulary vocab;
  for (const char* e : {"a", "b", "c", "d"}) vocab.entities.intern(e);
  vocab.relations.intern("r");
  const KnowledgeGraph pos({{0, 0, 1}, {1, 0, 2}, {2, 0, 3}});
  const KnowledgeGraph neg({{0, 0, 3}, {3, 0, 1}});
  auto cfg = small_config(ModelKind::distmult(), 1, 0);
  cfg.dim = 3;
  const auto init = init_dual(vocab, cfg);
  auto state = init;
  advance_dual(state, pos, neg, cfg);
  for (const auto& [kg, samples, other] :
       {std::tuple{&pos, &state.pos_negatives, &init.neg_model}, std::tuple{&neg, &state.neg_negatives, &init.pos_model}}) {
    REQUIRE(samples->samples.size() == kg->size());
    CHECK(samples->provenance == Provenance::Contrastive);
    for (std::size_t i = 0; i < kg->size(); ++i) {
      const Triple& p = kg->triples()[i];
      const Triple& n = samples->samples[i];
      const Slot slot = p.head != n.head ? Slot::Head : Slot::Tail;
      double best = -INFINITY;
      EntityId arg = 0;
      for (EntityId e : kg->unique_entities()) {
        if (e == entity_at(p, slot)) continue;
        const double s = oracle::score(*other, with_entity(p, slot, e));
        if (s > best) {
          best = s;
          arg = e;
        }
      }
      CHECK(entity_at(n, slot) == arg);
    }
  }
}

TEST_CASE("final_representation") {
  DualModelState state;
  state.pos_model = init_model(ModelKind::transe(), 2, 1, 1, 0);
  state.neg_model = init_model(ModelKind::transe(), 2, 1, 1, 0);
  state.pos_model.entities(0, 0) = 1;
  state.pos_model.entities(0, 1) = 2;
  state.neg_model.entities(0, 0) = 3;
  state.neg_model.entities(0, 1) = 4;
  CHECK(final_representation(state, 0) == std::vector<double>{1, 2, 3, 4});
  CHECK_THROWS_AS(final_representation(state, 1), ArgumentError);

  Vocabulary vocab;
  vocab.entities.intern("x");
  vocab.relations.intern("r");
  TrainConfig cfg;
  cfg.kind = ModelKind::complex();
  cfg.epochs = 0;
  cfg.cl_phase = 0;
  CHECK(final_representation(init_dual(vocab, cfg), 0).size() == 200);
}

TEST_CASE("baseline doubles the dimension and is reproducible") {
  const auto toy = testing::make_toy(4);
  for (const auto& [kind, width] : {std::pair{ModelKind::transe(), 100}, std::pair{ModelKind::distmult(), 100},
                                    std::pair{ModelKind::complex(), 200}}) {
    TrainConfig cfg;
    cfg.kind = kind;
    cfg.epochs = 0;
    cfg.cl_phase = 0;
    const auto init = train_baseline(toy.pos, toy.vocab, cfg);
    CHECK(init.model.width() == static_cast<std::size_t>(width));
    CHECK(init.model == init_baseline(toy.vocab, cfg).model);
  }
  auto cfg = small_config(ModelKind::distmult(), 3, 3);
  const auto a = train_baseline(toy.pos, toy.vocab, cfg);
  const auto b = train_baseline(toy.pos, toy.vocab, cfg);
  CHECK(a.model == b.model);
  CHECK(a.loss_history.size() == 3);
}

TEST_CASE("normalize_entity_rows clamps to the unit ball") {
  auto m = init_model(ModelKind::transe(), 2, 2, 1, 0);
  m.entities(0, 0) = 3;
  m.entities(0, 1) = 4;
  m.entities(1, 0) = 0.3;
  m.entities(1, 1) = 0.4;
  normalize_entity_rows(m);
  CHECK(m.entities(0, 0) == doctest::Approx(0.6));
  CHECK(m.entities(0, 1) == doctest::Approx(0.8));
  CHECK(m.entities(1, 0) == 0.3);
}

TEST_CASE("Adagrad accumulators stay non-negative and non-decreasing") {
  const auto toy = testing::make_toy(6);
  auto cfg = small_config(ModelKind::complex(), 4, 2);
  auto state = init_dual(toy.vocab, cfg);
  Matrix previous;
  for (int e = 0; e < 4; ++e) {
    advance_dual(state, toy.pos, toy.neg, cfg);
    const auto& acc = state.pos_model.entity_accum;
    for (std::size_t i = 0; i < acc.data().size(); ++i) {
      CHECK(acc.data()[i] >= 0.0);
      if (!previous.empty()) CHECK(acc.data()[i] >= previous.data()[i]);
    }
    previous = acc;
  }
}
