#include <doctest.h>

#include <cmath>
#include <random>

#include "dualkge/error.hpp"
#include "dualkge/model.hpp"
#include "oracles.hpp"

using namespace dualkge;

namespace {

const ModelKind kKinds[] = {ModelKind::transe(1), ModelKind::transe(2), ModelKind::distmult(), ModelKind::complex(true),
                            ModelKind::complex(false)};

EmbeddingModel tiny(ModelKind kind, std::size_t dim, std::size_t n_e, std::size_t n_r) {
  EmbeddingModel m;
  m.kind = kind;
  m.dim = dim;
  m.entities = Matrix(n_e, kind.width(dim));
  m.relations = Matrix(n_r, kind.width(dim));
  return m;
}

void set_row(Matrix& m, std::size_t i, std::initializer_list<double> v) {
  std::size_t j = 0;
  for (double x : v) m(i, j++) = x;
}

Triple random_triple(std::mt19937_64& rng, const EmbeddingModel& m) {
  std::uniform_int_distribution<std::uint32_t> e(0, static_cast<std::uint32_t>(m.entity_count() - 1));
  std::uniform_int_distribution<std::uint32_t> r(0, static_cast<std::uint32_t>(m.relation_count() - 1));
  return {e(rng), r(rng), e(rng)};
}

double& param(EmbeddingModel& m, bool entity, std::uint32_t row, std::size_t col) {
  return entity ? m.entities(row, col) : m.relations(row, col);
}

double relative_error(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::max(std::fabs(a), std::fabs(b))); }

}  // namespace

TEST_CASE("score: hand examples") {
  auto transe = tiny(ModelKind::transe(1), 2, 2, 1);
  set_row(transe.entities, 0, {1, 0});
  set_row(transe.relations, 0, {0.5, 0});
  set_row(transe.entities, 1, {1.5, 0});
  CHECK(score(transe, {0, 0, 1}) == 0.0);

  auto dm = tiny(ModelKind::distmult(), 2, 2, 1);
  set_row(dm.entities, 0, {1, 2});
  set_row(dm.relations, 0, {1, 1});
  set_row(dm.entities, 1, {2, 1});
  CHECK(score(dm, {0, 0, 1}) == 4.0);

  auto cx = tiny(ModelKind::complex(), 1, 1, 1);
  set_row(cx.entities, 0, {1, 1});
  set_row(cx.relations, 0, {1, 0});
  CHECK(score(cx, {0, 0, 0}) == 2.0);
  // Literal product without conjugation: (1+i)(1)(1+i) = 2i, real part 0.
  cx.kind = ModelKind::complex(false);
  CHECK(score(cx, {0, 0, 0}) == 0.0);
}

TEST_CASE("score: out-of-range index") {
  const auto m = init_model(ModelKind::distmult(), 3, 4, 2, 1);
  CHECK_THROWS_AS(score(m, {4, 0, 0}), ArgumentError);
  CHECK_THROWS_AS(score(m, {0, 2, 0}), ArgumentError);
}

TEST_CASE("score matches the definition oracle") {
  std::mt19937_64 rng(11);
  for (const auto kind : kKinds) {
    for (int draw = 0; draw < 100; ++draw) {
      const auto m = init_model(kind, 1 + draw % 37, 7, 3, rng());
      const auto t = random_triple(rng, m);
      CHECK(std::fabs(score(m, t) - oracle::score(m, t)) < 1e-10);
    }
  }
}

TEST_CASE("score_all_corruptions is value-identical to score") {
  std::mt19937_64 rng(12);
  for (const auto kind : kKinds) {
    const auto m = init_model(kind, 13, 25, 4, rng());
    std::vector<EntityId> cands(25);
    for (EntityId e = 0; e < 25; ++e) cands[e] = e;
    for (int draw = 0; draw < 20; ++draw) {
      const auto t = random_triple(rng, m);
      for (const Slot slot : {Slot::Head, Slot::Tail}) {
        const auto batched = score_all_corruptions(m, t, slot, cands);
        for (EntityId e = 0; e < 25; ++e) CHECK(std::fabs(batched[e] - score(m, with_entity(t, slot, e))) <= 1e-12);
        const EntityId self[] = {entity_at(t, slot)};
        CHECK(score_all_corruptions(m, t, slot, self)[0] == score(m, t));
      }
    }
  }
}

TEST_CASE("DistMult with a zero relation scores every corruption 0") {
  auto m = init_model(ModelKind::distmult(), 5, 6, 1, 3);
  for (auto& x : m.relations.data()) x = 0.0;
  const EntityId cands[] = {0, 1, 2, 3, 4, 5};
  for (double v : score_all_corruptions(m, {0, 0, 1}, Slot::Tail, cands)) CHECK(v == 0.0);
}

TEST_CASE("init_model") {
  SUBCASE("determinism and widths") {
    const auto a = init_model(ModelKind::transe(), 50, 10, 3, 42);
    const auto b = init_model(ModelKind::transe(), 50, 10, 3, 42);
    CHECK(a == b);
    CHECK(a.width() == 50);
    CHECK(init_model(ModelKind::complex(), 50, 10, 3, 42).width() == 100);
    CHECK_FALSE(a == init_model(ModelKind::transe(), 50, 10, 3, 43));
  }
  SUBCASE("values stay inside the Xavier bound") {
    const auto m = init_model(ModelKind::distmult(), 100, 1000, 10, 9);  // 10^5 entity draws
    const double be = std::sqrt(6.0 / (1000.0 + 100.0));
    const double br = std::sqrt(6.0 / (10.0 + 100.0));
    double lo = 0.0, hi = 0.0;
    for (double x : m.entities.data()) {
      CHECK(std::fabs(x) <= be);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    for (double x : m.relations.data()) CHECK(std::fabs(x) <= br);
    CHECK(lo < -0.99 * be);
    CHECK(hi > 0.99 * be);
  }
  SUBCASE("argument errors") {
    CHECK_THROWS_AS(init_model(ModelKind::transe(), 0, 3, 1, 0), ArgumentError);
    CHECK_THROWS_AS(init_model(ModelKind::transe(), 4, 0, 1, 0), ArgumentError);
    CHECK_THROWS_AS(init_model(ModelKind::transe(), 4, 3, 0, 0), ArgumentError);
    CHECK_THROWS_AS(init_model(ModelKind::transe(3), 4, 3, 1, 0), ArgumentError);
  }
}

TEST_CASE("grad: hand examples") {
  auto dm = tiny(ModelKind::distmult(), 2, 2, 1);
  set_row(dm.entities, 0, {1, 2});
  set_row(dm.relations, 0, {1, 1});
  set_row(dm.entities, 1, {2, 1});
  const auto g = grad(dm, {0, 0, 1});
  const double* gh = g.entities.find(0);
  REQUIRE(gh != nullptr);
  CHECK(gh[0] == 2.0);
  CHECK(gh[1] == 1.0);
  CHECK(g.entities.size() == 2);
  CHECK(g.relations.size() == 1);

  auto l2 = tiny(ModelKind::transe(2), 2, 2, 1);
  set_row(l2.entities, 0, {1, 0});
  set_row(l2.relations, 0, {0.5, 0});
  set_row(l2.entities, 1, {1.5, 0});
  const auto z = grad(l2, {0, 0, 1});
  for (std::size_t k = 0; k < z.entities.size(); ++k)
    for (double v : z.entities.values_at(k)) CHECK(v == 0.0);
  for (double v : z.relations.values_at(0)) CHECK(v == 0.0);
}

TEST_CASE("grad matches central finite differences") {
  std::mt19937_64 rng(21);
  const double eps = 1e-5;
  for (const auto kind : kKinds) {
    for (int draw = 0; draw < 100; ++draw) {
      auto m = init_model(kind, 1 + draw % 8, 5, 2, rng());
      const auto t = random_triple(rng, m);
      const auto g = grad(m, t);
      auto check_rows = [&](bool entity, std::uint32_t row) {
        const double* analytic = entity ? g.entities.find(row) : g.relations.find(row);
        REQUIRE(analytic != nullptr);
        for (std::size_t c = 0; c < m.width(); ++c) {
          double& p = param(m, entity, row, c);
          const double saved = p;
          p = saved + eps;
          const double up = oracle::score(m, t);
          p = saved - eps;
          const double down = oracle::score(m, t);
          p = saved;
          CHECK(relative_error(analytic[c], (up - down) / (2 * eps)) < 1e-4);
        }
      };
      check_rows(true, t.head);
      check_rows(true, t.tail);
      check_rows(false, t.relation);
    }
  }
}

TEST_CASE("score invariants") {
  std::mt19937_64 rng(31);
  for (int draw = 0; draw < 200; ++draw) {
    for (int p : {1, 2}) {
      const auto m = init_model(ModelKind::transe(p), 6, 5, 2, rng());
      CHECK(score(m, random_triple(rng, m)) <= 0.0);
    }
    const auto dm = init_model(ModelKind::distmult(), 6, 5, 2, rng());
    const auto t = random_triple(rng, dm);
    CHECK(score(dm, t) == doctest::Approx(score(dm, {t.tail, t.relation, t.head})).epsilon(1e-12));
    const auto cx = init_model(ModelKind::complex(), 6, 5, 2, rng());
    Triple c = random_triple(rng, cx);
    if (c.head == c.tail) c.tail = (c.head + 1) % 5;
    CHECK(score(cx, c) != score(cx, {c.tail, c.relation, c.head}));
  }
}

TEST_CASE("score does not mutate the model") {
  const auto m = init_model(ModelKind::complex(), 4, 5, 2, 8);
  const auto copy = m;
  (void)score(m, {1, 1, 2});
  (void)grad(m, {1, 1, 2});
  CHECK(m == copy);
}
