#include <doctest.h>

#include <set>
#include <sstream>

#include "dualkge/error.hpp"
#include "dualkge/kg_store.hpp"
#include "dualkge/random.hpp"

using namespace dualkge;

namespace {

KnowledgeGraph parse(const std::string& text, Vocabulary& vocab) {
  std::istringstream in(text);
  return parse_triples(in, vocab, "test");
}

}  // namespace

TEST_CASE("parse_triples: empty input leaves vocabulary untouched") {
  Vocabulary vocab;
  const auto kg = parse("", vocab);
  CHECK(kg.empty());
  CHECK(vocab.entity_count() == 0);
  CHECK(vocab.relation_count() == 0);
}

TEST_CASE("parse_triples: duplicate lines collapse") {
  Vocabulary vocab;
  const auto kg = parse("a\tr\tb\na\tr\tb\n", vocab);
  REQUIRE(kg.size() == 1);
  CHECK(kg.triples()[0] == Triple{0, 0, 1});
}

TEST_CASE("parse_triples: first-seen index assignment") {
  Vocabulary vocab;
  const auto kg = parse("a\tr\tb\nb\ts\tc\n", vocab);
  CHECK(kg.triples() == std::vector<Triple>{{0, 0, 1}, {1, 1, 2}});
  CHECK(vocab.entity_count() == 3);
  CHECK(vocab.relation_count() == 2);
  CHECK(kg.unique_entities() == std::vector<EntityId>{0, 1, 2});
}

TEST_CASE("parse_triples: comments, CRLF and re-parsing with the same vocabulary") {
  Vocabulary vocab;
  const std::string text = "# header\r\na\tr\tb\r\n\nb\tr\ta\n";
  const auto first = parse(text, vocab);
  const auto second = parse(text, vocab);
  CHECK(first.triples() == second.triples());
  CHECK(vocab.entity_count() == 2);
  CHECK(vocab.entities.label(1) == "b");
}

TEST_CASE("parse_triples: wrong field count names the line") {
  Vocabulary vocab;
  try {
    parse("a\tr\tb\na\tr\n", vocab);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("parse_triples: missing file is an I/O error") {
  Vocabulary vocab;
  CHECK_THROWS_AS(parse_triples(std::filesystem::path("/nonexistent/file.tsv"), vocab), IoError);
}

TEST_CASE("parse_triples_known rejects unseen labels") {
  Vocabulary vocab;
  parse("a\tr\tb\n", vocab);
  std::istringstream in("a\tr\tz\n");
  CHECK_THROWS_AS(parse_triples_known(in, vocab, "test"), ParseError);
}

TEST_CASE("TSV round trip through a fresh vocabulary is isomorphic") {
  Vocabulary vocab;
  const auto kg = parse("x\tp\ty\ny\tp\tz\nz\tq\tx\nx\tq\tx\n", vocab);
  std::ostringstream out;
  write_triples(out, kg, vocab);
  Vocabulary fresh;
  const auto back = parse(out.str(), fresh);
  REQUIRE(back.size() == kg.size());
  for (std::size_t i = 0; i < kg.size(); ++i) {
    const auto& a = kg.triples()[i];
    const auto& b = back.triples()[i];
    CHECK(vocab.entities.label(a.head) == fresh.entities.label(b.head));
    CHECK(vocab.relations.label(a.relation) == fresh.relations.label(b.relation));
    CHECK(vocab.entities.label(a.tail) == fresh.entities.label(b.tail));
  }
}

TEST_CASE("build_dataset_filter") {
  SUBCASE("empty negatives") {
    const KnowledgeGraph pos({{0, 0, 1}});
    CHECK(build_dataset_filter(pos, KnowledgeGraph{}).empty());
  }
  SUBCASE("direct (h, r) match") {
    const auto out = build_dataset_filter(KnowledgeGraph({{0, 0, 1}}), KnowledgeGraph({{0, 0, 2}}));
    CHECK(out.triples() == std::vector<Triple>{{0, 0, 1}});
  }
  SUBCASE("only matching heads survive") {
    const auto out = build_dataset_filter(KnowledgeGraph({{0, 0, 1}, {1, 0, 2}}), KnowledgeGraph({{0, 0, 3}}));
    CHECK(out.triples() == std::vector<Triple>{{0, 0, 1}});
  }
  SUBCASE("subset and idempotent on random graphs") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Triple> p, n;
      for (int i = 0; i < 40; ++i) {
        p.push_back({static_cast<EntityId>(uniform_index(rng, 8)), static_cast<RelationId>(uniform_index(rng, 3)),
                     static_cast<EntityId>(uniform_index(rng, 8))});
        n.push_back({static_cast<EntityId>(uniform_index(rng, 8)), static_cast<RelationId>(uniform_index(rng, 3)),
                     static_cast<EntityId>(uniform_index(rng, 8))});
      }
      const KnowledgeGraph pos(p), neg(n);
      const auto once = build_dataset_filter(pos, neg);
      for (const auto& t : once.triples()) CHECK(pos.contains(t));
      CHECK(build_dataset_filter(once, neg).triples() == once.triples());
    }
  }
}

TEST_CASE("split_train_test: a single triple cannot leave train") {
  const KnowledgeGraph kg({{0, 0, 1}});
  const auto split = split_train_test(kg, 0.5, 1);
  CHECK(split.test.empty());
  CHECK(split.train.triples() == kg.triples());
}

TEST_CASE("split_train_test: entity seen once stays in train") {
  const auto split = split_train_test(KnowledgeGraph({{0, 0, 1}, {0, 0, 2}}), 0.5, 3);
  CHECK(split.test.empty());
}

TEST_CASE("split_train_test: two mirrored triples") {
  const KnowledgeGraph kg({{0, 0, 1}, {1, 0, 0}});
  // Either triple may move; the other then keeps 0, 1 and r0 covered.
  std::set<Triple> seen;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    const auto split = split_train_test(kg, 0.5, seed);
    REQUIRE(split.test.size() == 1);
    REQUIRE(split.train.size() == 1);
    seen.insert(split.test.triples()[0]);
  }
  CHECK(seen.size() == 2);
}

TEST_CASE("split_train_test: argument checks") {
  const KnowledgeGraph kg({{0, 0, 1}});
  CHECK_THROWS_AS(split_train_test(kg, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(split_train_test(kg, 1.0, 1), ArgumentError);
  CHECK_THROWS_AS(split_train_test(KnowledgeGraph{}, 0.5, 1), ArgumentError);
}

TEST_CASE("split_train_test: coverage, partition and determinism over random graphs") {
  Rng gen(17);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n_entities = 2 + uniform_index(gen, 30);
    const std::size_t n_relations = 1 + uniform_index(gen, 5);
    const std::size_t n_triples = 1 + uniform_index(gen, 200);
    std::vector<Triple> triples;
    for (std::size_t i = 0; i < n_triples; ++i) {
      triples.push_back({static_cast<EntityId>(uniform_index(gen, n_entities)),
                         static_cast<RelationId>(uniform_index(gen, n_relations)),
                         static_cast<EntityId>(uniform_index(gen, n_entities))});
    }
    const KnowledgeGraph kg(triples);
    const double fraction = 0.05 + 0.9 * std::uniform_real_distribution<double>(0, 1)(gen);
    const std::uint64_t seed = gen();
    const auto split = split_train_test(kg, fraction, seed);

    CHECK(split.train.size() + split.test.size() == kg.size());
    CHECK(static_cast<double>(split.test.size()) <= std::ceil(fraction * static_cast<double>(kg.size())));
    std::set<EntityId> train_entities;
    std::set<RelationId> train_relations;
    for (const auto& t : split.train.triples()) {
      CHECK_FALSE(split.test.contains(t));
      train_entities.insert(t.head);
      train_entities.insert(t.tail);
      train_relations.insert(t.relation);
    }
    for (const auto& t : split.test.triples()) {
      CHECK(kg.contains(t));
      CHECK(train_entities.contains(t.head));
      CHECK(train_entities.contains(t.tail));
      CHECK(train_relations.contains(t.relation));
    }
    const auto again = split_train_test(kg, fraction, seed);
    CHECK(again.test.triples() == split.test.triples());
  }
}

TEST_CASE("parse_type_map") {
  Vocabulary vocab;
  parse("a\tr\tb\n", vocab);
  SUBCASE("empty") {
    std::istringstream in("");
    CHECK(parse_type_map(in, vocab).mapped_count() == 0);
  }
  SUBCASE("single assignment") {
    std::istringstream in("a\tPerson\n");
    const auto types = parse_type_map(in, vocab);
    REQUIRE(types.typed(0));
    CHECK(types.type_label(types.type_of(0)) == "Person");
    CHECK_FALSE(types.typed(1));
  }
  SUBCASE("unknown entities are skipped and counted") {
    std::istringstream in("zz\tPerson\nb\tPlace\n");
    const auto types = parse_type_map(in, vocab);
    CHECK(types.skipped == 1);
    CHECK(types.mapped_count() == 1);
  }
  SUBCASE("repeated identical line is fine") {
    std::istringstream in("a\tPerson\na\tPerson\n");
    CHECK(parse_type_map(in, vocab).mapped_count() == 1);
  }
  SUBCASE("conflicting types name the entity") {
    std::istringstream in("a\tPerson\na\tPlace\n");
    try {
      parse_type_map(in, vocab, "types");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("'a'") != std::string::npos);
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("malformed line") {
    std::istringstream in("a\tPerson\textra\n");
    CHECK_THROWS_AS(parse_type_map(in, vocab), ParseError);
  }
}
