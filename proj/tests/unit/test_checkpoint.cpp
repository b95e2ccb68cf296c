#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "dualkge/checkpoint.hpp"
#include "dualkge/error.hpp"
#include "synthetic.hpp"

using namespace dualkge;

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 20000; ++i) {
    double v;
    const auto b = bits(rng);
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(parse_double(format_double(v)) == v);
  }
  for (double v : {0.0, -0.0, 1e-300, 0.1, 1.0 / 3.0, std::numeric_limits<double>::denorm_min()})
    CHECK(parse_double(format_double(v)) == v);
  CHECK_THROWS(parse_double("1.5x"));
}

TEST_CASE("dual checkpoint round trip is bitwise") {
  const auto toy = testing::make_toy(3);
  TrainConfig cfg;
  cfg.kind = ModelKind::complex(false);
  cfg.epochs = 3;
  cfg.cl_phase = 2;
  cfg.dim = 4;
  cfg.n_batches = 7;
  const auto state = train_dual(toy.pos, toy.neg, toy.vocab, cfg);
  const auto ckpt = make_checkpoint(state, toy.vocab);
  std::stringstream buf;
  write_checkpoint(buf, ckpt);
  const auto back = read_checkpoint(buf);
  CHECK(back.mode == TrainMode::Dual);
  CHECK(back.epoch == 3);
  CHECK(back.rng == state.rng);
  CHECK(back.pos() == state.pos_model);
  CHECK(back.neg() == state.neg_model);
  CHECK(back.pos().has_adagrad_state());
  CHECK(back.vocab.entities.labels() == toy.vocab.entities.labels());
  CHECK(back.vocab.relations.labels() == toy.vocab.relations.labels());
  std::stringstream again;
  write_checkpoint(again, back);
  CHECK(again.str() == buf.str());
}

TEST_CASE("baseline checkpoint and accessors") {
  const auto toy = testing::make_toy(4);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.cl_phase = 1;
  cfg.dim = 3;
  const auto state = train_baseline(toy.pos, toy.vocab, cfg);
  const auto ckpt = make_checkpoint(state, toy.vocab, TrainMode::BaselinePos);
  std::stringstream buf;
  write_checkpoint(buf, ckpt);
  const auto back = read_checkpoint(buf);
  CHECK(back.mode == TrainMode::BaselinePos);
  CHECK(back.single() == state.model);
  CHECK_THROWS(back.pos());
  CHECK_THROWS(export_table(back, ExportWhich::Concat));
}

TEST_CASE("corrupted checkpoints are rejected") {
  std::istringstream junk("not a checkpoint\n");
  CHECK_THROWS_AS(read_checkpoint(junk), ParseError);
  const auto toy = testing::make_toy(5);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.cl_phase = 0;
  cfg.dim = 2;
  std::stringstream buf;
  write_checkpoint(buf, make_checkpoint(init_dual(toy.vocab, cfg), toy.vocab));
  const std::string text = buf.str();
  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(truncated), ParseError);
}

TEST_CASE("embedding export round trip") {
  const auto toy = testing::make_toy(6);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.cl_phase = 0;
  cfg.dim = 3;
  cfg.kind = ModelKind::complex();
  const auto ckpt = make_checkpoint(init_dual(toy.vocab, cfg), toy.vocab);
  for (const auto which : {ExportWhich::Pos, ExportWhich::Neg, ExportWhich::Concat}) {
    const auto table = export_table(ckpt, which);
    std::stringstream buf;
    write_embeddings(buf, table);
    const auto back = read_embeddings(buf);
    CHECK(back.kind == table.kind);
    CHECK(back.dim == table.dim);
    CHECK(back.entity_labels == table.entity_labels);
    CHECK(back.relation_labels == table.relation_labels);
    CHECK(back.entities == table.entities);
    CHECK(back.relations == table.relations);
  }
  const auto concat = export_table(ckpt, ExportWhich::Concat);
  CHECK(concat.entities.cols() == 12);
  CHECK(concat.relations.rows() == 0);
  CHECK(export_table(ckpt, ExportWhich::Pos).entities == ckpt.pos().entities);
}
