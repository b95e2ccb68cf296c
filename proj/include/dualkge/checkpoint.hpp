#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dualkge/kg_store.hpp"
#include "dualkge/model.hpp"
#include "dualkge/random.hpp"
#include "dualkge/trainer.hpp"

namespace dualkge {

enum class TrainMode { Dual, BaselinePos, BaselineNeg };

std::string mode_name(TrainMode mode);
TrainMode parse_mode(const std::string& name);

/// Everything needed to evaluate, export or resume a run: the vocabulary,
/// the model(s), the epoch counter and the RNG state.
struct Checkpoint {
  TrainMode mode = TrainMode::Dual;
  Vocabulary vocab;
  std::size_t epoch = 0;
  Rng rng;
  /// Dual: {pos, neg}. Baselines: {model}.
  std::vector<EmbeddingModel> models;

  bool dual() const noexcept { return mode == TrainMode::Dual; }
  const EmbeddingModel& pos() const;
  const EmbeddingModel& neg() const;
  /// The single model of a baseline checkpoint.
  const EmbeddingModel& single() const;
};

Checkpoint make_checkpoint(const DualModelState& state, const Vocabulary& vocab);
Checkpoint make_checkpoint(const BaselineState& state, const Vocabulary& vocab, TrainMode mode);

/// Line-oriented text format with shortest round-trip decimal values.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "<stream>");
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(std::string_view text);

enum class ExportWhich { Pos, Neg, Concat, Model };

ExportWhich parse_export_which(const std::string& name);

/// `# kind`, `# dim`, `# entities`, `# relations` headers followed by
/// `label<TAB>v1<TAB>...` rows, entities first then relations.
struct EmbeddingTable {
  std::string kind;
  std::size_t dim = 0;
  std::vector<std::string> entity_labels;
  std::vector<std::string> relation_labels;
  Matrix entities;
  Matrix relations;
};

EmbeddingTable export_table(const Checkpoint& ckpt, ExportWhich which);
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable read_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingTable read_embeddings(const std::filesystem::path& path);

}  // namespace dualkge
