#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace dualkge {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Which end of a triple gets replaced during corruption or ranking.
enum class Slot { Head, Tail };

inline Triple with_entity(Triple t, Slot slot, EntityId e) noexcept {
  (slot == Slot::Head ? t.head : t.tail) = e;
  return t;
}

inline EntityId entity_at(const Triple& t, Slot slot) noexcept {
  return slot == Slot::Head ? t.head : t.tail;
}

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t z = (std::uint64_t{t.head} << 32) ^ std::uint64_t{t.tail};
    z ^= std::uint64_t{t.relation} * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }
};

using TripleSet = std::unordered_set<Triple, TripleHash>;

/// Bidirectional label <-> dense index tables for one label space.
class LabelIndex {
 public:
  /// Returns the index of `label`, appending it if unseen.
  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t index) const;
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Entity and relation vocabularies shared by the positive and negative graphs.
struct Vocabulary {
  LabelIndex entities;
  LabelIndex relations;

  std::size_t entity_count() const noexcept { return entities.size(); }
  std::size_t relation_count() const noexcept { return relations.size(); }
};

/// Deduplicated triple list in first-seen order with a membership index.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  explicit KnowledgeGraph(std::vector<Triple> triples);

  const std::vector<Triple>& triples() const noexcept { return triples_; }
  const TripleSet& triple_set() const noexcept { return set_; }
  /// Sorted distinct entities appearing as head or tail.
  const std::vector<EntityId>& unique_entities() const noexcept { return entities_; }

  bool contains(const Triple& t) const { return set_.contains(t); }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

  /// Largest entity / relation index referenced plus one (0 when empty).
  std::size_t entity_bound() const noexcept { return entity_bound_; }
  std::size_t relation_bound() const noexcept { return relation_bound_; }

 private:
  std::vector<Triple> triples_;
  TripleSet set_;
  std::vector<EntityId> entities_;
  std::size_t entity_bound_ = 0;
  std::size_t relation_bound_ = 0;
};

/// Partial entity -> type assignment. Types are interned to small integers.
class TypeMap {
 public:
  TypeMap() = default;
  explicit TypeMap(std::size_t n_entities) : type_of_(n_entities, kUntyped) {}

  static constexpr int kUntyped = -1;

  /// Assigns a type; throws ArgumentError if the entity already has a different one.
  void assign(EntityId entity, std::string_view type_label);

  /// Interned type id or kUntyped.
  int type_of(EntityId entity) const noexcept {
    return entity < type_of_.size() ? type_of_[entity] : kUntyped;
  }
  bool typed(EntityId entity) const noexcept { return type_of(entity) != kUntyped; }
  const std::string& type_label(int type_id) const { return types_.label(static_cast<std::uint32_t>(type_id)); }
  std::size_t type_count() const noexcept { return types_.size(); }
  std::size_t mapped_count() const noexcept { return mapped_; }
  std::size_t entity_capacity() const noexcept { return type_of_.size(); }

  /// Lines skipped during parsing because their entity was not in the vocabulary.
  std::size_t skipped = 0;

 private:
  std::vector<int> type_of_;
  LabelIndex types_;
  std::size_t mapped_ = 0;
};

KnowledgeGraph parse_triples(std::istream& in, Vocabulary& vocab, const std::string& source = "<stream>");
KnowledgeGraph parse_triples(const std::filesystem::path& path, Vocabulary& vocab);

/// Like parse_triples but every label must already exist in `vocab`; unknown
/// labels raise ParseError. Used for held-out files evaluated against a trained model.
KnowledgeGraph parse_triples_known(std::istream& in, const Vocabulary& vocab, const std::string& source = "<stream>");
KnowledgeGraph parse_triples_known(const std::filesystem::path& path, const Vocabulary& vocab);

void write_triples(std::ostream& out, const KnowledgeGraph& kg, const Vocabulary& vocab);
void write_triples(const std::filesystem::path& path, const KnowledgeGraph& kg, const Vocabulary& vocab);

TypeMap parse_type_map(std::istream& in, const Vocabulary& vocab, const std::string& source = "<stream>");
TypeMap parse_type_map(const std::filesystem::path& path, const Vocabulary& vocab);

/// Positive triples (h, r, t) whose (h, r) pair occurs in at least one negative triple.
KnowledgeGraph build_dataset_filter(const KnowledgeGraph& pos, const KnowledgeGraph& neg);

struct TrainTestSplit {
  KnowledgeGraph train;
  KnowledgeGraph test;
};

/// Seeded split where every entity and relation of the test part still occurs in train.
TrainTestSplit split_train_test(const KnowledgeGraph& kg, double test_fraction, std::uint64_t seed);

/// Splits one TSV line on tabs (no quoting). Strips a trailing '\r'.
std::vector<std::string_view> split_tabs(std::string_view line);

}  // namespace dualkge
