#include "dualkge/kg_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "dualkge/error.hpp"
#include "dualkge/random.hpp"

namespace dualkge {

std::uint32_t LabelIndex::intern(std::string_view label) {
  if (auto it = index_.find(std::string(label)); it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  return id;
}

std::optional<std::uint32_t> LabelIndex::find(std::string_view label) const {
  if (auto it = index_.find(std::string(label)); it != index_.end()) return it->second;
  return std::nullopt;
}

const std::string& LabelIndex::label(std::uint32_t index) const {
  if (index >= labels_.size()) throw ArgumentError("label index " + std::to_string(index) + " out of range");
  return labels_[index];
}

KnowledgeGraph::KnowledgeGraph(std::vector<Triple> triples) {
  triples_.reserve(triples.size());
  set_.reserve(triples.size());
  for (const auto& t : triples) {
    if (!set_.insert(t).second) continue;
    triples_.push_back(t);
    entity_bound_ = std::max<std::size_t>(entity_bound_, std::max(t.head, t.tail) + std::size_t{1});
    relation_bound_ = std::max<std::size_t>(relation_bound_, t.relation + std::size_t{1});
  }
  entities_.reserve(2 * triples_.size());
  for (const auto& t : triples_) {
    entities_.push_back(t.head);
    entities_.push_back(t.tail);
  }
  std::sort(entities_.begin(), entities_.end());
  entities_.erase(std::unique(entities_.begin(), entities_.end()), entities_.end());
}

void TypeMap::assign(EntityId entity, std::string_view type_label) {
  if (entity >= type_of_.size()) type_of_.resize(entity + std::size_t{1}, kUntyped);
  const int id = static_cast<int>(types_.intern(type_label));
  if (type_of_[entity] == kUntyped) {
    type_of_[entity] = id;
    ++mapped_;
  } else if (type_of_[entity] != id) {
    throw ArgumentError("entity " + std::to_string(entity) + " has conflicting types '" +
                        types_.label(static_cast<std::uint32_t>(type_of_[entity])) + "' and '" +
                        std::string(type_label) + "'");
  }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

namespace {

bool skippable(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line.empty() || line.front() == '#';
}

template <typename Resolve>
KnowledgeGraph read_triples(std::istream& in, const std::string& source, Resolve&& resolve) {
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(source, line_no, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    triples.push_back(resolve(fields, line_no));
  }
  if (in.bad()) throw IoError("read failure on " + source);
  return KnowledgeGraph(std::move(triples));
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

KnowledgeGraph parse_triples(std::istream& in, Vocabulary& vocab, const std::string& source) {
  return read_triples(in, source, [&](const std::vector<std::string_view>& f, std::size_t) {
    const EntityId h = vocab.entities.intern(f[0]);
    const RelationId r = vocab.relations.intern(f[1]);
    const EntityId t = vocab.entities.intern(f[2]);
    return Triple{h, r, t};
  });
}

KnowledgeGraph parse_triples(const std::filesystem::path& path, Vocabulary& vocab) {
  auto in = open_input(path);
  return parse_triples(in, vocab, path.string());
}

KnowledgeGraph parse_triples_known(std::istream& in, const Vocabulary& vocab, const std::string& source) {
  return read_triples(in, source, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    const auto h = vocab.entities.find(f[0]);
    const auto r = vocab.relations.find(f[1]);
    const auto t = vocab.entities.find(f[2]);
    if (!h) throw ParseError(source, line_no, "unknown entity '" + std::string(f[0]) + "'");
    if (!r) throw ParseError(source, line_no, "unknown relation '" + std::string(f[1]) + "'");
    if (!t) throw ParseError(source, line_no, "unknown entity '" + std::string(f[2]) + "'");
    return Triple{*h, *r, *t};
  });
}

KnowledgeGraph parse_triples_known(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto in = open_input(path);
  return parse_triples_known(in, vocab, path.string());
}

void write_triples(std::ostream& out, const KnowledgeGraph& kg, const Vocabulary& vocab) {
  for (const auto& t : kg.triples()) {
    out << vocab.entities.label(t.head) << '\t' << vocab.relations.label(t.relation) << '\t'
        << vocab.entities.label(t.tail) << '\n';
  }
}

void write_triples(const std::filesystem::path& path, const KnowledgeGraph& kg, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_triples(out, kg, vocab);
  if (!out) throw IoError("write failure on " + path.string());
}

TypeMap parse_type_map(std::istream& in, const Vocabulary& vocab, const std::string& source) {
  TypeMap types(vocab.entity_count());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw ParseError(source, line_no, "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    }
    const auto entity = vocab.entities.find(fields[0]);
    if (!entity) {
      ++types.skipped;
      continue;
    }
    try {
      types.assign(*entity, fields[1]);
    } catch (const ArgumentError&) {
      throw ParseError(source, line_no, "conflicting type for entity '" + std::string(fields[0]) + "'");
    }
  }
  if (in.bad()) throw IoError("read failure on " + source);
  return types;
}

TypeMap parse_type_map(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto in = open_input(path);
  return parse_type_map(in, vocab, path.string());
}

KnowledgeGraph build_dataset_filter(const KnowledgeGraph& pos, const KnowledgeGraph& neg) {
  std::unordered_set<std::uint64_t> head_relation;
  head_relation.reserve(neg.size());
  for (const auto& t : neg.triples()) head_relation.insert((std::uint64_t{t.head} << 32) | t.relation);
  std::vector<Triple> kept;
  for (const auto& t : pos.triples()) {
    if (head_relation.contains((std::uint64_t{t.head} << 32) | t.relation)) kept.push_back(t);
  }
  return KnowledgeGraph(std::move(kept));
}

TrainTestSplit split_train_test(const KnowledgeGraph& kg, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("test_fraction must lie in (0, 1)");
  }
  if (kg.empty()) throw ArgumentError("cannot split an empty graph");

  const auto& triples = kg.triples();
  const std::size_t n = triples.size();
  const auto target = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n) - 1e-9));

  // Number of train triples mentioning each entity / relation.
  std::vector<std::size_t> entity_uses(kg.entity_bound(), 0);
  std::vector<std::size_t> relation_uses(kg.relation_bound(), 0);
  for (const auto& t : triples) {
    ++entity_uses[t.head];
    if (t.tail != t.head) ++entity_uses[t.tail];
    ++relation_uses[t.relation];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<char> in_test(n, 0);
  std::size_t moved = 0;
  for (const std::size_t i : order) {
    if (moved >= target) break;
    const auto& t = triples[i];
    if (entity_uses[t.head] < 2 || entity_uses[t.tail] < 2 || relation_uses[t.relation] < 2) continue;
    --entity_uses[t.head];
    if (t.tail != t.head) --entity_uses[t.tail];
    --relation_uses[t.relation];
    in_test[i] = 1;
    ++moved;
  }

  std::vector<Triple> train;
  std::vector<Triple> test;
  train.reserve(n - moved);
  test.reserve(moved);
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? test : train).push_back(triples[i]);
  return {KnowledgeGraph(std::move(train)), KnowledgeGraph(std::move(test))};
}

}  // namespace dualkge
