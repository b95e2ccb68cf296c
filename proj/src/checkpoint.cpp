#include "dualkge/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dualkge/classification.hpp"
#include "dualkge/error.hpp"

namespace dualkge {

std::string mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::Dual:
      return "dual";
    case TrainMode::BaselinePos:
      return "baseline-pos";
    case TrainMode::BaselineNeg:
      return "baseline-neg";
  }
  return "unknown";
}

TrainMode parse_mode(const std::string& name) {
  if (name == "dual") return TrainMode::Dual;
  if (name == "baseline-pos") return TrainMode::BaselinePos;
  if (name == "baseline-neg") return TrainMode::BaselineNeg;
  throw ArgumentError("unknown mode '" + name + "' (expected dual, baseline-pos or baseline-neg)");
}

const EmbeddingModel& Checkpoint::pos() const {
  if (!dual()) throw ArgumentError("checkpoint holds a single baseline model, not a dual pair");
  return models.at(0);
}

const EmbeddingModel& Checkpoint::neg() const {
  if (!dual()) throw ArgumentError("checkpoint holds a single baseline model, not a dual pair");
  return models.at(1);
}

const EmbeddingModel& Checkpoint::single() const {
  if (dual()) throw ArgumentError("checkpoint holds a dual pair, not a single model");
  return models.at(0);
}

Checkpoint make_checkpoint(const DualModelState& state, const Vocabulary& vocab) {
  return {TrainMode::Dual, vocab, state.epoch, state.rng, {state.pos_model, state.neg_model}};
}

Checkpoint make_checkpoint(const BaselineState& state, const Vocabulary& vocab, TrainMode mode) {
  if (mode == TrainMode::Dual) throw ArgumentError("baseline state cannot be stored as a dual checkpoint");
  return {mode, vocab, state.epoch, state.rng, {state.model}};
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ArgumentError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

constexpr const char* kMagic = "dualkge-checkpoint";

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
  out << name << '\t' << m.rows() << '\t' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << '\t';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of file");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  /// Reads `key<TAB>value...` and returns the value fields.
  std::vector<std::string> expect(std::string_view key) {
    const std::string line = next();
    const auto fields = split_tabs(line);
    if (fields.empty() || fields[0] != key) fail("expected '" + std::string(key) + "'");
    return {fields.begin() + 1, fields.end()};
  }

  std::size_t expect_count(std::string_view key) { return to_count(single(expect(key))); }

  std::string single(const std::vector<std::string>& values) {
    if (values.size() != 1) fail("expected exactly one value");
    return values[0];
  }

  std::size_t to_count(const std::string& text) {
    std::size_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) fail("bad count '" + text + "'");
    return v;
  }

  Matrix matrix(std::string_view key) {
    const auto dims = expect(key);
    if (dims.size() != 2) fail("matrix header needs rows and cols");
    Matrix m(to_count(dims[0]), to_count(dims[1]));
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const std::string line = next();
      const auto fields = split_tabs(line);
      if (fields.size() != m.cols()) fail("matrix row has " + std::to_string(fields.size()) + " values");
      for (std::size_t j = 0; j < m.cols(); ++j) {
        try {
          m(i, j) = parse_double(fields[j]);
        } catch (const ArgumentError& e) {
          fail(e.what());
        }
      }
    }
    return m;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kMagic << '\t' << 1 << '\n';
  out << "mode\t" << mode_name(ckpt.mode) << '\n';
  out << "epoch\t" << ckpt.epoch << '\n';
  std::ostringstream rng_text;
  rng_text << ckpt.rng;
  out << "rng\t" << rng_text.str() << '\n';
  out << "entities\t" << ckpt.vocab.entity_count() << '\n';
  for (const auto& label : ckpt.vocab.entities.labels()) out << label << '\n';
  out << "relations\t" << ckpt.vocab.relation_count() << '\n';
  for (const auto& label : ckpt.vocab.relations.labels()) out << label << '\n';
  out << "models\t" << ckpt.models.size() << '\n';
  for (std::size_t m = 0; m < ckpt.models.size(); ++m) {
    const auto& model = ckpt.models[m];
    out << "model\t" << (ckpt.dual() ? (m == 0 ? "pos" : "neg") : "single") << '\n';
    out << "kind\t" << family_name(model.kind.family) << '\n';
    out << "norm\t" << model.kind.norm << '\n';
    out << "conjugate_tail\t" << (model.kind.conjugate_tail ? 1 : 0) << '\n';
    out << "dim\t" << model.dim << '\n';
    write_matrix(out, "entity_params", model.entities);
    write_matrix(out, "relation_params", model.relations);
    write_matrix(out, "entity_accum", model.entity_accum);
    write_matrix(out, "relation_accum", model.relation_accum);
  }
  out << "end\n";
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_checkpoint(out, ckpt);
  if (!out) throw IoError("write failure on " + path.string());
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  Checkpoint ckpt;
  if (reader.single(reader.expect(kMagic)) != "1") reader.fail("unsupported checkpoint version");
  try {
    ckpt.mode = parse_mode(reader.single(reader.expect("mode")));
  } catch (const ArgumentError& e) {
    reader.fail(e.what());
  }
  ckpt.epoch = reader.expect_count("epoch");
  {
    std::istringstream rng_text(reader.single(reader.expect("rng")));
    rng_text >> ckpt.rng;
    if (!rng_text) reader.fail("bad RNG state");
  }
  const std::size_t n_entities = reader.expect_count("entities");
  for (std::size_t i = 0; i < n_entities; ++i) {
    const std::string label = reader.next();
    if (ckpt.vocab.entities.intern(label) != i) reader.fail("duplicate entity label '" + label + "'");
  }
  const std::size_t n_relations = reader.expect_count("relations");
  for (std::size_t i = 0; i < n_relations; ++i) {
    const std::string label = reader.next();
    if (ckpt.vocab.relations.intern(label) != i) reader.fail("duplicate relation label '" + label + "'");
  }
  const std::size_t n_models = reader.expect_count("models");
  if (n_models != (ckpt.dual() ? 2u : 1u)) reader.fail("model count does not match mode");
  for (std::size_t m = 0; m < n_models; ++m) {
    reader.expect("model");
    EmbeddingModel model;
    try {
      model.kind.family = parse_family(reader.single(reader.expect("kind")));
    } catch (const ArgumentError& e) {
      reader.fail(e.what());
    }
    model.kind.norm = static_cast<int>(reader.expect_count("norm"));
    model.kind.conjugate_tail = reader.expect_count("conjugate_tail") != 0;
    model.dim = reader.expect_count("dim");
    model.entities = reader.matrix("entity_params");
    model.relations = reader.matrix("relation_params");
    model.entity_accum = reader.matrix("entity_accum");
    model.relation_accum = reader.matrix("relation_accum");
    if (model.entities.rows() != n_entities || model.relations.rows() != n_relations ||
        model.entities.cols() != model.kind.width(model.dim) || model.relations.cols() != model.entities.cols()) {
      reader.fail("model matrices do not match vocabulary or dimension");
    }
    ckpt.models.push_back(std::move(model));
  }
  if (reader.next() != "end") reader.fail("expected 'end'");
  return ckpt;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in, path.string());
}

ExportWhich parse_export_which(const std::string& name) {
  if (name == "pos") return ExportWhich::Pos;
  if (name == "neg") return ExportWhich::Neg;
  if (name == "concat") return ExportWhich::Concat;
  if (name == "model") return ExportWhich::Model;
  throw ArgumentError("unknown export selection '" + name + "' (expected pos, neg, concat or model)");
}

EmbeddingTable export_table(const Checkpoint& ckpt, ExportWhich which) {
  EmbeddingTable table;
  table.entity_labels = ckpt.vocab.entities.labels();
  const EmbeddingModel* model = nullptr;
  switch (which) {
    case ExportWhich::Pos:
      model = &ckpt.pos();
      break;
    case ExportWhich::Neg:
      model = &ckpt.neg();
      break;
    case ExportWhich::Model:
      model = &ckpt.single();
      break;
    case ExportWhich::Concat:
      table.kind = family_name(ckpt.pos().kind.family);
      table.dim = ckpt.pos().dim;
      table.entities = concat_entity_rows(ckpt.pos(), ckpt.neg());
      table.relations = Matrix(0, table.entities.cols());
      return table;
  }
  table.kind = family_name(model->kind.family);
  table.dim = model->dim;
  table.relation_labels = ckpt.vocab.relations.labels();
  table.entities = model->entities;
  table.relations = model->relations;
  return table;
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << "# kind " << table.kind << '\n';
  out << "# dim " << table.dim << '\n';
  out << "# entities " << table.entities.rows() << '\n';
  out << "# relations " << table.relations.rows() << '\n';
  auto rows = [&](const std::vector<std::string>& labels, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      out << labels[i];
      for (const double v : m.row(i)) out << '\t' << format_double(v);
      out << '\n';
    }
  };
  rows(table.entity_labels, table.entities);
  rows(table.relation_labels, table.relations);
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_embeddings(out, table);
  if (!out) throw IoError("write failure on " + path.string());
}

EmbeddingTable read_embeddings(std::istream& in, const std::string& source) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t n_entities = 0, n_relations = 0;
  auto header = [&](const std::string& key) {
    if (!std::getline(in, line)) throw ParseError(source, line_no, "missing header '# " + key + "'");
    ++line_no;
    const std::string prefix = "# " + key + " ";
    if (line.rfind(prefix, 0) != 0) throw ParseError(source, line_no, "expected header '# " + key + "'");
    return line.substr(prefix.size());
  };
  table.kind = header("kind");
  try {
    table.dim = static_cast<std::size_t>(std::stoull(header("dim")));
    n_entities = static_cast<std::size_t>(std::stoull(header("entities")));
    n_relations = static_cast<std::size_t>(std::stoull(header("relations")));
  } catch (const std::logic_error&) {
    throw ParseError(source, line_no, "bad header value");
  }
  std::vector<std::vector<double>> values;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    labels.emplace_back(fields[0]);
    std::vector<double> row;
    for (std::size_t j = 1; j < fields.size(); ++j) {
      try {
        row.push_back(parse_double(fields[j]));
      } catch (const ArgumentError& e) {
        throw ParseError(source, line_no, e.what());
      }
    }
    if (!values.empty() && row.size() != values.front().size()) throw ParseError(source, line_no, "ragged row");
    values.push_back(std::move(row));
  }
  if (values.size() != n_entities + n_relations) throw ParseError(source, line_no, "row count does not match headers");
  const std::size_t width = values.empty() ? 0 : values.front().size();
  table.entities = Matrix(n_entities, width);
  table.relations = Matrix(n_relations, width);
  for (std::size_t i = 0; i < values.size(); ++i) {
    Matrix& m = i < n_entities ? table.entities : table.relations;
    const std::size_t r = i < n_entities ? i : i - n_entities;
    std::copy(values[i].begin(), values[i].end(), m.row(r).begin());
    (i < n_entities ? table.entity_labels : table.relation_labels).push_back(labels[i]);
  }
  return table;
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_embeddings(in, path.string());
}

}  // namespace dualkge
