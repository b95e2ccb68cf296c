#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dualkge/checkpoint.hpp"
#include "dualkge/classification.hpp"
#include "dualkge/cli.hpp"
#include "dualkge/error.hpp"
#include "dualkge/evaluation.hpp"
#include "dualkge/kg_store.hpp"
#include "dualkge/metrics.hpp"

namespace dualkge::cli {

using json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw IoError("write failure on " + path.string());
}

json config_json(const TrainConfig& cfg) {
  json j;
  j["kind"] = family_name(cfg.kind.family);
  j["norm"] = cfg.kind.norm;
  j["complex-no-conj"] = !cfg.kind.conjugate_tail;
  j["dim"] = cfg.dim;
  j["epochs"] = cfg.epochs;
  j["batches"] = cfg.n_batches;
  j["neg-rate"] = cfg.neg_rate;
  j["cl-phase"] = cfg.cl_phase;
  j["learning-rate"] = cfg.effective_learning_rate();
  j["optimizer"] = optimizer_name(cfg.effective_optimizer());
  j["margin"] = cfg.margin;
  j["reg-lambda"] = cfg.reg_lambda;
  j["seed"] = cfg.seed;
  j["pool-size"] = cfg.pool_size.value;
  j["normalize-entities"] = cfg.normalize_entities;
  j["regen-interval"] = cfg.regen_interval;
  return j;
}

json hta_json(const HeadTailAvg& h) { return json{{"head", h.head}, {"tail", h.tail}, {"avg", h.avg}}; }

json metrics_json(const ClassificationMetrics& m) {
  return json{{"precision", m.precision}, {"recall", m.recall}, {"weighted_f1", m.weighted_f1}, {"auc", m.auc}};
}

std::string default_repr(const Checkpoint& ckpt, const std::string& task) {
  if (!ckpt.dual()) return "model";
  return (task == "lp" || task == "sem") ? "pos" : "concat";
}

Matrix representation_matrix(const Checkpoint& ckpt, const std::string& repr) {
  switch (parse_export_which(repr)) {
    case ExportWhich::Pos:
      return ckpt.pos().entities;
    case ExportWhich::Neg:
      return ckpt.neg().entities;
    case ExportWhich::Model:
      return ckpt.single().entities;
    case ExportWhich::Concat:
      return concat_entity_rows(ckpt.pos(), ckpt.neg());
  }
  throw ArgumentError("unknown representation '" + repr + "'");
}

struct ScorerHolder {
  std::unique_ptr<Scorer> scorer;
  bool experimental = false;
};

ScorerHolder make_scorer(const Checkpoint& ckpt, const std::string& repr) {
  switch (parse_export_which(repr)) {
    case ExportWhich::Pos:
      return {std::make_unique<ModelScorer>(ckpt.pos()), false};
    case ExportWhich::Neg:
      return {std::make_unique<ModelScorer>(ckpt.neg()), false};
    case ExportWhich::Model:
      return {std::make_unique<ModelScorer>(ckpt.single()), false};
    case ExportWhich::Concat:
      return {std::make_unique<SummedScorer>(ckpt.pos(), ckpt.neg()), true};
  }
  throw ArgumentError("unknown representation '" + repr + "'");
}

template <typename T>
const T& require(const std::optional<T>& value, const std::string& flag, const std::string& task) {
  if (!value) throw ArgumentError("task '" + task + "' requires " + flag);
  return *value;
}

json ranking_json(const RankingReport& r) {
  json j;
  j["n_test"] = r.n_test;
  j["mrr_head"] = r.mrr_head;
  j["mrr_tail"] = r.mrr_tail;
  j["mrr_avg"] = r.mrr_avg;
  for (const auto& [k, h] : r.hits) j["hits@" + std::to_string(k)] = hta_json(h);
  return j;
}

std::string csv_escape(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return s;
}

}  // namespace

std::size_t default_threads() {
  if (const char* env = std::getenv("DUALKGE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_build_dataset(const BuildDatasetOptions& o, std::ostream& log) {
  Vocabulary vocab;
  const auto pos = parse_triples(o.pos_path, vocab);
  const auto neg = parse_triples(o.neg_path, vocab);
  const auto filtered = build_dataset_filter(pos, neg);
  fs::create_directories(o.out_dir);

  TrainTestSplit split;
  if (filtered.empty()) {
    log << "warning: no positive triple shares a (head, relation) pair with the negative statements\n";
    if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0)) throw ArgumentError("test_fraction must lie in (0, 1)");
  } else {
    split = split_train_test(filtered, o.test_fraction, o.seed);
  }
  write_triples(o.out_dir / "train_pos.tsv", split.train, vocab);
  write_triples(o.out_dir / "test_pos.tsv", split.test, vocab);
  write_triples(o.out_dir / "train_neg.tsv", neg, vocab);
  log << "train_pos\t" << split.train.size() << '\n';
  log << "train_neg\t" << neg.size() << '\n';
  log << "test_pos\t" << split.test.size() << '\n';
  return kSuccess;
}

int cmd_train(const TrainOptions& o, std::ostream& log) {
  const TrainMode mode = parse_mode(o.mode);
  const TrainConfig& cfg = o.config;
  cfg.validate();

  Vocabulary vocab;
  const auto pos = parse_triples(o.train_pos, vocab);
  KnowledgeGraph neg;
  if (o.train_neg) {
    neg = parse_triples(*o.train_neg, vocab);
  } else if (mode != TrainMode::BaselinePos) {
    throw ArgumentError("--train-neg is required for mode " + mode_name(mode));
  }

  fs::create_directories(o.out_dir);
  const fs::path checkpoint_path = o.checkpoint.value_or(o.out_dir / "checkpoint.dkge");
  const std::size_t model_dim = mode == TrainMode::Dual ? cfg.dim : 2 * cfg.dim;

  json resolved;
  resolved["schema_version"] = kSchemaVersion;
  resolved["command"] = "train";
  resolved["mode"] = mode_name(mode);
  resolved["train-pos"] = o.train_pos.string();
  if (o.train_neg) resolved["train-neg"] = o.train_neg->string();
  resolved["out-dir"] = o.out_dir.string();
  resolved["checkpoint"] = checkpoint_path.string();
  resolved.update(config_json(cfg));
  resolved["model_dim"] = model_dim;
  resolved["entity_width"] = cfg.kind.width(model_dim);
  resolved["n_entities"] = vocab.entity_count();
  resolved["n_relations"] = vocab.relation_count();
  write_text(o.out_dir / "config.json", resolved.dump(2) + "\n");

  std::vector<EpochRecord> history;
  Checkpoint ckpt;
  if (mode == TrainMode::Dual) {
    const auto state = train_dual(pos, neg, vocab, cfg);
    history = state.loss_history;
    ckpt = make_checkpoint(state, vocab);
  } else {
    const auto& kg = mode == TrainMode::BaselinePos ? pos : neg;
    const auto state = train_baseline(kg, vocab, cfg);
    history = state.loss_history;
    ckpt = make_checkpoint(state, vocab, mode);
  }
  write_checkpoint(checkpoint_path, ckpt);

  std::ostringstream csv;
  csv << "epoch,loss_pos,loss_neg\n";
  for (const auto& rec : history) {
    csv << rec.epoch << ',';
    if (mode != TrainMode::BaselineNeg) csv << format_double(rec.loss_pos);
    csv << ',';
    if (mode == TrainMode::Dual) csv << format_double(rec.loss_neg);
    if (mode == TrainMode::BaselineNeg) csv << format_double(rec.loss_pos);
    csv << '\n';
  }
  write_text(o.out_dir / "loss.csv", csv.str());

  log << "trained " << mode_name(mode) << ' ' << family_name(cfg.kind.family) << " for " << ckpt.epoch
      << " epochs; entity width " << ckpt.models.front().width() << "; checkpoint " << checkpoint_path.string()
      << '\n';
  return kSuccess;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& log) {
  if (o.checkpoints.empty()) throw ArgumentError("at least one --checkpoint is required");
  const std::string& task = o.task;
  if (task != "lp" && task != "sem" && task != "tc" && task != "cluster") {
    throw ArgumentError("unknown task '" + task + "' (expected lp, sem, tc or cluster)");
  }
  if ((task == "lp" || task == "sem") && o.checkpoints.size() != 1) {
    throw ArgumentError("task '" + task + "' takes exactly one checkpoint");
  }
  if ((task == "sem" || task == "cluster") && !o.types) throw ArgumentError("task '" + task + "' requires --types");

  json report;
  report["schema_version"] = kSchemaVersion;
  report["task"] = task;

  if (task == "lp" || task == "sem") {
    const auto ckpt = read_checkpoint(o.checkpoints.front());
    const std::string repr = o.repr.value_or(default_repr(ckpt, task));
    const auto test = parse_triples_known(require(o.test, "--test", task), ckpt.vocab);
    const auto train = parse_triples_known(require(o.train, "--train", task), ckpt.vocab);
    const auto holder = make_scorer(ckpt, repr);
    report["checkpoint"] = o.checkpoints.front().string();
    report["mode"] = mode_name(ckpt.mode);
    report["repr"] = repr;
    if (holder.experimental) {
      report["experimental"] = "link prediction with repr=concat sums the positive and negative model scores";
      log << "warning: --repr concat for " << task << " is an experimental summed-score mode\n";
    }
    if (task == "lp") {
      LinkPredictionOptions lp;
      lp.ks = o.ks;
      lp.filter_train_only = o.filter_train_only;
      lp.ties = o.tie_mean ? TieMode::Mean : TieMode::Optimistic;
      lp.threads = o.threads;
      report.update(ranking_json(evaluate_link_prediction(*holder.scorer, test, train, lp)));
    } else {
      const auto types = parse_type_map(*o.types, ckpt.vocab);
      if (types.skipped) log << "warning: " << types.skipped << " type lines named unknown entities\n";
      SemOptions sem;
      sem.raw = o.sem_raw;
      sem.filter_train_only = o.filter_train_only;
      sem.threads = o.threads;
      json warnings = json::array();
      for (const std::size_t k : o.sem_ks) {
        const auto r = sem_at_k(*holder.scorer, test, train, types, k, sem);
        report["sem@" + std::to_string(k)] = hta_json(r.sem);
        report["n_head"] = r.n_head;
        report["n_tail"] = r.n_tail;
        report["n_scored"] = r.n_scored;
        for (const auto& w : r.warnings) {
          log << "warning: " << w << '\n';
          warnings.push_back(w);
        }
      }
      report["warnings"] = warnings;
    }
  } else if (task == "tc") {
    json results = json::array();
    std::vector<ClassificationReport> reports;
    for (const auto& path : o.checkpoints) {
      const auto ckpt = read_checkpoint(path);
      const std::string repr = o.repr.value_or(default_repr(ckpt, task));
      const auto pairs = parse_pairs(require(o.pairs, "--pairs", task), ckpt.vocab);
      ForestConfig forest = o.forest;
      forest.threads = o.threads;
      TripleClassificationOptions tc{o.folds, o.seed, o.auc_from_labels};
      auto r = evaluate_triple_classification(representation_matrix(ckpt, repr), pairs, forest, tc);
      json entry;
      entry["checkpoint"] = path.string();
      entry["mode"] = mode_name(ckpt.mode);
      entry["repr"] = repr;
      json folds = json::array();
      for (const auto& f : r.folds) {
        json fj{{"fold", f.fold}};
        if (f.metrics) {
          fj.update(metrics_json(*f.metrics));
        } else {
          fj["error"] = f.error;
        }
        folds.push_back(fj);
      }
      entry["folds"] = folds;
      entry["median"] = metrics_json(r.median);
      results.push_back(entry);
      reports.push_back(std::move(r));
    }
    report["results"] = results;
    if (reports.size() >= 2) {
      json kw;
      const std::pair<const char*, double ClassificationMetrics::*> fields[] = {
          {"precision", &ClassificationMetrics::precision},
          {"recall", &ClassificationMetrics::recall},
          {"weighted_f1", &ClassificationMetrics::weighted_f1},
          {"auc", &ClassificationMetrics::auc}};
      for (const auto& [name, field] : fields) {
        std::vector<std::vector<double>> groups;
        for (const auto& r : reports) groups.push_back(r.metric_values(field));
        const auto res = kruskal_wallis(groups);
        kw[name] = json{{"h", res.h}, {"df", res.df}, {"critical_value", res.critical_value},
                        {"significant", res.significant}};
      }
      report["kruskal_wallis"] = kw;
    }
  } else {
    json results = json::array();
    std::vector<std::string> labels;
    std::vector<double> ch, db, sil;
    for (const auto& path : o.checkpoints) {
      const auto ckpt = read_checkpoint(path);
      const std::string repr = o.repr.value_or(default_repr(ckpt, task));
      const auto types = parse_type_map(*o.types, ckpt.vocab);
      if (o.expect_types && types.type_count() != *o.expect_types) {
        throw ParseError(o.types->string(), 0,
                         "expected " + std::to_string(*o.expect_types) + " types, found " +
                             std::to_string(types.type_count()));
      }
      const Matrix reps = representation_matrix(ckpt, repr);
      std::vector<EntityId> typed;
      for (EntityId e = 0; e < reps.rows(); ++e) {
        if (types.typed(e)) typed.push_back(e);
      }
      Matrix points(typed.size(), reps.cols());
      std::vector<int> point_labels;
      for (std::size_t i = 0; i < typed.size(); ++i) {
        std::copy(reps.row(typed[i]).begin(), reps.row(typed[i]).end(), points.row(i).begin());
        point_labels.push_back(types.type_of(typed[i]));
      }
      const auto m = clustering_metrics(points, point_labels);
      results.push_back(json{{"checkpoint", path.string()},
                             {"mode", mode_name(ckpt.mode)},
                             {"repr", repr},
                             {"n_points", typed.size()},
                             {"n_types", types.type_count()},
                             {"calinski_harabasz", m.calinski_harabasz},
                             {"davies_bouldin", m.davies_bouldin},
                             {"silhouette", m.silhouette}});
      labels.push_back(path.string());
      ch.push_back(m.calinski_harabasz);
      db.push_back(m.davies_bouldin);
      sil.push_back(m.silhouette);
    }
    report["results"] = results;
    if (o.normalized_csv) {
      const auto ch_n = normalize_min_max(ch);
      const auto db_n = normalize_min_max(db, true);
      const auto sil_n = normalize_min_max(sil);
      std::ostringstream csv;
      csv << "approach,metric,value,normalized\n";
      for (std::size_t i = 0; i < labels.size(); ++i) {
        csv << csv_escape(labels[i]) << ",calinski_harabasz," << format_double(ch[i]) << ',' << format_double(ch_n[i]) << '\n';
        csv << csv_escape(labels[i]) << ",davies_bouldin_inverted," << format_double(db[i]) << ','
            << format_double(db_n[i]) << '\n';
        csv << csv_escape(labels[i]) << ",silhouette," << format_double(sil[i]) << ',' << format_double(sil_n[i]) << '\n';
      }
      write_text(*o.normalized_csv, csv.str());
    }
  }

  const std::string text = report.dump(2) + "\n";
  if (o.out) {
    write_text(*o.out, text);
  } else {
    out << text;
  }
  return kSuccess;
}

int cmd_sweep(const SweepOptions& o, std::ostream& out, std::ostream& log) {
  if (o.cl_phases.empty() || o.dims.empty()) throw ArgumentError("sweep grids must be non-empty");
  Vocabulary vocab;
  const auto pos = parse_triples(o.train_pos, vocab);
  const auto neg = parse_triples(o.train_neg, vocab);
  std::optional<KnowledgeGraph> test;
  std::vector<PairExample> pairs;
  std::optional<TypeMap> types;
  if (o.test) test = parse_triples_known(*o.test, vocab);
  if (o.pairs) pairs = parse_pairs(*o.pairs, vocab);
  if (o.types) types = parse_type_map(*o.types, vocab);

  std::ostringstream csv;
  csv << "cl_phase,dim,metric,value\n";
  std::size_t failures = 0;
  for (const std::size_t cl_phase : o.cl_phases) {
    for (const std::size_t dim : o.dims) {
      std::vector<std::pair<std::string, double>> row;
      try {
        TrainConfig cfg = o.config;
        cfg.cl_phase = cl_phase;
        cfg.dim = dim;
        const auto state = train_dual(pos, neg, vocab, cfg);
        row.emplace_back("loss_pos_final", state.loss_history.empty() ? 0.0 : state.loss_history.back().loss_pos);
        row.emplace_back("loss_neg_final", state.loss_history.empty() ? 0.0 : state.loss_history.back().loss_neg);
        if (test) {
          LinkPredictionOptions lp;
          lp.threads = cfg.threads;
          const auto r = evaluate_link_prediction(ModelScorer(state.pos_model), *test, pos, lp);
          row.emplace_back("mrr_avg", r.mrr_avg);
          row.emplace_back("hits@1_avg", r.hits.at(1).avg);
          row.emplace_back("hits@10_avg", r.hits.at(10).avg);
        }
        if (!pairs.empty()) {
          ForestConfig forest = o.forest;
          forest.threads = cfg.threads;
          const auto r = evaluate_triple_classification(concat_entity_rows(state.pos_model, state.neg_model), pairs,
                                                        forest, {5, cfg.seed, false});
          row.emplace_back("tc_weighted_f1", r.median.weighted_f1);
          row.emplace_back("tc_auc", r.median.auc);
        }
        if (types) {
          const Matrix reps = concat_entity_rows(state.pos_model, state.neg_model);
          std::vector<EntityId> typed;
          for (EntityId e = 0; e < reps.rows(); ++e) {
            if (types->typed(e)) typed.push_back(e);
          }
          Matrix points(typed.size(), reps.cols());
          std::vector<int> labels;
          for (std::size_t i = 0; i < typed.size(); ++i) {
            std::copy(reps.row(typed[i]).begin(), reps.row(typed[i]).end(), points.row(i).begin());
            labels.push_back(types->type_of(typed[i]));
          }
          const auto m = clustering_metrics(points, labels);
          row.emplace_back("calinski_harabasz", m.calinski_harabasz);
          row.emplace_back("davies_bouldin", m.davies_bouldin);
          row.emplace_back("silhouette", m.silhouette);
        }
      } catch (const Error& e) {
        ++failures;
        log << "cell cl_phase=" << cl_phase << " dim=" << dim << " failed: " << e.what() << '\n';
        csv << cl_phase << ',' << dim << ",error," << csv_escape(e.what()) << '\n';
        continue;
      }
      for (const auto& [metric, value] : row) {
        csv << cl_phase << ',' << dim << ',' << metric << ',' << format_double(value) << '\n';
      }
      log << "cell cl_phase=" << cl_phase << " dim=" << dim << " done\n";
    }
  }
  if (o.out) {
    write_text(*o.out, csv.str());
  } else {
    out << csv.str();
  }
  if (failures) log << failures << " sweep cells failed\n";
  return kSuccess;
}

int cmd_export(const ExportOptions& o, std::ostream& log) {
  const auto ckpt = read_checkpoint(o.checkpoint);
  const std::string which = o.which.value_or(ckpt.dual() ? "pos" : "model");
  const auto table = export_table(ckpt, parse_export_which(which));
  if (o.out.has_parent_path()) fs::create_directories(o.out.parent_path());
  write_embeddings(o.out, table);
  log << "exported " << which << ": " << table.entities.rows() << " entities, " << table.relations.rows()
      << " relations, width " << table.entities.cols() << '\n';
  return kSuccess;
}

}  // namespace dualkge::cli
