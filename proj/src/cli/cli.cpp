#include <fstream>
#include <iostream>
#include <set>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dualkge/checkpoint.hpp"
#include "dualkge/cli.hpp"
#include "dualkge/error.hpp"

namespace dualkge::cli {

namespace {

/// Accepts either a JSON object (e.g. a resolved config.json) or key=value lines.
class JsonOrIniConfig : public CLI::ConfigBase {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    const std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream ini(text);
      return CLI::ConfigBase::from_config(ini);
    }
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw CLI::ConversionError("config file is not a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      } else if (value.is_string()) {
        item.inputs.push_back(value.get<std::string>());
      } else if (value.is_object() || value.is_null()) {
        continue;
      } else {
        item.inputs.push_back(value.dump());
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

struct TrainFlags {
  std::string kind = "TransE";
  int norm = 1;
  bool complex_no_conj = false;
  std::size_t dim = 50;
  std::size_t epochs = 400;
  std::size_t batches = 100;
  std::size_t neg_rate = 1;
  std::size_t cl_phase = 350;
  std::optional<double> learning_rate;
  std::optional<std::string> optimizer;
  double margin = 1.0;
  double reg_lambda = 1e-5;
  std::uint64_t seed = 0;
  std::size_t pool_size = 0;
  bool normalize_entities = false;
  std::size_t regen_interval = 1;
  std::size_t threads = 1;

  void add_to(CLI::App& app) {
    app.add_option("--kind", kind, "TransE, DistMult or ComplEx")->capture_default_str();
    app.add_option("--norm", norm, "TransE norm order (1 or 2)")->capture_default_str();
    app.add_flag("--complex-no-conj", complex_no_conj, "ComplEx: score Re(<h,r,t>) without conjugating the tail");
    app.add_option("--dim", dim, "Embedding dimension per model (baselines use twice this)")->capture_default_str();
    app.add_option("--epochs", epochs)->capture_default_str();
    app.add_option("--batches", batches, "Mini-batches per epoch")->capture_default_str();
    app.add_option("--neg-rate", neg_rate, "Entity negatives per positive (only 1 is supported)")->capture_default_str();
    app.add_option("--cl-phase", cl_phase, "Contrastive sampling starts after this epoch")->capture_default_str();
    app.add_option("--learning-rate", learning_rate, "Default: 0.01 for TransE, 0.1 otherwise");
    app.add_option("--optimizer", optimizer, "sgd or adagrad (default: sgd for TransE, adagrad otherwise)");
    app.add_option("--margin", margin, "TransE ranking margin")->capture_default_str();
    app.add_option("--reg-lambda", reg_lambda, "L2 weight for DistMult/ComplEx")->capture_default_str();
    app.add_option("--seed", seed)->capture_default_str();
    app.add_option("--pool-size", pool_size, "Contrastive candidate subsample size (0 = all entities)")
        ->capture_default_str();
    app.add_flag("--normalize-entities", normalize_entities, "TransE: clamp entity rows to the unit ball each epoch");
    app.add_option("--regen-interval", regen_interval, "Rebuild contrastive negatives every N epochs")
        ->capture_default_str();
    threads = default_threads();
    app.add_option("--threads", threads, "Worker threads (env DUALKGE_THREADS)")->capture_default_str();
  }

  TrainConfig resolve() const {
    TrainConfig cfg;
    const ModelFamily family = parse_family(kind);
    cfg.kind = {family, norm, !complex_no_conj};
    cfg.dim = dim;
    cfg.epochs = epochs;
    cfg.n_batches = batches;
    cfg.neg_rate = neg_rate;
    cfg.cl_phase = cl_phase;
    cfg.learning_rate = learning_rate;
    if (optimizer) cfg.optimizer = parse_optimizer(*optimizer);
    cfg.margin = margin;
    cfg.reg_lambda = reg_lambda;
    cfg.seed = seed;
    cfg.pool_size = {pool_size};
    cfg.normalize_entities = normalize_entities;
    cfg.regen_interval = regen_interval;
    cfg.threads = threads;
    return cfg;
  }
};

struct ForestFlags {
  std::size_t trees = 100;
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  std::size_t features_per_split = 0;

  void add_to(CLI::App& app) {
    app.add_option("--trees", trees, "Random forest size")->capture_default_str();
    app.add_option("--max-depth", max_depth, "Tree depth limit (default: unlimited)");
    app.add_option("--min-samples-split", min_samples_split)->capture_default_str();
    app.add_option("--features-per-split", features_per_split, "0 = ceil(sqrt(n_features))")->capture_default_str();
  }

  ForestConfig resolve(std::uint64_t seed) const {
    ForestConfig cfg;
    cfg.n_trees = trees;
    cfg.max_depth = max_depth;
    cfg.min_samples_split = min_samples_split;
    cfg.features_per_split = features_per_split;
    cfg.seed = seed;
    return cfg;
  }
};

void with_config(CLI::App& app) {
  app.add_option("--config", "key=value or JSON file of flag values; explicit flags win")->type_name("FILE");
}

std::string flag_name(const std::string& token) {
  if (token.rfind("--", 0) != 0) return {};
  return token.substr(2, token.find('=') - 2);
}

// CLI11 only reads config files attached to the root app, so a subcommand's
// --config is spliced into the argument list here. Flags given explicitly win.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (sub == nullptr) return args;
  std::string path;
  std::set<std::string> explicit_names;
  for (std::size_t i = 1; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      if (auto name = flag_name(args[i]); !name.empty()) explicit_names.insert(name);
      ++i;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  for (const auto& item : JsonOrIniConfig().from_config(in)) {
    if (explicit_names.contains(item.name)) continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + item.name);
    if (opt == nullptr) continue;
    if (opt->get_expected_min() == 0) {
      const std::string v = item.inputs.empty() ? "true" : item.inputs.front();
      if (v == "true" || v == "1" || v == "on" || v == "yes") args.push_back("--" + item.name);
      continue;
    }
    args.push_back("--" + item.name);
    args.insert(args.end(), item.inputs.begin(), item.inputs.end());
  }
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual positive/negative knowledge graph embedding toolkit", "dualkge"};
  app.require_subcommand(1);

  BuildDatasetOptions build;
  auto* build_cmd = app.add_subcommand("build-dataset", "Filter positives by negative (head, relation) pairs and split");
  build_cmd->add_option("--pos", build.pos_path, "Positive triples TSV")->required();
  build_cmd->add_option("--neg", build.neg_path, "Negative triples TSV")->required();
  build_cmd->add_option("--out-dir", build.out_dir)->required();
  build_cmd->add_option("--test-fraction", build.test_fraction)->capture_default_str();
  build_cmd->add_option("--seed", build.seed)->capture_default_str();
  with_config(*build_cmd);

  TrainOptions train;
  TrainFlags train_flags;
  std::string train_neg;
  std::string train_checkpoint;
  auto* train_cmd = app.add_subcommand("train", "Train dual or baseline models");
  train_cmd->add_option("--train-pos", train.train_pos, "Positive training triples TSV")->required();
  train_cmd->add_option("--train-neg", train_neg, "Negative training triples TSV");
  train_cmd->add_option("--mode", train.mode, "dual, baseline-pos or baseline-neg")->capture_default_str();
  train_cmd->add_option("--out-dir", train.out_dir, "Receives checkpoint, loss.csv and config.json")->required();
  train_cmd->add_option("--checkpoint", train_checkpoint, "Checkpoint path (default: <out-dir>/checkpoint.dkge)");
  train_flags.add_to(*train_cmd);
  with_config(*train_cmd);

  EvalOptions eval;
  ForestFlags eval_forest;
  std::vector<std::string> eval_checkpoints;
  std::string eval_test, eval_train, eval_types, eval_pairs, eval_repr, eval_out, eval_norm_csv;
  std::size_t eval_expect_types = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints: lp, sem, tc or cluster");
  eval_cmd->add_option("--checkpoint", eval_checkpoints, "Checkpoint(s); tc and cluster accept several")->required();
  eval_cmd->add_option("--task", eval.task, "lp, sem, tc or cluster")->required();
  eval_cmd->add_option("--test", eval_test, "Held-out positive triples");
  eval_cmd->add_option("--train", eval_train, "Training positives (filtered setting)");
  eval_cmd->add_option("--types", eval_types, "Entity type map TSV");
  eval_cmd->add_option("--pairs", eval_pairs, "Labelled entity pairs TSV");
  eval_cmd->add_option("--repr", eval_repr, "pos, neg, concat or model");
  eval_cmd->add_option("--ks", eval.ks, "Hits@K cut-offs")->capture_default_str()->delimiter(',');
  eval_cmd->add_option("--sem-k", eval.sem_ks, "Sem@K cut-offs")->capture_default_str()->delimiter(',');
  eval_cmd->add_flag("--tie-mean", eval.tie_mean, "Mean rank over ties instead of optimistic");
  eval_cmd->add_flag("--filter-train-only", eval.filter_train_only, "Filter only training triples");
  eval_cmd->add_flag("--sem-raw", eval.sem_raw, "Unfiltered Sem@K candidate pool");
  eval_cmd->add_flag("--auc-from-labels", eval.auc_from_labels, "AUC from predicted labels, not vote fractions");
  eval_cmd->add_option("--folds", eval.folds)->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed)->capture_default_str();
  eval_cmd->add_option("--expect-types", eval_expect_types, "cluster: required number of distinct types");
  eval_cmd->add_option("--out", eval_out, "Report path (default: stdout)");
  eval_cmd->add_option("--normalized-csv", eval_norm_csv, "cluster: min-max normalised metric table");
  eval.threads = default_threads();
  eval_cmd->add_option("--threads", eval.threads)->capture_default_str();
  eval_forest.add_to(*eval_cmd);
  with_config(*eval_cmd);

  SweepOptions sweep;
  TrainFlags sweep_flags;
  ForestFlags sweep_forest;
  std::string sweep_test, sweep_pairs, sweep_types, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate a (cl_phase, dim) grid");
  sweep_cmd->add_option("--train-pos", sweep.train_pos)->required();
  sweep_cmd->add_option("--train-neg", sweep.train_neg)->required();
  sweep_cmd->add_option("--test", sweep_test, "Held-out positives for link prediction metrics");
  sweep_cmd->add_option("--pairs", sweep_pairs, "Labelled pairs for triple classification metrics");
  sweep_cmd->add_option("--types", sweep_types, "Type map for clustering metrics");
  sweep_cmd->add_option("--cl-phases", sweep.cl_phases)->capture_default_str()->delimiter(',');
  sweep_cmd->add_option("--dims", sweep.dims)->capture_default_str()->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: stdout)");
  sweep_flags.add_to(*sweep_cmd);
  sweep_forest.add_to(*sweep_cmd);
  with_config(*sweep_cmd);

  ExportOptions exp;
  std::string export_which;
  auto* export_cmd = app.add_subcommand("export", "Write embeddings as TSV");
  export_cmd->add_option("--checkpoint", exp.checkpoint)->required();
  export_cmd->add_option("--out", exp.out)->required();
  export_cmd->add_option("--which", export_which, "pos, neg, concat (dual) or model (baseline)");
  with_config(*export_cmd);

  try {
    const auto expanded = expand_config(app, std::vector<std::string>(args.begin() + (args.empty() ? 0 : 1), args.end()));
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  auto opt_path = [](const std::string& s) -> std::optional<fs::path> {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
  };

  try {
    if (*build_cmd) return cmd_build_dataset(build, err);
    if (*train_cmd) {
      train.train_neg = opt_path(train_neg);
      train.checkpoint = opt_path(train_checkpoint);
      train.config = train_flags.resolve();
      return cmd_train(train, err);
    }
    if (*eval_cmd) {
      for (const auto& c : eval_checkpoints) eval.checkpoints.emplace_back(c);
      eval.test = opt_path(eval_test);
      eval.train = opt_path(eval_train);
      eval.types = opt_path(eval_types);
      eval.pairs = opt_path(eval_pairs);
      if (!eval_repr.empty()) eval.repr = eval_repr;
      eval.out = opt_path(eval_out);
      eval.normalized_csv = opt_path(eval_norm_csv);
      if (eval_cmd->count("--expect-types")) eval.expect_types = eval_expect_types;
      eval.forest = eval_forest.resolve(eval.seed);
      return cmd_eval(eval, out, err);
    }
    if (*sweep_cmd) {
      sweep.test = opt_path(sweep_test);
      sweep.pairs = opt_path(sweep_pairs);
      sweep.types = opt_path(sweep_types);
      sweep.out = opt_path(sweep_out);
      sweep.config = sweep_flags.resolve();
      sweep.forest = sweep_forest.resolve(sweep.config.seed);
      return cmd_sweep(sweep, out, err);
    }
    if (*export_cmd) {
      if (!export_which.empty()) exp.which = export_which;
      return cmd_export(exp, err);
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace dualkge::cli
