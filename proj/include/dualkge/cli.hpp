#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dualkge/forest.hpp"
#include "dualkge/trainer.hpp"

namespace dualkge::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kRuntimeError = 3,
};

namespace fs = std::filesystem;

struct BuildDatasetOptions {
  fs::path pos_path;
  fs::path neg_path;
  fs::path out_dir;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct TrainOptions {
  fs::path train_pos;
  std::optional<fs::path> train_neg;
  std::string mode = "dual";
  fs::path out_dir;
  std::optional<fs::path> checkpoint;
  TrainConfig config;
};

struct EvalOptions {
  std::vector<fs::path> checkpoints;
  std::string task;  // lp | sem | tc | cluster
  std::optional<fs::path> test;
  std::optional<fs::path> train;
  std::optional<fs::path> types;
  std::optional<fs::path> pairs;
  std::optional<std::string> repr;
  std::vector<std::size_t> ks{1, 10};
  std::vector<std::size_t> sem_ks{1};
  bool tie_mean = false;
  bool filter_train_only = false;
  bool sem_raw = false;
  bool auc_from_labels = false;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  ForestConfig forest;
  std::optional<std::size_t> expect_types;
  std::optional<fs::path> out;
  std::optional<fs::path> normalized_csv;
  std::size_t threads = 1;
};

struct SweepOptions {
  fs::path train_pos;
  fs::path train_neg;
  std::optional<fs::path> test;
  std::optional<fs::path> pairs;
  std::optional<fs::path> types;
  std::vector<std::size_t> cl_phases{100, 150, 200, 250, 300, 350};
  std::vector<std::size_t> dims{20, 30, 40, 50};
  TrainConfig config;
  ForestConfig forest;
  std::optional<fs::path> out;
};

struct ExportOptions {
  fs::path checkpoint;
  fs::path out;
  std::optional<std::string> which;
};

/// Each command writes human-readable progress to `log` and returns an ExitCode.
/// Library exceptions propagate; run() maps them to exit codes.
int cmd_build_dataset(const BuildDatasetOptions& options, std::ostream& log);
int cmd_train(const TrainOptions& options, std::ostream& log);
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& log);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& log);
int cmd_export(const ExportOptions& options, std::ostream& log);

/// Default worker count: DUALKGE_THREADS if set, else hardware concurrency.
std::size_t default_threads();

/// Full command-line entry point (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualkge::cli
