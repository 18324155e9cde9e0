#pragma once

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bvqa/harness/config.hpp"
#include "bvqa/harness/model.hpp"

namespace bvqa::harness {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr const char* kLogHeader = "epoch,split,srcc,plcc,mapped_plcc,loss";
inline constexpr const char* kLogFile = "epochs.csv";
inline constexpr const char* kCompareHeader = "variant,srcc,plcc,mapped_plcc";

struct Metrics {
  std::size_t n = 0;
  double srcc = kNaN;
  double plcc = kNaN;
  double mapped_plcc = kNaN;
  double loss = kNaN;
};

/// Metrics of predictions against MOS. Undefined values become NaN: fewer
/// than 2 items, constant inputs, or (for the 4PL mapping) fewer than 5.
/// A non-converged 4PL fit reports its best iterate. Loss is clamped at 0.
Metrics score_metrics(std::span<const double> predictions, std::span<const double> mos,
                      double alpha, double tau);

struct EpochRecord {
  std::size_t epoch = 0;
  data::Split split = data::Split::Train;
  Metrics metrics;
};

/// One CSV row, numbers printed with %.8f.
std::string format_record(const EpochRecord& record);

struct Corpus {
  std::vector<data::ManifestRecord> records;
  data::SplitAssignment assignment;
  std::vector<VideoClip> clips(data::Split split) const;
  std::filesystem::path root;
};

Corpus open_corpus(const RunConfig& config);

/// Writes the synthetic corpus to config.corpus; returns the manifest path.
std::filesystem::path cmd_synth(const RunConfig& config, std::ostream& out);

struct TrainResult {
  std::filesystem::path log_path;
  std::filesystem::path params_path;
  std::vector<EpochRecord> records;
  std::vector<double> pretrain_trace;  // empty for spatial2d
};

/// Pretraining (sharpness2d only), minibatch SGD on the combined loss,
/// train and val rows per epoch and one test row at the end. Writes
/// <out>/epochs.csv and the params file.
TrainResult cmd_train(const RunConfig& config, std::ostream& progress);

struct EvalResult {
  data::Split split = data::Split::Test;
  Metrics metrics;
  std::vector<std::string> ids;
  std::vector<double> predictions;
  std::vector<double> mos;
};

/// Loads the params file and scores one split. Undefined correlations are
/// errors here. Writes <out>/eval_<split>.csv and <out>/scores_<split>.csv.
EvalResult cmd_eval(const RunConfig& config, std::ostream& out);

struct ComparisonRow {
  extract::Variant variant;
  Metrics test;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;  // spatial2d, sharpness2d
  std::string table;
};

/// Criteria as rows, variants as columns, with reference values as a footnote.
std::string format_comparison(const std::vector<ComparisonRow>& rows);

/// Trains both 2D variants under the same config into <out>/<variant>/ and
/// writes <out>/compare.csv and <out>/compare.txt.
ComparisonReport cmd_compare(const RunConfig& config, std::ostream& out);

}  // namespace bvqa::harness
