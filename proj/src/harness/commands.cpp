#include "bvqa/harness/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "bvqa/dataset/rng.hpp"
#include "bvqa/dataset/synth.hpp"
#include "bvqa/extractors/pretrain.hpp"
#include "bvqa/objectives/correlation.hpp"
#include "bvqa/objectives/logistic.hpp"
#include "bvqa/objectives/losses.hpp"
#include "bvqa/tensorkit/optim.hpp"

namespace bvqa::harness {

namespace fs = std::filesystem;
using data::Split;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8f", v);
  return buf;
}

std::vector<double> mos_of(std::span<const PreparedClip> clips) {
  std::vector<double> out;
  for (const auto& c : clips) out.push_back(*c.clip.mos);
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": cannot create directory: " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

// Shuffled index batches; a trailing single item joins the previous batch.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   data::Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n; i += batch_size) {
    batches.emplace_back(order.begin() + std::ptrdiff_t(i),
                         order.begin() + std::ptrdiff_t(std::min(n, i + batch_size)));
  }
  if (batches.size() > 1 && batches.back().size() < 2) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

}  // namespace

Metrics score_metrics(std::span<const double> predictions, std::span<const double> mos,
                      double alpha, double tau) {
  Metrics m;
  m.n = predictions.size();
  if (m.n < 2) return m;
  try { m.srcc = quality::srcc(predictions, mos); } catch (const quality::DegenerateInputError&) {}
  try { m.plcc = quality::plcc(predictions, mos); } catch (const quality::DegenerateInputError&) {}
  if (m.n >= 5) {
    try {
      m.mapped_plcc = quality::fit_logistic4(predictions, mos).mapped_plcc;
    } catch (const quality::LogisticFitError& e) {
      m.mapped_plcc = e.best().mapped_plcc;
    } catch (const quality::DegenerateInputError&) {
    }
  }
  try {
    NoGradGuard no_grad;
    const Tensor pred(Shape{m.n}, {predictions.begin(), predictions.end()});
    m.loss = std::max(0.0, quality::total_loss(pred, mos, alpha, tau).item());
  } catch (const quality::DegenerateInputError&) {
  }
  return m;
}

std::string format_record(const EpochRecord& r) {
  std::ostringstream os;
  os << r.epoch << ',' << data::split_name(r.split) << ',' << num(r.metrics.srcc) << ','
     << num(r.metrics.plcc) << ',' << num(r.metrics.mapped_plcc) << ',' << num(r.metrics.loss);
  return os.str();
}

std::vector<VideoClip> Corpus::clips(Split split) const {
  std::vector<VideoClip> out;
  for (const auto& r : assignment.select(records, split)) out.push_back(data::read_frames(root, r));
  return out;
}

Corpus open_corpus(const RunConfig& config) {
  Corpus c;
  c.root = config.corpus;
  c.records = data::load_manifest(c.root / data::kManifestFile);
  c.assignment = data::split(c.records, config.ratios, config.seed);
  return c;
}

fs::path cmd_synth(const RunConfig& config, std::ostream& out) {
  data::SynthOptions opt;
  opt.n_clips = config.clips;
  opt.frames = config.frames;
  opt.size = config.size;
  opt.seed = config.seed;
  opt.kinds = config.kinds;
  data::synth_corpus(config.corpus, opt);
  const fs::path manifest = fs::path(config.corpus) / data::kManifestFile;
  out << manifest.string() << "\n";
  return manifest;
}

TrainResult cmd_train(const RunConfig& config, std::ostream& progress) {
  config.validate();
  const Corpus corpus = open_corpus(config);
  Model model = build_model(config.variant, config.scale, config.seed);
  const fs::path out_dir = config.out;
  ensure_dir(out_dir);
  TrainResult result;

  auto train = prepare_clips(model, corpus.clips(Split::Train));
  auto val = prepare_clips(model, corpus.clips(Split::Val));
  auto test = prepare_clips(model, corpus.clips(Split::Test));
  if (train.size() < 2) throw std::invalid_argument("cmd_train: need at least 2 training clips");

  if (config.variant == extract::Variant::Sharpness2d) {
    extract::set_freeze(model.frame.params, extract::last_residual_stages(model.frame.spec, 2));
    const std::size_t size = train.front().clip.height();
    const auto stills = data::synth_stills(config.pretrain_images, size,
                                           data::derive_seed(config.seed, "pretrain_stills"),
                                           config.kinds);
    auto pre = extract::pretrain_sharpness(model.frame.spec, model.frame.params, stills,
                                           config.pretrain_epochs, config.pretrain_lr,
                                           data::derive_seed(config.seed, "pretrain"));
    model.frame.params = std::move(pre.params);
    // The quality head starts as the pretrained regressor on the sharpness
    // slice, with zero motion weights.
    {
      auto w = model.head.weight.mutable_data();
      std::fill(w.begin(), w.end(), 0.0);
      std::copy(pre.head_weight.data().begin(), pre.head_weight.data().end(), w.begin());
      model.head.bias.mutable_data()[0] = pre.head_bias;
    }
    result.pretrain_trace = std::move(pre.loss_trace);
    std::ofstream trace = open_out(out_dir / "pretrain.csv");
    trace << "epoch,mse\n";
    for (std::size_t e = 0; e < result.pretrain_trace.size(); ++e) {
      trace << e << ',' << num(result.pretrain_trace[e]) << '\n';
    }
    progress << "pretrain: mse " << num(result.pretrain_trace.front()) << " -> "
             << num(result.pretrain_trace.back()) << "\n";
  }

  result.log_path = out_dir / kLogFile;
  result.params_path = config.params_path();
  std::ofstream log = open_out(result.log_path);
  log << kLogHeader << '\n';
  auto emit = [&](std::size_t epoch, Split split, std::span<const PreparedClip> clips) {
    const auto preds = predict_all(model, clips);
    const auto mos = mos_of(clips);
    EpochRecord rec{epoch, split, score_metrics(preds, mos, config.alpha, config.tau)};
    log << format_record(rec) << '\n';
    log.flush();
    result.records.push_back(rec);
    return rec;
  };

  const std::vector<Tensor> params = model.trainable();
  const auto train_mos = mos_of(train);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    data::Rng rng(data::derive_seed(config.seed, "batches", epoch));
    const auto batches = make_batches(train.size(), config.batch_size, rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      try {
        std::vector<const PreparedClip*> items;
        std::vector<double> mos;
        for (std::size_t i : batches[b]) {
          items.push_back(&train[i]);
          mos.push_back(train_mos[i]);
        }
        zero_grads(params);
        const Tensor loss =
            quality::total_loss(predict_scores(model, items), mos, config.alpha, config.tau);
        loss.backward();
        sgd_step(params, config.lr);
      } catch (const std::exception& e) {
        throw std::runtime_error("epoch " + std::to_string(epoch) + ", batch " +
                                 std::to_string(b + 1) + ": " + e.what());
      }
    }
    const auto tr = emit(epoch, Split::Train, train);
    const auto va = emit(epoch, Split::Val, val);
    progress << "epoch " << epoch << ": train srcc " << num(tr.metrics.srcc) << " loss "
             << num(tr.metrics.loss) << ", val srcc " << num(va.metrics.srcc) << "\n";
  }
  const auto te = emit(config.epochs, Split::Test, test);
  progress << "test: srcc " << num(te.metrics.srcc) << " plcc " << num(te.metrics.plcc) << "\n";

  save_params(result.params_path, model);
  return result;
}

EvalResult cmd_eval(const RunConfig& config, std::ostream& out) {
  const Corpus corpus = open_corpus(config);
  Model model = build_model(config.variant, config.scale, config.seed);
  load_params(config.params_path(), model);
  const auto clips = prepare_clips(model, corpus.clips(config.split));

  EvalResult r;
  r.split = config.split;
  for (const auto& c : clips) r.ids.push_back(c.clip.id);
  r.predictions = predict_all(model, clips);
  r.mos = mos_of(clips);
  // Undefined correlations surface as errors here.
  quality::srcc(r.predictions, r.mos);
  quality::plcc(r.predictions, r.mos);
  r.metrics = score_metrics(r.predictions, r.mos, config.alpha, config.tau);

  const fs::path out_dir = config.out;
  ensure_dir(out_dir);
  const std::string name = data::split_name(r.split);
  {
    std::ofstream f = open_out(out_dir / ("eval_" + name + ".csv"));
    f << "split,n,srcc,plcc,mapped_plcc\n"
      << name << ',' << r.metrics.n << ',' << num(r.metrics.srcc) << ',' << num(r.metrics.plcc)
      << ',' << num(r.metrics.mapped_plcc) << '\n';
  }
  {
    std::ofstream f = open_out(out_dir / ("scores_" + name + ".csv"));
    f << "id,prediction,mos\n";
    char buf[96];
    for (std::size_t i = 0; i < r.ids.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", r.predictions[i], r.mos[i]);
      f << r.ids[i] << buf;
    }
  }
  out << "split=" << name << " n=" << r.metrics.n << " srcc=" << num(r.metrics.srcc)
      << " plcc=" << num(r.metrics.plcc) << " mapped_plcc=" << num(r.metrics.mapped_plcc) << "\n";
  return r;
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  const ComparisonRow* original = nullptr;
  const ComparisonRow* modified = nullptr;
  for (const auto& r : rows) {
    if (r.variant == extract::Variant::Spatial2d) original = &r;
    if (r.variant == extract::Variant::Sharpness2d) modified = &r;
  }
  if (!original || !modified) throw std::invalid_argument("format_comparison: need both variants");
  char buf[256];
  std::ostringstream os;
  os << "Criteria Comparison (test split)\n";
  std::snprintf(buf, sizeof buf, "%-12s %16s %16s\n", "Criterion", "Original BVQA", "Modified BVQA");
  os << buf;
  std::snprintf(buf, sizeof buf, "%-12s %16s %16s\n", "", "(spatial2d)", "(sharpness2d)");
  os << buf;
  std::snprintf(buf, sizeof buf, "%-12s %16.4f %16.4f\n", "SRCC", original->test.srcc,
                modified->test.srcc);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-12s %16.4f %16.4f\n", "PLCC", original->test.plcc,
                modified->test.plcc);
  os << buf;
  os << "\nReference values from the original study (context only, not targets):\n"
     << "  Original BVQA  SRCC 0.9     PLCC 0.9133\n"
     << "  Modified BVQA  SRCC 0.8954  PLCC 0.8788\n";
  return os.str();
}

ComparisonReport cmd_compare(const RunConfig& config, std::ostream& out) {
  config.validate();
  ComparisonReport report;
  for (auto variant : {extract::Variant::Spatial2d, extract::Variant::Sharpness2d}) {
    RunConfig run = config;
    run.variant = variant;
    run.out = (fs::path(config.out) / extract::variant_name(variant)).string();
    run.params.clear();
    out << "== " << extract::variant_name(variant) << "\n";
    const TrainResult tr = cmd_train(run, out);
    report.rows.push_back({variant, tr.records.back().metrics});
  }
  report.table = format_comparison(report.rows);

  const fs::path out_dir = config.out;
  {
    std::ofstream f = open_out(out_dir / "compare.csv");
    f << kCompareHeader << '\n';
    for (const auto& r : report.rows) {
      f << extract::variant_name(r.variant) << ',' << num(r.test.srcc) << ',' << num(r.test.plcc)
        << ',' << num(r.test.mapped_plcc) << '\n';
    }
  }
  open_out(out_dir / "compare.txt") << report.table;
  out << report.table;
  return report;
}

}  // namespace bvqa::harness
