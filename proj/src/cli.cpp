#include "rejfilt/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rejfilt/batched.hpp"
#include "rejfilt/classification.hpp"
#include "rejfilt/csv.hpp"
#include "rejfilt/errors.hpp"
#include "rejfilt/freq_experiment.hpp"
#include "rejfilt/mnist_idx.hpp"
#include "rejfilt/model_selection.hpp"
#include "rejfilt/parallel.hpp"
#include "rejfilt/rejection_filter.hpp"
#include "rejfilt/version.hpp"

namespace rejfilt {

namespace {

/// Bad parameter values that survive flag parsing; mapped to exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buffer[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

/// One manifest per run, written next to the primary output.
void write_manifest(const std::string& subcommand, const nlohmann::json& params,
                    std::uint64_t seed, const std::vector<std::string>& outputs,
                    double duration_seconds) {
  nlohmann::json manifest;
  manifest["subcommand"] = subcommand;
  manifest["parameters"] = params;
  manifest["master_seed"] = seed;
  manifest["library_version"] = kVersion;
  manifest["outputs"] = outputs;
  manifest["duration_seconds"] = duration_seconds;
  manifest["written_at"] = timestamp_utc();

  const std::string path = outputs.front() + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  out << manifest.dump(2) << '\n';
}

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// freq-track

struct FreqTrackOpts {
  std::int64_t updates = 200;
  std::int64_t attempts = 100;
  double recovery = 0.02;
  double kappa = 1.0;
  double eta = kDefaultStepSigma * kDefaultStepSigma;
  double step_sigma = kDefaultStepSigma;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_freq_track(const FreqTrackOpts& opts) {
  if (opts.updates < 1) throw UsageError("--updates must be >= 1");
  if (opts.attempts < 1) throw UsageError("--attempts must be >= 1");
  if (!(opts.kappa > 0.0 && opts.kappa <= 1.0)) throw UsageError("--kappa must lie in (0, 1]");
  if (!(opts.recovery >= 0.0)) throw UsageError("--recovery must be >= 0");
  if (!(opts.eta >= 0.0)) throw UsageError("--eta must be >= 0");
  if (opts.trials < 1) throw UsageError("--trials must be >= 1");

  Stopwatch watch;
  std::vector<TrackingResult> results(static_cast<std::size_t>(opts.trials));
  parallel_for(opts.trials, [&](std::int64_t trial) {
    TrackingConfig config;
    config.n_updates = opts.updates;
    config.attempts = opts.attempts;
    config.recovery_factor = opts.recovery;
    config.kappa = opts.kappa;
    config.eta = opts.eta;
    config.step_sigma = opts.step_sigma;
    config.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(trial));
    results[static_cast<std::size_t>(trial)] = run_tracking(config);
  });

  CsvWriter csv(opts.out, {"trial", "k", "x_minus", "t", "outcome", "n_accepted", "mean",
                           "trace_cov", "truth", "loss"});
  for (std::size_t trial = 0; trial < results.size(); ++trial) {
    for (const ExperimentRecord& rec : results[trial].records) {
      csv.row({format_number(static_cast<std::int64_t>(trial)), format_number(rec.k),
               format_number(rec.x_minus), format_number(rec.t),
               format_number(static_cast<std::int64_t>(rec.outcome)),
               format_number(rec.n_accepted), format_number(rec.mean),
               format_number(rec.trace_cov), format_number(rec.truth),
               format_number(rec.loss)});
    }
  }

  nlohmann::json params{{"updates", opts.updates},   {"attempts", opts.attempts},
                        {"recovery", opts.recovery}, {"kappa", opts.kappa},
                        {"eta", opts.eta},           {"step_sigma", opts.step_sigma},
                        {"trials", opts.trials},     {"seed", opts.seed},
                        {"out", opts.out}};
  write_manifest("freq-track", params, opts.seed, {opts.out}, watch.seconds());

  std::vector<double> terminal;
  terminal.reserve(results.size());
  for (const TrackingResult& r : results) terminal.push_back(r.records.back().loss);
  std::cout << "freq-track: " << opts.trials << " trial(s) x " << opts.updates
            << " updates, terminal median loss " << format_number(median(terminal)) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// kappa-sweep

struct KappaSweepOpts {
  std::vector<double> kappas{1.0, 0.67, 0.4, 0.1, 0.04, 0.01};
  std::int64_t measurements = 100;
  std::int64_t attempts = 100;
  double recovery = 0.02;
  std::int64_t trials = 200;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_kappa_sweep(const KappaSweepOpts& opts) {
  if (opts.kappas.empty()) throw UsageError("--kappas must list at least one value");
  for (const double kappa : opts.kappas) {
    if (!(kappa > 0.0 && kappa <= 1.0)) throw UsageError("--kappas values must lie in (0, 1]");
  }
  if (opts.measurements < 1) throw UsageError("--measurements must be >= 1");
  if (opts.attempts < 1) throw UsageError("--attempts must be >= 1");
  if (opts.trials < 1) throw UsageError("--trials must be >= 1");

  Stopwatch watch;
  const std::vector<KappaSweepRow> table = kappa_sweep(
      opts.kappas, opts.measurements, opts.attempts, opts.recovery, opts.trials, opts.seed);

  CsvWriter csv(opts.out, {"kappa", "normalized_median_loss", "median_initial_loss",
                           "median_final_loss", "trials"});
  for (const KappaSweepRow& row : table) {
    csv.row({format_number(row.kappa), format_number(row.normalized_median_loss),
             format_number(row.median_initial_loss), format_number(row.median_final_loss),
             format_number(opts.trials)});
    std::cout << "kappa " << format_number(row.kappa) << ": normalized median loss "
              << format_number(row.normalized_median_loss) << "\n";
  }

  nlohmann::json params{{"kappas", opts.kappas},   {"measurements", opts.measurements},
                        {"attempts", opts.attempts}, {"recovery", opts.recovery},
                        {"trials", opts.trials},   {"seed", opts.seed},
                        {"out", opts.out}};
  write_manifest("kappa-sweep", params, opts.seed, {opts.out}, watch.seconds());
  return 0;
}

// ---------------------------------------------------------------------------
// model-select

struct ModelSelectOpts {
  std::int64_t updates = 200;
  std::int64_t attempts = 100;
  double p_true = 0.75;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_model_select(const ModelSelectOpts& opts) {
  if (opts.updates < 1) throw UsageError("--updates must be >= 1");
  if (opts.attempts < 1) throw UsageError("--attempts must be >= 1");
  if (!(opts.p_true > 0.0 && opts.p_true < 1.0)) throw UsageError("--p-true must lie in (0, 1)");

  Stopwatch watch;
  const std::vector<TwoModelDemoRow> rows =
      run_two_model_demo(opts.updates, opts.attempts, opts.p_true, opts.seed);

  CsvWriter csv(opts.out, {"k", "ell_a", "ell_b", "bayes_factor"});
  for (const TwoModelDemoRow& row : rows) {
    csv.row({format_number(row.k), format_number(row.ell_a), format_number(row.ell_b),
             format_number(row.bayes)});
  }

  nlohmann::json params{{"updates", opts.updates},
                        {"attempts", opts.attempts},
                        {"p_true", opts.p_true},
                        {"seed", opts.seed},
                        {"out", opts.out}};
  write_manifest("model-select", params, opts.seed, {opts.out}, watch.seconds());
  std::cout << "model-select: final Bayes factor " << format_number(rows.back().bayes) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// batch-bench

struct BatchBenchOpts {
  std::int64_t attempts = 100000;
  std::vector<std::int64_t> batches{1, 2, 8};
  std::int64_t dim = 2;
  std::uint64_t seed = 0;
  std::string out;
};

/// Smooth unimodal bump with maximum 1, so kappa = 1 is tight.
class BumpLikelihood final : public LikelihoodModel<int> {
 public:
  explicit BumpLikelihood(Eigen::VectorXd center) : center_(std::move(center)) {}

  double evaluate(const int&, const Eigen::VectorXd& x) const override {
    return std::exp(-0.5 * (x - center_).squaredNorm());
  }

 private:
  Eigen::VectorXd center_;
};

int cmd_batch_bench(const BatchBenchOpts& opts) {
  if (opts.attempts < 1) throw UsageError("--attempts must be >= 1");
  if (opts.dim < 1) throw UsageError("--dim must be >= 1");
  if (opts.batches.empty()) throw UsageError("--batches must list at least one value");
  for (const std::int64_t b : opts.batches) {
    if (b < 1) throw UsageError("--batches values must be >= 1");
  }

  Stopwatch watch;
  const Eigen::Index d = opts.dim;
  Eigen::VectorXd center(d);
  for (Eigen::Index i = 0; i < d; ++i) center[i] = (i % 2 == 0) ? 0.5 : -0.3;
  const BumpLikelihood likelihood(center);
  const GaussianModel prior(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
  const std::vector<int> evidence{0};

  // Reference: single node over the same candidate space.
  const auto [ref_model, ref_accepted] = run_batched<int>(
      evidence, prior, likelihood, opts.attempts, 0.02, opts.seed, 1);

  CsvWriter csv(opts.out, {"n_batch", "wall_ms", "accumulator_bytes", "delta_mean", "delta_cov",
                           "n_accepted"});
  for (const std::int64_t n_batch : opts.batches) {
    const Stopwatch run_watch;
    std::vector<PartialUpdate> partials;
    const auto [model, accepted] = run_batched<int>(evidence, prior, likelihood, opts.attempts,
                                                    0.02, opts.seed, n_batch, &partials);
    const double wall_ms = run_watch.seconds() * 1e3;

    std::size_t bytes = 0;
    for (const PartialUpdate& p : partials) bytes += serialize_binary(p).size();
    const double delta_mean = (model.mean() - ref_model.mean()).cwiseAbs().maxCoeff();
    const double delta_cov =
        (model.covariance() - ref_model.covariance()).cwiseAbs().maxCoeff();

    csv.row({format_number(n_batch), format_number(wall_ms),
             format_number(static_cast<std::int64_t>(bytes)), format_number(delta_mean),
             format_number(delta_cov), format_number(accepted)});
    std::cout << "batch-bench: N_batch " << n_batch << " delta_mean "
              << format_number(delta_mean) << " delta_cov " << format_number(delta_cov)
              << "\n";
  }

  nlohmann::json params{{"attempts", opts.attempts},
                        {"batches", opts.batches},
                        {"dim", opts.dim},
                        {"seed", opts.seed},
                        {"out", opts.out}};
  write_manifest("batch-bench", params, opts.seed, {opts.out}, watch.seconds());
  (void)ref_accepted;
  return 0;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyOpts {
  std::vector<std::string> train;  // images,labels
  std::vector<std::string> test;   // images,labels
  std::string task = "zero-one";
  double stop = 0.001;
  int restarts = 3;
  std::int64_t budget = 784;
  std::int64_t capacity = 1000;
  std::int64_t limit = 0;  // 0 = all test vectors
  std::uint64_t seed = 0;
  std::string out;
  std::string histogram_out;
  std::string heatmap_out;
};

struct LabeledData {
  Eigen::MatrixXf features;
  std::vector<std::int32_t> labels;
};

LabeledData load_task_data(const std::string& images_path, const std::string& labels_path,
                           const std::string& task) {
  const Eigen::MatrixXf images = read_idx_images(images_path);
  const std::vector<std::int32_t> digits = read_idx_labels(labels_path);
  if (static_cast<Eigen::Index>(digits.size()) != images.rows()) {
    throw std::runtime_error("classify: image/label counts disagree");
  }

  LabeledData data;
  if (task == "even-odd") {
    data.features = images;
    data.labels.reserve(digits.size());
    for (const std::int32_t d : digits) data.labels.push_back(d % 2);
    return data;
  }

  // zero-one: restrict to the two digits.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < images.rows(); ++i) {
    const std::int32_t d = digits[static_cast<std::size_t>(i)];
    if (d == 0 || d == 1) keep.push_back(i);
  }
  data.features.resize(static_cast<Eigen::Index>(keep.size()), images.cols());
  data.labels.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    data.features.row(static_cast<Eigen::Index>(i)) = images.row(keep[i]);
    data.labels.push_back(digits[static_cast<std::size_t>(keep[i])]);
  }
  return data;
}

int cmd_classify(const ClassifyOpts& opts) {
  if (opts.train.size() != 2) throw UsageError("--train expects IMAGES,LABELS");
  if (opts.test.size() != 2) throw UsageError("--test expects IMAGES,LABELS");
  if (opts.task != "zero-one" && opts.task != "even-odd") {
    throw UsageError("--task must be zero-one or even-odd");
  }
  if (!(opts.stop > 0.0 && opts.stop < 0.5)) throw UsageError("--stop must lie in (0, 0.5)");
  if (opts.restarts < 1) throw UsageError("--restarts must be >= 1");
  if (opts.budget < opts.restarts) throw UsageError("--budget must be >= --restarts");
  if (opts.capacity < 1) throw UsageError("--capacity must be >= 1");
  if (opts.limit < 0) throw UsageError("--limit must be >= 0");

  Stopwatch watch;
  LabeledData train = load_task_data(opts.train[0], opts.train[1], opts.task);
  LabeledData test = load_task_data(opts.test[0], opts.test[1], opts.task);
  const Corpus corpus(std::move(train.features), std::move(train.labels));

  std::int64_t n_test = test.features.rows();
  if (opts.limit > 0 && opts.limit < n_test) n_test = opts.limit;

  ClassifyOptions options;
  options.stop_threshold = opts.stop;
  options.restarts = opts.restarts;
  options.budget = opts.budget;
  options.capacity = opts.capacity;

  std::vector<ClassifyOutcome> outcomes(static_cast<std::size_t>(n_test));
  parallel_for(n_test, [&](std::int64_t i) {
    RngStream rng(derive_seed(opts.seed, static_cast<std::uint64_t>(i)));
    const Eigen::Index row = static_cast<Eigen::Index>(i);
    const Eigen::VectorXf vec = test.features.row(row).transpose();
    outcomes[static_cast<std::size_t>(i)] =
        classify(std::span<const float>(vec.data(), static_cast<std::size_t>(vec.size())),
                 corpus, options, rng);
  });

  std::vector<std::int64_t> histogram(static_cast<std::size_t>(corpus.dim()), 0);
  std::int64_t correct = 0;
  CsvWriter csv(opts.out, {"index", "truth", "predicted", "queries"});
  for (std::int64_t i = 0; i < n_test; ++i) {
    const ClassifyOutcome& oc = outcomes[static_cast<std::size_t>(i)];
    const std::int32_t truth = test.labels[static_cast<std::size_t>(i)];
    if (oc.label == truth) ++correct;
    for (std::size_t f = 0; f < histogram.size(); ++f) histogram[f] += oc.histogram[f];
    csv.row({format_number(i), format_number(static_cast<std::int64_t>(truth)),
             format_number(static_cast<std::int64_t>(oc.label)), format_number(oc.queries)});
  }

  std::vector<std::string> outputs{opts.out};
  if (!opts.histogram_out.empty()) {
    CsvWriter hist_csv(opts.histogram_out, {"feature", "count"});
    for (std::size_t f = 0; f < histogram.size(); ++f) {
      hist_csv.row({format_number(static_cast<std::int64_t>(f)), format_number(histogram[f])});
    }
    outputs.push_back(opts.histogram_out);
  }
  if (!opts.heatmap_out.empty()) {
    const auto side = static_cast<Eigen::Index>(std::lround(std::sqrt(
        static_cast<double>(corpus.dim()))));
    if (side * side != corpus.dim()) {
      throw UsageError("--heatmap needs a square feature grid");
    }
    std::ofstream grid(opts.heatmap_out);
    if (!grid) throw std::runtime_error("cannot write " + opts.heatmap_out);
    for (Eigen::Index r = 0; r < side; ++r) {
      for (Eigen::Index c = 0; c < side; ++c) {
        if (c > 0) grid << ',';
        grid << histogram[static_cast<std::size_t>(r * side + c)];
      }
      grid << '\n';
    }
    outputs.push_back(opts.heatmap_out);
  }

  const double accuracy = static_cast<double>(correct) / static_cast<double>(n_test);
  nlohmann::json params{{"train", opts.train},       {"test", opts.test},
                        {"task", opts.task},         {"stop", opts.stop},
                        {"restarts", opts.restarts}, {"budget", opts.budget},
                        {"capacity", opts.capacity}, {"limit", opts.limit},
                        {"seed", opts.seed},         {"out", opts.out},
                        {"histogram", opts.histogram_out}, {"heatmap", opts.heatmap_out},
                        {"accuracy", accuracy},      {"n_test", n_test}};
  write_manifest("classify", params, opts.seed, outputs, watch.seconds());
  std::cout << "classify: " << n_test << " test vectors, accuracy " << format_number(accuracy)
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// feature-select

struct FeatureSelectOpts {
  std::string histogram;
  double percentile = 50.0;
  std::vector<double> table;
  std::string out;
};

std::vector<std::int64_t> read_histogram_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read histogram " + path);
  std::vector<std::int64_t> counts;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed histogram row: " + line);
    counts.push_back(std::stoll(line.substr(comma + 1)));
  }
  if (counts.empty()) throw std::runtime_error("histogram " + path + " has no rows");
  return counts;
}

int cmd_feature_select(const FeatureSelectOpts& opts) {
  Stopwatch watch;
  const std::vector<std::int64_t> counts = read_histogram_csv(opts.histogram);

  nlohmann::json params{{"histogram", opts.histogram}, {"out", opts.out}};
  if (!opts.table.empty()) {
    for (const double p : opts.table) {
      if (!(p >= 0.0 && p < 100.0)) throw UsageError("--table percentiles must lie in [0, 100)");
    }
    CsvWriter csv(opts.out, {"percentile", "n_features"});
    for (const double p : opts.table) {
      const auto retained = feature_select(counts, p);
      csv.row({format_number(p), format_number(static_cast<std::int64_t>(retained.size()))});
      std::cout << "percentile " << format_number(p) << " -> " << retained.size()
                << " features\n";
    }
    params["table"] = opts.table;
  } else {
    if (!(opts.percentile >= 0.0 && opts.percentile < 100.0)) {
      throw UsageError("--percentile must lie in [0, 100)");
    }
    const auto retained = feature_select(counts, opts.percentile);
    CsvWriter csv(opts.out, {"feature"});
    for (const Eigen::Index f : retained) {
      csv.row({format_number(static_cast<std::int64_t>(f))});
    }
    params["percentile"] = opts.percentile;
    std::cout << "percentile " << format_number(opts.percentile) << " -> " << retained.size()
              << " features\n";
  }

  write_manifest("feature-select", params, 0, {opts.out}, watch.seconds());
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"rejfilt: rejection-filtering inference experiments"};
  app.require_subcommand(1);

  FreqTrackOpts freq;
  CLI::App* freq_cmd = app.add_subcommand("freq-track", "Track a drifting frequency");
  freq_cmd->add_option("--updates", freq.updates, "Updates per trial");
  freq_cmd->add_option("--attempts", freq.attempts, "Rejection attempts m per update");
  freq_cmd->add_option("--recovery", freq.recovery, "Recovery factor r");
  freq_cmd->add_option("--kappa", freq.kappa, "Likelihood scale kappa_E");
  freq_cmd->add_option("--eta", freq.eta, "Diffusion rate eta");
  freq_cmd->add_option("--step-sigma", freq.step_sigma, "Truth walk step sigma");
  freq_cmd->add_option("--trials", freq.trials, "Independent trials");
  freq_cmd->add_option("--seed", freq.seed, "Master seed");
  freq_cmd->add_option("--out", freq.out, "Output CSV")->required();

  KappaSweepOpts sweep;
  CLI::App* sweep_cmd = app.add_subcommand("kappa-sweep", "Sensitivity to kappa_E");
  sweep_cmd->add_option("--kappas", sweep.kappas, "Comma-separated kappa values")
      ->delimiter(',');
  sweep_cmd->add_option("--measurements", sweep.measurements, "Measurements per trial");
  sweep_cmd->add_option("--attempts", sweep.attempts, "Rejection attempts m per update");
  sweep_cmd->add_option("--recovery", sweep.recovery, "Recovery factor r");
  sweep_cmd->add_option("--trials", sweep.trials, "Trials per kappa");
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed");
  sweep_cmd->add_option("--out", sweep.out, "Output CSV")->required();

  ModelSelectOpts select;
  CLI::App* select_cmd = app.add_subcommand("model-select", "Two-model Bayes-factor demo");
  select_cmd->add_option("--updates", select.updates, "Updates");
  select_cmd->add_option("--attempts", select.attempts, "Rejection attempts m per update");
  select_cmd->add_option("--p-true", select.p_true, "True Bernoulli parameter");
  select_cmd->add_option("--seed", select.seed, "Master seed");
  select_cmd->add_option("--out", select.out, "Output CSV")->required();

  BatchBenchOpts bench;
  CLI::App* bench_cmd = app.add_subcommand("batch-bench", "Batched-update benchmark");
  bench_cmd->add_option("--attempts", bench.attempts, "Total rejection attempts m");
  bench_cmd->add_option("--batches", bench.batches, "Comma-separated N_batch values")
      ->delimiter(',');
  bench_cmd->add_option("--dim", bench.dim, "Hypothesis dimension");
  bench_cmd->add_option("--seed", bench.seed, "Master seed");
  bench_cmd->add_option("--out", bench.out, "Output CSV")->required();

  ClassifyOpts cls;
  CLI::App* cls_cmd = app.add_subcommand("classify", "Active MNIST classification");
  cls_cmd->add_option("--train", cls.train, "Training IMAGES,LABELS (IDX)")
      ->delimiter(',')
      ->required();
  cls_cmd->add_option("--test", cls.test, "Test IMAGES,LABELS (IDX)")
      ->delimiter(',')
      ->required();
  cls_cmd->add_option("--task", cls.task, "zero-one or even-odd");
  cls_cmd->add_option("--stop", cls.stop, "Stop threshold");
  cls_cmd->add_option("--restarts", cls.restarts, "Session restarts");
  cls_cmd->add_option("--budget", cls.budget, "Total query budget");
  cls_cmd->add_option("--capacity", cls.capacity, "Particle cloud capacity");
  cls_cmd->add_option("--limit", cls.limit, "Classify only the first N test vectors");
  cls_cmd->add_option("--seed", cls.seed, "Master seed");
  cls_cmd->add_option("--out", cls.out, "Results CSV")->required();
  cls_cmd->add_option("--histogram", cls.histogram_out, "Per-feature query-count CSV");
  cls_cmd->add_option("--heatmap", cls.heatmap_out, "Square query-frequency grid CSV");

  FeatureSelectOpts fsel;
  CLI::App* fsel_cmd = app.add_subcommand("feature-select", "Cull features by query frequency");
  fsel_cmd->add_option("--histogram", fsel.histogram, "Histogram CSV from classify")
      ->required();
  fsel_cmd->add_option("--percentile", fsel.percentile, "Retention percentile");
  fsel_cmd->add_option("--table", fsel.table, "Comma-separated percentiles for a size table")
      ->delimiter(',');
  fsel_cmd->add_option("--out", fsel.out, "Output CSV")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("rejfilt");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(freq_cmd)) return cmd_freq_track(freq);
    if (app.got_subcommand(sweep_cmd)) return cmd_kappa_sweep(sweep);
    if (app.got_subcommand(select_cmd)) return cmd_model_select(select);
    if (app.got_subcommand(bench_cmd)) return cmd_batch_bench(bench);
    if (app.got_subcommand(cls_cmd)) return cmd_classify(cls);
    if (app.got_subcommand(fsel_cmd)) return cmd_feature_select(fsel);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rejfilt
