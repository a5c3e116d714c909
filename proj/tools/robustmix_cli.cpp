/*
 * Copyright 2026 The Robustmix Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// robustmix command-line tool.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "robustmix/augment.hpp"
#include "robustmix/checkpoint.hpp"
#include "robustmix/csv.hpp"
#include "robustmix/dct.hpp"
#include "robustmix/metrics.hpp"
#include "robustmix/parallel.hpp"
#include "robustmix/tensor_io.hpp"
#include "robustmix/toy.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace robustmix::cli {
namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

int exit_code_for(ErrorCode code) {
  if (is_numeric_failure(code)) return kNumeric;
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidAlpha:
    case ErrorCode::InvalidTau:
    case ErrorCode::CutoffOutOfRange:
    case ErrorCode::InvalidSpec:
      return kUsage;
    default:
      return kData;
  }
}

std::uint64_t default_seed() {
  const char* env = std::getenv("ROBUSTMIX_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw Error(ErrorCode::InvalidArgument, "ROBUSTMIX_SEED is not an unsigned integer");
  return v;
}

/// Writes `body` to `path`, or to stdout when the path is empty or "-".
template <class F>
void emit(const std::string& path, F&& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  body(out);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
}

std::vector<std::size_t> classes_from_labels(const Tensor& labels, std::size_t n) {
  if (labels.rank() == 2 && labels.dim(0) == n) return argmax_rows(labels);
  if (labels.rank() == 1 && labels.dim(0) == n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float v = labels[i];
      if (v < 0.0f || v != static_cast<float>(static_cast<std::size_t>(v))) {
        throw Error(ErrorCode::ShapeMismatch, "class indices must be non-negative integers");
      }
      out[i] = static_cast<std::size_t>(v);
    }
    return out;
  }
  throw Error(ErrorCode::ShapeMismatch, "labels " + dims_to_string(labels.dims()) + " do not match " +
                                            std::to_string(n) + " images");
}

json curve_json(const Curve& c) { return {{"cutoffs", c.cutoffs}, {"values", c.values}}; }

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string policy = "robustmix";
  double alpha = 0.2;
  double tau = 0.0;
  std::string pairing = "reverse";
  std::string in, labels, out_images, out_labels;
};

int run_augment(const Common& common, const AugmentArgs& a) {
  AugmentConfig cfg;
  cfg.policy = parse_policy(a.policy);
  cfg.alpha = a.alpha;
  cfg.tau = a.tau;
  cfg.seed = common.seed;
  cfg.threads = common.threads;
  cfg.pairing = a.pairing == "random" ? Pairing::RandomPermutation : Pairing::Reverse;
  const Tensor images = read_tensor(a.in);
  const Tensor labels = read_tensor(a.labels);
  Rng rng(common.seed);
  const MixedBatch out = augment_batch(images, labels, cfg, rng);
  write_tensor(out.images, a.out_images);
  write_tensor(out.labels, a.out_labels);
  const json draw = {{"policy", a.policy},
                     {"seed", common.seed},
                     {"lambda_low", out.draw.lambda_low},
                     {"lambda_high", out.draw.lambda_high},
                     {"cutoff", out.draw.cutoff},
                     {"energy_weight", out.draw.energy_weight}};
  std::cout << draw.dump() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct SpectrumArgs {
  std::string corpus;
  std::string cutoffs = "0,0.05,...,1";
  std::string out;
};

int run_spectrum(const Common& common, const SpectrumArgs& a) {
  const auto cutoffs = parse_cutoff_list(a.cutoffs);
  std::vector<Tensor> corpus;
  if (fs::is_directory(a.corpus)) {
    corpus = read_image_directory(a.corpus);
  } else {
    corpus.push_back(read_tensor(a.corpus));
  }
  const EnergyCurve curve = cumulative_energy_curve(corpus, cutoffs, common.threads);
  emit(a.out, [&](std::ostream& os) { write_curve(curve, os); });
  return kOk;
}

// ---------------------------------------------------------------------------

struct LowpassArgs {
  std::string model, in, labels;
  std::string cutoffs = "0,0.125,...,1";
  std::string out;
};

int run_lowpass(const Common& common, const LowpassArgs& a) {
  const auto cutoffs = parse_cutoff_list(a.cutoffs);
  const checkpoint::Loaded ckpt = checkpoint::load(a.model);
  const Tensor images = read_tensor(a.in);
  const auto classes = classes_from_labels(read_tensor(a.labels), images.rank() == 4 ? images.dim(0) : 0);
  const Predictor predict = [&](const Tensor& x) { return ckpt.model.scores(x); };
  const SweepCurve curve = lowpass_accuracy_sweep(predict, images, classes, cutoffs, common.threads);
  emit(a.out, [&](std::ostream& os) { write_curve(curve, os); });
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainDemoArgs {
  std::string policies = "baseline,mixup,robustmix,robustmix_no_energy_weight";
  std::size_t seeds = 5;
  double alpha = 0.3;
  double tau = 0.0;
  toy::SyntheticSpec spec;
  toy::TrainConfig train;
  std::string cutoffs = "0,0.125,...,1";
  std::string out_dir;
};

int run_train_demo(const Common& common, const TrainDemoArgs& a) {
  toy::ExperimentConfig cfg;
  cfg.spec = a.spec;
  cfg.train = a.train;
  cfg.alpha = a.alpha;
  cfg.tau = a.tau;
  cfg.threads = common.threads;
  cfg.sweep_cutoffs = parse_cutoff_list(a.cutoffs);
  cfg.policies.clear();
  for (auto name : csv::split(a.policies)) cfg.policies.push_back(parse_policy(name));
  if (a.seeds == 0) throw Error(ErrorCode::InvalidArgument, "--seeds must be at least 1");
  cfg.seeds.clear();
  for (std::size_t i = 1; i <= a.seeds; ++i) cfg.seeds.push_back(common.seed + i);

  const auto outcomes = toy::run_experiment(cfg);

  json summary = {{"alpha", cfg.alpha}, {"tau", cfg.tau}, {"seeds", cfg.seeds}, {"policies", json::array()}};
  for (const auto& o : outcomes) {
    summary["policies"].push_back({{"policy", to_string(o.policy)},
                                   {"test_accuracy", o.test_accuracy},
                                   {"mean_accuracy", o.mean_accuracy()},
                                   {"std_accuracy", o.std_accuracy()},
                                   {"sweep", curve_json(o.mean_sweep())}});
  }

  if (!a.out_dir.empty()) {
    const fs::path root(a.out_dir);
    fs::create_directories(root);
    std::ofstream(root / "summary.json") << summary.dump(2) << '\n';
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      toy::SyntheticSpec spec = cfg.spec;
      spec.seed = cfg.seeds[s];
      Rng data_rng(cfg.seeds[s]);
      const toy::Dataset data = toy::generate_synthetic_dataset(spec, data_rng);
      const fs::path data_dir = root / "data" / ("seed" + std::to_string(cfg.seeds[s]));
      fs::create_directories(data_dir);
      write_tensor(data.test.images, data_dir / "test_images.rten");
      write_tensor(data.test.labels, data_dir / "test_labels.rten");
      for (const auto& o : outcomes) {
        checkpoint::Manifest m;
        m.image = {spec.image_size, spec.image_size, 1};
        m.policy = std::string(to_string(o.policy));
        m.seed = cfg.seeds[s];
        m.alpha = cfg.alpha;
        m.tau = cfg.tau;
        m.spec = spec;
        m.train = cfg.train;
        checkpoint::save(root / m.policy / ("seed" + std::to_string(m.seed)), o.models[s], m);
      }
    }
    for (const auto& o : outcomes) {
      std::ofstream out(root / ("sweep_" + std::string(to_string(o.policy)) + ".csv"));
      write_curve(o.mean_sweep(), out);
    }
  }

  std::cout << "policy,mean_accuracy,std_accuracy\n";
  for (const auto& o : outcomes) {
    std::cout << to_string(o.policy) << ',' << csv::format_number(o.mean_accuracy()) << ','
              << csv::format_number(o.std_accuracy()) << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int run_mce(const std::string& table_path) {
  const CorruptionTable table = read_corruption_table(table_path);
  std::cout << "corruption,ce\n";
  for (const auto& r : table.rows) {
    std::cout << r.corruption << ',' << csv::format_number(corruption_error(r.model_errors, r.ref_errors)) << '\n';
  }
  std::cout << "mCE," << csv::format_number(mean_corruption_error(table)) << '\n';
  return kOk;
}

int run_shape_bias(std::size_t shape, std::size_t texture) {
  std::cout << "shape_bias," << csv::format_number(shape_bias(shape, texture)) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::size_t size = 224;
  std::size_t channels = 3;
  std::size_t batch = 8;
  std::size_t repeats = 3;
};

int run_bench(const Common& common, const BenchArgs& a) {
  if (a.size == 0 || a.channels == 0 || a.batch == 0 || a.repeats == 0) {
    throw Error(ErrorCode::InvalidArgument, "bench sizes must be positive");
  }
  Rng data_rng(common.seed);
  Tensor images({a.batch, a.size, a.size, a.channels});
  for (float& v : images.data()) v = static_cast<float>(data_rng.uniform());
  Tensor labels({a.batch, 2});
  for (std::size_t i = 0; i < a.batch; ++i) labels[i * 2 + i % 2] = 1.0f;
  AugmentConfig cfg;
  cfg.threads = common.threads;
  const DctPlan plan(a.size);
  Rng rng(common.seed);
  // Warm-up pass so the timed loop does not include first-touch costs.
  (void)robustmix_batch(images, labels, cfg, rng, {}, &plan);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t r = 0; r < a.repeats; ++r) (void)robustmix_batch(images, labels, cfg, rng, {}, &plan);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double per_image = seconds / static_cast<double>(a.repeats * a.batch);
  const std::uint64_t flops = flop_estimate(a.size, a.size, a.channels);
  const json report = {
      {"height", a.size},
      {"width", a.size},
      {"channels", a.channels},
      {"batch", a.batch},
      {"repeats", a.repeats},
      {"threads", common.threads},
      {"flop_estimate", flops},
      {"gflop_per_image", static_cast<double>(flops) / 1e9},
      {"seconds", seconds},
      {"seconds_per_image", per_image},
      {"images_per_second", 1.0 / per_image},
      {"measured_gmac_per_second", static_cast<double>(flops) / per_image / 1e9},
  };
  std::cout << report.dump(2) << '\n';
  return kOk;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"Frequency-band Mixup augmentation and robustness measurement tools"};
  app.require_subcommand(1);
  // Global flags may follow the subcommand name.
  app.fallthrough();
  Common common;
  try {
    common.seed = default_seed();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  common.threads = default_thread_count();
  app.add_option("--seed", common.seed, "RNG seed (default: $ROBUSTMIX_SEED or 0)");
  app.add_option("--threads", common.threads, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "Augment one batch of N,H,W,C images and N,K labels");
  augment->add_option("--policy", aug.policy, "baseline | mixup | robustmix | robustmix_no_energy_weight | "
                                              "robustmix_no_inband_mix")
      ->capture_default_str();
  augment->add_option("--alpha", aug.alpha, "Beta(alpha, alpha) parameter")->capture_default_str();
  augment->add_option("--tau", aug.tau, "Minimum cutoff")->capture_default_str();
  augment->add_option("--pairing", aug.pairing, "reverse | random")
      ->check(CLI::IsMember({"reverse", "random"}))
      ->capture_default_str();
  augment->add_option("--in", aug.in, "Input images (.rten)")->required();
  augment->add_option("--labels", aug.labels, "Input labels (.rten)")->required();
  augment->add_option("--out-images", aug.out_images, "Output images (.rten)")->required();
  augment->add_option("--out-labels", aug.out_labels, "Output labels (.rten)")->required();

  SpectrumArgs spec;
  auto* spectrum = app.add_subcommand("spectrum", "Cumulative low-band energy of an image corpus (CSV)");
  spectrum->add_option("--corpus", spec.corpus, "Directory of .pgm/.ppm images, or one .rten tensor")->required();
  spectrum->add_option("--cutoffs", spec.cutoffs, "Cutoff list, e.g. 0,0.1,...,1")->capture_default_str();
  spectrum->add_option("--out", spec.out, "Output CSV (default: stdout)");

  LowpassArgs lp;
  auto* lowpass = app.add_subcommand("lowpass-eval", "Accuracy of a checkpoint on low-passed inputs (CSV)");
  lowpass->add_option("--model", lp.model, "Checkpoint directory")->required();
  lowpass->add_option("--in", lp.in, "Images N,H,W,C (.rten)")->required();
  lowpass->add_option("--labels", lp.labels, "Labels: N,K scores/one-hot or N class indices (.rten)")->required();
  lowpass->add_option("--cutoffs", lp.cutoffs, "Cutoff list")->capture_default_str();
  lowpass->add_option("--out", lp.out, "Output CSV (default: stdout)");

  TrainDemoArgs td;
  auto* train_demo = app.add_subcommand("train-demo", "Train the toy linear model under each policy");
  train_demo->add_option("--policies", td.policies, "Comma-separated policies")->capture_default_str();
  train_demo->add_option("--seeds", td.seeds, "Number of seeds; seed k uses --seed + k")->capture_default_str();
  train_demo->add_option("--alpha", td.alpha)->capture_default_str();
  train_demo->add_option("--tau", td.tau)->capture_default_str();
  train_demo->add_option("--epochs", td.train.epochs)->capture_default_str();
  train_demo->add_option("--lr", td.train.learning_rate)->capture_default_str();
  train_demo->add_option("--batch-size", td.train.batch_size)->capture_default_str();
  train_demo->add_option("--image-size", td.spec.image_size)->capture_default_str();
  train_demo->add_option("--classes", td.spec.classes)->capture_default_str();
  train_demo->add_option("--train-size", td.spec.train_size)->capture_default_str();
  train_demo->add_option("--test-size", td.spec.test_size)->capture_default_str();
  train_demo->add_option("--noise", td.spec.noise_std)->capture_default_str();
  train_demo->add_option("--distractor-amplitude", td.spec.distractor_amplitude)->capture_default_str();
  train_demo->add_option("--cutoffs", td.cutoffs, "Low-pass sweep cutoffs")->capture_default_str();
  train_demo->add_option("--out-dir", td.out_dir, "Write summary, sweeps, checkpoints and test data here");

  std::string table;
  auto* mce = app.add_subcommand("mce", "Mean corruption error from a per-severity CSV table");
  mce->add_option("--table", table, "CSV: corruption,severity,model_error,ref_error")->required();

  std::size_t shape = 0, texture = 0;
  auto* sb = app.add_subcommand("shape-bias", "Shape bias from cue-conflict decision counts");
  sb->add_option("--shape", shape, "Decisions matching the shape label")->required();
  sb->add_option("--texture", texture, "Decisions matching the texture label")->required();

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time Robustmix against the matrix-product cost model (JSON)");
  bench->add_option("--size", bench_args.size, "Square image size")->capture_default_str();
  bench->add_option("--channels", bench_args.channels)->capture_default_str();
  bench->add_option("--batch", bench_args.batch)->capture_default_str();
  bench->add_option("--repeats", bench_args.repeats)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*augment) return run_augment(common, aug);
    if (*spectrum) return run_spectrum(common, spec);
    if (*lowpass) return run_lowpass(common, lp);
    if (*train_demo) return run_train_demo(common, td);
    if (*mce) return run_mce(table);
    if (*sb) return run_shape_bias(shape, texture);
    if (*bench) return run_bench(common, bench_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace
}  // namespace robustmix::cli

int main(int argc, char** argv) { return robustmix::cli::main_impl(argc, argv); }
