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
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "robustmix/csv.hpp"
#include "robustmix/dct.hpp"
#include "robustmix/error.hpp"
#include "robustmix/freq_filter.hpp"
#include "robustmix/tensor.hpp"

namespace robustmix {

// ---------------------------------------------------------------------------
// Corruption error

/// CE for one corruption, in percent: 100 * Σ_s model_s / Σ_s ref_s.
inline double corruption_error(std::span<const double> model_errors, std::span<const double> ref_errors) {
  if (model_errors.size() != ref_errors.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(model_errors.size()) + " model severities vs " +
                                               std::to_string(ref_errors.size()) + " reference severities");
  }
  double model = 0.0;
  double ref = 0.0;
  for (std::size_t s = 0; s < model_errors.size(); ++s) {
    model += model_errors[s];
    ref += ref_errors[s];
  }
  if (!(ref > 0.0)) throw Error(ErrorCode::ZeroReference, "reference errors sum to zero");
  return 100.0 * model / ref;
}

/// Per-corruption, per-severity error rates for a model and the reference model.
struct CorruptionTable {
  struct Row {
    std::string corruption;
    std::vector<double> model_errors;  // index s-1 holds severity s
    std::vector<double> ref_errors;
  };
  std::vector<Row> rows;

  void validate() const {
    for (const Row& r : rows) {
      if (r.model_errors.size() != r.ref_errors.size() || r.model_errors.empty()) {
        throw Error(ErrorCode::LengthMismatch, "corruption '" + r.corruption + "' has unmatched severities");
      }
      for (double e : r.ref_errors) {
        if (!(e > 0.0)) throw Error(ErrorCode::ZeroReference, "non-positive reference error in '" + r.corruption + "'");
      }
    }
  }
};

/// Unweighted mean of CE over corruptions, in percent.
inline double mean_corruption_error(const CorruptionTable& table) {
  if (table.rows.empty()) throw Error(ErrorCode::EmptyTable, "no corruptions in table");
  table.validate();
  double sum = 0.0;
  for (const auto& r : table.rows) sum += corruption_error(r.model_errors, r.ref_errors);
  return sum / static_cast<double>(table.rows.size());
}

inline constexpr std::string_view kCorruptionCsvHeader = "corruption,severity,model_error,ref_error";

/// Parses `corruption,severity,model_error,ref_error` rows. Corruptions keep
/// first-appearance order; severities must run 1..S without gaps.
inline CorruptionTable parse_corruption_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim_eol(line) != kCorruptionCsvHeader) {
    throw Error(ErrorCode::MalformedCsv, "expected header '" + std::string(kCorruptionCsvHeader) + "'");
  }
  std::vector<std::string> order;
  std::map<std::string, std::map<long, std::pair<double, double>>> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = csv::trim_eol(line);
    if (trimmed.empty()) continue;
    const auto f = csv::split(trimmed);
    if (f.size() != 4 || f[0].empty()) {
      throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": expected 4 fields");
    }
    const double sev = csv::parse_number(f[1]);
    const double model = csv::parse_number(f[2]);
    const double ref = csv::parse_number(f[3]);
    if (sev < 1.0 || sev != std::floor(sev)) {
      throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": bad severity");
    }
    if (!(model >= 0.0 && model <= 1.0) || !(ref >= 0.0 && ref <= 1.0)) {
      throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": errors must lie in [0,1]");
    }
    const std::string name(f[0]);
    if (!cells.contains(name)) order.push_back(name);
    if (!cells[name].emplace(static_cast<long>(sev), std::pair{model, ref}).second) {
      throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": duplicate severity");
    }
  }
  CorruptionTable table;
  for (const auto& name : order) {
    CorruptionTable::Row row{name, {}, {}};
    long expected = 1;
    for (const auto& [sev, errs] : cells[name]) {
      if (sev != expected++) throw Error(ErrorCode::MalformedCsv, "severities of '" + name + "' have a gap");
      row.model_errors.push_back(errs.first);
      row.ref_errors.push_back(errs.second);
    }
    table.rows.push_back(std::move(row));
  }
  table.validate();
  return table;
}

inline void write_corruption_table(const CorruptionTable& table, std::ostream& out) {
  out << kCorruptionCsvHeader << '\n';
  for (const auto& r : table.rows) {
    for (std::size_t s = 0; s < r.model_errors.size(); ++s) {
      out << r.corruption << ',' << s + 1 << ',' << csv::format_number(r.model_errors[s]) << ','
          << csv::format_number(r.ref_errors[s]) << '\n';
    }
  }
}

inline CorruptionTable read_corruption_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return parse_corruption_table(in);
}

// ---------------------------------------------------------------------------
// Shape bias

/// correct_shape / (correct_shape + correct_texture).
inline double shape_bias(std::size_t correct_shape, std::size_t correct_texture) {
  if (correct_shape + correct_texture == 0) {
    throw Error(ErrorCode::NoCorrectDecisions, "no shape or texture decisions were correct");
  }
  return static_cast<double>(correct_shape) / static_cast<double>(correct_shape + correct_texture);
}

// ---------------------------------------------------------------------------
// Curves

/// (cutoff, value) series written as CSV `cutoff,value`.
struct Curve {
  std::vector<double> cutoffs;
  std::vector<double> values;
};

/// Cumulative low-band energy fraction per cutoff.
struct EnergyCurve : Curve {};

/// Accuracy on low-passed inputs per cutoff.
struct SweepCurve : Curve {};

inline void write_curve(const Curve& curve, std::ostream& out) {
  out << "cutoff,value\n";
  for (std::size_t i = 0; i < curve.cutoffs.size(); ++i) {
    out << csv::format_number(curve.cutoffs[i]) << ',' << csv::format_number(curve.values[i]) << '\n';
  }
}

inline Curve parse_curve(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim_eol(line) != "cutoff,value") {
    throw Error(ErrorCode::MalformedCsv, "expected header 'cutoff,value'");
  }
  Curve curve;
  while (std::getline(in, line)) {
    const auto trimmed = csv::trim_eol(line);
    if (trimmed.empty()) continue;
    const auto f = csv::split(trimmed);
    if (f.size() != 2) throw Error(ErrorCode::MalformedCsv, "expected 2 fields in '" + std::string(trimmed) + "'");
    curve.cutoffs.push_back(csv::parse_number(f[0]));
    curve.values.push_back(csv::parse_number(f[1]));
  }
  return curve;
}

inline void check_cutoff_list(std::span<const double> cutoffs) {
  if (cutoffs.empty()) throw Error(ErrorCode::InvalidArgument, "empty cutoff list");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    check_cutoff(cutoffs[i]);
    if (i > 0 && !(cutoffs[i] > cutoffs[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "cutoffs must be strictly increasing");
    }
  }
}

/// Parses "0,0.25,0.5" or an arithmetic progression written "0,0.1,...,1".
inline std::vector<double> parse_cutoff_list(std::string_view text) {
  const auto fields = csv::split(text);
  std::vector<double> out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] != "...") {
      out.push_back(csv::parse_number(fields[i]));
      continue;
    }
    if (out.size() < 2 || i + 1 != fields.size() - 1) {
      throw Error(ErrorCode::InvalidArgument, "'...' needs two leading values and one final value");
    }
    const double start = out[out.size() - 2];
    const double step = out.back() - start;
    const double last = csv::parse_number(fields[i + 1]);
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "progression step must be positive");
    out.resize(out.size() - 2);
    for (std::size_t j = 0;; ++j) {
      double v = start + step * static_cast<double>(j);
      if (v > last + 1e-9 * step) break;
      if (std::abs(v - last) <= 1e-9 * step) v = last;
      out.push_back(v);
    }
    if (out.back() != last) out.push_back(last);
    break;
  }
  check_cutoff_list(out);
  return out;
}

/// Cumulative spectral energy of a corpus:
///   value(c) = Σ_i ‖Low(x_i, c)‖² / Σ_i ‖x_i‖²
/// Each image is transformed once; fractions come from prefix sums of its
/// shell energies, so the curve is exactly monotone with exact endpoints.
inline EnergyCurve cumulative_energy_curve(std::span<const Tensor> corpus, std::span<const double> cutoffs,
                                           unsigned threads = 1) {
  if (corpus.empty()) throw Error(ErrorCode::InvalidArgument, "empty corpus");
  check_cutoff_list(cutoffs);
  std::map<std::size_t, DctPlan> plans;
  std::vector<std::vector<double>> prefix;  // prefix[i][k] = energy of image i kept at keep-count k
  prefix.reserve(corpus.size());
  for (const Tensor& image : corpus) {
    const std::size_t n = BatchShape::of(image).h;
    auto it = plans.find(n);
    if (it == plans.end()) it = plans.emplace(n, DctPlan(n)).first;
    const auto shells = shell_energies(image, it->second, threads);
    std::vector<double> p(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) p[j + 1] = p[j] + shells[j];
    prefix.push_back(std::move(p));
  }
  double total = 0.0;
  for (const auto& p : prefix) total += p.back();
  if (total <= kZeroEnergyThreshold) throw Error(ErrorCode::ZeroEnergyBatch, "corpus has no energy");

  EnergyCurve curve;
  for (double c : cutoffs) {
    double low = 0.0;
    for (const auto& p : prefix) low += p[BandMask::keep_count(p.size() - 1, c)];
    curve.cutoffs.push_back(c);
    curve.values.push_back(low / total);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Low-pass accuracy sweep

/// Maps an N,H,W,C batch to N,K class scores.
using Predictor = std::function<Tensor(const Tensor&)>;

/// Row-wise argmax; ties go to the lowest class index.
inline std::vector<std::size_t> argmax_rows(const Tensor& scores) {
  if (scores.rank() != 2) throw Error(ErrorCode::ShapeMismatch, "scores must be N,K");
  const std::size_t n = scores.dim(0);
  const std::size_t k = scores.dim(1);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (scores[i * k + j] > scores[i * k + best]) best = j;
    out[i] = best;
  }
  return out;
}

inline double accuracy(const Tensor& scores, std::span<const std::size_t> classes) {
  const auto pred = argmax_rows(scores);
  if (pred.size() != classes.size() || pred.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "predictions and labels differ in length");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == classes[i];
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

/// Accuracy of `model` on low_pass(images, c) for each cutoff.
inline SweepCurve lowpass_accuracy_sweep(const Predictor& model, const Tensor& images,
                                         std::span<const std::size_t> classes, std::span<const double> cutoffs,
                                         unsigned threads = 1) {
  check_cutoff_list(cutoffs);
  const BatchShape s = BatchShape::of(images);
  if (images.rank() != 4 || classes.size() != s.n) {
    throw Error(ErrorCode::ShapeMismatch, "sweep needs an N,H,W,C batch with N labels");
  }
  const DctPlan plan(s.h);
  SweepCurve curve;
  for (double c : cutoffs) {
    curve.cutoffs.push_back(c);
    curve.values.push_back(accuracy(model(low_pass(images, c, plan, threads)), classes));
  }
  return curve;
}

}  // namespace robustmix
