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
// Linear-model checkpoints: weights.rten (K x features), bias.rten (K) and a
// manifest.json describing how the model was produced.
#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "robustmix/augment.hpp"
#include "robustmix/error.hpp"
#include "robustmix/tensor_io.hpp"
#include "robustmix/toy.hpp"

namespace robustmix::checkpoint {

inline constexpr std::string_view kFormat = "robustmix-linear-1";

/// Provenance stored next to the tensors. `image` is the H,W,C shape the
/// model expects; its product equals the feature count.
struct Manifest {
  Dims image;
  std::string policy = "baseline";
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double tau = 0.0;
  toy::SyntheticSpec spec;
  toy::TrainConfig train;
};

inline nlohmann::json to_json(const Manifest& m, const toy::LinearModel& model) {
  const auto& s = m.spec;
  return {
      {"format", kFormat},
      {"classes", model.classes},
      {"features", model.features},
      {"image", m.image},
      {"policy", m.policy},
      {"seed", m.seed},
      {"alpha", m.alpha},
      {"tau", m.tau},
      {"spec",
       {{"image_size", s.image_size},
        {"classes", s.classes},
        {"signal_cutoff", s.signal_cutoff},
        {"distractor_cutoff", s.distractor_cutoff},
        {"distractor_amplitude", s.distractor_amplitude},
        {"coefficient_amplitude", s.coefficient_amplitude},
        {"background", s.background},
        {"noise_std", s.noise_std},
        {"train_size", s.train_size},
        {"test_size", s.test_size},
        {"seed", s.seed}}},
      {"train",
       {{"epochs", m.train.epochs}, {"learning_rate", m.train.learning_rate}, {"batch_size", m.train.batch_size}}},
  };
}

inline void save(const std::filesystem::path& dir, const toy::LinearModel& model, const Manifest& manifest) {
  if (element_count(manifest.image) != model.features) {
    throw Error(ErrorCode::ShapeMismatch, "manifest image " + dims_to_string(manifest.image) + " does not match " +
                                              std::to_string(model.features) + " features");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  write_tensor(Tensor({model.classes, model.features}, model.weights), dir / "weights.rten");
  write_tensor(Tensor({model.classes}, model.bias), dir / "bias.rten");
  std::ofstream out(dir / "manifest.json");
  out << to_json(manifest, model).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + (dir / "manifest.json").string());
}

struct Loaded {
  toy::LinearModel model;
  Manifest manifest;
};

inline Loaded load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + (dir / "manifest.json").string());
  Loaded out;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorCode::UnsupportedFormat, "unknown checkpoint format");
    }
    Manifest& m = out.manifest;
    m.image = j.at("image").get<Dims>();
    m.policy = j.at("policy").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.alpha = j.at("alpha").get<double>();
    m.tau = j.at("tau").get<double>();
    const auto& s = j.at("spec");
    m.spec.image_size = s.at("image_size").get<std::size_t>();
    m.spec.classes = s.at("classes").get<std::size_t>();
    m.spec.signal_cutoff = s.at("signal_cutoff").get<double>();
    m.spec.distractor_cutoff = s.at("distractor_cutoff").get<double>();
    m.spec.distractor_amplitude = s.at("distractor_amplitude").get<double>();
    m.spec.coefficient_amplitude = s.at("coefficient_amplitude").get<double>();
    m.spec.background = s.at("background").get<double>();
    m.spec.noise_std = s.at("noise_std").get<double>();
    m.spec.train_size = s.at("train_size").get<std::size_t>();
    m.spec.test_size = s.at("test_size").get<std::size_t>();
    m.spec.seed = s.at("seed").get<std::uint64_t>();
    const auto& t = j.at("train");
    m.train.epochs = t.at("epochs").get<std::size_t>();
    m.train.learning_rate = t.at("learning_rate").get<double>();
    m.train.batch_size = t.at("batch_size").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("bad manifest: ") + e.what());
  }
  const Tensor w = read_tensor(dir / "weights.rten");
  const Tensor b = read_tensor(dir / "bias.rten");
  if (w.rank() != 2 || b.rank() != 1 || b.dim(0) != w.dim(0) || w.dim(1) != element_count(out.manifest.image)) {
    throw Error(ErrorCode::ShapeMismatch, "checkpoint tensors " + dims_to_string(w.dims()) + " and " +
                                              dims_to_string(b.dims()) + " disagree with the manifest");
  }
  out.model = toy::LinearModel(w.dim(0), w.dim(1));
  out.model.weights = w.values();
  out.model.bias = b.values();
  return out;
}

}  // namespace robustmix::checkpoint
