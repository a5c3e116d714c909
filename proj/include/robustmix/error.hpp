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

#include <stdexcept>
#include <string>
#include <string_view>

namespace robustmix {

enum class ErrorCode {
  // tensor-io
  MalformedHeader,
  TruncatedPayload,
  NonFiniteValue,
  IoFailure,
  UnsupportedFormat,
  MalformedImage,
  // transforms and filters
  InvalidSize,
  ShapeMismatch,
  CutoffOutOfRange,
  ZeroEnergyBatch,
  NonSquarePlane,
  // sampling
  InvalidAlpha,
  InvalidTau,
  // metrics
  MalformedCsv,
  LengthMismatch,
  ZeroReference,
  EmptyTable,
  NoCorrectDecisions,
  // toy trainer
  InvalidSpec,
  DivergedTraining,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::MalformedImage: return "MalformedImage";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::CutoffOutOfRange: return "CutoffOutOfRange";
    case ErrorCode::ZeroEnergyBatch: return "ZeroEnergyBatch";
    case ErrorCode::NonSquarePlane: return "NonSquarePlane";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InvalidTau: return "InvalidTau";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::NoCorrectDecisions: return "NoCorrectDecisions";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DivergedTraining: return "DivergedTraining";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Numeric failures, as opposed to bad input data. The CLI maps these to a
/// distinct exit code.
constexpr bool is_numeric_failure(ErrorCode code) noexcept {
  return code == ErrorCode::ZeroEnergyBatch || code == ErrorCode::DivergedTraining;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace robustmix
