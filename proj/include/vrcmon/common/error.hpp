/*
 * Copyright 2026 The vrcmon Authors
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

namespace vrcmon {

/// Error categories shared by every module of the toolchain.
enum class Errc {
  // dataflow-model
  XmlSyntax,
  SchemaViolation,
  SemanticError,
  // merger
  IdentityConflict,
  EmptyInput,
  UnknownConfig,
  // vrc-device
  OutOfRange,
  ReadOnlyRegister,
  BadState,
  Deadlock,
  Timeout,
  // driver-gen
  SizeMismatch,
  ValueRange,
  // papify-core
  BaseAddressMismatch,
  CountMismatch,
  UnknownComponent,
  DuplicatePe,
  UnknownEvent,
  UnbalancedStart,
  UnbalancedStop,
  UnboundPe,
  IoError,
  // runtime
  Unsatisfiable,
  RateMismatch,
  ActorFailure,
  // edgedetect-ref
  TooSmall,
  NotDivisible,
  InvalidArgument,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string &detail() const noexcept { return detail_; }

private:
  Errc code_;
  std::string detail_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
  case Errc::XmlSyntax: return "XmlSyntax";
  case Errc::SchemaViolation: return "SchemaViolation";
  case Errc::SemanticError: return "SemanticError";
  case Errc::IdentityConflict: return "IdentityConflict";
  case Errc::EmptyInput: return "EmptyInput";
  case Errc::UnknownConfig: return "UnknownConfig";
  case Errc::OutOfRange: return "OutOfRange";
  case Errc::ReadOnlyRegister: return "ReadOnlyRegister";
  case Errc::BadState: return "BadState";
  case Errc::Deadlock: return "Deadlock";
  case Errc::Timeout: return "Timeout";
  case Errc::SizeMismatch: return "SizeMismatch";
  case Errc::ValueRange: return "ValueRange";
  case Errc::BaseAddressMismatch: return "BaseAddressMismatch";
  case Errc::CountMismatch: return "CountMismatch";
  case Errc::UnknownComponent: return "UnknownComponent";
  case Errc::DuplicatePe: return "DuplicatePe";
  case Errc::UnknownEvent: return "UnknownEvent";
  case Errc::UnbalancedStart: return "UnbalancedStart";
  case Errc::UnbalancedStop: return "UnbalancedStop";
  case Errc::UnboundPe: return "UnboundPe";
  case Errc::IoError: return "IoError";
  case Errc::Unsatisfiable: return "Unsatisfiable";
  case Errc::RateMismatch: return "RateMismatch";
  case Errc::ActorFailure: return "ActorFailure";
  case Errc::TooSmall: return "TooSmall";
  case Errc::NotDivisible: return "NotDivisible";
  case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

} // namespace vrcmon
