// Copyright 2026 The wxforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace wxforge {

/// Domain error carrying a machine-readable kind such as "io-error" or
/// "level-out-of-range". The CLI prints these as `error:<kind>:<message>`.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

namespace errc {
inline constexpr const char* kIo = "io-error";
inline constexpr const char* kDecode = "decode-error";
inline constexpr const char* kChannel = "channel-error";
inline constexpr const char* kDimensionMismatch = "dimension-mismatch";
inline constexpr const char* kInvalidArgument = "invalid-argument";
inline constexpr const char* kDegenerate = "degenerate-configuration";
inline constexpr const char* kMissingSkyRole = "missing-sky-role";
inline constexpr const char* kMissingRoadRole = "missing-road-role";
inline constexpr const char* kMissingDepth = "missing-depth";
inline constexpr const char* kUnknownFamily = "unknown-family";
inline constexpr const char* kLevelOutOfRange = "level-out-of-range";
inline constexpr const char* kInvalidParams = "invalid-params";
inline constexpr const char* kUnknownPreset = "unknown-preset";
inline constexpr const char* kParse = "parse-error";
inline constexpr const char* kEmptyInput = "empty-input";
inline constexpr const char* kMissingLabel = "missing-label";
inline constexpr const char* kInvalidData = "invalid-data";
inline constexpr const char* kFormat = "format-error";
inline constexpr const char* kTruncation = "truncation-error";
inline constexpr const char* kProcessFailure = "process-failure";
inline constexpr const char* kInsufficientSamples = "insufficient-samples";
inline constexpr const char* kNonPsd = "non-psd-covariance";
inline constexpr const char* kNegativeDistance = "negative-distance";
inline constexpr const char* kZeroDenominator = "zero-denominator";
inline constexpr const char* kUnknownTrigger = "unknown-trigger";
inline constexpr const char* kSpaceTagMismatch = "space-tag-mismatch";
inline constexpr const char* kLengthMismatch = "length-mismatch";
inline constexpr const char* kConstantSeries = "constant-series";
inline constexpr const char* kUnknownColumn = "unknown-column";
}  // namespace errc

}  // namespace wxforge
