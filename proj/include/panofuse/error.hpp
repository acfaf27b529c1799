// Copyright 2026 The panofuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PANOFUSE_ERROR_HPP_
#define PANOFUSE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace panofuse
{

enum class Errc {
  kBehindCamera,
  kEmptySet,
  kIndexOutOfRange,
  kSpecMismatch,
  kInsufficientInstances,
  kNoValidProjection,
  kDimensionMismatch,
  kMissingLabels,
  kEmptyColumn,
  kLengthMismatch,
  kUnknownCommand,
  kBadConfig,
  kIoError,
  kBadMagic,
  kTruncatedFile,
  kShapeMismatch,
  kInvalidArgument,
};

inline const char * errc_name(Errc code)
{
  switch (code) {
    case Errc::kBehindCamera: return "BehindCamera";
    case Errc::kEmptySet: return "EmptySet";
    case Errc::kIndexOutOfRange: return "IndexOutOfRange";
    case Errc::kSpecMismatch: return "SpecMismatch";
    case Errc::kInsufficientInstances: return "InsufficientInstances";
    case Errc::kNoValidProjection: return "NoValidProjection";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kMissingLabels: return "MissingLabels";
    case Errc::kEmptyColumn: return "EmptyColumn";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kUnknownCommand: return "UnknownCommand";
    case Errc::kBadConfig: return "BadConfig";
    case Errc::kIoError: return "IoError";
    case Errc::kBadMagic: return "BadMagic";
    case Errc::kTruncatedFile: return "TruncatedFile";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// All library failures surface as this exception; code() names the failure.
class Error : public std::runtime_error
{
public:
  Error(Errc code, const std::string & detail)
  : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code)
  {
  }

  Errc code() const noexcept { return code_; }
  const char * name() const noexcept { return errc_name(code_); }

private:
  Errc code_;
};

}  // namespace panofuse

#endif  // PANOFUSE_ERROR_HPP_
