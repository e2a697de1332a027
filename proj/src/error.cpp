/* Copyright 2026 The Spiketrum Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "spiketrum/error.hpp"

namespace spiketrum {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kLengthTooSmall: return "LengthTooSmall";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kShiftOutOfRange: return "ShiftOutOfRange";
    case ErrorKind::kInvalidCenters: return "InvalidCenters";
    case ErrorKind::kZeroIntensity: return "ZeroIntensity";
    case ErrorKind::kCodeOutOfBounds: return "CodeOutOfBounds";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::kCorruptFile: return "CorruptFile";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kDegenerateData: return "DegenerateData";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
  }
  return "Unknown";
}

}  // namespace spiketrum
