// Copyright 2026 The PMM Twin Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include "pmm/error.hpp"

namespace pmm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::OutOfMargin: return "OutOfMargin";
    case ErrorCode::Broadcast: return "Broadcast";
    case ErrorCode::SingularInductance: return "SingularInductance";
    case ErrorCode::NonPositiveFrequency: return "NonPositiveFrequency";
    case ErrorCode::SingleWell: return "SingleWell";
    case ErrorCode::OutOfSpan: return "OutOfSpan";
    case ErrorCode::SpinDomain: return "SpinDomain";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BadSchedule: return "BadSchedule";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::Unmeasurable: return "Unmeasurable";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace pmm
