//
// Copyright 2026 The dpsurvey Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpsurvey/report.hpp"

namespace dpsurvey {

std::string_view to_string(Report r) {
  switch (r) {
    case Report::Zero:
      return "zero";
    case Report::One:
      return "one";
    case Report::Abstain:
      return "abstain";
  }
  return "abstain";
}

}  // namespace dpsurvey
