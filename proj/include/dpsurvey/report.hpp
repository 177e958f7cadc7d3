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

#pragma once

#include <cstdint>
#include <string_view>

namespace dpsurvey {

// A participant's action. Abstain is the decision to decline.
enum class Report : std::uint8_t { Zero, One, Abstain };

// Contribution to the reported sum: Abstain counts as 0.
inline int report_bit(Report r) { return r == Report::One ? 1 : 0; }

inline bool participates(Report r) { return r != Report::Abstain; }

inline Report report_of_bit(int bit) { return bit ? Report::One : Report::Zero; }

std::string_view to_string(Report r);

}  // namespace dpsurvey
