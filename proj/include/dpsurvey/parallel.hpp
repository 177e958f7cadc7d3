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

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dpsurvey {

// Serial is the reference driver; Parallel spreads trials over OpenMP
// threads. Both evaluate the same per-trial kernel and write results by trial
// index, so their outputs are bit-identical.
enum class Execution { Serial, Parallel };

// Caps OpenMP worker threads for Parallel execution. 0 restores the runtime
// default.
void set_thread_limit(int threads);
int thread_limit();

// Evaluates kernel(t) for every t in [0, trials) and returns the results in
// trial order.
template <class T, class Kernel>
std::vector<T> map_trials(std::size_t trials, Execution exec, Kernel&& kernel) {
  std::vector<T> out(trials);
  if (exec == Execution::Serial) {
    for (std::size_t t = 0; t < trials; ++t) out[t] = kernel(t);
    return out;
  }
  const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < count; ++t) {
    out[static_cast<std::size_t>(t)] = kernel(static_cast<std::size_t>(t));
  }
  return out;
}

}  // namespace dpsurvey
