// Copyright (c) 2026 DTCF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dtcf/train/schedule.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dtcf/base/error.h"

namespace dtcf::train {

void Triangular2Schedule::Validate() const {
  if (!(base_lr >= 0.0 && base_lr < max_lr)) {
    throw ConfigError("learning rates must satisfy 0 <= base_lr < max_lr");
  }
  if (step_size < 1) throw ConfigError("step_size must be at least 1");
}

double Triangular2Schedule::LrAt(int64_t iter) const {
  if (iter < 0) throw ConfigError("iteration must be >= 0, got " + std::to_string(iter));
  const double it = static_cast<double>(iter), ss = static_cast<double>(step_size);
  const double cycle = std::floor(1.0 + it / (2.0 * ss));
  const double x = std::abs(it / ss - 2.0 * cycle + 1.0);
  return base_lr + (max_lr - base_lr) * std::max(0.0, 1.0 - x) / std::exp2(cycle - 1.0);
}

}  // namespace dtcf::train
