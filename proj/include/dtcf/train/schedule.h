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

// Triangular2 cyclical learning rate.
//
//   cycle = floor(1 + iter / (2 step_size))
//   x     = |iter / step_size - 2 cycle + 1|
//   lr    = base + (max - base) max(0, 1 - x) / 2^(cycle - 1)

#ifndef DTCF_TRAIN_SCHEDULE_H_
#define DTCF_TRAIN_SCHEDULE_H_

#include <cstdint>

namespace dtcf::train {

struct Triangular2Schedule {
  double base_lr = 1e-8;
  double max_lr = 1e-3;
  int64_t step_size = 500;

  void Validate() const;
  double LrAt(int64_t iter) const;
};

}  // namespace dtcf::train

#endif  // DTCF_TRAIN_SCHEDULE_H_
