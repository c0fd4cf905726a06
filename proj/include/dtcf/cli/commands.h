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

// The `dtcf` command line: synth-data, train, extract, eval, gradcheck.
//
// Exit codes: 0 success, 2 usage or configuration, 3 I/O, 4 divergence,
// 5 data mismatch, 6 verification failure.

#ifndef DTCF_CLI_COMMANDS_H_
#define DTCF_CLI_COMMANDS_H_

#include <cstdint>
#include <ostream>
#include <string>

#include "dtcf/attention/attention.h"
#include "dtcf/autodiff/grad_check.h"

namespace dtcf::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitIo = 3,
  kExitDivergence = 4,
  kExitDataMismatch = 5,
  kExitVerification = 6,
};

inline constexpr double kGradCheckTolerance = 1e-6;
// Central-difference step for the gradient check harness.
inline constexpr double kGradCheckStep = 1e-4;

struct BlockShape {
  int64_t channels = 0;
  int64_t frames = 0;
  int64_t bins = 0;
};

// Parses "CxTxF" with positive integers; throws ConfigError otherwise.
BlockShape ParseBlockShape(const std::string& text);

// 64-bit finite-difference check of one attention block over its input map
// and every weight, on the objective sum(block(x) * r) with random r. With
// `mutate_backward` the block output passes through an identity whose
// backward rule scales the gradient by 1.01.
ad::GradCheckResult AttentionGradCheck(attention::AttentionKind kind, const BlockShape& shape,
                                       uint64_t seed, bool mutate_backward = false);

// Seed from the DTCF_SEED environment variable, or `fallback` when unset.
uint64_t EnvSeed(uint64_t fallback = 0);

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dtcf::cli

#endif  // DTCF_CLI_COMMANDS_H_
