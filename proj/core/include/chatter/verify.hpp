/* Copyright 2026 The Chatter Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chatter/dynamics.hpp"
#include "chatter/integrator.hpp"

namespace chatter {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  ModelParams params;
  IntegratorSettings settings;
  std::uint64_t seed = 20260611;
};

/// Runs the invariant checks of every module. Deterministic for a fixed
/// seed; the whole suite takes a few seconds.
std::vector<CheckResult> run_invariant_suite(const VerifyOptions& options = {});

/// One `PASS name: detail` / `FAIL name: detail` line per check.
std::string format_report(const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace chatter
