// Copyright 2026 The gkt-lm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GKT_TESTS_ACCEPTANCE_CRITERIA_HPP
#define GKT_TESTS_ACCEPTANCE_CRITERIA_HPP

#include <functional>
#include <string>
#include <vector>

#include "workbench.hpp"

namespace gkt::acceptance {

struct Verdict {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  std::function<Verdict(Workbench&)> run;
};

const std::vector<Criterion>& criteria();

}  // namespace gkt::acceptance

#endif  // GKT_TESTS_ACCEPTANCE_CRITERIA_HPP
