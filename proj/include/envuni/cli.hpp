// Copyright 2026 The envuni Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file   cli.hpp
 * @brief  Batch front-end behind the envuni executable.
 *
 * Subcommands: validate, measure, envariance, born, experiment, collapse.
 * Exit status: 0 when every check passes, 1 when a numerical check or a
 * physical precondition fails, 2 on usage or schema errors.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace envuni::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace envuni::cli
