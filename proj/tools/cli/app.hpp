// Copyright 2026 The BiasLab Authors.
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

#pragma once

#include <iosfwd>

namespace biaslab::cli {

// Parses arguments, runs one subcommand and prints its report. Returns the
// process exit code: 0 success, 1 usage/validation/IO error, 2 numerical
// failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace biaslab::cli
