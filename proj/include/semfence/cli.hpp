/* Copyright 2024 The Semfence Authors. All Rights Reserved.

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
#ifndef SEMFENCE_CLI_HPP
#define SEMFENCE_CLI_HPP

#include <string>
#include <vector>

namespace semfence::cli {

// Exit codes: 0 success, 1 evaluation produced failures (e.g. unparseable
// predictions), 2 usage or input error.
int run(int argc, const char* const* argv);

// Convenience for tests: args exclude the program name.
int run(const std::vector<std::string>& args);

}  // namespace semfence::cli

#endif  // SEMFENCE_CLI_HPP
