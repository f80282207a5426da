// src/pipeline/cli.h

// Copyright 2026  The seqdistill Authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SEQDISTILL_PIPELINE_CLI_H_
#define SEQDISTILL_PIPELINE_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace seqdistill {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitMissingDependency = 2,
  kExitGradCheckFailed = 3,
  kExitRuntimeError = 4,
};

// Runs one command line; args[0] is the program name, args[1] the command.
// Results go to `out`, progress and errors to `err`.
int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seqdistill

#endif  // SEQDISTILL_PIPELINE_CLI_H_
