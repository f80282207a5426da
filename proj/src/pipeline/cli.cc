// src/pipeline/cli.cc

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

#include "pipeline/cli.h"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>

#include "base/error.h"
#include "fst/wfst.h"
#include "pipeline/experiment.h"

namespace seqdistill {

namespace {

const std::map<std::string, std::string>& CommandHelp() {
  static const std::map<std::string, std::string> help = {
      {"gen-data", "generate the synthetic task (lexicon, corpus, audio)"},
      {"build-den", "build the phone n-gram denominator and the word decoding graph"},
      {"train-teacher", "train the full-context teacher on transcripts with LF-MMI"},
      {"pseudo-label", "decode the unlabeled set with the teacher into numerator graphs"},
      {"distill1", "distill the teacher into the non-streaming student"},
      {"distill2", "distill into the streaming student, starting from distill1"},
      {"single-step", "distill into a randomly initialized streaming student"},
      {"ablate", "first-step objective ablation M1..M4; writes table.csv"},
      {"eval", "word error rates of every trained model on the test set"},
      {"bench-rtf", "single-thread real-time factor of the model ladder"},
      {"gradcheck", "finite-difference check of every distillation objective"},
  };
  return help;
}

// Flags that set one config key.
const std::map<std::string, std::string>& FlagKeys() {
  static const std::map<std::string, std::string> keys = {
      {"--seed", "seed"}, {"--out", "out"},     {"--hist", "hist"},
      {"--chunk", "chunk"}, {"--alpha", "alpha"}, {"--beta", "beta"},
  };
  return keys;
}

void Usage(std::ostream& os) {
  os << "usage: seqdistill [run] <command> [--config FILE] [--seed N] [--out DIR] [--hist N|inf]\n"
        "                  [--chunk N] [--alpha A] [--beta B] [--set KEY=VALUE]... [--help]\n\n"
        "commands:\n";
  for (const std::string& c : StageNames())
    os << "  " << std::left << std::setw(15) << c << CommandHelp().at(c) << '\n';
  os << "\nexit status: 0 ok, 1 configuration error, 2 missing input stage,\n"
        "3 gradient check violation, 4 runtime failure\n";
}

void CommandUsage(const std::string& command, std::ostream& os) {
  os << "usage: seqdistill " << command << " [options]\n" << CommandHelp().at(command) << "\n\n";
  const std::vector<std::string>& inputs = StageInputs(command);
  if (!inputs.empty()) {
    os << "reads the output of:";
    for (const std::string& s : inputs) os << ' ' << s;
    os << "\n\n";
  }
  os << "config keys (default):\n";
  for (const ConfigKey& k : KeysForCommand(command))
    os << "  " << k.name << '=' << k.default_value << "\n      " << k.help << '\n';
}

void PrintSummary(const RunReport& r, std::ostream& out) { out << r.SummaryText(); }

// <out>/lock holding the owner's pid, so two commands never write one run
// directory at once. A lock left by a process that no longer exists is
// taken over.
class RunLock {
 public:
  explicit RunLock(const std::string& out_dir) : path_(out_dir + "/lock") {
    std::filesystem::create_directories(out_dir);
    for (int attempt = 0; attempt < 2; ++attempt) {
      const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        const std::string pid = std::to_string(::getpid()) + "\n";
        const bool ok = ::write(fd, pid.data(), pid.size()) == static_cast<ssize_t>(pid.size());
        ::close(fd);
        if (!ok) SEQDISTILL_THROW(std::runtime_error, "cannot write " << path_);
        return;
      }
      if (errno != EEXIST) SEQDISTILL_THROW(std::runtime_error, "cannot create " << path_);
      long owner = 0;
      std::ifstream(path_) >> owner;
      if (owner > 0 && (::kill(static_cast<pid_t>(owner), 0) == 0 || errno != ESRCH))
        SEQDISTILL_THROW(std::runtime_error, "run directory " << out_dir << " is in use by process "
                                                              << owner << " (" << path_ << ")");
      std::filesystem::remove(path_);
    }
    SEQDISTILL_THROW(std::runtime_error, "cannot acquire " << path_);
  }
  ~RunLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::string path_;
};

}  // namespace

int RunCommand(const std::vector<std::string>& command_line, std::ostream& out,
               std::ostream& err) {
  // "seqdistill run <command> ..." is the same as "seqdistill <command> ...".
  std::vector<std::string> args = command_line;
  if (args.size() >= 2 && args[1] == "run") args.erase(args.begin() + 1);
  if (args.size() < 2 || args[1] == "--help" || args[1] == "-h") {
    Usage(args.size() < 2 ? err : out);
    return args.size() < 2 ? kExitConfigError : kExitOk;
  }
  const std::string command = args[1];
  if (!CommandHelp().count(command)) {
    err << "seqdistill: unknown command '" << command << "'\n";
    Usage(err);
    return kExitConfigError;
  }
  try {
    ExperimentConfig config;
    std::vector<std::pair<std::string, std::string>> overrides;
    for (size_t i = 2; i < args.size(); ++i) {
      const std::string& flag = args[i];
      if (flag == "--help" || flag == "-h") {
        CommandUsage(command, out);
        return kExitOk;
      }
      if (i + 1 >= args.size()) throw ConfigError("flag " + flag + " needs a value");
      const std::string& value = args[++i];
      if (flag == "--config") {
        config = ExperimentConfig::FromFile(value);
      } else if (flag == "--set") {
        const size_t eq = value.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE");
        overrides.emplace_back(value.substr(0, eq), value.substr(eq + 1));
      } else if (FlagKeys().count(flag)) {
        overrides.emplace_back(FlagKeys().at(flag), value);
      } else {
        throw ConfigError("unknown flag " + flag);
      }
    }
    // Flags win over the config file regardless of their order.
    for (const auto& [key, value] : overrides) config.Set(key, value);
    Experiment experiment(config, &err);
    RunLock lock(config.Get("out"));

    if (command == "train-teacher" || command == "distill1" || command == "distill2" ||
        command == "single-step") {
      RunReport r = command == "train-teacher" ? experiment.TrainTeacher()
                    : command == "distill1"    ? experiment.Distill1()
                    : command == "distill2"    ? experiment.Distill2()
                                               : experiment.SingleStep();
      PrintSummary(r, out);
    } else if (command == "pseudo-label") {
      out << "skipped=" << experiment.PseudoLabel() << '\n';
    } else if (command == "ablate") {
      out << "model,alpha,beta,wer\n";
      for (const AblationRow& r : experiment.Ablate())
        out << r.name << ',' << FormatDouble(r.alpha) << ',' << FormatDouble(r.beta) << ','
            << FormatDouble(r.wer) << '\n';
    } else if (command == "eval") {
      out << "model,spec,wer\n";
      for (const WerRow& r : experiment.Eval())
        out << r.model << ',' << r.spec << ',' << FormatDouble(r.wer) << '\n';
    } else if (command == "bench-rtf") {
      out << "model,params,rtf\n";
      for (const RtfRow& r : experiment.BenchRtf())
        out << r.model << ',' << r.params << ',' << FormatDouble(r.rtf) << '\n';
    } else if (command == "gradcheck") {
      ObjectiveCheckReport r = experiment.GradCheck();
      for (const ObjectiveCheck& c : r.checks)
        out << c.name << ": " << c.instances << " instances, max rel err " << c.max_rel_error
            << '\n';
      out << "occupancy identity: " << (r.occupancy_identity ? "bitwise" : "VIOLATED") << '\n';
      const double tol = config.GetDouble("gradcheck.tolerance");
      out << "max rel err " << r.MaxRelError() << " (tolerance " << tol << ")\n";
      if (!r.Passed(tol)) {
        err << "seqdistill: gradient check failed\n";
        return kExitGradCheckFailed;
      }
    } else {
      experiment.Run(command);
    }
    out << command << ": done (" << experiment.StageDir(command) << ")\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "seqdistill: configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const MissingDependencyError& e) {
    err << "seqdistill: missing input stage '" << e.Stage() << "': " << e.what() << '\n';
    return kExitMissingDependency;
  } catch (const std::exception& e) {
    err << "seqdistill: " << command << " failed: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace seqdistill
