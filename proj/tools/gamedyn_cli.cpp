// Copyright 2026 The gamedyn Authors
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

// Batch experiment runner.
//
//   gamedyn run <config>       run an experiment; exit 0 iff all checks pass
//   gamedyn validate <config>  print diagnostics; exit 0 iff the config is clean
//   gamedyn verify <dir>       re-check the hashes embedded in an output dir
//
// Environment overrides: SEED, THREADS, OUT_DIR.

#include <cstdlib>
#include <iostream>
#include <string>

#include "gamedyn/config.hpp"
#include "gamedyn/experiment.hpp"

namespace {

void usage() {
  std::cerr << "usage: gamedyn run <config> | validate <config> | verify <output-dir>\n"
            << "  env overrides: SEED, THREADS, OUT_DIR\n";
}

int cmd_validate(const std::string& path) {
  const auto cfg = gamedyn::KeyValueConfig::load(path);
  const auto diags = gamedyn::validate_config(cfg);
  if (diags.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& d : diags) std::cout << d << "\n";
  return 1;
}

int cmd_run(const std::string& path) {
  auto cfg = gamedyn::KeyValueConfig::load(path);
  gamedyn::apply_env_overrides(cfg);
  gamedyn::ExperimentConfig e;
  const auto diags = gamedyn::validate_config(cfg, &e);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << d << "\n";
    return 2;
  }
  const auto result = gamedyn::run_experiment(e);
  for (const auto& [name, ok] : result.summary["pass"].items())
    std::cout << (ok.get<bool>() ? "pass" : "FAIL") << "  " << name << "\n";
  std::cout << "wrote " << e.out_dir << "/summary.json\n";
  return result.exit_code;
}

int cmd_verify(const std::string& dir) {
  const auto report = gamedyn::verify_outputs(dir);
  for (const auto& m : report.messages) std::cout << m << "\n";
  return report.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    usage();
    return 2;
  }
  const std::string cmd = argv[1];
  try {
    if (cmd == "run") return cmd_run(argv[2]);
    if (cmd == "validate") return cmd_validate(argv[2]);
    if (cmd == "verify") return cmd_verify(argv[2]);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  usage();
  return 2;
}
