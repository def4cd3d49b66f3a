// pointdyn: run convergence studies, relation checks and validation
// experiments from a config file.
//
// exit status: 0 all verdicts pass, 1 a verdict failed, 2 invalid config,
// 3 Dyson tail not certified, 4 any other error.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "pointdyn/pointdyn.h"

namespace {

enum Exit { kPass = 0, kVerdictFail = 1, kInvalidConfig = 2, kTailNotCertified = 3, kOther = 4 };

int exit_for(pd_status s) {
  switch (s) {
    case PD_OK: return kPass;
    case PD_ERR_INVALID_CONFIG: return kInvalidConfig;
    case PD_ERR_TAIL_NOT_CERTIFIED: return kTailNotCertified;
    default: return kOther;
  }
}

int report_error(pd_status s) {
  std::fprintf(stderr, "pointdyn: %s: %s\n", pd_status_name(s), pd_last_error());
  return exit_for(s);
}

int run_config(const std::string& path, const std::string& output, bool physics) {
  pd_experiment* e = nullptr;
  if (pd_status s = pd_experiment_load(path.c_str(), &e); s != PD_OK) return report_error(s);
  int verdict = 0;
  pd_status s = physics ? pd_experiment_validate(e, &verdict) : pd_experiment_run(e, &verdict);
  if (s == PD_OK) s = pd_experiment_write(e, output.empty() ? nullptr : output.c_str());
  if (s != PD_OK) {
    const int code = report_error(s);
    pd_experiment_destroy(e);
    return code;
  }
  const char* dir = output.empty() ? pd_experiment_output_dir(e) : output.c_str();
  std::printf("%s %s digest %s -> %s\n", pd_experiment_type(e), verdict ? "PASS" : "FAIL",
              pd_experiment_digest(e), dir);
  pd_experiment_destroy(e);
  return verdict ? kPass : kVerdictFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point-interaction dynamics experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pd_version()));

  std::string config, output, dir;
  bool update = false;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "output directory (overrides the config)");

  auto* validate = app.add_subcommand("validate", "bound-state or scattering cross-check");
  validate->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
  validate->add_option("-o,--output", output, "output directory (overrides the config)");

  auto* golden = app.add_subcommand("golden-check", "compare runs with stored report files");
  golden->add_option("dir", dir, "directory of *.ini and *.report.csv")
      ->required()->check(CLI::ExistingDirectory);
  golden->add_flag("--update", update, "rewrite the stored report files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kOther;
  }

  const int threads = pd_threads_from_env();
  if (std::getenv("POINTDYN_VERBOSE")) std::fprintf(stderr, "pointdyn: %d thread(s)\n", threads);

  if (*run) return run_config(config, output, false);
  if (*validate) return run_config(config, output, true);

  int checked = 0, failed = 0;
  const pd_status s = pd_golden_check(
      dir.c_str(), update ? 1 : 0, &checked, &failed,
      [](const char* line, void*) { std::printf("%s\n", line); }, nullptr);
  if (s != PD_OK) return report_error(s);
  std::printf("golden-check: %d checked, %d failed\n", checked, failed);
  return failed == 0 ? kPass : kVerdictFail;
}
