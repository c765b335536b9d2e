// Command-line driver: run a scenario, refinement and n-sequence studies.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bdflow/harness.hpp"

namespace {

constexpr int kExitValidation = 2;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string preset;
  std::vector<std::string> overrides;
};

bdflow::RunConfig load(const Options& o) {
  std::vector<std::pair<std::string, std::string>> pairs;
  if (!o.preset.empty()) pairs.emplace_back("scenario.preset", o.preset);
  if (!o.config_path.empty()) {
    std::ifstream is(o.config_path);
    if (!is) throw bdflow::ValidationError({"cannot read config file " + o.config_path});
    std::stringstream ss;
    ss << is.rdbuf();
    auto file = bdflow::parse_pairs(ss.str());
    pairs.insert(pairs.end(), file.begin(), file.end());
  }
  for (const auto& kv : o.overrides) {
    auto more = bdflow::parse_pairs(kv);
    if (more.size() != 1) throw bdflow::ValidationError({"--override expects key=value: " + kv});
    pairs.push_back(more.front());
  }
  if (!o.out_dir.empty()) pairs.emplace_back("run.output_dir", o.out_dir);
  return bdflow::config_from_pairs(pairs);
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "key = value configuration file");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--preset", o.preset, "scenario preset (see `presets`)");
  cmd->add_option("--override", o.overrides, "key=value applied after the config file");
}

std::string num(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_run(const bdflow::RunResult& r) {
  const auto& t = r.trajectory;
  const auto& v = r.verdicts;
  std::cout << "status: " << bdflow::to_string(t.status) << " after " << t.steps << " steps\n";
  if (!t.message.empty()) std::cout << "  " << t.message << "\n";
  std::cout << "entropy_decay: " << (v.entropy.verdict ? "pass" : "fail")
            << " (max violation " << num(v.entropy.max_violation) << ")\n"
            << "gronwall: " << (v.gronwall.verdict ? "pass" : "fail") << " (max ratio "
            << num(v.gronwall.max_ratio) << ")\n"
            << "mass_balance: " << (v.mass_ok ? "pass" : "fail") << " (step "
            << num(v.mass.max_step_rel_error) << ", accumulated "
            << num(v.mass.accumulated_rel_error) << ")\n"
            << "regularization_probe: " << v.probe << " (ratio " << num(v.probe_ratio) << ")\n";
  for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
}

void print_study(const bdflow::StudyResult& s) {
  std::cout << "key\tl1_to_next\torder\tl1_to_ref\tref_order\th1_final\tprobe\n";
  for (const auto& r : s.rows)
    std::cout << r.key << "\t" << num(r.l1_to_next) << "\t" << num(r.order) << "\t"
              << num(r.l1_to_reference) << "\t" << num(r.reference_order) << "\t"
              << num(r.h1_final) << "\t" << r.verdicts.probe << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D compressible Navier-Stokes with degenerate viscosity"};
  app.require_subcommand(1);
  Options opts;
  auto* run_cmd = app.add_subcommand("run", "run one scenario");
  auto* dx_cmd = app.add_subcommand("study-dx", "grid refinement study");
  auto* n_cmd = app.add_subcommand("study-n", "regularization index study");
  auto* presets_cmd = app.add_subcommand("presets", "list scenario presets");
  for (auto* cmd : {run_cmd, dx_cmd, n_cmd}) add_common(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (presets_cmd->parsed()) {
    for (const auto& name : bdflow::run_preset_names()) std::cout << name << "\n";
    return 0;
  }

  try {
    const auto cfg = load(opts);
    if (run_cmd->parsed()) {
      const auto r = bdflow::run_scenario(cfg);
      print_run(r);
      return r.exit_code;
    }
    const auto study =
        dx_cmd->parsed() ? bdflow::refinement_study(cfg) : bdflow::n_sequence_study(cfg);
    print_study(study);
    return study.exit_code;
  } catch (const bdflow::ValidationError& e) {
    for (const auto& p : e.problems()) std::cerr << "error: " << p << "\n";
    return kExitValidation;
  } catch (const bdflow::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const bdflow::StateError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const bdflow::DomainError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
