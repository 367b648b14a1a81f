// Command-line driver: run scenarios, audit saved state, estimate sizes.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dtki/archive.h"
#include "dtki/audit.h"
#include "dtki/scenario.h"
#include "dtki/size_model.h"

namespace {

int RunScenario(const std::string& file, std::uint64_t seed, const std::string& out) {
  dtki::scenario::Scenario sc = dtki::scenario::ParseFile(file);
  std::optional<std::filesystem::path> state;
  if (!out.empty()) state = std::filesystem::path(out) / "state";
  dtki::scenario::Result r = dtki::scenario::Run(sc, seed, state);
  if (!out.empty()) dtki::scenario::WriteOutputs(r, out);
  for (const std::string& line : r.actions) std::cout << line << '\n';
  for (const std::string& f : r.failures) std::cerr << "FAILED " << f << '\n';
  std::cout << "expectations: " << (r.ok ? "all held" : "some failed") << '\n';
  return r.ok ? 0 : 1;
}

int AuditState(const std::string& dir, std::optional<std::uint64_t> sample, std::uint64_t seed) {
  dtki::StateDir state = dtki::StateDir::Load(dir);
  dtki::audit::MlogView view(state.mlog, state.issuers);
  std::vector<dtki::audit::AuditVerdict> verdicts =
      sample ? dtki::audit::RandomCheck(seed, view, state.clogs, *sample) : dtki::audit::AuditAll(view, state.clogs);
  bool clean = true;
  for (const auto& v : verdicts) {
    std::cout << v.ToLine() << '\n';
    clean = clean && v.passed();
  }
  std::cout << (clean ? "clean" : "misbehaviour found") << '\n';
  return clean ? 0 : 1;
}

int Estimate(const std::string& preset, const std::vector<std::string>& params) {
  dtki::size::Params p;
  if (preset == "paper") {
    p = dtki::size::Params::Paper();
  } else if (preset != "default") {
    throw std::invalid_argument("unknown preset " + preset);
  }
  for (const std::string& kv : params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value: " + kv);
    p.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  const dtki::size::Estimate e = dtki::size::EstimateSizes(p);
  for (const auto& [k, v] : p.List()) std::cout << "param " << k << "=" << v << '\n';
  for (const auto& [msg, bytes] : e.messages) std::cout << msg << " " << bytes << '\n';
  auto kb = [](std::uint64_t b) { return static_cast<double>(b) / 1024.0; };
  std::cout.setf(std::ios::fixed);
  std::cout.precision(2);
  std::cout << "total publish " << e.publish << " B (" << kb(e.publish) << " KB)\n"
            << "total mapping " << e.mapping << " B (" << kb(e.mapping) << " KB)\n"
            << "total verify " << e.verify << " B (" << kb(e.verify) << " KB)\n"
            << "total revoke " << e.revoke << " B (" << kb(e.revoke) << " KB)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dtki: certificate and mapping log toolkit"};
  app.require_subcommand(1);

  std::string file, out;
  std::uint64_t seed = 1;
  auto* run = app.add_subcommand("run", "Run a scenario script");
  run->add_option("scenario", file, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Key and sampling seed");
  run->add_option("--out", out, "Write transcript, actions, audit, oracle and state here");

  std::string dir;
  std::uint64_t audit_seed = 1;
  std::uint64_t m = 0;
  auto* audit = app.add_subcommand("audit", "Audit a saved state directory");
  audit->add_option("state", dir, "State directory")->required()->check(CLI::ExistingDirectory);
  auto* sample_opt = audit->add_option("--sample", m, "Check m random records per log")->check(CLI::PositiveNumber);
  audit->add_option("--seed", audit_seed, "Sampling seed");

  std::string preset = "default";
  std::vector<std::string> params;
  auto* estimate = app.add_subcommand("estimate", "Estimate protocol message sizes");
  estimate->add_option("--preset", preset, "default or paper")->check(CLI::IsMember({"default", "paper"}));
  estimate->add_option("--param", params, "Override a parameter, key=value");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return RunScenario(file, seed, out);
    if (*audit) return AuditState(dir, *sample_opt ? std::optional<std::uint64_t>(m) : std::nullopt, audit_seed);
    if (*estimate) return Estimate(preset, params);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
