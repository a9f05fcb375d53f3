#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jchmf/cli.hpp"

int main(int argc, char** argv) {
  using namespace jchmf;

  CLI::App app{"Mean-field phase diagrams of a coupled-resonator lattice with flux-qubit / NV-centre sites"};
  app.require_subcommand(1);

  CommandOptions o;
  auto common = [&](CLI::App* sub, const char* config_help) {
    sub->add_option("-c,--config", o.config, config_help)->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", o.out, "output prefix (files are <prefix>.csv etc.)");
    sub->add_option("-j,--threads", o.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  };

  auto* spectrum = app.add_subcommand("spectrum", "analytic dressed levels versus exact diagonalisation");
  common(spectrum, "run config file");
  spectrum->add_option("-s,--sector", o.sector, "NV spin sector")->check(CLI::IsMember({-1, 0, 1}));
  spectrum->add_option("-n,--n", o.n_list, "excitation numbers (default 1..10)")->delimiter(',');

  auto* repulsion = app.add_subcommand("repulsion", "effective on-site repulsion U(n) per detuning");
  common(repulsion, "run config file (delta_list sets the detuning family)");
  repulsion->add_option("-s,--sector", o.sector, "NV spin sector")->check(CLI::IsMember({-1, 0, 1}));
  repulsion->add_option("--n-max-plot", o.n_max_plot, "largest n in the table");

  auto* phase = app.add_subcommand("phase-diagram", "psi* over the (mu, k) grid, CSV + PGM");
  common(phase, "run config file with the sweep window");

  auto* boundary = app.add_subcommand("boundary", "MI/SF boundaries for a family of overrides");
  common(boundary, "run config file with the sweep window");
  boundary->add_option("--variant", o.variants, "override set, e.g. \"delta=1,eta=0.5\" (repeatable)");

  auto* derive = app.add_subcommand("derive", "SI couplings from the device geometry");
  common(derive, "geometry config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (spectrum->parsed()) return run_guarded(cmd_spectrum, o, std::cout, std::cerr);
  if (repulsion->parsed()) return run_guarded(cmd_repulsion, o, std::cout, std::cerr);
  if (phase->parsed()) return run_guarded(cmd_phase_diagram, o, std::cout, std::cerr);
  if (boundary->parsed()) return run_guarded(cmd_boundary, o, std::cout, std::cerr);
  if (derive->parsed()) return run_guarded(cmd_derive, o, std::cout, std::cerr);
  return kExitConfig;
}
