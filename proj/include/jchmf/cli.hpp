#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "jchmf/config.hpp"
#include "jchmf/eigensolvers.hpp"
#include "jchmf/errors.hpp"
#include "jchmf/io.hpp"
#include "jchmf/meanfield.hpp"
#include "jchmf/model.hpp"
#include "jchmf/sweep.hpp"

namespace jchmf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Numerically diagonalised doublet of H_p^0 with n excitations.
struct NumericDoublet {
  double minus = 0.0;
  double plus = 0.0;
};

/// Exact-diagonalisation counterpart of dressed_energy: every eigenvector of
/// the site Hamiltonian lies in one excitation block, so the two eigenvalues
/// whose vectors sit on {|n,g>, |n-1,e>} are the n-th doublet. Entry 0 holds
/// the single |0,g> level in both slots. Valid for n <= n_max.
inline std::vector<NumericDoublet> numeric_doublets(const SystemParams& p, SectorLabel sector) {
  const SpectrumResult spec = eig_sym(build_site_hamiltonian(p, sector));
  std::vector<std::vector<double>> blocks(p.n_max + 2);
  for (std::size_t k = 0; k < spec.values.size(); ++k) {
    const auto v = spec.vector(k);
    std::size_t best = 0;
    double weight = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::norm(v[i]) > weight) {
        weight = std::norm(v[i]);
        best = i;
      }
    const std::size_t excitations = best / 2 + best % 2;  // n + q
    blocks[excitations].push_back(spec.values[k].real());
  }
  std::vector<NumericDoublet> out(p.n_max + 1);
  out[0] = {blocks[0].at(0), blocks[0].at(0)};
  for (std::size_t n = 1; n <= p.n_max; ++n) {
    auto& b = blocks[n];
    if (b.size() != 2) throw ConvergenceFailure("numeric_doublets: block " + std::to_string(n) + " is not a doublet", 0);
    std::sort(b.begin(), b.end());
    out[n] = {b[0], b[1]};
  }
  return out;
}

/// Relative agreement required between dressed_energy and exact diagonalisation.
inline constexpr double kSpectrumTolerance = 1e-9;

struct SpectrumTable {
  std::string csv;
  double worst_relative = 0.0;
  bool breach = false;
};

/// Rows n, branch, E_analytic, E_numeric, abs_diff. n = 0 has no doublet; its
/// row carries the single |0,g> level with branch "not-applicable".
inline SpectrumTable spectrum_table(const SystemParams& p, SectorLabel sector,
                                    const std::vector<std::size_t>& n_list) {
  for (std::size_t n : n_list)
    if (n > p.n_max)
      throw ConfigError("spectrum: requested n=" + std::to_string(n) + " exceeds n_max=" + std::to_string(p.n_max));
  const auto numeric = numeric_doublets(p, sector);
  SpectrumTable t;
  CsvWriter csv({"n", "branch", "E_analytic", "E_numeric", "abs_diff"});
  auto row = [&](std::size_t n, std::string_view branch, double analytic, double num) {
    const double diff = std::abs(analytic - num);
    const double rel = diff / std::max(1.0, std::abs(num));
    t.worst_relative = std::max(t.worst_relative, rel);
    if (!(rel <= kSpectrumTolerance)) t.breach = true;
    csv.cell(n).cell(branch).cell(analytic).cell(num).cell(diff).row_end();
  };
  for (std::size_t n : n_list) {
    if (n == 0) {
      row(0, "not-applicable", ground_level_energy(p, sector), numeric[0].minus);
      continue;
    }
    row(n, "+", dressed_energy(p, sector, Branch::plus, n), numeric[n].plus);
    row(n, "-", dressed_energy(p, sector, Branch::minus, n), numeric[n].minus);
  }
  t.csv = csv.text();
  return t;
}

/// U(n) for n = 1..n_max_plot and every detuning in the list (or the config's
/// delta when the list is empty).
inline std::string repulsion_table(const RunConfig& cfg, SectorLabel sector, std::size_t n_max_plot) {
  if (n_max_plot < 1) throw ConfigError("repulsion: n_max_plot must be >= 1");
  std::vector<double> deltas = cfg.delta_list;
  if (deltas.empty()) deltas.push_back(cfg.params.delta);
  CsvWriter csv({"n", "delta", "U_plus", "U_minus", "U_plus_nonlinear", "U_minus_nonlinear"});
  for (double delta : deltas) {
    SystemParams p = cfg.params;
    p.delta = delta;
    for (std::size_t n = 1; n <= n_max_plot; ++n) {
      const Repulsion up = onsite_repulsion(p, sector, Branch::plus, n);
      const Repulsion um = onsite_repulsion(p, sector, Branch::minus, n);
      csv.cell(n).cell(delta).cell(up.full).cell(um.full).cell(up.nonlinear).cell(um.nonlinear).row_end();
    }
  }
  return csv.text();
}

inline std::string phase_csv(const SweepResult& r) {
  CsvWriter csv({"mu", "k", "psi_star", "sector", "energy", "phase"});
  for (std::size_t i = 0; i < r.spec.mu_points; ++i)
    for (std::size_t j = 0; j < r.spec.k_points; ++j) {
      const PhasePoint& c = r.at(i, j);
      csv.cell(r.spec.mu_at(i)).cell(r.spec.k_at(j)).cell(c.psi_star).cell(c.sector).cell(c.energy)
          .cell(to_string(c.phase)).row_end();
    }
  return csv.text();
}

inline std::string phase_summary(const SweepResult& r) {
  std::size_t mott = 0;
  for (const auto& c : r.grid)
    if (c.phase == Phase::mott_insulator) ++mott;
  std::string out;
  out += "cells = " + std::to_string(r.grid.size()) + "\n";
  out += "mott_cells = " + std::to_string(mott) + "\n";
  out += "mott_area_fraction = " + format_double(r.mott_area_fraction) + "\n";
  return out;
}

struct BoundaryRun {
  std::string id;
  SweepResult result;
};

/// One sweep + boundary extraction per variant. An empty list means the base config alone.
inline std::vector<BoundaryRun> run_boundaries(const RunConfig& cfg, const std::vector<Variant>& variants,
                                               unsigned threads) {
  std::vector<BoundaryRun> runs;
  auto one = [&](const std::string& id, const RunConfig& c) {
    BoundaryRun run{id, sweep_grid(c.sweep_spec(), threads)};
    run.result.boundary = extract_boundary(run.result, threads);
    runs.push_back(std::move(run));
  };
  if (variants.empty()) one("base", cfg);
  for (const auto& v : variants) one(v.id, cfg.with_variant(v));
  return runs;
}

inline std::string boundary_csv(const std::vector<BoundaryRun>& runs) {
  CsvWriter csv({"variant_id", "mu", "k_c", "reentrant"});
  for (const auto& run : runs)
    for (const auto& b : run.result.boundary)
      csv.cell(run.id).cell(b.mu).cell(b.k_c).cell(b.reentrant ? 1 : 0).row_end();
  return csv.text();
}

/// Human-readable SI coupling report.
inline std::string derive_report(const GeometryConfig& cfg) {
  const double two_pi = 2.0 * std::numbers::pi;
  const DerivedCouplings c = derive_couplings(cfg.geom, cfg.gamma_e_si);
  auto line = [&](const char* name, double rate) {
    return std::string(name) + " = " + format_double(rate) + " rad/s    " + name + "/2pi = " +
           format_double(rate / two_pi) + " Hz\n";
  };
  std::string out = "# geometry: " + cfg.source + "\n";
  out += "l_r = " + format_double(cfg.geom.l_r) + " H\n";
  out += "omega_r/2pi = " + format_double(cfg.geom.omega_r_si / two_pi) + " Hz\n";
  out += "i_p = " + format_double(cfg.geom.i_p) + " A\n";
  out += "r = " + format_double(cfg.geom.r) + " m\n";
  out += "d = " + format_double(cfg.geom.d) + " m\n";
  out += "z_0 = " + format_double(cfg.geom.z_0) + " ohm\n";
  out += "c_hop = " + format_double(cfg.geom.c_hop) + " F\n";
  out += "c_out = " + format_double(cfg.geom.c_out) + " F\n";
  out += "gamma_e = " + format_double(cfg.gamma_e_si) + " rad/(s T)\n\n";
  out += line("g", c.g_si);
  out += line("eta", c.eta_si);
  out += line("k", c.k_si);
  out += line("kappa", c.kappa_si);
  out += "\nnote: " + c.units_note + "\n";
  if (!cfg.d_list.empty()) {
    out += "\n# g versus loop distance\nd_m,g_rad_per_s,g_over_2pi_hz\n";
    for (double d : cfg.d_list) {
      GeometryParams geom = cfg.geom;
      geom.d = d;
      const double g = derive_couplings(geom, cfg.gamma_e_si).g_si;
      out += format_double(d) + "," + format_double(g) + "," + format_double(g / two_pi) + "\n";
    }
  }
  if (!cfg.k_targets_hz.empty()) {
    out += "\n# hopping capacitance for target k/2pi\nk_over_2pi_hz,c_hop_f\n";
    for (double k_hz : cfg.k_targets_hz)
      out += format_double(k_hz) + "," +
             format_double(hopping_capacitance(two_pi * k_hz, cfg.geom.z_0, cfg.geom.omega_r_si)) + "\n";
  }
  return out;
}

/// Options shared by the subcommands; unused fields are ignored.
struct CommandOptions {
  std::string config;
  std::string out = "out";
  unsigned threads = 1;
  int sector = 0;
  std::vector<std::size_t> n_list;
  std::vector<std::string> variants;
  std::size_t n_max_plot = 20;
};

inline std::filesystem::path output_path(const std::string& prefix, const std::string& suffix) {
  return std::filesystem::path(prefix + suffix);
}

inline int cmd_spectrum(const CommandOptions& o, std::ostream& log) {
  const RunConfig cfg = load_run_config(o.config);
  log << cfg.header();
  std::vector<std::size_t> n_list = o.n_list;
  if (n_list.empty())
    for (std::size_t n = 1; n <= std::min<std::size_t>(10, cfg.params.n_max); ++n) n_list.push_back(n);
  const SpectrumTable t = spectrum_table(cfg.params, SectorLabel{o.sector}, n_list);
  const auto path = output_path(o.out, ".csv");
  write_text_file(path, t.csv);
  log << "wrote " << path.string() << " (worst relative deviation " << format_double(t.worst_relative) << ")\n";
  if (t.breach) {
    log << "error: analytic and numeric levels differ by more than " << format_double(kSpectrumTolerance)
        << " relative\n";
    return kExitNumerical;
  }
  return kExitOk;
}

inline int cmd_repulsion(const CommandOptions& o, std::ostream& log) {
  const RunConfig cfg = load_run_config(o.config);
  log << cfg.header();
  const auto path = output_path(o.out, ".csv");
  write_text_file(path, repulsion_table(cfg, SectorLabel{o.sector}, o.n_max_plot));
  log << "wrote " << path.string() << "\n";
  return kExitOk;
}

inline int cmd_phase_diagram(const CommandOptions& o, std::ostream& log) {
  const RunConfig cfg = load_run_config(o.config);
  log << cfg.header();
  const SweepResult r = sweep_grid(cfg.sweep_spec(), o.threads);
  write_text_file(output_path(o.out, ".csv"), phase_csv(r));
  write_text_file(output_path(o.out, ".pgm"), phase_pgm(r));
  write_text_file(output_path(o.out, "_summary.txt"), phase_summary(r));
  log << "wrote " << o.out << ".csv, " << o.out << ".pgm, " << o.out << "_summary.txt"
      << " (mott_area_fraction " << format_double(r.mott_area_fraction) << ")\n";
  return kExitOk;
}

inline int cmd_boundary(const CommandOptions& o, std::ostream& log) {
  const RunConfig cfg = load_run_config(o.config);
  log << cfg.header();
  std::vector<Variant> variants = cfg.variants;
  if (!o.variants.empty()) {
    variants.clear();
    for (const auto& text : o.variants)
      variants.push_back(config_detail::parse_variant(text, {"--variant", 0}));
  }
  const auto runs = run_boundaries(cfg, variants, o.threads);
  const auto path = output_path(o.out, ".csv");
  write_text_file(path, boundary_csv(runs));
  for (const auto& run : runs) {
    log << "variant " << run.id << ": " << run.result.boundary.size() << " boundary points";
    try {
      const LobeTip tip = highest_tip(lobe_metrics(run.result));
      log << ", highest tip mu=" << format_double(tip.mu) << " k=" << format_double(tip.k);
    } catch (const EmptyBoundary&) {
      log << ", no tip";
    }
    log << "\n";
  }
  log << "wrote " << path.string() << "\n";
  return kExitOk;
}

inline int cmd_derive(const CommandOptions& o, std::ostream& log) {
  const GeometryConfig cfg = load_geometry_config(o.config);
  const auto path = output_path(o.out, ".txt");
  write_text_file(path, derive_report(cfg));
  log << "wrote " << path.string() << "\n";
  return kExitOk;
}

/// Runs a command and maps failures onto exit codes: 2 for configuration or
/// usage problems, 3 for numerical failures. The message goes to `err`.
template <class Command>
int run_guarded(Command&& command, const CommandOptions& o, std::ostream& log, std::ostream& err) {
  try {
    return command(o, log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractViolation& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SweepCellError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConvergenceFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const TruncationOverflow& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace jchmf
