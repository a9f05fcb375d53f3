// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Wall-clock budgets count; a criterion that is numerically right but too slow fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jchmf/cli.hpp"

using namespace jchmf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string figure(const char* name) { return std::string(JCHMF_FIGURES_DIR) + "/" + name; }

SystemParams oracle_params() {
  SystemParams p;
  p.omega_r = 200.0;
  p.g = 1.0;
  p.d_zfs = 100.0;
  p.gamma_e = -1e3;
  return p;
}

Outcome spectrum_oracle() {
  double worst = 0.0;
  std::size_t levels = 0;
  for (double delta : {0.0, 1.0, 2.0})
    for (double eta : {0.0, 0.01, 1.2}) {
      SystemParams p = oracle_params();
      p.delta = delta;
      p.eta = eta;
      for (SectorLabel s : kAllSectors) {
        const auto numeric = numeric_doublets(p, s);
        for (std::size_t n = 1; n <= 10; ++n)
          for (Branch b : {Branch::minus, Branch::plus}) {
            const double a = dressed_energy(p, s, b, n);
            const double x = b == Branch::minus ? numeric[n].minus : numeric[n].plus;
            worst = std::max(worst, std::abs(a - x) / std::max(1.0, std::abs(x)));
            ++levels;
          }
      }
    }
  return {worst <= 1e-9, fmt("%zu levels, worst relative deviation %.3e (tol 1e-9)", levels, worst)};
}

Outcome repulsion_decay() {
  SystemParams p;
  p.omega_r = 200.0;
  p.g = 1.0;
  const std::size_t n_last = 1000;
  bool decreasing = true, small = true;
  double worst_closed = 0.0;
  double prev = onsite_repulsion(p, SectorLabel{0}, Branch::plus, 1).nonlinear;
  for (std::size_t n = 1; n <= n_last; ++n) {
    const double u = onsite_repulsion(p, SectorLabel{0}, Branch::plus, n).nonlinear;
    const double closed = std::sqrt(double(n) + 1.0) - std::sqrt(double(n));
    worst_closed = std::max(worst_closed, std::abs(u - closed) / closed);
    if (n > 1 && !(u < prev)) decreasing = false;
    if (n >= 100 && !(u < 0.05)) small = false;
    prev = u;
  }
  const double u100 = onsite_repulsion(p, SectorLabel{0}, Branch::plus, 100).nonlinear;
  return {decreasing && small && worst_closed <= 1e-9,
          fmt("n = 1..%zu: strictly decreasing %s, U-omega_r(100) = %.6f < 0.05 for all n >= 100 %s, "
              "closed form sqrt(n+1)-sqrt(n) worst relative %.2e",
              n_last, decreasing ? "yes" : "no", u100, small ? "yes" : "no", worst_closed)};
}

Outcome atomic_limit_edge() {
  SweepSpec s;
  s.base_params.omega_r = 200.0;
  s.base_params.g = 1.0;
  s.base_params.eta = 0.01;
  s.mu_min = 197.5;
  s.mu_max = 199.8;
  s.mu_points = 200;
  s.k_min = 0.0;
  s.k_max = 1e-6;
  s.k_points = 2;
  const SweepResult r = sweep_grid(s, worker_count());
  const auto steps = occupation_steps(r, 1);
  const double step = (s.mu_max - s.mu_min) / double(s.mu_points - 1);
  if (steps.empty()) return {false, "no occupation step found along k = 1e-6"};
  const double edge = steps.front();
  return {std::abs(edge - 199.0) <= step,
          fmt("first step at mu = %.5f, |mu - 199| = %.5f, grid step %.5f", edge, std::abs(edge - 199.0), step)};
}

Outcome flux_reduction() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> mu_d(198.9, 199.45), k_d(0.0, 0.06);
  MinimizeSettings settings;
  double worst_e = 0.0, worst_psi = 0.0;
  std::size_t samples = 0;
  for (int i = 0; i < 4; ++i) {
    const double mu = mu_d(rng), k_eff = k_d(rng);
    for (double alpha : {0.1, 0.2, 0.24}) {
      const double c = std::cos(2.0 * std::numbers::pi * alpha);
      SystemParams with = oracle_params();
      with.eta = 0.01;
      with.b_z = 0.0005;
      with.mu = mu;
      with.k = k_eff / c;
      with.alpha = alpha;
      SystemParams plain = with;
      plain.alpha = 0.0;
      plain.k = with.k * c;
      const PhasePoint a = order_parameter(with, settings), b = order_parameter(plain, settings);
      worst_e = std::max(worst_e, std::abs(a.energy - b.energy));
      worst_psi = std::max(worst_psi, std::abs(a.psi_star - b.psi_star));
      ++samples;
    }
  }
  return {worst_e <= 1e-10 && worst_psi <= settings.refine_tol,
          fmt("%zu samples: worst |dE| %.2e (tol 1e-10), worst |dpsi| %.2e (tol %.0e)", samples, worst_e,
              worst_psi, settings.refine_tol)};
}

Outcome flux_boundary_shift() {
  const RunConfig cfg = load_run_config(figure("fig4.cfg"));
  if (cfg.variants.size() != 3) return {false, "fig4.cfg must list the alpha = 0, 0.2, 0.24 variants"};
  const auto runs = run_boundaries(cfg, cfg.variants, worker_count());
  // rows where every variant has a first-crossing boundary point
  std::vector<std::array<double, 3>> rows;
  std::vector<double> row_mu;
  for (std::size_t i = 0; i < cfg.sweep_spec().mu_points; ++i) {
    std::array<double, 3> kc{};
    bool all = true;
    for (std::size_t v = 0; v < 3; ++v) {
      const auto& b = runs[v].result.boundary;
      auto it = std::find_if(b.begin(), b.end(), [&](const BoundaryPoint& p) { return p.row == i && !p.reentrant; });
      if (it == b.end()) {
        all = false;
        break;
      }
      kc[v] = it->k_c;
    }
    if (all) {
      rows.push_back(kc);
      row_mu.push_back(runs[0].result.spec.mu_at(i));
    }
  }
  if (rows.size() < 3) return {false, fmt("only %zu rows carry a boundary in all three variants", rows.size())};
  const double want02 = 1.0 / std::cos(0.4 * std::numbers::pi), want24 = 1.0 / std::cos(0.48 * std::numbers::pi);
  bool ok = true;
  std::string detail;
  for (double q : {0.25, 0.5, 0.75}) {
    const std::size_t r = std::size_t(q * double(rows.size() - 1) + 0.5);
    const auto& kc = rows[r];
    const double r02 = kc[1] / kc[0], r24 = kc[2] / kc[0];
    const bool row_ok = std::abs(r02 / want02 - 1.0) <= 0.05 && std::abs(r24 / want24 - 1.0) <= 0.10 &&
                        kc[0] < kc[1] && kc[1] < kc[2];
    ok = ok && row_ok;
    detail += fmt("mu=%.4f: k_c = %.5f, %.5f, %.5f, ratios %.4f (3.236 +-5%%), %.3f (%.2f +-10%%); ", row_mu[r],
                  kc[0], kc[1], kc[2], r02, r24, want24);
  }
  return {ok, detail};
}

Outcome resonance_ordering() {
  const RunConfig cfg = load_run_config(figure("fig3d.cfg"));
  const auto runs = run_boundaries(cfg, cfg.variants, worker_count());
  std::vector<double> tips;
  std::string detail;
  for (const auto& run : runs) {
    const LobeTip t = highest_tip(lobe_metrics(run.result));
    tips.push_back(t.k);
    detail += fmt("[%s] tip k = %.5f at mu = %.4f; ", run.id.c_str(), t.k, t.mu);
  }
  const bool ok = tips.size() == 3 && tips[0] > tips[1] && tips[1] > tips[2];
  detail += "required k_tip(delta=0) > k_tip(delta=1) > k_tip(delta=2)";
  return {ok, detail};
}

Outcome dissipation_ordering() {
  std::vector<double> fractions;
  std::string detail;
  for (const char* name : {"fig5a.cfg", "fig5b.cfg", "fig5c.cfg", "fig5d.cfg"}) {
    const RunConfig cfg = load_run_config(figure(name));
    const SweepResult r = sweep_grid(cfg.sweep_spec(), worker_count());
    fractions.push_back(r.mott_area_fraction);
    detail += fmt("gamma=kappa=%.2f: %.4f; ", cfg.params.kappa, r.mott_area_fraction);
  }
  bool ok = true;
  for (std::size_t i = 1; i < fractions.size(); ++i) ok = ok && fractions[i] >= fractions[i - 1];
  return {ok, detail + "mott_area_fraction must be nondecreasing"};
}

SweepSpec fig3a_spec() { return load_run_config(figure("fig3a.cfg")).sweep_spec(); }

Outcome general_solver_consistency() {
  SweepSpec s = fig3a_spec();
  s.mu_points = 10;
  s.k_points = 10;
  const SweepResult herm = sweep_grid(s, worker_count());
  s.settings.force_general_solver = true;
  const SweepResult gen = sweep_grid(s, worker_count());
  double worst = 0.0;
  std::size_t sf = 0;
  for (std::size_t i = 0; i < herm.grid.size(); ++i) {
    worst = std::max(worst, std::abs(herm.grid[i].psi_star - gen.grid[i].psi_star));
    if (herm.grid[i].phase == Phase::superfluid) ++sf;
  }
  return {worst <= 1e-9, fmt("10x10 grid (%zu SF cells): worst |dpsi| %.2e (tol 1e-9)", sf, worst)};
}

Outcome self_consistency() {
  const SweepSpec s = fig3a_spec();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mu_d(s.mu_min, s.mu_max), k_d(s.k_min, s.k_max);
  double worst = 0.0;
  std::size_t tried = 0, sf = 0;
  while (sf < 20 && tried < 400) {
    ++tried;
    const double mu = mu_d(rng), k = k_d(rng);
    const PhasePoint pt = order_parameter(s.params_at(mu, k), s.settings);
    if (pt.phase != Phase::superfluid) continue;
    ++sf;
    worst = std::max(worst, std::abs(pt.a_expect - pt.psi_star) / std::max(1.0, pt.psi_star));
  }
  if (sf < 20) return {false, fmt("only %zu SF points in %zu draws", sf, tried)};
  return {worst <= 1e-3,
          fmt("20 SF points (%zu draws): worst |Re<a> - psi*| / max(1, psi*) = %.2e (tol 1e-3)", tried, worst)};
}

Outcome truncation_stability() {
  SweepSpec s = fig3a_spec();
  const SweepResult base = sweep_grid(s, worker_count());
  s.base_params.n_max = 16;
  const SweepResult big = sweep_grid(s, worker_count());
  double worst = 0.0;
  for (std::size_t i = 0; i < base.grid.size(); ++i)
    worst = std::max(worst, std::abs(base.grid[i].psi_star - big.grid[i].psi_star));
  return {worst <= 1e-6, fmt("%zu cells, n_max 12 -> 16: worst |dpsi| %.2e (tol 1e-6)", base.grid.size(), worst)};
}

Outcome si_couplings() {
  const GeometryConfig cfg = load_geometry_config(figure("geometry.cfg"));
  const double two_pi = 2.0 * std::numbers::pi;
  const double eta_hz = derive_couplings(cfg.geom, cfg.gamma_e_si).eta_si / two_pi;
  const bool eta_ok = eta_hz >= 70e3 && eta_hz <= 280e3;

  auto g_hz = [&](double d) {
    GeometryParams geom = cfg.geom;
    geom.d = d;
    return derive_couplings(geom, cfg.gamma_e_si).g_si / two_pi;
  };
  // d = 5 um pairs with 1.8 MHz and d = 50 nm with 180 MHz
  const double g_far = g_hz(5e-6), g_near = g_hz(50e-9);
  const bool g_ok = g_far >= 0.18e6 && g_far <= 18e6 && g_near >= 18e6 && g_near <= 1800e6;
  double worst_scaling = 0.0;
  const double ref = g_far * 5e-6;
  for (int i = 0; i <= 20; ++i) {
    const double d = 50e-9 * std::pow(100.0, i / 20.0);
    worst_scaling = std::max(worst_scaling, std::abs(g_hz(d) * d / ref - 1.0));
  }
  const bool scaling_ok = worst_scaling <= 1e-12;
  return {eta_ok && g_ok && scaling_ok,
          fmt("eta/2pi = %.1f kHz (70..280), g/2pi = %.3f MHz at 5 um (0.18..18), %.1f MHz at 50 nm (18..1800), "
              "g*d worst relative spread %.1e",
              eta_hz / 1e3, g_far / 1e6, g_near / 1e6, worst_scaling)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome thread_determinism() {
  const fs::path dir = fs::temp_directory_path() / "jchmf_acceptance";
  fs::create_directories(dir);
  for (const char* t : {"1", "8"}) {
    const std::string cmd = std::string(JCHMF_CLI_PATH) + " phase-diagram -c " + figure("fig3a.cfg") + " -o " +
                            (dir / (std::string("t") + t)).string() + " --threads " + t + " > /dev/null";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "phase-diagram run failed: " + cmd};
  }
  bool same = true;
  std::string detail;
  for (const char* suffix : {".csv", ".pgm", "_summary.txt"}) {
    const std::string a = slurp(dir / ("t1" + std::string(suffix))), b = slurp(dir / ("t8" + std::string(suffix)));
    same = same && !a.empty() && a == b;
    detail += fmt("%s %zu bytes %s; ", suffix, a.size(), a == b ? "identical" : "DIFFERENT");
  }
  return {same, detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "spectrum-oracle", 1.0, spectrum_oracle},
      {2, "repulsion-decay", 1.0, repulsion_decay},
      {3, "atomic-limit-edge", 30.0, atomic_limit_edge},
      {4, "flux-reduction", 5.0, flux_reduction},
      {5, "flux-boundary-shift", 120.0, flux_boundary_shift},
      {6, "resonance-ordering", 300.0, resonance_ordering},
      {7, "dissipation-ordering", 600.0, dissipation_ordering},
      {8, "general-solver-consistency", 30.0, general_solver_consistency},
      {9, "self-consistency", 30.0, self_consistency},
      {10, "truncation-stability", 600.0, truncation_stability},
      {11, "si-couplings", 1.0, si_couplings},
      {12, "thread-determinism", 300.0, thread_determinism},
  };
  std::printf("acceptance: %u worker thread(s)\n", worker_count());
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= c.budget_s;
    const bool pass = o.ok && in_time;
    if (!pass) ++failed;
    std::printf("%s %2d %-27s %8.2f s (budget %g s%s)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, dt,
                c.budget_s, in_time ? "" : ", EXCEEDED", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
