#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "jchmf/eigensolvers.hpp"
#include "jchmf/errors.hpp"
#include "jchmf/model.hpp"

namespace jchmf {

struct MinimizeSettings {
  std::optional<double> psi_max;  // default sqrt(n_max) / 3
  std::size_t coarse_points = 201;
  double refine_tol = 1e-8;
  double truncation_guard = 1e-6;
  double sf_threshold = 1e-3;
  // Route Hermitian problems through the general solver as well (cross-checks).
  bool force_general_solver = false;

  double resolved_psi_max(const SystemParams& p) const {
    return psi_max ? *psi_max : std::sqrt(static_cast<double>(p.n_max)) / 3.0;
  }
};

inline void validate(const MinimizeSettings& s, const SystemParams& p) {
  const double pm = s.resolved_psi_max(p);
  if (!(pm > 0.0)) throw ContractViolation("MinimizeSettings: psi_max must be > 0");
  if (s.coarse_points < 3) throw ContractViolation("MinimizeSettings: coarse_points must be >= 3");
  if (!(s.refine_tol > 0.0 && s.refine_tol < pm))
    throw ContractViolation("MinimizeSettings: refine_tol must lie in (0, psi_max)");
  if (!(s.sf_threshold > 0.0 && s.sf_threshold < pm))
    throw ContractViolation("MinimizeSettings: sf_threshold must lie in (0, psi_max)");
  if (!(s.truncation_guard > 0.0))
    throw ContractViolation("MinimizeSettings: truncation_guard must be > 0");
}

/// Lowest (real part) mean-field level at fixed psi and observables of its eigenvector.
struct GroundValue {
  double energy = 0.0;
  double a_expect = 0.0;          // Re <v|a|v>
  double polaritons = 0.0;        // <a+a + sigma+sigma->
  double top_probability = 0.0;   // weight on photon number n_max
};

inline GroundValue ground_value(const SystemParams& p, SectorLabel sector, double psi,
                                const MinimizeSettings& settings) {
  const DenseMatrix m = build_meanfield_matrix(p, sector, psi);
  const Eigenpair pair = (p.dissipative() || settings.force_general_solver)
                             ? lowest_eigenpair_general(m)
                             : lowest_eigenpair_sym(m);
  const std::vector<cplx>& v = pair.vector;

  GroundValue out;
  out.energy = pair.value.real();
  cplx a = 0.0;
  double occupation = 0.0;
  for (std::size_t n = 0; n <= p.n_max; ++n)
    for (std::size_t q = 0; q < 2; ++q) {
      const std::size_t i = 2 * n + q;
      occupation += std::norm(v[i]) * static_cast<double>(n + q);
      if (n >= 1) a += std::conj(v[i - 2]) * std::sqrt(static_cast<double>(n)) * v[i];
    }
  out.a_expect = a.real();
  out.polaritons = occupation;
  out.top_probability = std::norm(v[2 * p.n_max]) + std::norm(v[2 * p.n_max + 1]);
  if (out.top_probability > settings.truncation_guard)
    throw TruncationOverflow(psi, out.top_probability, settings.truncation_guard);
  return out;
}

struct MinimizeResult {
  double psi_star = 0.0;
  double energy = 0.0;
  double a_expect = 0.0;
  double polaritons = 0.0;
};

namespace detail {

inline constexpr double kPlateau = 1e-12;

struct Sample {
  double psi;
  GroundValue value;
};

// Lower energy wins; within kPlateau the smaller psi wins.
inline bool better(const Sample& a, const Sample& b) {
  if (a.value.energy < b.value.energy - kPlateau) return true;
  if (b.value.energy < a.value.energy - kPlateau) return false;
  return a.psi < b.psi;
}

}  // namespace detail

/// Minimise the ground energy over psi >= 0: uniform coarse scan, golden-section
/// refinement inside the bracket of the best sample, then (Hermitian case) a
/// root polish of dE/dpsi = 2 z k_eff (psi - Re<a>), which pins psi* far below
/// the energy-noise floor that limits a pure comparison search.
inline MinimizeResult minimize_psi(const SystemParams& p, SectorLabel sector,
                                   const MinimizeSettings& settings) {
  validate(settings, p);
  using detail::Sample;
  auto eval = [&](double psi) { return Sample{psi, ground_value(p, sector, psi, settings)}; };
  auto result = [](const Sample& s) {
    return MinimizeResult{s.psi, s.value.energy, s.value.a_expect, s.value.polaritons};
  };

  const double hop = p.z * p.k * flux_factor(p.alpha);
  if (hop == 0.0) return result(eval(0.0));

  const std::size_t npts = settings.coarse_points;
  const double psi_max = settings.resolved_psi_max(p);
  std::vector<Sample> coarse;
  coarse.reserve(npts);
  for (std::size_t i = 0; i < npts; ++i)
    coarse.push_back(eval(psi_max * static_cast<double>(i) / static_cast<double>(npts - 1)));

  std::size_t best = 0;
  for (std::size_t i = 1; i < npts; ++i)
    if (detail::better(coarse[i], coarse[best])) best = i;

  bool plateau = true;
  for (const auto& s : coarse)
    if (std::abs(s.value.energy - coarse[0].value.energy) > detail::kPlateau) {
      plateau = false;
      break;
    }
  if (plateau) return result(coarse[0]);

  const Sample& lo_s = coarse[best == 0 ? 0 : best - 1];
  const Sample& hi_s = coarse[best + 1 < npts ? best + 1 : best];

  // golden section on [lo, hi]
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo_s.psi, b = hi_s.psi;
  Sample c = eval(b - inv_phi * (b - a));
  Sample d = eval(a + inv_phi * (b - a));
  Sample winner = coarse[best];
  for (const Sample* s : std::array<const Sample*, 4>{&lo_s, &hi_s, &c, &d})
    if (detail::better(*s, winner)) winner = *s;
  while (b - a > settings.refine_tol) {
    if (c.value.energy < d.value.energy) {
      b = d.psi;
      d = c;
      c = eval(b - inv_phi * (b - a));
      if (detail::better(c, winner)) winner = c;
    } else {
      a = c.psi;
      c = d;
      d = eval(a + inv_phi * (b - a));
      if (detail::better(d, winner)) winner = d;
    }
  }

  if (p.dissipative() || hop < 0.0) return result(winner);

  // Stationarity polish: f(psi) = psi - Re<a> has the sign of dE/dpsi.
  auto f = [](const Sample& s) { return s.psi - s.value.a_expect; };
  Sample left = lo_s;
  const Sample right = hi_s;
  if (f(right) <= 0.0) return result(winner);
  if (left.psi == 0.0) {
    left = eval(right.psi * 1e-3);
    if (f(left) >= 0.0) return result(coarse[0]);
  } else if (f(left) >= 0.0) {
    return result(winner);
  }

  // Illinois regula falsi on [left, right] with f(left) < 0 < f(right)
  Sample l = left, r = right;
  double fl = f(l), fr = f(r);
  int side = 0;
  Sample root = winner;
  for (int it = 0; it < 100; ++it) {
    const double x = (l.psi * fr - r.psi * fl) / (fr - fl);
    const Sample s = eval(x);
    const double fs = f(s);
    root = s;
    if (fs == 0.0 || r.psi - l.psi <= 4.0 * detail::kEps * std::max(1.0, x)) break;
    if (fs < 0.0) {
      l = s;
      fl = fs;
      if (side == -1) fr *= 0.5;
      side = -1;
    } else {
      r = s;
      fr = fs;
      if (side == 1) fl *= 0.5;
      side = 1;
    }
    if (std::abs(fs) <= 1e-15 * std::max(1.0, x)) break;
  }
  // keep the polished point unless it is clearly worse in energy
  if (root.value.energy > winner.value.energy + 1e-9) return result(winner);
  return result(root);
}

enum class Phase { mott_insulator, superfluid };

inline const char* to_string(Phase ph) { return ph == Phase::superfluid ? "SF" : "MI"; }

struct PhasePoint {
  double mu = 0.0;
  double k = 0.0;
  double psi_star = 0.0;
  int sector = 0;
  double energy = 0.0;
  Phase phase = Phase::mott_insulator;
  double a_expect = 0.0;
  double excitations = 0.0;  // <N> including the S+S-/2 sector constant
  double polaritons = 0.0;   // <a+a + sigma+sigma->
  std::array<double, 3> sector_energies{};  // minimised energy for s = -1, 0, +1

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// Minimise in every NV sector and keep the lowest. Ties (within 1e-12) go to
/// the smaller |s|, then to s = +1 over s = -1.
inline PhasePoint order_parameter(const SystemParams& p, const MinimizeSettings& settings) {
  validate(p);
  PhasePoint out;
  out.mu = p.mu;
  out.k = p.k;
  std::array<MinimizeResult, 3> results;
  for (std::size_t i = 0; i < 3; ++i) {
    results[i] = minimize_psi(p, kAllSectors[i], settings);
    out.sector_energies[i] = results[i].energy;
  }
  constexpr std::array<std::size_t, 3> preference{1, 2, 0};  // s = 0, +1, -1
  std::size_t win = preference[0];
  for (std::size_t idx : {preference[1], preference[2]})
    if (results[idx].energy < results[win].energy - detail::kPlateau) win = idx;

  const MinimizeResult& r = results[win];
  const SectorLabel sector = kAllSectors[win];
  out.psi_star = r.psi_star;
  out.sector = sector.s;
  out.energy = r.energy;
  out.a_expect = r.a_expect;
  out.polaritons = r.polaritons;
  out.excitations = r.polaritons + 0.5 * sector.splus_sminus_eigenvalue();
  out.phase = r.psi_star > settings.sf_threshold ? Phase::superfluid : Phase::mott_insulator;
  return out;
}

}  // namespace jchmf
