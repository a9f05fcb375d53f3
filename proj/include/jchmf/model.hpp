#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "jchmf/dense_matrix.hpp"
#include "jchmf/errors.hpp"
#include "jchmf/operators.hpp"

namespace jchmf {

/// One lattice site (resonator + flux qubit + NV) plus the lattice constants
/// that enter through mean field. Energies are in units of the TLR-qubit
/// coupling g; b_z is in tesla and gamma_e in g per tesla.
struct SystemParams {
  double omega_r = 200.0;
  double delta = 0.0;  // omega_r - omega_0
  double g = 1.0;
  double eta = 0.0;
  double d_zfs = 0.0;
  double gamma_e = 0.0;
  double b_z = 0.0;
  double mu = 0.0;
  double k = 0.0;
  double z = 4.0;
  double alpha = 0.0;  // flux quanta per plaquette
  double gamma_qubit = 0.0;
  double kappa = 0.0;
  std::size_t n_max = 12;

  double omega_0() const noexcept { return omega_r - delta; }
  bool dissipative() const noexcept { return gamma_qubit != 0.0 || kappa != 0.0; }
  /// Flux outside [0, 1/4] is accepted but outside the explored window.
  bool alpha_flagged() const noexcept { return alpha < 0.0 || alpha > 0.25; }
};

/// Throws ContractViolation naming the first broken invariant.
inline void validate(const SystemParams& p) {
  if (!(p.g > 0.0)) throw ContractViolation("SystemParams: g must be > 0");
  if (p.n_max < 4) throw ContractViolation("SystemParams: n_max must be >= 4");
  if (!(p.z >= 1.0)) throw ContractViolation("SystemParams: z must be >= 1");
  if (!(p.k >= 0.0)) throw ContractViolation("SystemParams: k must be >= 0");
  if (!(p.gamma_qubit >= 0.0)) throw ContractViolation("SystemParams: gamma_qubit must be >= 0");
  if (!(p.kappa >= 0.0)) throw ContractViolation("SystemParams: kappa must be >= 0");
}

/// NV spin projection s in {-1, 0, +1}; a conserved label, not a basis index.
struct SectorLabel {
  int s = 0;

  constexpr SectorLabel() = default;
  constexpr explicit SectorLabel(int value) : s(value) {
    if (value < -1 || value > 1) throw ContractViolation("SectorLabel: s must be -1, 0 or +1");
  }

  /// S+S- = S^2 - Sz^2 + Sz for spin 1.
  constexpr double splus_sminus_eigenvalue() const noexcept { return 2.0 - s * s + s; }

  friend constexpr bool operator==(SectorLabel, SectorLabel) = default;
};

inline constexpr std::array<SectorLabel, 3> kAllSectors{SectorLabel{-1}, SectorLabel{0},
                                                        SectorLabel{1}};

/// Eigenvalue of gamma_e B_z Sz + D (Sz^2 - 2/3) in sector s.
inline double chi(SectorLabel sector, const SystemParams& p) {
  const double s = sector.s;
  return p.gamma_e * p.b_z * s + p.d_zfs * (s * s - 2.0 / 3.0);
}

/// cos(2 pi alpha), exact at multiples of a quarter period so that
/// alpha = 1/4 switches hopping off identically.
inline double flux_factor(double alpha) {
  const double quarters = 4.0 * alpha;
  if (quarters == std::nearbyint(quarters)) {
    switch (static_cast<long long>(std::nearbyint(quarters)) & 3) {
      case 0: return 1.0;
      case 1: return 0.0;
      case 2: return -1.0;
      default: return 0.0;
    }
  }
  return std::cos(2.0 * std::numbers::pi * alpha);
}

/// Single-site Hamiltonian in sector s:
/// omega_r (a+a + 1/2) + (omega_0/2 + eta s/2) sigma_z + chi(s) + g (a+ sigma- + a sigma+).
inline DenseMatrix build_site_hamiltonian(const SystemParams& p, SectorLabel sector) {
  const std::size_t dim = site_dimension(p.n_max);
  DenseMatrix h(dim, dim);
  const double qubit_half = 0.5 * p.omega_0() + 0.5 * p.eta * sector.s;
  const double nv = chi(sector, p);
  for (std::size_t n = 0; n <= p.n_max; ++n) {
    const double photon = p.omega_r * (static_cast<double>(n) + 0.5);
    h(2 * n, 2 * n) = photon - qubit_half + nv;
    h(2 * n + 1, 2 * n + 1) = photon + qubit_half + nv;
    if (n >= 1) {
      // <n, g| a+ sigma- |n-1, e> = sqrt(n)
      const double c = p.g * std::sqrt(static_cast<double>(n));
      h(2 * n, 2 * n - 1) = c;
      h(2 * n - 1, 2 * n) = c;
    }
  }
  return h;
}

/// Mean-field single-site matrix covering real hopping, flux-reduced hopping
/// and the non-Hermitian decay terms:
///   H0 - z k_eff psi (a + a+) + z k_eff psi^2 - mu N - i Gamma/2 sigma+sigma- - i kappa/2 a+a,
/// with k_eff = k cos(2 pi alpha) and N = a+a + sigma+sigma- + S+S-/2.
inline DenseMatrix build_meanfield_matrix(const SystemParams& p, SectorLabel sector, double psi) {
  DenseMatrix h = build_site_hamiltonian(p, sector);
  const double k_eff = p.k * flux_factor(p.alpha);
  const double hop = p.z * k_eff;
  const double constant = hop * psi * psi - p.mu * 0.5 * sector.splus_sminus_eigenvalue();
  for (std::size_t n = 0; n <= p.n_max; ++n) {
    const double nd = static_cast<double>(n);
    h(2 * n, 2 * n) += cplx(constant - p.mu * nd, -0.5 * p.kappa * nd);
    h(2 * n + 1, 2 * n + 1) +=
        cplx(constant - p.mu * (nd + 1.0), -0.5 * p.kappa * nd - 0.5 * p.gamma_qubit);
    if (n >= 1) {
      const double c = -hop * psi * std::sqrt(nd);
      for (std::size_t q = 0; q < 2; ++q) {
        h(2 * n + q, 2 * (n - 1) + q) += c;
        h(2 * (n - 1) + q, 2 * n + q) += c;
      }
    }
  }
  return h;
}

enum class Branch { plus, minus };

inline const char* to_string(Branch b) { return b == Branch::plus ? "+" : "-"; }

/// Energy of the n = 0 level |0, g>, the single state outside the doublets.
inline double ground_level_energy(const SystemParams& p, SectorLabel sector) {
  return 0.5 * p.omega_r - 0.5 * p.omega_0() + chi(sector, p) - 0.5 * p.eta * sector.s;
}

/// Dressed-state energy of the n-excitation doublet {|n, g>, |n-1, e>}:
///   n omega_r + chi(s) +/- sqrt(4 n g^2 + (delta - eta s)^2) / 2.
/// The printed two-sign form sqrt(4ng^2 + delta^2 -/+ 2 delta eta + eta^2) maps to
/// sector s through delta_eff = delta - eta s: the "+2 delta eta" sign belongs to
/// s = -1, the "-" sign to s = +1, and the eta terms drop out for s = 0.
/// Zero-point terms (omega_r/2, -omega_0/2) are kept, so this equals the
/// eigenvalue of build_site_hamiltonian with no offset.
inline double dressed_energy(const SystemParams& p, SectorLabel sector, Branch branch,
                             std::size_t n) {
  if (n == 0)
    throw ContractViolation(
        "dressed_energy: n = 0 is the single level |0, g>, not a doublet; use ground_level_energy");
  const double nd = static_cast<double>(n);
  const double delta_eff = p.delta - p.eta * sector.s;
  const double root = std::sqrt(4.0 * nd * p.g * p.g + delta_eff * delta_eff);
  const double sign = branch == Branch::plus ? 1.0 : -1.0;
  return nd * p.omega_r + chi(sector, p) + 0.5 * sign * root;
}

struct Repulsion {
  double full;       // U(n) = E(n+1) - E(n)
  double nonlinear;  // U(n) - omega_r
};

/// Effective on-site repulsion of one dressed branch.
inline Repulsion onsite_repulsion(const SystemParams& p, SectorLabel sector, Branch branch,
                                  std::size_t n) {
  if (n == 0) throw ContractViolation("onsite_repulsion: n must be >= 1");
  const double u = dressed_energy(p, sector, branch, n + 1) - dressed_energy(p, sector, branch, n);
  // Form the nonlinear part from the roots directly: subtracting omega_r from
  // U loses ~1e-14 * omega_r to cancellation at large n.
  const double delta_eff = p.delta - p.eta * sector.s;
  const double nd = static_cast<double>(n);
  const double sign = branch == Branch::plus ? 1.0 : -1.0;
  const double r1 = std::sqrt(4.0 * (nd + 1.0) * p.g * p.g + delta_eff * delta_eff);
  const double r0 = std::sqrt(4.0 * nd * p.g * p.g + delta_eff * delta_eff);
  // r1 - r0 = 4 g^2 / (r1 + r0)
  const double nonlinear = 0.5 * sign * (4.0 * p.g * p.g) / (r1 + r0);
  return {u, nonlinear};
}

// ---------------------------------------------------------------------------
// Circuit geometry -> coupling rates (SI)

inline constexpr double kMu0 = 1.25663706212e-6;         // vacuum permeability, H/m
inline constexpr double kHbar = 1.054571817e-34;         // J s
inline constexpr double kGammaElectron = 1.76085963e11;  // electron gyromagnetic ratio, rad/(s T)

struct GeometryParams {
  double l_r = 2e-9;                             // resonator inductance, H
  double omega_r_si = 2.0 * std::numbers::pi * 6e9;  // rad/s
  double i_p = 600e-9;                           // persistent current, A
  double r = 0.2e-6;                             // loop radius, m
  double d = 5e-6;                               // loop to centre conductor, m
  double z_0 = 50.0;                             // ohm
  double c_hop = 35e-18;                         // F
  double c_out = 1e-15;                          // F
};

inline void validate(const GeometryParams& g) {
  const std::array<std::pair<const char*, double>, 8> fields{{{"l_r", g.l_r},
                                                              {"omega_r_si", g.omega_r_si},
                                                              {"i_p", g.i_p},
                                                              {"r", g.r},
                                                              {"d", g.d},
                                                              {"z_0", g.z_0},
                                                              {"c_hop", g.c_hop},
                                                              {"c_out", g.c_out}}};
  for (const auto& [name, value] : fields)
    if (!(value > 0.0))
      throw ContractViolation(std::string("GeometryParams: ") + name + " must be > 0");
}

struct DerivedCouplings {
  double g_si = 0.0;      // rad/s
  double eta_si = 0.0;    // rad/s
  double k_si = 0.0;      // rad/s
  double kappa_si = 0.0;  // rad/s
  std::string units_note;
};

/// g = (I_p mu0 r^2 / d) sqrt(omega_r / (2 L_r hbar)),  eta = I_p mu0 gamma_e / r,
/// k = 2 Z0 C omega_r^2,  kappa = 4 Z0^2 C_out^2 omega_r^3.
inline DerivedCouplings derive_couplings(const GeometryParams& geom,
                                         double gamma_e_si = kGammaElectron) {
  validate(geom);
  DerivedCouplings out;
  // Vacuum current sqrt(hbar omega / 2L) times the mutual flux per unit current,
  // divided by hbar to give a rate.
  out.g_si = (geom.i_p * kMu0 * geom.r * geom.r / geom.d) *
             std::sqrt(geom.omega_r_si / (2.0 * geom.l_r * kHbar));
  out.eta_si = geom.i_p * kMu0 * gamma_e_si / geom.r;
  out.k_si = 2.0 * geom.z_0 * geom.c_hop * geom.omega_r_si * geom.omega_r_si;
  out.kappa_si = 4.0 * geom.z_0 * geom.z_0 * geom.c_out * geom.c_out *
                 std::pow(geom.omega_r_si, 3);
  out.units_note =
      "hbar = 1 formulas evaluated in SI: g restores hbar through the resonator vacuum current "
      "sqrt(hbar omega_r / 2 L_r); eta, k and kappa are taken as angular rates (rad/s). "
      "Quoted reference magnitudes pin this normalisation only to within a factor ~2 for eta "
      "and an order of magnitude for g.";
  return out;
}

/// Mutual capacitance that yields hopping rate k_si (rad/s): C = k / (2 Z0 omega_r^2).
inline double hopping_capacitance(double k_si, double z_0, double omega_r_si) {
  return k_si / (2.0 * z_0 * omega_r_si * omega_r_si);
}

}  // namespace jchmf
