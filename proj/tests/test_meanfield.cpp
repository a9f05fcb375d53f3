#include <gtest/gtest.h>

#include <cmath>

#include "jchmf/meanfield.hpp"

using namespace jchmf;

namespace {

// g = 1, omega_r = 200, resonant, weak NV coupling.
SystemParams resonant(double mu, double k) {
  SystemParams p;
  p.eta = 0.01;
  p.mu = mu;
  p.k = k;
  return p;
}

}  // namespace

TEST(MinimizeSettings, Validation) {
  SystemParams p;
  MinimizeSettings s;
  EXPECT_NO_THROW(validate(s, p));
  EXPECT_DOUBLE_EQ(s.resolved_psi_max(p), std::sqrt(12.0) / 3.0);
  s.coarse_points = 2;
  EXPECT_THROW(validate(s, p), ContractViolation);
  s = MinimizeSettings{};
  s.refine_tol = 2.0;
  EXPECT_THROW(validate(s, p), ContractViolation);
  s = MinimizeSettings{};
  s.psi_max = 0.0;
  EXPECT_THROW(validate(s, p), ContractViolation);
}

TEST(GroundValue, FlatInPsiWithoutHopping) {
  const SystemParams p = resonant(199.3, 0.0);
  const MinimizeSettings s;
  const double e0 = ground_value(p, SectorLabel{0}, 0.0, s).energy;
  for (double psi : {0.1, 0.5, 1.0}) EXPECT_DOUBLE_EQ(ground_value(p, SectorLabel{0}, psi, s).energy, e0);
}

TEST(GroundValue, SuperfluidSideFavoursFinitePsi) {
  const SystemParams p = resonant(199.3, 0.2);
  const MinimizeSettings s;
  EXPECT_LT(ground_value(p, SectorLabel{0}, 0.3, s).energy, ground_value(p, SectorLabel{0}, 0.0, s).energy);
}

TEST(GroundValue, DissipationShiftIsFirstOrder) {
  SystemParams p = resonant(198.0, 0.05);  // vacuum Mott region: ground state ~ |0, g>
  const MinimizeSettings s;
  const double hermitian = ground_value(p, SectorLabel{0}, 0.0, s).energy;
  p.gamma_qubit = p.kappa = 0.01;
  const double lossy = ground_value(p, SectorLabel{0}, 0.0, s).energy;
  EXPECT_LE(std::abs(lossy - hermitian), 0.5 * (p.gamma_qubit + p.kappa));
}

TEST(GroundValue, TruncationGuardTrips) {
  SystemParams p = resonant(199.5, 0.3);
  p.n_max = 4;
  MinimizeSettings s;
  try {
    ground_value(p, SectorLabel{0}, 2.0, s);
    FAIL() << "expected TruncationOverflow";
  } catch (const TruncationOverflow& e) {
    EXPECT_EQ(e.psi(), 2.0);
    EXPECT_GT(e.top_probability(), s.truncation_guard);
  }
}

TEST(MinimizePsi, ZeroHoppingGivesExactZero) {
  const auto r = minimize_psi(resonant(199.3, 0.0), SectorLabel{0}, MinimizeSettings{});
  EXPECT_EQ(r.psi_star, 0.0);
}

TEST(MinimizePsi, QuarterFluxGivesExactZero) {
  SystemParams p = resonant(199.3, 0.5);
  p.alpha = 0.25;
  EXPECT_EQ(minimize_psi(p, SectorLabel{0}, MinimizeSettings{}).psi_star, 0.0);
}

TEST(MinimizePsi, MottPointAgreesWithDenseScan) {
  const SystemParams p = resonant(199.5, 0.01);
  const MinimizeSettings s;
  const auto r = minimize_psi(p, SectorLabel{0}, s);
  EXPECT_LE(r.psi_star, s.sf_threshold);

  // independent oracle: 10x denser plain scan
  const double psi_max = s.resolved_psi_max(p);
  double best_psi = 0.0, best_e = ground_value(p, SectorLabel{0}, 0.0, s).energy;
  for (int i = 1; i <= 2000; ++i) {
    const double psi = psi_max * i / 2000.0;
    const double e = ground_value(p, SectorLabel{0}, psi, s).energy;
    if (e < best_e - 1e-12) {
      best_e = e;
      best_psi = psi;
    }
  }
  EXPECT_LE(best_psi, s.sf_threshold);
}

TEST(MinimizePsi, SuperfluidPointIsStationary) {
  const SystemParams p = resonant(199.2, 0.06);
  const auto r = minimize_psi(p, SectorLabel{0}, MinimizeSettings{});
  EXPECT_GT(r.psi_star, 0.1);
  EXPECT_LE(std::abs(r.a_expect - r.psi_star), 1e-4 * std::max(1.0, r.psi_star));
  // energy is a minimum against nearby psi
  const MinimizeSettings s;
  for (double d : {-1e-3, 1e-3})
    EXPECT_GE(ground_value(p, SectorLabel{0}, r.psi_star + d, s).energy, r.energy - 1e-12);
}

TEST(MinimizePsi, GeneralSolverPathAgrees) {
  const SystemParams p = resonant(199.2, 0.06);
  MinimizeSettings s;
  const auto sym = minimize_psi(p, SectorLabel{0}, s);
  s.force_general_solver = true;
  const auto gen = minimize_psi(p, SectorLabel{0}, s);
  EXPECT_NEAR(gen.psi_star, sym.psi_star, 1e-9);
  EXPECT_NEAR(gen.energy, sym.energy, 1e-9);
}

TEST(MinimizePsi, ContinuousOnsetAcrossBoundary) {
  // mu inside the first lobe: psi* stays 0 below k_c and grows without a jump
  const MinimizeSettings s;
  double previous = 0.0;
  bool seen_sf = false;
  for (int i = 0; i <= 12; ++i) {
    const double k = 0.02 + 0.004 * i;
    const double psi = minimize_psi(resonant(199.2, k), SectorLabel{0}, s).psi_star;
    if (!seen_sf && psi > s.sf_threshold) {
      seen_sf = true;
      EXPECT_LT(psi, 0.4) << "jump at k=" << k;
    }
    if (seen_sf) EXPECT_GE(psi, previous);
    previous = psi;
  }
  EXPECT_TRUE(seen_sf);
}

TEST(OrderParameter, DecoupledNvPicksSectorByConstant) {
  SystemParams p = resonant(199.2, 0.06);
  p.eta = 0.0;
  p.b_z = 0.0;
  p.d_zfs = 100.0;
  const MinimizeSettings s;
  const auto pt = order_parameter(p, s);
  // chi(0) - mu = -66.7 - mu beats chi(+1) - mu = 33.3 - mu and chi(-1) = 33.3
  EXPECT_EQ(pt.sector, 0);
  const double a = minimize_psi(p, SectorLabel{-1}, s).psi_star;
  const double b = minimize_psi(p, SectorLabel{0}, s).psi_star;
  const double c = minimize_psi(p, SectorLabel{1}, s).psi_star;
  EXPECT_NEAR(a, b, 1e-9);
  EXPECT_NEAR(b, c, 1e-9);
}

TEST(OrderParameter, TieBreakPrefersSmallerSpin) {
  SystemParams p = resonant(199.2, 0.0);
  p.eta = 0.0;
  p.d_zfs = 0.0;
  p.b_z = 0.0;
  p.mu = 0.0;  // every sector has the same energy
  const auto pt = order_parameter(p, MinimizeSettings{});
  EXPECT_EQ(pt.sector, 0);
  EXPECT_EQ(pt.phase, Phase::mott_insulator);
}

TEST(OrderParameter, FieldSelectsSector) {
  SystemParams p = resonant(198.5, 0.0);
  p.d_zfs = 100.0;
  p.gamma_e = -1e3;
  p.eta = 1.2;
  p.b_z = -0.3;
  EXPECT_EQ(order_parameter(p, MinimizeSettings{}).sector, -1);
  p.b_z = 0.3;
  EXPECT_EQ(order_parameter(p, MinimizeSettings{}).sector, 1);
}

TEST(OrderParameter, PhaseFollowsThreshold) {
  const MinimizeSettings s;
  const auto mi = order_parameter(resonant(199.2, 0.01), s);
  EXPECT_EQ(mi.phase, Phase::mott_insulator);
  EXPECT_EQ(mi.psi_star, 0.0);
  EXPECT_NEAR(mi.polaritons, 1.0, 1e-6);
  const auto sf = order_parameter(resonant(199.2, 0.06), s);
  EXPECT_EQ(sf.phase, Phase::superfluid);
  EXPECT_GT(sf.psi_star, s.sf_threshold);
  EXPECT_STREQ(to_string(sf.phase), "SF");
  EXPECT_STREQ(to_string(mi.phase), "MI");
}
