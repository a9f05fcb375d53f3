#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "jchmf/errors.hpp"
#include "jchmf/meanfield.hpp"
#include "jchmf/model.hpp"

namespace jchmf {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// handled exactly once and results must be written to index-addressed slots,
/// so the outcome does not depend on scheduling. If any call throws, the
/// exception from the lowest failing index is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (count == 0) return;
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct SweepSpec {
  double mu_min = 0.0;
  double mu_max = 1.0;
  std::size_t mu_points = 40;
  double k_min = 0.0;
  double k_max = 1.0;
  std::size_t k_points = 40;
  SystemParams base_params;
  MinimizeSettings settings;

  double mu_at(std::size_t i) const {
    return mu_min + static_cast<double>(i) * (mu_max - mu_min) / static_cast<double>(mu_points - 1);
  }
  double k_at(std::size_t j) const {
    return k_min + static_cast<double>(j) * (k_max - k_min) / static_cast<double>(k_points - 1);
  }
  SystemParams params_at(double mu, double k) const {
    SystemParams p = base_params;
    p.mu = mu;
    p.k = k;
    return p;
  }
};

inline void validate(const SweepSpec& s) {
  if (s.mu_points < 2) throw ContractViolation("SweepSpec: mu_points must be >= 2");
  if (s.k_points < 2) throw ContractViolation("SweepSpec: k_points must be >= 2");
  if (!(s.mu_min < s.mu_max)) throw ContractViolation("SweepSpec: mu_min must be < mu_max");
  if (!(s.k_min >= 0.0 && s.k_min < s.k_max))
    throw ContractViolation("SweepSpec: need 0 <= k_min < k_max");
  validate(s.base_params);
  validate(s.settings, s.base_params);
}

struct BoundaryPoint {
  double mu = 0.0;
  double k_c = 0.0;
  std::size_t row = 0;
  bool reentrant = false;  // a second (or later) MI->SF crossing in the same row

  friend bool operator==(const BoundaryPoint&, const BoundaryPoint&) = default;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<PhasePoint> grid;  // row-major: mu index major, k index minor
  std::vector<BoundaryPoint> boundary;
  double mott_area_fraction = 0.0;

  const PhasePoint& at(std::size_t i, std::size_t j) const { return grid[i * spec.k_points + j]; }
};

/// Fill every (mu_i, k_j) cell with order_parameter. Boundaries are left empty;
/// see extract_boundary.
inline SweepResult sweep_grid(const SweepSpec& spec, unsigned threads = 1) {
  validate(spec);
  SweepResult out;
  out.spec = spec;
  out.grid.resize(spec.mu_points * spec.k_points);
  parallel_for(out.grid.size(), threads, [&](std::size_t idx) {
    const std::size_t i = idx / spec.k_points;
    const std::size_t j = idx % spec.k_points;
    const double mu = spec.mu_at(i);
    const double k = spec.k_at(j);
    try {
      out.grid[idx] = order_parameter(spec.params_at(mu, k), spec.settings);
    } catch (const std::exception& e) {
      throw SweepCellError(i, j, mu, k, e.what());
    }
  });
  std::size_t mott = 0;
  for (const auto& cell : out.grid)
    if (cell.phase == Phase::mott_insulator) ++mott;
  out.mott_area_fraction = static_cast<double>(mott) / static_cast<double>(out.grid.size());
  return out;
}

/// Bisection tolerance on k used by extract_boundary.
inline double boundary_tolerance(const SweepSpec& spec) {
  return (spec.k_max - spec.k_min) / (50.0 * static_cast<double>(spec.k_points));
}

/// For each mu row, every MI -> SF step along increasing k is refined by
/// bisection on order_parameter to boundary_tolerance(). The first crossing of
/// a row is its boundary point; later ones are flagged reentrant. Single-phase
/// rows contribute nothing.
inline std::vector<BoundaryPoint> extract_boundary(const SweepResult& result, unsigned threads = 1) {
  const SweepSpec& spec = result.spec;
  struct Crossing {
    std::size_t row;
    std::size_t col;  // MI at col, SF at col + 1
    bool reentrant;
  };
  std::vector<Crossing> crossings;
  for (std::size_t i = 0; i < spec.mu_points; ++i) {
    bool first = true;
    for (std::size_t j = 0; j + 1 < spec.k_points; ++j)
      if (result.at(i, j).phase == Phase::mott_insulator &&
          result.at(i, j + 1).phase == Phase::superfluid) {
        crossings.push_back({i, j, !first});
        first = false;
      }
  }

  const double tol = boundary_tolerance(spec);
  std::vector<BoundaryPoint> out(crossings.size());
  parallel_for(crossings.size(), threads, [&](std::size_t c) {
    const Crossing& x = crossings[c];
    const double mu = spec.mu_at(x.row);
    double lo = spec.k_at(x.col);
    double hi = spec.k_at(x.col + 1);
    try {
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (order_parameter(spec.params_at(mu, mid), spec.settings).phase == Phase::superfluid)
          hi = mid;
        else
          lo = mid;
      }
    } catch (const std::exception& e) {
      throw SweepCellError(x.row, x.col, mu, 0.5 * (lo + hi), e.what());
    }
    out[c] = BoundaryPoint{mu, 0.5 * (lo + hi), x.row, x.reentrant};
  });
  return out;
}

struct LobeTip {
  double mu = 0.0;
  double k = 0.0;
};

struct LobeMetrics {
  std::vector<LobeTip> tips;
  double mott_area_fraction = 0.0;
};

/// Lobe tips are local maxima of k_c(mu) over the primary boundary points in
/// row order (interior points only; a plateau reports its smallest mu). A
/// boundary with a single point is its own tip.
inline LobeMetrics lobe_metrics(const SweepResult& result) {
  std::vector<BoundaryPoint> primary;
  for (const auto& b : result.boundary)
    if (!b.reentrant) primary.push_back(b);
  if (primary.empty()) throw EmptyBoundary();
  std::sort(primary.begin(), primary.end(),
            [](const BoundaryPoint& a, const BoundaryPoint& b) { return a.row < b.row; });

  LobeMetrics out;
  out.mott_area_fraction = result.mott_area_fraction;
  if (primary.size() == 1) {
    out.tips.push_back({primary[0].mu, primary[0].k_c});
    return out;
  }
  const std::size_t last = primary.size() - 1;
  std::size_t a = 1;
  while (a < last) {
    std::size_t b = a;
    while (b + 1 <= last && primary[b + 1].k_c == primary[a].k_c) ++b;
    const bool rises = primary[a - 1].k_c < primary[a].k_c;
    const bool falls = b < last && primary[b + 1].k_c < primary[b].k_c;
    if (rises && falls) out.tips.push_back({primary[a].mu, primary[a].k_c});
    a = b + 1;
  }
  return out;
}

/// Tip with the largest k. Throws EmptyBoundary if there are none.
inline LobeTip highest_tip(const LobeMetrics& m) {
  if (m.tips.empty()) throw EmptyBoundary();
  LobeTip best = m.tips.front();
  for (const auto& t : m.tips)
    if (t.k > best.k) best = t;
  return best;
}

/// Mu positions (midpoints between rows) where the rounded polariton number of
/// column j changes: the Mott-lobe edges of the atomic limit when k_j ~ 0.
inline std::vector<double> occupation_steps(const SweepResult& result, std::size_t k_index) {
  std::vector<double> edges;
  const SweepSpec& spec = result.spec;
  for (std::size_t i = 0; i + 1 < spec.mu_points; ++i) {
    const double a = std::round(result.at(i, k_index).polaritons);
    const double b = std::round(result.at(i + 1, k_index).polaritons);
    if (a != b) edges.push_back(0.5 * (spec.mu_at(i) + spec.mu_at(i + 1)));
  }
  return edges;
}

}  // namespace jchmf
