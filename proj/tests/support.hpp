#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "poolkit/instance.hpp"
#include "poolkit/rank1.hpp"
#include "poolkit/solver.hpp"

namespace poolkit::fixtures {

// Feasible by construction: every demand fits in the supply delivered up to
// its time.
inline MiningSchedule random_schedule(std::uint64_t seed, int stockpiles = 2,
                                      int max_supplies = 20, int K = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MiningSchedule s;
  for (int p = 0; p < stockpiles; ++p) s.stockpiles.push_back("p" + std::to_string(p + 1));
  const int ns = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_supplies - 1));
  for (int k = 0; k < ns; ++k) {
    MiningSchedule::Supply sup;
    sup.stockpile = s.stockpiles[k % stockpiles];
    sup.time = static_cast<double>(k);
    sup.qty = std::round(10.0 + 90.0 * unit(rng));
    for (int c = 0; c < K; ++c) sup.spec.push_back(std::round(100.0 * unit(rng)) / 100.0);
    s.supplies.push_back(sup);
  }
  double cum_s = 0.0, cum_d = 0.0;
  for (int k = 0; k < ns; ++k) {
    cum_s += s.supplies[k].qty;
    if (unit(rng) < 0.6) {
      MiningSchedule::Demand d;
      d.time = k + 0.5;
      d.qty = std::round((cum_s - cum_d) * (0.3 + 0.6 * unit(rng)));
      if (d.qty <= 0.0) continue;
      for (int c = 0; c < K; ++c) d.spec_max.push_back(0.3 + 0.4 * unit(rng));
      cum_d += d.qty;
      s.demands.push_back(d);
    }
  }
  if (s.demands.empty()) {
    MiningSchedule::Demand d;
    d.time = ns;
    d.qty = std::round(cum_s / 2);
    d.spec_max.assign(K, 0.5);
    s.demands.push_back(d);
  }
  return s;
}

// Box with integer bounds, m,n <= max_dim, nonempty rank-one set.
inline BoundBox integer_box(std::mt19937_64& rng, std::size_t max_dim) {
  for (;;) {
    const std::size_t m = 1 + rng() % max_dim, n = 1 + rng() % max_dim;
    BoundBox b(m, n);
    for (std::size_t r = 0; r < m; ++r) {
      b.l[r] = static_cast<double>(rng() % 3);
      b.u[r] = b.l[r] + static_cast<double>(rng() % 4);
    }
    for (std::size_t c = 0; c < n; ++c) {
      b.lc[c] = static_cast<double>(rng() % 3);
      b.uc[c] = b.lc[c] + static_cast<double>(rng() % 4);
    }
    b.L = static_cast<double>(rng() % 4);
    b.U = b.L + static_cast<double>(rng() % 8);
    const auto [lo, hi] = total_range(b);
    if (lo <= hi && hi > 0) return b;
  }
}

namespace detail {

inline void integer_vectors(const std::vector<double>& lo, const std::vector<double>& hi,
                            std::vector<double>& cur, std::size_t k,
                            std::vector<std::vector<double>>& out) {
  if (k == lo.size()) {
    out.push_back(cur);
    return;
  }
  for (double v = lo[k]; v <= hi[k]; v += 1.0) {
    cur[k] = v;
    integer_vectors(lo, hi, cur, k + 1, out);
  }
}

}  // namespace detail

// Rank-one points u c^T / T with integer row sums u and column sums c inside
// an integer box. Two interior rows (or columns) of such a point can trade one
// unit, so every point breaking the extreme-point counts is a midpoint.
inline std::vector<Matrix> rank_one_grid(const BoundBox& box) {
  std::vector<std::vector<double>> us, cs;
  std::vector<double> cur(box.m());
  detail::integer_vectors(box.l, box.u, cur, 0, us);
  cur.assign(box.n(), 0.0);
  detail::integer_vectors(box.lc, box.uc, cur, 0, cs);
  std::vector<Matrix> pts;
  for (const auto& u : us) {
    const double T = std::accumulate(u.begin(), u.end(), 0.0);
    if (T < box.L || T > box.U) continue;
    for (const auto& c : cs) {
      if (std::accumulate(c.begin(), c.end(), 0.0) != T) continue;
      Matrix X(box.m(), box.n());
      if (T > 0)
        for (std::size_t i = 0; i < box.m(); ++i)
          for (std::size_t j = 0; j < box.n(); ++j) X(i, j) = u[i] * c[j] / T;
      pts.push_back(X);
    }
  }
  return pts;
}

// Points of `pts` that are not convex combinations of the others.
inline std::vector<Matrix> extreme_points(const std::vector<Matrix>& pts) {
  auto key = [](const std::vector<double>& v) {
    std::string k;
    for (double x : v) k += std::to_string(std::llround(x * 1e8)) + ",";
    return k;
  };
  std::set<std::string> keys;
  for (const auto& p : pts) keys.insert(key(p.a));
  std::vector<Matrix> out;
  for (std::size_t s = 0; s < pts.size(); ++s) {
    bool mid = false;
    std::vector<double> mirror(pts[s].a.size());
    for (std::size_t t = 0; t < pts.size() && !mid; ++t) {
      if (t == s) continue;
      for (std::size_t d = 0; d < mirror.size(); ++d) mirror[d] = 2 * pts[s].a[d] - pts[t].a[d];
      mid = keys.count(key(mirror)) > 0;
    }
    if (mid) continue;
    ModelIR lp;
    std::vector<Term> sum;
    std::vector<std::vector<Term>> coord(pts[s].a.size());
    for (std::size_t t = 0; t < pts.size(); ++t) {
      if (t == s) continue;
      const VarId v = lp.add_var("w[" + std::to_string(t) + "]", 0.0, 1.0);
      sum.push_back({v, 1.0});
      for (std::size_t d = 0; d < coord.size(); ++d)
        if (pts[t].a[d] != 0.0) coord[d].push_back({v, pts[t].a[d]});
    }
    lp.add_row("convex", sum, Sense::kEqual, 1.0);
    for (std::size_t d = 0; d < coord.size(); ++d)
      lp.add_row("coord[" + std::to_string(d) + "]", coord[d], Sense::kEqual, pts[s].a[d]);
    if (pts.size() == 1 || solve(lp).status == SolveStatus::kInfeasible) out.push_back(pts[s]);
  }
  return out;
}

}  // namespace poolkit::fixtures
