#include "c0embed/metric_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace c0embed {

const char* errc_name(errc c) {
  switch (c) {
    case errc::asymmetry: return "Asymmetry";
    case errc::nonzero_diagonal: return "NonzeroDiagonal";
    case errc::zero_off_diagonal: return "ZeroOffDiagonal";
    case errc::triangle_violation: return "TriangleViolation";
    case errc::empty_pair_set: return "EmptyPairSet";
    case errc::empty_set: return "EmptySet";
    case errc::bad_index: return "BadIndex";
    case errc::lipschitz_hypothesis_violated: return "LipschitzHypothesisViolated";
    case errc::lower_bound_hypothesis_violated: return "LowerBoundHypothesisViolated";
    case errc::gap_hypothesis_violated: return "GapHypothesisViolated";
    case errc::no_feasible_epsilon: return "NoFeasibleEpsilon";
    case errc::non_decreasing_eps_seq: return "NonDecreasingEpsSeq";
    case errc::eps_seq_exhausted: return "EpsSeqExhausted";
    case errc::provider_hypothesis_violated: return "ProviderHypothesisViolated";
    case errc::cover_hypothesis_violated: return "CoverHypothesisViolated";
    case errc::too_large: return "TooLarge";
    case errc::scale_infeasible: return "ScaleInfeasible";
    case errc::not_good: return "NotGood";
    case errc::seed_too_small: return "SeedTooSmall";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::bad_spec: return "BadSpec";
    case errc::io_error: return "IoError";
    case errc::parse_error: return "ParseError";
    case errc::schema_error: return "SchemaError";
    case errc::invariant_error: return "InvariantError";
    case errc::bad_config: return "BadConfig";
  }
  return "UnknownError";
}

double p_norm(std::span<const double> v, double p) {
  if (std::isinf(p)) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  }
  if (p == 1.0) {
    double s = 0;
    for (double x : v) s += std::fabs(x);
    return s;
  }
  if (p == 2.0) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  double s = 0;
  for (double x : v) s += std::pow(std::fabs(x), p);
  return std::pow(s, 1.0 / p);
}

double p_dist(std::span<const double> a, std::span<const double> b, double p) {
  std::vector<double> diff(a.size());
  for (size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return p_norm(diff, p);
}

static void finish_stats(MetricSpace&, int) {}

MetricSpace MetricSpace::from_matrix(std::vector<std::vector<double>> m,
                                     std::vector<std::string> labels) {
  const int n = static_cast<int>(m.size());
  MetricSpace s;
  s.n_ = n;
  s.d_.assign(static_cast<size_t>(n) * n, 0.0);
  double diam = 0;
  double minsep = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(m[i].size()) != n)
      throw calc_error(errc::bad_spec, "matrix is not square at row " + std::to_string(i), i);
    for (int j = 0; j < n; ++j) {
      s.d_[static_cast<size_t>(i) * n + j] = m[i][j];
      if (i != j) {
        diam = std::max(diam, m[i][j]);
        minsep = std::min(minsep, m[i][j]);
      }
    }
  }
  s.diameter_ = diam;
  s.min_sep_ = (n > 1) ? minsep : 0.0;
  s.labels_ = std::move(labels);
  finish_stats(s, n);
  return s;
}

MetricSpace MetricSpace::from_points(double p, std::vector<std::vector<double>> pts,
                                     std::vector<std::string> labels) {
  if (p < 1.0) throw calc_error(errc::bad_spec, "exponent p must be >= 1");
  const int n = static_cast<int>(pts.size());
  const size_t dim = n > 0 ? pts[0].size() : 0;
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    if (pts[i].size() != dim)
      throw calc_error(errc::bad_spec, "ragged point dimensions at index " + std::to_string(i), i);
    for (int j = i + 1; j < n; ++j)
      m[i][j] = m[j][i] = p_dist(pts[i], pts[j], p);
  }
  MetricSpace s = from_matrix(std::move(m), std::move(labels));
  s.exponent_ = p;
  s.points_ = std::move(pts);
  return s;
}

MetricSpace validate_metric(const std::vector<std::vector<double>>& m,
                            std::vector<std::string> labels) {
  const int n = static_cast<int>(m.size());
  for (int i = 0; i < n; ++i)
    if (static_cast<int>(m[i].size()) != n)
      throw calc_error(errc::bad_spec, "matrix is not square at row " + std::to_string(i), i);
  for (int i = 0; i < n; ++i) {
    if (std::fabs(m[i][i]) > kAxiomTol)
      throw calc_error(errc::nonzero_diagonal,
                       "d(" + std::to_string(i) + "," + std::to_string(i) + ") = " +
                           std::to_string(m[i][i]), i, i);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (std::fabs(m[i][j] - m[j][i]) > kAxiomTol)
        throw calc_error(errc::asymmetry,
                         "d(" + std::to_string(i) + "," + std::to_string(j) + ") != d(" +
                             std::to_string(j) + "," + std::to_string(i) + ")", i, j);
      if (m[i][j] <= kAxiomTol)
        throw calc_error(errc::zero_off_diagonal,
                         "duplicate points " + std::to_string(i) + " and " + std::to_string(j) +
                             " (use merge_duplicates first)", i, j);
      if (m[i][j] < 0)
        throw calc_error(errc::zero_off_diagonal, "negative distance", i, j);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (m[i][k] > m[i][j] + m[j][k] + kAxiomTol)
          throw calc_error(errc::triangle_violation,
                           "d(" + std::to_string(i) + "," + std::to_string(k) + ") > d(" +
                               std::to_string(i) + "," + std::to_string(j) + ") + d(" +
                               std::to_string(j) + "," + std::to_string(k) + ")", i, j, k);
      }
    }
  return MetricSpace::from_matrix(m, std::move(labels));
}

std::pair<std::vector<std::vector<double>>, std::vector<int>>
merge_duplicates(const std::vector<std::vector<double>>& m, double tol) {
  const int n = static_cast<int>(m.size());
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    bool dup = false;
    for (int r : keep)
      if (std::fabs(m[i][r]) <= tol) { dup = true; break; }
    if (!dup) keep.push_back(i);
  }
  std::vector<std::vector<double>> out(keep.size(), std::vector<double>(keep.size(), 0.0));
  for (size_t a = 0; a < keep.size(); ++a)
    for (size_t b = 0; b < keep.size(); ++b) out[a][b] = m[keep[a]][keep[b]];
  return {out, keep};
}

double MetricSpace::dist_to_set(int x, std::span<const int> s) const {
  if (s.empty()) throw calc_error(errc::empty_set, "dist_to_set of empty set");
  double best = std::numeric_limits<double>::infinity();
  for (int p : s) best = std::min(best, dist(x, p));
  return best;
}

PairSet PairSet::of(std::vector<std::pair<int, int>> raw, int n) {
  for (auto& [x, y] : raw) {
    if (x < 0 || y < 0 || x >= n || y >= n)
      throw calc_error(errc::bad_index, "pair index out of range", x, y);
    if (x == y)
      throw calc_error(errc::bad_index, "pair with equal endpoints", x, y);
  }
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  PairSet e;
  e.pairs = std::move(raw);
  return e;
}

PairSet PairSet::all_distinct(int n) {
  PairSet e;
  e.pairs.reserve(static_cast<size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) e.pairs.emplace_back(i, j);
  std::sort(e.pairs.begin(), e.pairs.end());
  return e;
}

bool PairSet::contains(int x, int y) const {
  return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(x, y));
}

double gap(const MetricSpace& space, const PairSet& e) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "gap of empty pair set");
  double best = std::numeric_limits<double>::infinity();
  for (auto [x, y] : e.pairs) best = std::min(best, space.dist(x, y));
  return best;
}

double diameter_of_pairs(const MetricSpace& space, const PairSet& e) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "diameter of empty pair set");
  double best = 0;
  for (auto [x, y] : e.pairs) best = std::max(best, space.dist(x, y));
  return best;
}

Rectangle rectangle(const PairSet& e) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "rectangle of empty pair set");
  Rectangle r;
  for (auto [x, y] : e.pairs) {
    r.U.push_back(x);
    r.V.push_back(y);
  }
  auto dedup = [](std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedup(r.U);
  dedup(r.V);
  return r;
}

double set_gap(const MetricSpace& space, std::span<const int> u, std::span<const int> v) {
  if (u.empty() || v.empty()) throw calc_error(errc::empty_set, "set_gap of empty set");
  double best = std::numeric_limits<double>::infinity();
  for (int a : u)
    for (int b : v) best = std::min(best, space.dist(a, b));
  return best;
}

double d1(const MetricSpace& space, std::pair<int, int> a, std::pair<int, int> b) {
  return space.dist(a.first, b.first) + space.dist(a.second, b.second);
}

std::vector<int> farthest_first_order(const MetricSpace& space, int start) {
  const int n = space.size();
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> used(n, 0);
  std::vector<double> dmin(n, std::numeric_limits<double>::infinity());
  order.push_back(start);
  used[start] = 1;
  for (int x = 0; x < n; ++x) dmin[x] = space.dist(x, start);
  while (static_cast<int>(order.size()) < n) {
    int best = -1;
    double bestd = -1;
    for (int x = 0; x < n; ++x) {
      if (used[x]) continue;
      if (dmin[x] > bestd) {
        bestd = dmin[x];
        best = x;
      }
    }
    order.push_back(best);
    used[best] = 1;
    for (int x = 0; x < n; ++x) dmin[x] = std::min(dmin[x], space.dist(x, best));
  }
  return order;
}

}  // namespace c0embed
