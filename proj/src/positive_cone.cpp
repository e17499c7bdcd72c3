#include "c0embed/positive_cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace c0embed {

ControlFunction control_function(const MetricSpace& space, double lambda, int anchor) {
  if (!(lambda > 1)) throw calc_error(errc::bad_config, "control function needs lambda > 1");
  if (anchor < 0 || anchor >= space.size())
    throw calc_error(errc::bad_index, "anchor out of range", anchor);
  ControlFunction cf;
  const int n = space.size();
  cf.phi.resize(n);
  if (lambda <= 2.0) {
    cf.theta = 1.0;
    for (int x = 0; x < n; ++x) cf.phi[x] = space.dist(x, anchor) + space.diameter();
  } else {
    cf.theta = 2.0;
    for (int x = 0; x < n; ++x) cf.phi[x] = space.dist(x, anchor);
  }
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      double d = space.dist(x, y);
      if (std::fabs(cf.phi[x] - cf.phi[y]) > d + kAxiomTol ||
          d > cf.theta * std::max(cf.phi[x], cf.phi[y]) + kAxiomTol)
        throw calc_error(errc::invariant_error, "control function invariant failed", x, y);
    }
  return cf;
}

// Annuli in the cone sense share the band construction with Example 3.2 but
// run against the max-radius threshold; re-derived margins are certified at
// lambda = 3.
PiWitness cone_annuli_partition(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "cone_annuli_partition of empty pair set");
  const double r = std::max(b1.radius, b2.radius);
  for (auto [x, y] : e.pairs) {
    if (space.dist(x, b1.center) > r + kAxiomTol)
      throw calc_error(errc::bad_spec, "pair set leaves the first ball", x);
    if (space.dist(y, b2.center) > r + kAxiomTol)
      throw calc_error(errc::bad_spec, "pair set leaves the second ball", y);
  }
  const double delta = gap(space, e);
  const double eps = delta - 3.0 * r;
  if (!(eps > 0))
    throw calc_error(errc::gap_hypothesis_violated,
                     "delta(E) <= 3 max(r1, r2): slack " + std::to_string(eps));
  const double step = 0.9 * eps;
  std::map<long long, std::vector<std::pair<int, int>>> bands;
  for (auto [x, y] : e.pairs) {
    double idx = std::floor((space.dist(x, y) - delta) / step);
    if (!(idx < 9.0e15))
      throw calc_error(errc::invariant_error, "annulus index overflow (step too small)");
    bands[static_cast<long long>(std::max(0.0, idx))].emplace_back(x, y);
  }
  std::vector<PairSet> pieces;
  for (auto& [k, v] : bands) pieces.push_back(PairSet::of(std::move(v), space.size()));
  return certify_pi(3.0, make_partition(space, e, std::move(pieces)));
}

PiWitness cone_lp_partition(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "cone_lp_partition of empty pair set");
  if (!space.has_coords())
    throw calc_error(errc::bad_spec, "cone_lp_partition needs a coordinate-backed space");
  const double p = space.exponent();
  const double r = std::max(b1.radius, b2.radius);
  const double delta = gap(space, e);
  const double diam = diameter_of_pairs(space, e);
  const double pow2p = std::pow(2.0, p);
  const double alpha = std::pow(delta, p) - (1.0 + pow2p) * std::pow(r, p);
  if (!(alpha > 0))
    throw calc_error(errc::gap_hypothesis_violated,
                     "delta(E)^p - (1+2^p) r^p = " + std::to_string(alpha) + " <= 0");
  auto feasible = [&](double eps) {
    bool c1 = std::pow(2.0 * r + eps, p) < pow2p / (1.0 + pow2p) * std::pow(delta, p) - 0.5 * alpha;
    bool c2 = std::pow(diam + eps, p) - 0.5 * alpha < std::pow(diam, p);
    return c1 && c2;
  };
  double cap = r > 0 ? 2.0 * r : 0.5 * delta;
  double eps = 0.5 * bisect_feasible_eps(cap, feasible);
  int tries = 0;
  while (eps > 0 && !feasible(eps) && tries++ < 120) eps *= 0.5;
  if (!(eps > 0) || !feasible(eps)) {
    std::ostringstream os;
    os << "no feasible epsilon in (0, " << cap << "]; residuals at eps=" << cap << ": c1 "
       << (std::pow(2.0 * r + cap, p) - (pow2p / (1.0 + pow2p) * std::pow(delta, p) - 0.5 * alpha))
       << ", c2 " << (std::pow(diam + cap, p) - 0.5 * alpha - std::pow(diam, p));
    throw calc_error(errc::no_feasible_epsilon, os.str());
  }
  return lp_truncation_partition(space, e, b1, b2, eps, std::pow(1.0 + pow2p, 1.0 / p));
}

CoordinateFunction cone_coordinate(const MetricSpace& space, std::span<const int> U,
                                   std::span<const int> V, std::span<const int> F,
                                   double eps) {
  std::vector<double> df(space.size());
  for (int x = 0; x < space.size(); ++x) df[x] = space.dist_to_set(x, F);
  return cone_coordinate(space, U, V, F, eps, df);
}

CoordinateFunction cone_coordinate(const MetricSpace& space, std::span<const int> U,
                                   std::span<const int> V, std::span<const int> F,
                                   double eps, std::span<const double> dist_f) {
  if (U.empty() || V.empty() || F.empty())
    throw calc_error(errc::empty_set, "cone_coordinate needs non-empty U, V, F");
  if (eps < 0) throw calc_error(errc::bad_spec, "cone_coordinate needs eps >= 0");
  const double duv = set_gap(space, U, V);
  double duf = std::numeric_limits<double>::infinity();
  for (int u : U) duf = std::min(duf, dist_f[u]);
  double dvf = std::numeric_limits<double>::infinity();
  for (int v : V) dvf = std::min(dvf, dist_f[v]);

  CoordinateFunction f;
  // the lemma's case is delta(V,F) <= delta(U,F); otherwise swap sides and
  // record that the difference across U x V comes out negated
  f.negated = dvf > duf;
  std::span<const int> bump_side = f.negated ? V : U;
  f.constant = std::min(duv, std::max(duf, dvf) + eps);
  f.t = f.constant;
  f.s = 0;
  f.eps = eps;
  f.values.resize(space.size());
  for (int x = 0; x < space.size(); ++x)
    f.values[x] = std::max(f.t - space.dist_to_set(x, bump_side), 0.0);
  return f;
}

APlusSet a_plus_set(const MetricSpace& space, std::vector<int> G, double alpha, double lambda) {
  if (G.empty()) throw calc_error(errc::empty_set, "A+(G,alpha) with empty G");
  if (alpha <= 0) throw calc_error(errc::bad_spec, "A+(G,alpha) requires alpha > 0");
  std::sort(G.begin(), G.end());
  G.erase(std::unique(G.begin(), G.end()), G.end());
  const int n = space.size();
  std::vector<double> dg(n);
  for (int x = 0; x < n; ++x) dg[x] = space.dist_to_set(x, G);
  std::vector<std::pair<int, int>> pairs;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (x == y) continue;
      if (space.dist(x, y) >= lambda * (std::max(dg[x], dg[y]) + alpha)) pairs.emplace_back(x, y);
    }
  APlusSet out;
  out.pairs = PairSet::of(std::move(pairs), n);
  out.G = std::move(G);
  out.alpha = alpha;
  out.lambda = lambda;
  return out;
}

std::vector<PairSet> cone_delta_blocks(const MetricSpace& space, std::span<const int> dense_order,
                                       std::span<const double> eps_seq, double lambda,
                                       const ControlFunction& phi) {
  const int n = space.size();
  if (static_cast<int>(dense_order.size()) != n)
    throw calc_error(errc::bad_spec, "dense_order must enumerate all points");
  if (static_cast<int>(phi.phi.size()) != n)
    throw calc_error(errc::shape_mismatch, "control function does not match the space");
  for (size_t k = 0; k + 1 < eps_seq.size(); ++k)
    if (!(eps_seq[k + 1] < eps_seq[k]) || !(eps_seq[k + 1] > 0))
      throw calc_error(errc::non_decreasing_eps_seq,
                       "eps sequence must be strictly decreasing and positive",
                       static_cast<long>(k));
  if (!(eps_seq[0] > phi.phi[dense_order[0]]))
    throw calc_error(errc::seed_too_small, "need eps_1 > phi(a_1)");

  std::vector<std::pair<int, int>> todo = PairSet::all_distinct(n).pairs;
  std::vector<double> dcur(n), dnext(n);
  for (int x = 0; x < n; ++x) dcur[x] = space.dist(x, dense_order[0]);

  std::vector<std::vector<std::pair<int, int>>> blocks;
  size_t k = 1;
  while (!todo.empty()) {
    if (k + 1 > eps_seq.size())
      throw calc_error(errc::eps_seq_exhausted,
                       "eps sequence exhausted before covering all pairs", static_cast<long>(k));
    for (int x = 0; x < n; ++x) dnext[x] = dcur[x];
    if (k < static_cast<size_t>(n)) {
      int added = dense_order[k];
      for (int x = 0; x < n; ++x) dnext[x] = std::min(dnext[x], space.dist(x, added));
    }
    const double eps_k = eps_seq[k - 1];
    const double eps_k1 = eps_seq[k];
    std::vector<std::pair<int, int>> here, rest;
    for (auto [x, y] : todo) {
      const double d = space.dist(x, y);
      if (k == 1 && !(d < lambda * (std::max(dcur[x], dcur[y]) + eps_k)))
        throw calc_error(errc::invariant_error, "pair not below sigma_1 (seed too small?)", x, y);
      if (d >= lambda * (std::max(dnext[x], dnext[y]) + eps_k1))
        here.emplace_back(x, y);
      else
        rest.emplace_back(x, y);
    }
    blocks.push_back(std::move(here));
    todo = std::move(rest);
    dcur = dnext;
    ++k;
  }
  std::vector<PairSet> out;
  out.reserve(blocks.size());
  for (auto& b : blocks) out.push_back(PairSet::of(std::move(b), n));
  return out;
}

namespace {

std::function<PiWitness(const PairSet&, Ball, Ball)> cone_provider_runner(
    const MetricSpace& space, double lambda, Provider provider) {
  return [&space, lambda, provider](const PairSet& e, Ball b1, Ball b2) -> PiWitness {
    switch (provider) {
      case Provider::cone_annuli: return cone_annuli_partition(space, e, b1, b2);
      case Provider::cone_lp: return cone_lp_partition(space, e, b1, b2);
      case Provider::fine: return fine_partition(space, e, lambda);
      default:
        throw calc_error(errc::bad_config, "lemma615_partition needs a cone provider");
    }
  };
}

}  // namespace

BoundedPartition lemma615_partition(const MetricSpace& space, std::span<const int> F,
                                    std::span<const int> G, double alpha, double beta,
                                    double lambda, Provider provider) {
  APlusSet ag = a_plus_set(space, std::vector<int>(G.begin(), G.end()), alpha, lambda);
  APlusSet af = a_plus_set(space, std::vector<int>(F.begin(), F.end()), beta, lambda);
  std::vector<std::pair<int, int>> diff;
  std::set_difference(ag.pairs.pairs.begin(), ag.pairs.pairs.end(), af.pairs.pairs.begin(),
                      af.pairs.pairs.end(), std::back_inserter(diff));
  PairSet delta_set = PairSet::of(std::move(diff), space.size());
  return block_partition_core(space, delta_set, F, G, alpha, beta, lambda,
                              cone_provider_runner(space, lambda, provider), /*cone=*/true);
}

Embedding build_cone_embedding(const MetricSpace& space, double lambda, Provider provider,
                               const BuildConfig& config) {
  if (!(lambda > 1.0) || !(lambda <= 3.0))
    throw calc_error(errc::bad_config, "cone embedding needs lambda in (1, 3]");
  switch (provider) {
    case Provider::cone_annuli:
      if (lambda != 3.0)
        throw calc_error(errc::bad_config, "cone-annuli provider requires lambda = 3");
      break;
    case Provider::cone_lp: {
      if (!space.has_coords())
        throw calc_error(errc::bad_config, "cone-lp provider needs a coordinate-backed space");
      double target = std::pow(1.0 + std::pow(2.0, space.exponent()), 1.0 / space.exponent());
      if (std::fabs(lambda - target) > 1e-12)
        throw calc_error(errc::bad_config, "cone-lp provider requires lambda = (1+2^p)^{1/p}");
      break;
    }
    case Provider::fine:
      break;
    default:
      throw calc_error(errc::bad_config, "plain providers cannot drive the cone builder");
  }
  if (!(config.eps_decay > 0) || !(config.eps_decay < 1))
    throw calc_error(errc::bad_config, "eps decay must lie in (0,1)");

  const int n = space.size();
  std::vector<int> order;
  if (config.order == BuildConfig::Order::farthest_first)
    order = farthest_first_order(space, 0);
  else {
    order.resize(n);
    for (int i = 0; i < n; ++i) order[i] = i;
  }
  if (n <= 1) {
    Embedding emb;
    emb.lambda = lambda;
    emb.n = n;
    emb.cone = true;
    emb.order = order;
    return emb;
  }

  ControlFunction phi = control_function(space, lambda, order[0]);
  // the seed only needs eps_1 > phi(a_1); keeping it at least diam/lambda
  // keeps the ladder and the alpha/5 profile bins at a sane scale when
  // phi(a_1) = 0 (the theta = 2 branch)
  const double eps1 =
      std::max(phi.phi[order[0]] * (1.0 + 1e-3) + 1e-9, space.diameter() / lambda);
  const double eps_floor = space.min_separation() / (4.0 * lambda);
  const int cap = n +
                  static_cast<int>(std::ceil(std::log(std::max(2.0, eps1 / eps_floor)) /
                                             std::log(1.0 / config.eps_decay))) +
                  8;
  std::vector<double> eps_seq = make_eps_ladder(eps1, config.eps_decay, eps_floor, cap + 2);
  std::vector<PairSet> blocks = cone_delta_blocks(space, order, eps_seq, lambda, phi);

  auto runner = cone_provider_runner(space, lambda, provider);
  auto partitioner = [&](int, std::span<const int> F, std::span<const int> G, double alpha,
                         double beta, const PairSet& block,
                         std::span<const double>) -> BoundedPartition {
    return block_partition_core(space, block, F, G, alpha, beta, lambda, runner, /*cone=*/true);
  };
  auto coords = [&](std::span<const int> U, std::span<const int> V, std::span<const int> F,
                    double eps, std::span<const double> dist_f) {
    return cone_coordinate(space, U, V, F, eps, dist_f);
  };
  // lemma615 certifies the F-side bound with 2 beta, so the coordinate is
  // built with eps = 2 eps_k to realize the same constant
  return assemble_embedding(space, lambda, /*cone=*/true, order, eps_seq, blocks, partitioner,
                            coords, /*coord_eps_factor=*/2.0);
}

MetricSpace counterexample_space(int p_max) {
  if (p_max < 1) throw calc_error(errc::bad_spec, "counterexample space needs p_max >= 1");
  const int dim = p_max + 1;
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  pts.push_back(std::vector<double>(dim, 0.0));
  labels.push_back("0");
  {
    std::vector<double> e0(dim, 0.0);
    e0[0] = 1.0;
    pts.push_back(e0);
    labels.push_back("e0");
  }
  for (int p = 1; p <= p_max; ++p)
    for (int k = 1; k <= p; ++k) {
      std::vector<double> a(dim, 0.0);
      a[k] = p;
      pts.push_back(a);
      labels.push_back(std::to_string(p) + "e" + std::to_string(k));
      a[0] = 1.0;
      pts.push_back(a);
      labels.push_back("e0+" + std::to_string(p) + "e" + std::to_string(k));
    }
  return MetricSpace::from_points(1.0, std::move(pts), std::move(labels));
}

const char* verdict_name(PigeonholeVerdict v) {
  switch (v) {
    case PigeonholeVerdict::direct_violation: return "DirectViolation";
    case PigeonholeVerdict::pigeonhole_contradiction: return "PigeonholeContradiction";
    case PigeonholeVerdict::inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

struct CexIndex {
  int zero = -1, e0 = -1;
  int p_max = 0;
  // point index of p e_k and e0 + p e_k, keyed by (p, k)
  std::map<std::pair<int, int>, int> pe, e0pe;
};

CexIndex index_counterexample(const MetricSpace& space) {
  if (!space.has_coords() || space.exponent() != 1.0)
    throw calc_error(errc::shape_mismatch, "pigeonhole audit needs the l1 counterexample space");
  const int n = space.size();
  int p_max = static_cast<int>((std::sqrt(4.0 * n - 7.0) - 1.0) / 2.0 + 0.5);
  if (2 + p_max * (p_max + 1) != n)
    throw calc_error(errc::shape_mismatch, "point count does not match 2 + p(p+1)");
  CexIndex ix;
  ix.p_max = p_max;
  for (int i = 0; i < n; ++i) {
    const auto& v = space.points()[i];
    int support = 0, coord = -1;
    double first = v.empty() ? 0.0 : v[0];
    for (size_t c = 1; c < v.size(); ++c)
      if (v[c] != 0.0) {
        ++support;
        coord = static_cast<int>(c);
      }
    if (support == 0 && first == 0.0) ix.zero = i;
    else if (support == 0 && first == 1.0) ix.e0 = i;
    else if (support == 1 && first == 0.0) ix.pe[{static_cast<int>(v[coord]), coord}] = i;
    else if (support == 1 && first == 1.0) ix.e0pe[{static_cast<int>(v[coord]), coord}] = i;
  }
  if (ix.zero < 0 || ix.e0 < 0)
    throw calc_error(errc::shape_mismatch, "missing 0 or e0 point");
  for (int p = 1; p <= p_max; ++p)
    for (int k = 1; k <= p; ++k)
      if (!ix.pe.count({p, k}) || !ix.e0pe.count({p, k}))
        throw calc_error(errc::shape_mismatch, "missing configuration point");
  return ix;
}

}  // namespace

PigeonholeReport pigeonhole_audit(const MetricSpace& space,
                                  const std::vector<std::vector<double>>& table, int n0_hint) {
  const int n = space.size();
  const CexIndex ix = index_counterexample(space);
  for (const auto& row : table) {
    if (static_cast<int>(row.size()) != n)
      throw calc_error(errc::shape_mismatch, "coordinate row with wrong point count");
    for (double v : row)
      if (v < 0) throw calc_error(errc::shape_mismatch, "cone table must be nonnegative");
  }
  const int m = static_cast<int>(table.size());
  auto sup_norm = [&](int x) {
    double s = 0;
    for (int c = 0; c < m; ++c) s = std::max(s, table[c][x]);
    return s;
  };

  PigeonholeReport rep;
  rep.C = std::max(sup_norm(ix.zero), sup_norm(ix.e0));
  int n0 = std::max(1, n0_hint);
  for (int c = m - 1; c >= 0; --c)
    if (table[c][ix.zero] >= 1.0 || table[c][ix.e0] >= 1.0) {
      n0 = std::max(n0, c + 1);  // 1-based coordinate count
      break;
    }
  rep.n0 = n0;
  double threshold = std::max(rep.C / 2.0 + 1.0, n0 < 62 ? std::pow(2.0, n0) : 1e18);
  rep.required_p = threshold >= 2.0e9 ? std::numeric_limits<int>::max()
                                      : static_cast<int>(std::floor(threshold)) + 1;

  if (ix.p_max >= rep.required_p) {
    const int p = ix.p_max;
    rep.p = p;
    std::map<std::vector<char>, int> seen;
    int hit_k = -1, hit_l = -1;
    for (int k = 1; k <= p && hit_k < 0; ++k) {
      std::vector<char> bits(n0);
      int xk = ix.pe.at({p, k});
      for (int c = 0; c < n0; ++c)
        bits[c] = (c < m && table[c][xk] <= rep.C + 1.0) ? 1 : 0;
      auto [it, fresh] = seen.emplace(std::move(bits), k);
      if (!fresh) {
        hit_k = it->second;
        hit_l = k;
      }
    }
    if (hit_k < 0)
      throw calc_error(errc::invariant_error,
                       "fingerprint map injective despite p > 2^{n0}");
    const int xkk = ix.pe.at({p, hit_k});
    const int xll = ix.pe.at({p, hit_l});
    const int xe0k = ix.e0pe.at({p, hit_k});
    for (int c = 0; c < std::min(m, n0); ++c)
      if (std::fabs(table[c][xe0k] - table[c][xll]) >= 2.0 * p + 1.0) {
        rep.verdict = PigeonholeVerdict::pigeonhole_contradiction;
        rep.k = hit_k;
        rep.l = hit_l;
        rep.coord = c + 1;
        std::ostringstream os;
        os << "fingerprints of k=" << hit_k << " and l=" << hit_l << " collide over the first "
           << n0 << " coordinates, yet |f_" << (c + 1) << "(e0+" << p << "e" << hit_k << ") - f_"
           << (c + 1) << "(" << p << "e" << hit_l << ")| = "
           << std::fabs(table[c][xe0k] - table[c][xll]) << " >= " << (2 * p + 1)
           << " forces the two values of f_" << (c + 1) << " at " << p << "e" << hit_k << " ("
           << (c < m ? table[c][xkk] : 0.0) << ") and " << p << "e" << hit_l << " ("
           << (c < m ? table[c][xll] : 0.0) << ") onto opposite sides of C+1 = " << (rep.C + 1.0);
        rep.detail = os.str();
        return rep;
      }
    // no chain witness for the colliding pair: some pairwise display must
    // already fail, fall through to the exhaustive check
  }

  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      double d = space.dist(x, y);
      double img = 0;
      for (int c = 0; c < m; ++c) img = std::max(img, std::fabs(table[c][x] - table[c][y]));
      if (img < d || img > 2.0 * d) {
        rep.verdict = PigeonholeVerdict::direct_violation;
        rep.i = x;
        rep.j = y;
        rep.dist = d;
        rep.image_dist = img;
        rep.side = img < d ? "lower" : "upper";
        return rep;
      }
    }

  rep.verdict = PigeonholeVerdict::inconclusive;
  std::ostringstream os;
  os << "p_max = " << ix.p_max << " too small: need p > max(C/2+1, 2^{n0}) = " << threshold
     << " (p_max >= " << rep.required_p << ")";
  rep.detail = os.str();
  return rep;
}

}  // namespace c0embed
