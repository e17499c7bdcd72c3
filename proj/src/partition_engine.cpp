#include "c0embed/partition_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace c0embed {

const char* provider_name(Provider p) {
  switch (p) {
    case Provider::fine: return "fine";
    case Provider::annuli: return "annuli";
    case Provider::lp: return "lp";
    case Provider::cone_annuli: return "cone-annuli";
    case Provider::cone_lp: return "cone-lp";
  }
  return "?";
}

static PieceInfo piece_info(const MetricSpace& space, PairSet pairs) {
  PieceInfo p;
  p.gap = gap(space, pairs);
  p.diam = diameter_of_pairs(space, pairs);
  p.rect = rectangle(pairs);
  p.rect_gap = set_gap(space, p.rect.U, p.rect.V);
  p.pairs = std::move(pairs);
  return p;
}

Partition make_partition(const MetricSpace& space, PairSet parent,
                         std::vector<PairSet> pieces) {
  Partition out;
  std::vector<std::pair<int, int>> merged;
  for (auto& pc : pieces) {
    if (pc.empty()) continue;
    merged.insert(merged.end(), pc.pairs.begin(), pc.pairs.end());
    out.pieces.push_back(piece_info(space, std::move(pc)));
  }
  std::sort(merged.begin(), merged.end());
  if (std::adjacent_find(merged.begin(), merged.end()) != merged.end())
    throw calc_error(errc::invariant_error, "partition pieces overlap");
  if (merged != parent.pairs)
    throw calc_error(errc::invariant_error, "partition pieces do not cover the parent");
  std::sort(out.pieces.begin(), out.pieces.end(),
            [](const PieceInfo& a, const PieceInfo& b) { return a.pairs.pairs[0] < b.pairs.pairs[0]; });
  out.parent = std::move(parent);
  return out;
}

PiWitness certify_pi(double lambda, Partition part) {
  PiWitness w;
  w.lambda = lambda;
  w.margins.reserve(part.pieces.size());
  for (size_t i = 0; i < part.pieces.size(); ++i) {
    const PieceInfo& p = part.pieces[i];
    double margin = lambda * p.rect_gap - p.diam;
    if (!(margin > 0))
      throw calc_error(errc::invariant_error,
                       "pi(lambda) margin not positive on piece " + std::to_string(i) +
                           " (margin " + std::to_string(margin) + ")",
                       static_cast<long>(i));
    w.margins.push_back(margin);
  }
  w.partition = std::move(part);
  return w;
}

WitnessAudit audit_pi_witness(const MetricSpace& space, const PiWitness& w) {
  WitnessAudit a;
  a.min_margin = std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, int>> merged;
  for (size_t i = 0; i < w.partition.pieces.size(); ++i) {
    const PairSet& e = w.partition.pieces[i].pairs;
    if (e.empty()) {
      a.ok = false;
      a.bad_piece = static_cast<int>(i);
      a.what = "empty piece";
      return a;
    }
    merged.insert(merged.end(), e.pairs.begin(), e.pairs.end());
    // fresh recomputation, ignoring all cached statistics
    double diam = 0;
    std::vector<int> U, V;
    for (auto [x, y] : e.pairs) {
      diam = std::max(diam, space.dist(x, y));
      U.push_back(x);
      V.push_back(y);
    }
    std::sort(U.begin(), U.end());
    U.erase(std::unique(U.begin(), U.end()), U.end());
    std::sort(V.begin(), V.end());
    V.erase(std::unique(V.begin(), V.end()), V.end());
    double rect_gap = std::numeric_limits<double>::infinity();
    for (int u : U)
      for (int v : V) rect_gap = std::min(rect_gap, space.dist(u, v));
    double margin = w.lambda * rect_gap - diam;
    a.min_margin = std::min(a.min_margin, margin);
    if (!(margin > 0)) {
      a.ok = false;
      a.bad_piece = static_cast<int>(i);
      a.what = "margin " + std::to_string(margin) + " not positive";
      return a;
    }
  }
  std::sort(merged.begin(), merged.end());
  if (std::adjacent_find(merged.begin(), merged.end()) != merged.end()) {
    a.ok = false;
    a.what = "pieces overlap";
    return a;
  }
  if (merged != w.partition.parent.pairs) {
    a.ok = false;
    a.what = "pieces do not cover the parent";
    return a;
  }
  return a;
}

ASet a_set(const MetricSpace& space, std::vector<int> F, double beta, double lambda) {
  if (F.empty()) throw calc_error(errc::empty_set, "A(F,beta) with empty F");
  if (beta <= 0) throw calc_error(errc::bad_spec, "A(F,beta) requires beta > 0");
  std::sort(F.begin(), F.end());
  F.erase(std::unique(F.begin(), F.end()), F.end());
  const int n = space.size();
  std::vector<double> df(n);
  for (int x = 0; x < n; ++x) df[x] = space.dist_to_set(x, F);
  std::vector<std::pair<int, int>> pairs;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (x == y) continue;
      if (lambda * (df[x] + df[y] + beta) <= space.dist(x, y)) pairs.emplace_back(x, y);
    }
  ASet out;
  out.pairs = PairSet::of(std::move(pairs), n);
  out.F = std::move(F);
  out.beta = beta;
  out.lambda = lambda;
  return out;
}

// ---------------------------------------------------------------------------
// range refinement (grid partition of the P-image)

namespace {

// Groups the pairs of e by grid cells of the P-image whose l^range_p diameter
// stays below cell_diam.
Partition grid_partition_by_range(const MetricSpace& space, const PairSet& e,
                                  const std::vector<std::vector<double>>& P,
                                  double range_p, double cell_diam) {
  const size_t dim = P.empty() ? 0 : P[0].size();
  double dim_factor = 1.0;
  if (dim > 0 && !std::isinf(range_p)) dim_factor = std::pow(static_cast<double>(dim), 1.0 / range_p);
  const double side = dim == 0 ? 1.0 : 0.99 * cell_diam / dim_factor;

  auto cell_of = [&](int x) {
    std::vector<long long> key(dim);
    for (size_t c = 0; c < dim; ++c) {
      double q = std::floor(P[x][c] / side);
      if (!(std::fabs(q) < 9.0e15))
        throw calc_error(errc::invariant_error, "range refinement cell index overflow");
      key[c] = static_cast<long long>(q);
    }
    return key;
  };

  std::map<std::vector<long long>, int> cells;
  std::vector<int> cell_id(space.size(), -1);
  std::vector<int> touched;
  for (auto [x, y] : e.pairs) {
    touched.push_back(x);
    touched.push_back(y);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (int x : touched) {
    auto key = cell_of(x);
    auto [it, fresh] = cells.emplace(std::move(key), static_cast<int>(cells.size()));
    cell_id[x] = it->second;
  }

  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> groups;
  for (auto [x, y] : e.pairs) groups[{cell_id[x], cell_id[y]}].emplace_back(x, y);
  std::vector<PairSet> pieces;
  pieces.reserve(groups.size());
  for (auto& [k, v] : groups) pieces.push_back(PairSet::of(std::move(v), space.size()));
  return make_partition(space, e, std::move(pieces));
}

}  // namespace

Partition refine_by_range(const MetricSpace& space, const PairSet& e,
                          const std::vector<std::vector<double>>& P, double range_p,
                          double lambda, double eps) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "refine_by_range of empty pair set");
  if (eps <= 0) throw calc_error(errc::bad_spec, "refine_by_range requires eps > 0");
  if (static_cast<int>(P.size()) != space.size())
    throw calc_error(errc::shape_mismatch, "P must map every point");
  const int n = space.size();
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      double img = p_dist(P[x], P[y], range_p);
      if (img > lambda * space.dist(x, y) + kAxiomTol)
        throw calc_error(errc::lipschitz_hypothesis_violated,
                         "||P(x)-P(y)|| exceeds lambda d(x,y)", x, y);
    }
  for (auto [x, y] : e.pairs) {
    double img = p_dist(P[x], P[y], range_p);
    if (space.dist(x, y) > img + kAxiomTol)
      throw calc_error(errc::lower_bound_hypothesis_violated,
                       "d(x,y) exceeds ||P(x)-P(y)|| on E", x, y);
  }
  Partition part = grid_partition_by_range(space, e, P, range_p, eps / 4.0);
  for (const PieceInfo& p : part.pieces)
    if (!(p.diam < lambda * p.rect_gap + eps))
      throw calc_error(errc::invariant_error, "range refinement produced an invalid piece");
  return part;
}

// ---------------------------------------------------------------------------
// pi(lambda) providers

static void check_inside_ball(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2) {
  for (auto [x, y] : e.pairs) {
    if (space.dist(x, b1.center) > b1.radius + kAxiomTol)
      throw calc_error(errc::bad_spec, "pair set leaves the first ball", x);
    if (space.dist(y, b2.center) > b2.radius + kAxiomTol)
      throw calc_error(errc::bad_spec, "pair set leaves the second ball", y);
  }
}

// Shared annuli construction: arithmetic breakpoints from delta(E) with the
// given step; pairs with d in [a_{i}, a_{i+1}) share a piece.
static std::vector<PairSet> annuli_pieces(const MetricSpace& space, const PairSet& e,
                                          double step) {
  const double lo = gap(space, e);
  std::map<long long, std::vector<std::pair<int, int>>> bands;
  for (auto [x, y] : e.pairs) {
    double idx = std::floor((space.dist(x, y) - lo) / step);
    if (!(idx < 9.0e15))
      throw calc_error(errc::invariant_error, "annulus index overflow (step too small)");
    bands[static_cast<long long>(std::max(0.0, idx))].emplace_back(x, y);
  }
  std::vector<PairSet> pieces;
  for (auto& [k, v] : bands) pieces.push_back(PairSet::of(std::move(v), space.size()));
  return pieces;
}

PiWitness annuli_partition(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "annuli_partition of empty pair set");
  check_inside_ball(space, e, b1, b2);
  const double delta = gap(space, e);
  const double eps = delta - 2.0 * (b1.radius + b2.radius);
  if (!(eps > 0))
    throw calc_error(errc::gap_hypothesis_violated,
                     "delta(E) <= 2 (r1 + r2): slack " + std::to_string(eps));
  Partition part = make_partition(space, e, annuli_pieces(space, e, 0.9 * eps));
  return certify_pi(2.0, std::move(part));
}

PiWitness fine_partition(const MetricSpace& space, const PairSet& e, double lambda) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "fine_partition of empty pair set");
  if (!(lambda > 1.0)) throw calc_error(errc::bad_config, "fine_partition requires lambda > 1");
  const double c = gap(space, e) * (lambda - 1.0) / (lambda + 2.0);
  // greedy first-fit clustering under d1-diameter c
  std::vector<std::vector<std::pair<int, int>>> clusters;
  for (auto pr : e.pairs) {
    bool placed = false;
    for (auto& cl : clusters) {
      bool fits = true;
      for (auto q : cl)
        if (d1(space, pr, q) > c) { fits = false; break; }
      if (fits) {
        cl.push_back(pr);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({pr});
  }
  std::vector<PairSet> pieces;
  pieces.reserve(clusters.size());
  for (auto& cl : clusters) pieces.push_back(PairSet::of(std::move(cl), space.size()));
  return certify_pi(lambda, make_partition(space, e, std::move(pieces)));
}

double bisect_feasible_eps(double hi, const std::function<bool(double)>& feasible) {
  if (feasible(hi)) return hi;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid)) lo = mid; else hi = mid;
  }
  return lo;
}

PiWitness lp_truncation_partition(const MetricSpace& space, const PairSet& e, Ball b1,
                                  Ball b2, double eps, double lambda_target) {
  const auto& a1 = space.points()[b1.center];
  const auto& a2 = space.points()[b2.center];
  const int dim = static_cast<int>(a1.size());
  const double p = space.exponent();
  int prefix = dim;
  for (int i0 = 0; i0 <= dim; ++i0) {
    std::vector<double> tail(a1.begin() + i0, a1.end());
    for (int c = i0; c < dim; ++c) tail[c - i0] -= a2[c];
    if (p_norm(tail, p) < eps) { prefix = i0; break; }
  }
  const int n = space.size();
  std::vector<std::vector<double>> P(n);
  for (int x = 0; x < n; ++x)
    P[x].assign(space.points()[x].begin(), space.points()[x].begin() + prefix);
  return certify_pi(lambda_target, grid_partition_by_range(space, e, P, p, eps / 4.0));
}

PiWitness lp_partition(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "lp_partition of empty pair set");
  if (!space.has_coords())
    throw calc_error(errc::bad_spec, "lp_partition needs a coordinate-backed space");
  check_inside_ball(space, e, b1, b2);
  const double p = space.exponent();
  const double delta = gap(space, e);
  const double diam = diameter_of_pairs(space, e);
  const double rsum = b1.radius + b2.radius;
  const double alpha = std::pow(delta, p) - 2.0 * std::pow(rsum, p);
  if (!(alpha > 0))
    throw calc_error(errc::gap_hypothesis_violated,
                     "delta(E)^p - 2 (r1+r2)^p = " + std::to_string(alpha) + " <= 0");
  auto feasible = [&](double eps) {
    bool c1 = std::pow(rsum + eps, p) < 0.5 * std::pow(delta, p) - 0.25 * alpha;
    bool c2 = 2.0 * std::pow(diam + eps, p) - 0.5 * alpha < 2.0 * std::pow(diam, p);
    return c1 && c2;
  };
  double cap = rsum > 0 ? rsum : 0.5 * delta;
  double eps = 0.5 * bisect_feasible_eps(cap, feasible);
  int tries = 0;
  while (eps > 0 && !feasible(eps) && tries++ < 120) eps *= 0.5;
  if (!(eps > 0) || !feasible(eps)) {
    std::ostringstream os;
    os << "no feasible epsilon in (0, " << cap << "]; constraint residuals at eps=" << cap
       << ": c1 " << (std::pow(rsum + cap, p) - (0.5 * std::pow(delta, p) - 0.25 * alpha))
       << ", c2 " << (2.0 * std::pow(diam + cap, p) - 0.5 * alpha - 2.0 * std::pow(diam, p));
    throw calc_error(errc::no_feasible_epsilon, os.str());
  }
  return lp_truncation_partition(space, e, b1, b2, eps, std::pow(2.0, 1.0 / p));
}

// ---------------------------------------------------------------------------
// block decomposition

std::vector<PairSet> delta_blocks(const MetricSpace& space, std::span<const int> dense_order,
                                  std::span<const double> eps_seq, double lambda) {
  const int n = space.size();
  if (static_cast<int>(dense_order.size()) != n)
    throw calc_error(errc::bad_spec, "dense_order must enumerate all points");
  for (size_t k = 0; k + 1 < eps_seq.size(); ++k)
    if (!(eps_seq[k + 1] < eps_seq[k]) || !(eps_seq[k + 1] > 0))
      throw calc_error(errc::non_decreasing_eps_seq,
                       "eps sequence must be strictly decreasing and positive",
                       static_cast<long>(k));

  std::vector<std::pair<int, int>> todo = PairSet::all_distinct(n).pairs;
  std::vector<double> dcur(n), dnext(n);
  for (int x = 0; x < n; ++x) dcur[x] = space.dist(x, dense_order[0]);

  std::vector<std::vector<std::pair<int, int>>> blocks;
  size_t k = 1;
  while (!todo.empty()) {
    if (k + 1 > eps_seq.size())
      throw calc_error(errc::eps_seq_exhausted,
                       "eps sequence exhausted before covering all pairs",
                       static_cast<long>(k));
    // F_{k+1} adds the next point of the order (or nothing once exhausted)
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
      if (k == 1 && !(d < lambda * (dcur[x] + dcur[y] + eps_k)))
        throw calc_error(errc::invariant_error, "pair not below sigma_1", x, y);
      if (lambda * (dnext[x] + dnext[y] + eps_k1) <= d)
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

// ---------------------------------------------------------------------------
// the two block-partition lemmas share this clustering core

BoundedPartition block_partition_core(
    const MetricSpace& space, const PairSet& delta_set, std::span<const int> F,
    std::span<const int> G, double alpha, double beta, double lambda,
    const std::function<PiWitness(const PairSet&, Ball, Ball)>& run_provider, bool cone) {
  BoundedPartition out;
  if (delta_set.empty()) return out;
  if (F.empty() || G.empty()) throw calc_error(errc::empty_set, "F and G must be non-empty");
  if (!(alpha > 0 && alpha < beta))
    throw calc_error(errc::bad_spec, "requires 0 < alpha < beta");
  for (int f : F)
    if (std::find(G.begin(), G.end(), f) == G.end())
      throw calc_error(errc::bad_spec, "F must be contained in G", f);

  std::vector<int> support;
  for (auto [x, y] : delta_set.pairs) {
    support.push_back(x);
    support.push_back(y);
  }
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());

  // cluster by quantized distance profiles to G (bin width alpha/5)
  const double w = alpha / 5.0;
  std::map<std::vector<long long>, int> bins;
  std::vector<int> cluster_of(space.size(), -1);
  for (int x : support) {
    std::vector<long long> key(G.size());
    for (size_t g = 0; g < G.size(); ++g) {
      double q = std::floor(space.dist(x, G[g]) / w);
      if (!(std::fabs(q) < 9.0e15))
        throw calc_error(errc::invariant_error, "profile quantization overflow (alpha too small)");
      key[g] = static_cast<long long>(q);
    }
    auto [it, fresh] = bins.emplace(std::move(key), static_cast<int>(bins.size()));
    cluster_of[x] = it->second;
  }
  const int m = static_cast<int>(bins.size());
  std::vector<std::vector<int>> members(m);
  for (int x : support) members[cluster_of[x]].push_back(x);

  std::vector<double> radius(m);
  std::vector<int> center(m);
  for (int j = 0; j < m; ++j) {
    double best = std::numeric_limits<double>::infinity();
    int arg = G[0];
    for (size_t g = 0; g < G.size(); ++g) {
      double dg = std::numeric_limits<double>::infinity();
      for (int x : members[j]) dg = std::min(dg, space.dist(x, G[g]));
      if (dg < best) { best = dg; arg = G[g]; }
    }
    radius[j] = best + alpha / 4.0;
    center[j] = arg;
  }

  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> cross;
  for (auto [x, y] : delta_set.pairs) cross[{cluster_of[x], cluster_of[y]}].emplace_back(x, y);

  std::vector<PairSet> pieces;
  const double shortcut = (lambda + 1.0) / (lambda - 1.0);
  for (auto& [jk, v] : cross) {
    auto [j, k] = jk;
    PairSet ejk = PairSet::of(std::move(v), space.size());
    const double needed = cone ? lambda * std::max(radius[j], radius[k])
                               : lambda * (radius[j] + radius[k]);
    if (!(gap(space, ejk) > needed))
      throw calc_error(errc::provider_hypothesis_violated,
                       "cluster pair gap check failed (clustering bug)", j, k);
    if (space.dist(center[j], center[k]) > shortcut * (radius[j] + radius[k])) {
      pieces.push_back(std::move(ejk));  // single piece suffices here
      continue;
    }
    Ball bj{center[j], radius[j]}, bk{center[k], radius[k]};
    if (cone) {
      double r = std::max(radius[j], radius[k]);
      bj.radius = bk.radius = r;
    }
    PiWitness w = run_provider(ejk, bj, bk);
    for (auto& p : w.partition.pieces) pieces.push_back(std::move(p.pairs));
  }

  out.partition = make_partition(space, delta_set, std::move(pieces));
  out.c_uv.reserve(out.partition.pieces.size());
  out.c_f.reserve(out.partition.pieces.size());
  for (const PieceInfo& p : out.partition.pieces) {
    double duf = set_gap(space, p.rect.U, std::vector<int>(F.begin(), F.end()));
    double dvf = set_gap(space, p.rect.V, std::vector<int>(F.begin(), F.end()));
    double cf = cone ? std::max(duf, dvf) + 2.0 * beta : duf + dvf + 2.0 * beta;
    out.c_uv.push_back(p.rect_gap);
    out.c_f.push_back(cf);
    if (!(p.diam < lambda * p.rect_gap) || !(p.diam < lambda * cf))
      throw calc_error(errc::invariant_error, "block partition double bound violated");
  }
  return out;
}

BoundedPartition lemma46_partition(const MetricSpace& space, std::span<const int> F,
                                   std::span<const int> G, double alpha, double beta,
                                   double lambda, Provider provider) {
  ASet ag = a_set(space, std::vector<int>(G.begin(), G.end()), alpha, lambda);
  ASet af = a_set(space, std::vector<int>(F.begin(), F.end()), beta, lambda);
  std::vector<std::pair<int, int>> diff;
  std::set_difference(ag.pairs.pairs.begin(), ag.pairs.pairs.end(), af.pairs.pairs.begin(),
                      af.pairs.pairs.end(), std::back_inserter(diff));
  PairSet delta_set = PairSet::of(std::move(diff), space.size());
  auto run = [&](const PairSet& e, Ball b1, Ball b2) -> PiWitness {
    switch (provider) {
      case Provider::annuli: return annuli_partition(space, e, b1, b2);
      case Provider::lp: return lp_partition(space, e, b1, b2);
      case Provider::fine: return fine_partition(space, e, lambda);
      default:
        throw calc_error(errc::bad_config, "lemma46_partition needs a plain pi provider");
    }
  };
  return block_partition_core(space, delta_set, F, G, alpha, beta, lambda, run,
                              /*cone=*/false);
}

// ---------------------------------------------------------------------------
// brute-force minimal-partition oracle

namespace {

struct OracleBlock {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> U, V;
  double diam = 0;
};

bool block_valid(const MetricSpace& space, const OracleBlock& b, double lambda) {
  double rg = std::numeric_limits<double>::infinity();
  for (int u : b.U)
    for (int v : b.V) rg = std::min(rg, space.dist(u, v));
  return b.diam < lambda * rg;
}

void oracle_rec(const MetricSpace& space, const std::vector<std::pair<int, int>>& pairs,
                size_t t, std::vector<OracleBlock>& blocks, double lambda, int& best) {
  if (static_cast<int>(blocks.size()) >= best) return;  // cannot improve
  if (t == pairs.size()) {
    best = static_cast<int>(blocks.size());
    return;
  }
  auto [x, y] = pairs[t];
  const size_t existing = blocks.size();
  for (size_t b = 0; b <= existing; ++b) {  // restricted growth: one fresh block
    if (b == existing) blocks.emplace_back();
    OracleBlock saved = blocks[b];
    blocks[b].pairs.emplace_back(x, y);
    if (std::find(blocks[b].U.begin(), blocks[b].U.end(), x) == blocks[b].U.end())
      blocks[b].U.push_back(x);
    if (std::find(blocks[b].V.begin(), blocks[b].V.end(), y) == blocks[b].V.end())
      blocks[b].V.push_back(y);
    blocks[b].diam = std::max(blocks[b].diam, space.dist(x, y));
    if (block_valid(space, blocks[b], lambda))
      oracle_rec(space, pairs, t + 1, blocks, lambda, best);
    blocks[b] = std::move(saved);
    if (b == existing) blocks.pop_back();
  }
}

}  // namespace

std::optional<int> min_partition_size(const MetricSpace& space, const PairSet& e,
                                      double lambda, int max_size) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "min_partition_size of empty pair set");
  if (e.size() > 8)
    throw calc_error(errc::too_large, "oracle limited to |E| <= 8, got " + std::to_string(e.size()));
  int best = static_cast<int>(e.size()) + 1;
  std::vector<OracleBlock> blocks;
  oracle_rec(space, e.pairs, 0, blocks, lambda, best);
  if (best > static_cast<int>(e.size()) || best > max_size) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// Pi(lambda) -> pi(lambda)

ProductCover singleton_pi_cover(const MetricSpace& space, const PairSet& band, Ball, Ball,
                                double, double) {
  (void)space;
  ProductCover cover;
  cover.products.reserve(band.size());
  for (auto [x, y] : band.pairs) cover.products.push_back(Rectangle{{x}, {y}});
  return cover;
}

PiWitness pi_from_Pi(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2,
                     double lambda, double mu, double nu, const PiCoverFn& cover) {
  if (e.empty()) throw calc_error(errc::empty_pair_set, "pi_from_Pi of empty pair set");
  if (!(lambda > 1) || !(mu > lambda) || !(nu > mu))
    throw calc_error(errc::bad_config, "need 1 < lambda < mu < nu");
  check_inside_ball(space, e, b1, b2);
  const double base = mu * (b1.radius + b2.radius);
  if (!(gap(space, e) > base))
    throw calc_error(errc::gap_hypothesis_violated, "delta(E) <= mu (r1 + r2)");

  // all candidate pairs of B1 x B2 above the mu threshold
  std::vector<int> in1, in2;
  for (int x = 0; x < space.size(); ++x) {
    if (space.dist(x, b1.center) <= b1.radius + kAxiomTol) in1.push_back(x);
    if (space.dist(x, b2.center) <= b2.radius + kAxiomTol) in2.push_back(x);
  }
  std::vector<std::pair<int, int>> emu;
  double top = 0;
  for (int x : in1)
    for (int y : in2) {
      if (x == y) continue;
      double d = space.dist(x, y);
      if (d > base) {
        emu.emplace_back(x, y);
        top = std::max(top, d);
      }
    }

  const double q = 0.5 * (1.0 + nu / mu);  // strictly below nu/mu
  std::vector<double> ladder{1.0};
  while (ladder.back() * base < top) ladder.push_back(ladder.back() * q);

  std::vector<PairSet> pieces;
  for (size_t k = 0; k + 1 < ladder.size(); ++k) {
    const double lo = ladder[k] * base, hi = ladder[k + 1] * base;
    std::vector<std::pair<int, int>> band_pairs;
    for (auto [x, y] : emu) {
      double d = space.dist(x, y);
      if (d > lo && d <= hi) band_pairs.emplace_back(x, y);
    }
    if (band_pairs.empty()) continue;
    PairSet band = PairSet::of(band_pairs, space.size());
    Ball sb1{b1.center, ladder[k] * b1.radius}, sb2{b2.center, ladder[k] * b2.radius};
    ProductCover pc = cover(space, band, sb1, sb2, lambda, mu);
    const double need = nu * ladder[k] * (b1.radius + b2.radius);
    for (const Rectangle& r : pc.products) {
      if (r.U.empty() || r.V.empty())
        throw calc_error(errc::cover_hypothesis_violated, "empty product in cover");
      if (!(lambda * set_gap(space, r.U, r.V) >= need))
        throw calc_error(errc::cover_hypothesis_violated,
                         "product gap below nu (r1 + r2) at scale " + std::to_string(ladder[k]));
    }

    // disjointify: atoms of the U-side and V-side membership patterns
    auto atoms = [&](bool first) {
      std::map<std::vector<char>, std::vector<int>> sig;
      std::vector<int> pts;
      for (const Rectangle& r : pc.products)
        for (int p : (first ? r.U : r.V)) pts.push_back(p);
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      for (int p : pts) {
        std::vector<char> s(pc.products.size());
        for (size_t i = 0; i < pc.products.size(); ++i) {
          const auto& side = first ? pc.products[i].U : pc.products[i].V;
          s[i] = std::binary_search(side.begin(), side.end(), p) ? 1 : 0;
        }
        sig[s].push_back(p);
      }
      return sig;
    };
    auto uatoms = atoms(true);
    auto vatoms = atoms(false);
    for (auto& [us, uset] : uatoms)
      for (auto& [vs, vset] : vatoms) {
        bool covered = false;
        for (size_t i = 0; i < pc.products.size(); ++i)
          if (us[i] && vs[i]) { covered = true; break; }
        if (!covered) continue;
        std::vector<std::pair<int, int>> got;
        for (auto [x, y] : band.pairs)
          if (std::binary_search(uset.begin(), uset.end(), x) &&
              std::binary_search(vset.begin(), vset.end(), y)) {
            if (e.contains(x, y)) got.emplace_back(x, y);
          }
        if (!got.empty()) pieces.push_back(PairSet::of(std::move(got), space.size()));
      }
  }
  return certify_pi(lambda, make_partition(space, e, std::move(pieces)));
}

}  // namespace c0embed
