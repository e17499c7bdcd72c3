#include "c0embed/embedding_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace c0embed {

CoordinateFunction bump_coordinate(const MetricSpace& space, std::span<const int> U,
                                   std::span<const int> V, std::span<const int> F,
                                   double eps) {
  std::vector<double> df(space.size());
  for (int x = 0; x < space.size(); ++x) df[x] = space.dist_to_set(x, F);
  return bump_coordinate(space, U, V, F, eps, df);
}

CoordinateFunction bump_coordinate(const MetricSpace& space, std::span<const int> U,
                                   std::span<const int> V, std::span<const int> F,
                                   double eps, std::span<const double> dist_f) {
  if (U.empty() || V.empty() || F.empty())
    throw calc_error(errc::empty_set, "bump_coordinate needs non-empty U, V, F");
  if (eps < 0) throw calc_error(errc::bad_spec, "bump_coordinate needs eps >= 0");
  const double duv = set_gap(space, U, V);
  double duf = std::numeric_limits<double>::infinity();
  for (int u : U) duf = std::min(duf, dist_f[u]);
  double dvf = std::numeric_limits<double>::infinity();
  for (int v : V) dvf = std::min(dvf, dist_f[v]);

  CoordinateFunction f;
  f.constant = std::min(duv, duf + dvf + 2.0 * eps);
  f.t = std::min(f.constant, duf + eps);
  f.s = f.t - f.constant;
  f.eps = eps;
  f.values.resize(space.size());
  for (int x = 0; x < space.size(); ++x) {
    double a = space.dist_to_set(x, U) + f.t;
    double b = space.dist_to_set(x, V) + f.s;
    double c = dist_f[x] + eps;
    f.values[x] = std::min({a, b, c});
  }
  return f;
}

std::vector<double> make_eps_ladder(double eps1, double ratio, double eps_floor, int len) {
  if (!(eps1 > 0) || !(ratio > 0) || !(ratio < 1))
    throw calc_error(errc::bad_spec, "eps ladder needs eps1 > 0 and ratio in (0,1)");
  eps_floor = std::min(eps_floor, 0.5 * eps1);
  std::vector<double> v{eps1};
  double geo = eps1 - eps_floor;
  for (int k = 1; k < len; ++k) {
    geo *= ratio;
    double c = eps_floor + geo;
    if (!(c < v.back())) c = std::nextafter(v.back(), 0.0);
    v.push_back(c);
  }
  return v;
}

Embedding assemble_embedding(const MetricSpace& space, double lambda, bool cone,
                             std::span<const int> order, std::span<const double> eps_seq,
                             std::span<const PairSet> blocks,
                             const BlockPartitioner& partitioner,
                             const CoordFactory& coord_factory, double coord_eps_factor) {
  const int n = space.size();
  Embedding emb;
  emb.lambda = lambda;
  emb.n = n;
  emb.cone = cone;
  emb.order.assign(order.begin(), order.end());
  emb.eps_seq.assign(eps_seq.begin(), eps_seq.end());
  emb.witness.assign(static_cast<size_t>(n) * n, -1);
  if (n <= 1) return emb;

  std::vector<double> dist_f(n);
  for (int x = 0; x < n; ++x) dist_f[x] = space.dist(x, order[0]);
  std::vector<int> prefix{order[0]};

  for (size_t k = 1; k <= blocks.size(); ++k) {
    std::span<const int> F(prefix.data(), std::min(prefix.size(), static_cast<size_t>(n)));
    std::vector<int> g(order.begin(), order.begin() + std::min<size_t>(k + 1, n));
    const PairSet& block = blocks[k - 1];
    if (!block.empty()) {
      const double beta = eps_seq[k - 1];
      const double alpha = eps_seq[k];
      BoundedPartition bp = partitioner(static_cast<int>(k), F, g, alpha, beta, block, dist_f);
      for (size_t i = 0; i < bp.partition.pieces.size(); ++i) {
        const PieceInfo& piece = bp.partition.pieces[i];
        const double c = std::min(bp.c_uv[i], bp.c_f[i]);
        if (!(c > 0))
          throw calc_error(errc::scale_infeasible, "piece with zero constant", static_cast<long>(i));
        if (!(piece.diam < lambda * c))
          throw calc_error(errc::scale_infeasible,
                           "diam(E_n) >= lambda c_n on block " + std::to_string(k) + " piece " +
                               std::to_string(i),
                           static_cast<long>(k), static_cast<long>(i));
        const double scale = 0.5 * (piece.diam / c + lambda);
        CoordinateFunction cf =
            coord_factory(piece.rect.U, piece.rect.V, F, coord_eps_factor * beta, dist_f);
        if (std::fabs(cf.constant - c) > 1e-9 * std::max(1.0, c))
          throw calc_error(errc::invariant_error, "coordinate constant drifted from partition bound");
        EmbeddingCoordinate ec;
        ec.values.resize(n);
        for (int x = 0; x < n; ++x) ec.values[x] = scale * cf.values[x];
        ec.block = static_cast<int>(k);
        ec.constant = cf.constant;
        ec.scale = scale;
        ec.eps = coord_eps_factor * beta;
        ec.U = piece.rect.U;
        ec.V = piece.rect.V;
        ec.negated = cf.negated;
        const int id = static_cast<int>(emb.coords.size());
        emb.coords.push_back(std::move(ec));
        for (auto [x, y] : piece.pairs.pairs) emb.witness[static_cast<size_t>(x) * n + y] = id;
      }
    }
    if (k < static_cast<size_t>(n)) {
      prefix.push_back(order[k]);
      for (int x = 0; x < n; ++x) dist_f[x] = std::min(dist_f[x], space.dist(x, order[k]));
    }
  }

  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y && emb.witness[static_cast<size_t>(x) * n + y] < 0)
        throw calc_error(errc::invariant_error, "pair left without a covering coordinate", x, y);
  return emb;
}

Embedding build_good_embedding(const MetricSpace& space, double lambda, Provider provider,
                               const BuildConfig& config) {
  if (!(lambda > 1.0) || !(lambda <= 2.0))
    throw calc_error(errc::bad_config, "good embedding needs lambda in (1, 2]");
  switch (provider) {
    case Provider::annuli:
      if (lambda != 2.0)
        throw calc_error(errc::bad_config, "annuli provider requires lambda = 2");
      break;
    case Provider::lp: {
      if (!space.has_coords())
        throw calc_error(errc::bad_config, "lp provider needs a coordinate-backed space");
      double target = std::pow(2.0, 1.0 / space.exponent());
      if (std::fabs(lambda - target) > 1e-12)
        throw calc_error(errc::bad_config, "lp provider requires lambda = 2^{1/p}");
      break;
    }
    case Provider::fine:
      break;
    default:
      throw calc_error(errc::bad_config, "cone providers cannot drive the plain builder");
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
    emb.order = order;
    return emb;
  }

  const double eps1 = space.diameter() / lambda;
  const double eps_floor = space.min_separation() / (4.0 * lambda);
  const int cap = n +
                  static_cast<int>(std::ceil(std::log(std::max(2.0, eps1 / eps_floor)) /
                                             std::log(1.0 / config.eps_decay))) +
                  8;
  std::vector<double> eps_seq = make_eps_ladder(eps1, config.eps_decay, eps_floor, cap + 2);
  std::vector<PairSet> blocks = delta_blocks(space, order, eps_seq, lambda);

  auto partitioner = [&](int, std::span<const int> F, std::span<const int> G, double alpha,
                         double beta, const PairSet& block,
                         std::span<const double>) -> BoundedPartition {
    auto run = [&](const PairSet& e, Ball b1, Ball b2) -> PiWitness {
      switch (provider) {
        case Provider::annuli: return annuli_partition(space, e, b1, b2);
        case Provider::lp: return lp_partition(space, e, b1, b2);
        default: return fine_partition(space, e, lambda);
      }
    };
    return block_partition_core(space, block, F, G, alpha, beta, lambda, run, /*cone=*/false);
  };
  auto coords = [&](std::span<const int> U, std::span<const int> V, std::span<const int> F,
                    double eps, std::span<const double> dist_f) {
    return bump_coordinate(space, U, V, F, eps, dist_f);
  };
  return assemble_embedding(space, lambda, /*cone=*/false, order, eps_seq, blocks, partitioner,
                            coords, /*coord_eps_factor=*/1.0);
}

Embedding strictify(const MetricSpace& space, const Embedding& emb) {
  for (size_t i = 0; i < emb.coords.size(); ++i)
    if (!(emb.coords[i].scale < emb.lambda))
      throw calc_error(errc::not_good, "coordinate scale not below lambda", static_cast<long>(i));
  AuditReport rep = audit_embedding(space, emb, emb.lambda, AuditMode::good);
  if (!rep.ok)
    throw calc_error(errc::not_good,
                     "input fails the good-mode audit: " + (rep.violation ? rep.violation->what : ""));

  Embedding out = emb;
  constexpr double eta = 1e-6;
  for (auto& c : out.coords) {
    const double hi = std::min(2.0, emb.lambda / c.scale);
    double alpha = hi * (1.0 - eta);
    if (!(alpha > 1.0)) alpha = 0.5 * (1.0 + hi);
    for (double& v : c.values) v *= alpha;
    c.scale *= alpha;
  }
  return out;
}

Embedding kuratowski_baseline(const MetricSpace& space) {
  Embedding emb;
  emb.lambda = 1.0;
  emb.n = space.size();
  emb.coords.resize(space.size());
  for (int i = 0; i < space.size(); ++i) {
    auto& c = emb.coords[i];
    c.values.resize(space.size());
    for (int x = 0; x < space.size(); ++x) c.values[x] = space.dist(x, i);
    c.scale = 1.0;
  }
  return emb;
}

AuditReport audit_embedding(const MetricSpace& space, const Embedding& emb, double lambda,
                            AuditMode mode) {
  AuditReport rep;
  const int n = space.size();
  if (emb.n != n || (!emb.witness.empty() &&
                     emb.witness.size() != static_cast<size_t>(n) * n))
    throw calc_error(errc::shape_mismatch, "embedding does not match the space");
  for (const auto& c : emb.coords)
    if (static_cast<int>(c.values.size()) != n)
      throw calc_error(errc::shape_mismatch, "coordinate with wrong point count");

  auto fail = [&](Violation v) {
    if (rep.ok) {
      rep.ok = false;
      rep.violation = std::move(v);
    }
  };

  if (emb.cone)
    for (size_t ci = 0; ci < emb.coords.size(); ++ci)
      for (int x = 0; x < n; ++x)
        if (emb.coords[ci].values[x] < 0) {
          rep.nonnegative = false;
          fail({"negative cone coordinate", x, -1, static_cast<int>(ci),
                emb.coords[ci].values[x], 0});
        }

  const size_t m = emb.coords.size();
  std::vector<double> lips(m, 0.0);
  rep.min_lower_margin = std::numeric_limits<double>::infinity();
  rep.min_upper_margin = std::numeric_limits<double>::infinity();
  rep.sup_ratio = 0;
  rep.inf_ratio = std::numeric_limits<double>::infinity();
  const double plain_slack = 1e-12;

  bool any_pair = false;
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      any_pair = true;
      const double d = space.dist(x, y);
      double sup = 0;
      for (size_t ci = 0; ci < m; ++ci) {
        double diff = std::fabs(emb.coords[ci].values[x] - emb.coords[ci].values[y]);
        sup = std::max(sup, diff);
        lips[ci] = std::max(lips[ci], diff / d);
      }
      rep.min_lower_margin = std::min(rep.min_lower_margin, sup - d);
      rep.min_upper_margin = std::min(rep.min_upper_margin, lambda * d - sup);
      rep.sup_ratio = std::max(rep.sup_ratio, sup / d);
      rep.inf_ratio = std::min(rep.inf_ratio, sup / d);
      switch (mode) {
        case AuditMode::plain:
          if (sup < d - plain_slack * std::max(1.0, d))
            fail({"lower bound fails", x, y, -1, sup, d});
          if (sup > lambda * d + plain_slack * std::max(1.0, d))
            fail({"upper bound fails", x, y, -1, sup, lambda * d});
          break;
        case AuditMode::good:
          if (!(sup >= d)) fail({"lower bound fails", x, y, -1, sup, d});
          if (!(sup < lambda * d)) fail({"upper bound fails", x, y, -1, sup, lambda * d});
          break;
        case AuditMode::strict:
          if (!(sup > d)) fail({"strict lower bound fails", x, y, -1, sup, d});
          if (!(sup < lambda * d)) fail({"strict upper bound fails", x, y, -1, sup, lambda * d});
          break;
      }
    }
  if (!any_pair) {
    rep.min_lower_margin = rep.min_upper_margin = 0;
    rep.sup_ratio = rep.inf_ratio = rep.distortion = 1;
    return rep;
  }

  rep.max_coord_lip = m ? *std::max_element(lips.begin(), lips.end()) : 0.0;
  rep.min_lip_margin = lambda - rep.max_coord_lip;
  rep.distortion = rep.inf_ratio > 0 ? rep.sup_ratio / rep.inf_ratio
                                     : std::numeric_limits<double>::infinity();
  if (mode != AuditMode::plain)
    for (size_t ci = 0; ci < m; ++ci)
      if (!(lips[ci] < lambda))
        fail({"coordinate Lipschitz constant not below lambda", -1, -1, static_cast<int>(ci),
              lips[ci], lambda});

  if (emb.has_certificate()) {
    rep.witnesses_checked = true;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (x == y) continue;
        int w = emb.witness[static_cast<size_t>(x) * n + y];
        if (w < 0 || w >= static_cast<int>(m)) {
          fail({"missing covering witness", x, y, w, 0, 0});
          continue;
        }
        double diff = std::fabs(emb.coords[w].values[x] - emb.coords[w].values[y]);
        double d = space.dist(x, y);
        bool okw = (mode == AuditMode::strict) ? diff > d : diff >= d;
        if (!okw) fail({"witness coordinate fails the lower bound", x, y, w, diff, d});
      }
  }

  if (!emb.order.empty() && !emb.coords.empty()) {
    bool all_blocks = true;
    for (const auto& c : emb.coords)
      if (c.block < 1) all_blocks = false;
    if (all_blocks) {
      rep.decay_checked = true;
      for (size_t ci = 0; ci < m; ++ci) {
        const auto& c = emb.coords[ci];
        const int upto = std::min<int>(c.block, n);
        for (int r = 0; r < upto; ++r) {
          int x = emb.order[r];
          if (!(std::fabs(c.values[x]) <= lambda * c.eps))
            fail({"decay bound fails on the flat set", x, -1, static_cast<int>(ci),
                  std::fabs(c.values[x]), lambda * c.eps});
        }
      }
    }
  }
  return rep;
}

}  // namespace c0embed
