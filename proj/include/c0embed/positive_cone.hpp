#ifndef C0EMBED_POSITIVE_CONE_HPP
#define C0EMBED_POSITIVE_CONE_HPP

#include <span>
#include <string>
#include <vector>

#include "c0embed/embedding_builder.hpp"

namespace c0embed {

/// phi >= 0 with |phi(x)-phi(y)| <= d(x,y) <= theta max(phi(x), phi(y)),
/// theta < lambda.
struct ControlFunction {
  std::vector<double> phi;
  double theta = 1;
};

/// For lambda <= 2: phi = d(., anchor) + diam(M) with theta = 1. For
/// lambda > 2: phi = d(., anchor) with theta = 2. Invariants are verified
/// exhaustively.
ControlFunction control_function(const MetricSpace& space, double lambda, int anchor);

/// Annuli partition in the cone sense (lambda = 3): requires
/// delta(E) > 3 max(r1, r2); larger radius is used for both balls.
PiWitness cone_annuli_partition(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2);

/// l^p cone partition (lambda = (1+2^p)^{1/p}): requires
/// delta(E)^p - (1+2^p) max(r1,r2)^p > 0.
PiWitness cone_lp_partition(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2);

/// Nonnegative coordinate x -> max(t - d(x, A), 0). Sides are swapped
/// internally when delta(V,F) > delta(U,F) (negated = true), so across
/// U x V the difference is +-min{delta(U,V), max(delta(U,F),delta(V,F))+eps}.
CoordinateFunction cone_coordinate(const MetricSpace& space, std::span<const int> U,
                                   std::span<const int> V, std::span<const int> F,
                                   double eps);
CoordinateFunction cone_coordinate(const MetricSpace& space, std::span<const int> U,
                                   std::span<const int> V, std::span<const int> F,
                                   double eps, std::span<const double> dist_f);

/// A+(G, alpha) = { (x,y) : d(x,y) >= lambda (max(d(x,G), d(y,G)) + alpha) }.
struct APlusSet {
  std::vector<int> G;
  double alpha = 0;
  double lambda = 0;
  PairSet pairs;
};

APlusSet a_plus_set(const MetricSpace& space, std::vector<int> G, double alpha, double lambda);

/// Cone block decomposition. Requires eps_seq[0] > phi(dense_order[0]).
std::vector<PairSet> cone_delta_blocks(const MetricSpace& space, std::span<const int> dense_order,
                                       std::span<const double> eps_seq, double lambda,
                                       const ControlFunction& phi);

/// Partition of A+(G,alpha) \ A+(F,beta) with
/// diam(E_n) < lambda min{delta(U_n,V_n), max(delta(U_n,F),delta(V_n,F)) + 2 beta}.
BoundedPartition lemma615_partition(const MetricSpace& space, std::span<const int> F,
                                    std::span<const int> G, double alpha, double beta,
                                    double lambda, Provider provider);

/// Theorem-level cone pipeline for lambda in (1, 3]: nonnegative coordinates,
/// strict distortion below lambda.
Embedding build_cone_embedding(const MetricSpace& space, double lambda, Provider provider,
                               const BuildConfig& config = {});

/// M = {0, e0} + { p e_k, e0 + p e_k : 1 <= k <= p <= p_max } in l^1, with
/// exact integer distances. 2 + p_max (p_max + 1) points.
MetricSpace counterexample_space(int p_max);

enum class PigeonholeVerdict { direct_violation, pigeonhole_contradiction, inconclusive };

const char* verdict_name(PigeonholeVerdict v);

struct PigeonholeReport {
  PigeonholeVerdict verdict = PigeonholeVerdict::inconclusive;
  // direct violation witness
  int i = -1, j = -1;
  double dist = 0, image_dist = 0;
  std::string side;
  // pigeonhole data
  double C = 0;
  int n0 = 0;
  int p = 0;
  int k = -1, l = -1;
  int coord = -1;
  int required_p = 0;
  std::string detail;
};

/// Audits a claimed nonnegative 2-embedding table (one row per coordinate)
/// of a counterexample space. Tries the counting contradiction first (C,
/// n0, a usable p > max(C/2+1, 2^{n0}), a collision of the threshold
/// fingerprints plus the violated distance chain), falls back to the
/// exhaustive pairwise check, and reports Inconclusive with the required
/// p_max when the space is too small to discriminate.
PigeonholeReport pigeonhole_audit(const MetricSpace& space,
                                  const std::vector<std::vector<double>>& table,
                                  int n0_hint = 1);

}  // namespace c0embed

#endif
