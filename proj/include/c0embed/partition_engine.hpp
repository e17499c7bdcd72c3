#ifndef C0EMBED_PARTITION_ENGINE_HPP
#define C0EMBED_PARTITION_ENGINE_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "c0embed/metric_core.hpp"

namespace c0embed {

struct PieceInfo {
  PairSet pairs;
  double gap = 0;        // delta(E_n)
  double diam = 0;       // diam(E_n)
  Rectangle rect;        // pi(E_n) = U_n x V_n
  double rect_gap = 0;   // delta(U_n, V_n) = delta(pi(E_n))
};

/// A finite partition of `parent` into non-empty disjoint pair sets with
/// cached per-piece statistics. Pieces are ordered by their smallest pair.
struct Partition {
  PairSet parent;
  std::vector<PieceInfo> pieces;
};

/// Builds a Partition, checking that the pieces are disjoint, non-empty and
/// cover the parent exactly.
Partition make_partition(const MetricSpace& space, PairSet parent,
                         std::vector<PairSet> pieces);

/// A partition together with the pi(lambda) margins
/// lambda * delta(pi(E_n)) - diam(E_n), all required to be positive.
struct PiWitness {
  double lambda = 0;
  Partition partition;
  std::vector<double> margins;
};

/// Wraps a partition as a PiWitness, computing the margins and throwing if
/// any fails to be strictly positive.
PiWitness certify_pi(double lambda, Partition part);

struct WitnessAudit {
  bool ok = true;
  double min_margin = 0;
  int bad_piece = -1;
  std::string what;
};

/// Re-derives every piece's gap/diameter/rectangle from its raw pair list
/// and checks all margins are strictly positive and the pieces tile the
/// parent. Trusts nothing cached in the witness.
WitnessAudit audit_pi_witness(const MetricSpace& space, const PiWitness& w);

/// A(F, beta) = { (x,y) : lambda (d(x,F) + d(y,F) + beta) <= d(x,y) }.
struct ASet {
  std::vector<int> F;
  double beta = 0;
  double lambda = 0;
  PairSet pairs;
};

ASet a_set(const MetricSpace& space, std::vector<int> F, double beta, double lambda);

/// Range-refinement partition: given P with Lip(P) <= lambda on all pairs and
/// d(x,y) <= ||P(x)-P(y)|| on E, produces pieces with
/// diam(E_n) < lambda * delta(pi(E_n)) + eps by cutting the P-range into grid
/// cells of diameter < eps/4. P is one range vector per point, measured in
/// the l^range_p norm (range_p may be infinity).
Partition refine_by_range(const MetricSpace& space, const PairSet& e,
                          const std::vector<std::vector<double>>& P, double range_p,
                          double lambda, double eps);

/// Annuli partition witnessing pi(2): requires E inside B1 x B2 with
/// delta(E) > 2 (r1 + r2). Breakpoints advance by 0.9 * (delta(E) - 2(r1+r2)).
PiWitness annuli_partition(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2);

/// Small-d1-diameter partition witnessing pi(lambda) for any lambda > 1 on a
/// finite space. Greedy clustering at threshold delta(E)(lambda-1)/(lambda+2).
PiWitness fine_partition(const MetricSpace& space, const PairSet& e, double lambda);

/// l^p tail-truncation partition witnessing pi(2^{1/p}) on coordinate-backed
/// spaces: requires delta(E)^p - 2 (r1+r2)^p > 0.
PiWitness lp_partition(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2);

/// Largest eps in (0, hi] passing the monotone feasibility predicate
/// (feasible near 0, infeasible beyond some threshold); 0 if none found.
double bisect_feasible_eps(double hi, const std::function<bool(double)>& feasible);

/// Shared tail step of the l^p providers: picks the shortest coordinate
/// prefix whose discarded tail separates the two ball centers by less than
/// eps, then grid-partitions E by that prefix (cells of diameter < eps/4)
/// and certifies the margins at lambda_target.
PiWitness lp_truncation_partition(const MetricSpace& space, const PairSet& e, Ball b1,
                                  Ball b2, double eps, double lambda_target);

/// Blocks Delta_k = A(F_{k+1}, eps_{k+1}) \ A(F_k, eps_k) over the prefixes
/// F_k of dense_order. Returns blocks 1..K (possibly empty in the middle)
/// where K is the first index at which every distinct pair is covered.
std::vector<PairSet> delta_blocks(const MetricSpace& space, std::span<const int> dense_order,
                                  std::span<const double> eps_seq, double lambda);

enum class Provider { fine, annuli, lp, cone_annuli, cone_lp };

const char* provider_name(Provider p);

/// Partition of A(G, alpha) \ A(F, beta) with the two-sided bound
///   diam(E_n) < lambda * min{ delta(U_n,V_n), c_f(E_n) },
/// where c_f = delta(U_n,F) + delta(V_n,F) + 2 beta. Clusters the support by
/// distance profiles to G (bin width alpha/5), wraps clusters in balls of
/// radius delta(B_j,G) + alpha/4, and hands each cluster-pair to the
/// provider, short-circuiting to a single piece when the centers are far
/// apart. The same machinery serves the cone variant (positive_cone.hpp).
struct BoundedPartition {
  Partition partition;
  std::vector<double> c_uv;  // delta(U_n, V_n) per piece
  std::vector<double> c_f;   // the F-side constant per piece
};

BoundedPartition lemma46_partition(const MetricSpace& space, std::span<const int> F,
                                   std::span<const int> G, double alpha, double beta,
                                   double lambda, Provider provider);

/// Shared clustering core behind lemma46_partition and its cone twin: the
/// caller supplies the already-computed block set and the sub-partition
/// strategy; `cone` switches the gap check, ball radii and F-side constant
/// to the max forms.
BoundedPartition block_partition_core(
    const MetricSpace& space, const PairSet& delta_set, std::span<const int> F,
    std::span<const int> G, double alpha, double beta, double lambda,
    const std::function<PiWitness(const PairSet&, Ball, Ball)>& run_provider, bool cone);

/// Brute-force minimal pi(lambda) partition size over all set partitions of
/// E (restricted growth strings, pruned). |E| <= 8.
std::optional<int> min_partition_size(const MetricSpace& space, const PairSet& e,
                                      double lambda, int max_size);

/// A product cover for one scale band, as supplied by a Pi(lambda) strategy:
/// products U_n x V_n covering the band with lambda * delta(U_n,V_n) >= nu * (r1 + r2).
struct ProductCover {
  std::vector<Rectangle> products;
};

using PiCoverFn = std::function<ProductCover(const MetricSpace&, const PairSet& band,
                                             Ball b1, Ball b2, double lambda, double mu)>;

/// Lemma "Pi(lambda) implies pi(lambda)" made concrete: slices E into scale
/// bands with ratio < nu/mu, covers each band by products from the strategy,
/// disjointifies the products and intersects. Requires delta(E) > mu (r1+r2)
/// and every returned product to satisfy the nu-gap condition.
PiWitness pi_from_Pi(const MetricSpace& space, const PairSet& e, Ball b1, Ball b2,
                     double lambda, double mu, double nu, const PiCoverFn& cover);

/// The simplest Pi strategy: one singleton product {u} x {v} per covered
/// pair. Valid with any nu <= lambda * mu.
ProductCover singleton_pi_cover(const MetricSpace& space, const PairSet& band, Ball b1,
                                Ball b2, double lambda, double mu);

}  // namespace c0embed

#endif
