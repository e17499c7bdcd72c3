#ifndef C0EMBED_EMBEDDING_BUILDER_HPP
#define C0EMBED_EMBEDDING_BUILDER_HPP

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c0embed/partition_engine.hpp"

namespace c0embed {

/// Unscaled output of the coordinate lemmas: a 1-Lipschitz function that is
/// flat (|f| <= eps) on F and has constant difference `constant` across
/// U x V. `negated` marks the cone variant's side swap, in which case the
/// difference across U x V is -constant.
struct CoordinateFunction {
  std::vector<double> values;
  double constant = 0;
  double t = 0, s = 0;
  double eps = 0;
  bool negated = false;
};

/// min{d(x,U)+t, d(x,V)+s, d(x,F)+eps} with t = min(c, delta(U,F)+eps),
/// s = t - c, c = min{delta(U,V), delta(U,F)+delta(V,F)+2 eps}.
CoordinateFunction bump_coordinate(const MetricSpace& space, std::span<const int> U,
                                   std::span<const int> V, std::span<const int> F,
                                   double eps);
/// Same, with d(.,F) precomputed for every point.
CoordinateFunction bump_coordinate(const MetricSpace& space, std::span<const int> U,
                                   std::span<const int> V, std::span<const int> F,
                                   double eps, std::span<const double> dist_f);

/// One scaled coordinate of an assembled embedding.
struct EmbeddingCoordinate {
  std::vector<double> values;  // already multiplied by `scale`
  int block = -1;              // -1: carries no block/decay claims
  double constant = 0;         // c_n before scaling
  double scale = 1;            // certified Lipschitz bound of this coordinate
  double eps = 0;              // flat-on-F bound before scaling
  std::vector<int> U, V;
  bool negated = false;
};

struct Embedding {
  double lambda = 0;
  int n = 0;
  bool cone = false;
  std::vector<EmbeddingCoordinate> coords;
  std::vector<int> order;       // dense enumeration; prefixes are the F_k
  std::vector<double> eps_seq;  // block epsilon ladder
  std::vector<int> witness;     // n*n, ordered pair (x,y) -> coordinate, -1 on diagonal

  double value(int coord, int x) const { return coords[coord].values[x]; }
  bool has_certificate() const { return !witness.empty(); }
};

struct BuildConfig {
  enum class Order { input, farthest_first };
  Order order = Order::farthest_first;
  double eps_decay = 0.5;  // geometric ladder ratio, in (0,1)
};

/// Strictly decreasing epsilon ladder: geometric decay from eps1 flattening
/// toward eps_floor (never reaching it).
std::vector<double> make_eps_ladder(double eps1, double ratio, double eps_floor, int len);

/// The full good-lambda pipeline: dense order, epsilon ladder, block
/// decomposition, per-block partitions, bump coordinates scaled by
/// lambda_n = (diam(E_n)/c_n + lambda)/2 < lambda.
Embedding build_good_embedding(const MetricSpace& space, double lambda, Provider provider,
                               const BuildConfig& config = {});

/// Multiplies each coordinate by alpha_n in (1,2) with alpha_n scale_n <
/// lambda, turning a good embedding into a strict and good one.
Embedding strictify(const MetricSpace& space, const Embedding& emb);

/// x -> (d(x, a_i))_i. Distortion exactly 1 into the sup norm; carries no
/// covering or decay certificate.
Embedding kuratowski_baseline(const MetricSpace& space);

enum class AuditMode { plain, good, strict };

struct Violation {
  std::string what;
  int i = -1, j = -1, coord = -1;
  double lhs = 0, rhs = 0;
};

struct AuditReport {
  bool ok = true;
  std::optional<Violation> violation;
  double min_lower_margin = 0;  // min over pairs of ||f(x)-f(y)|| - d(x,y)
  double min_upper_margin = 0;  // min over pairs of lambda d(x,y) - ||f(x)-f(y)||
  double max_coord_lip = 0;
  double min_lip_margin = 0;  // lambda - max_coord_lip
  double sup_ratio = 1, inf_ratio = 1;
  double distortion = 1;  // sup_ratio / inf_ratio
  bool witnesses_checked = false;
  bool decay_checked = false;
  bool nonnegative = true;
};

/// Pair-exhaustive audit. plain: d <= ||.|| <= lambda d up to 1e-12 slack.
/// good: lower margins >= 0 exactly, every coordinate Lipschitz < lambda,
/// witnesses verified. strict: both displays strict. When the embedding
/// carries blocks, also checks the flat-on-F decay bound per coordinate.
AuditReport audit_embedding(const MetricSpace& space, const Embedding& emb, double lambda,
                            AuditMode mode);

// Shared assembly loop used by the plain and cone builders. The partitioner
// receives the block set and d(.,F_k); the coordinate factory receives the
// piece rectangle, F_k, the (already multiplied) eps and d(.,F_k).
using BlockPartitioner = std::function<BoundedPartition(
    int k, std::span<const int> F, std::span<const int> G, double alpha, double beta,
    const PairSet& block, std::span<const double> dist_f)>;
using CoordFactory = std::function<CoordinateFunction(
    std::span<const int> U, std::span<const int> V, std::span<const int> F, double eps,
    std::span<const double> dist_f)>;

Embedding assemble_embedding(const MetricSpace& space, double lambda, bool cone,
                             std::span<const int> order, std::span<const double> eps_seq,
                             std::span<const PairSet> blocks,
                             const BlockPartitioner& partitioner,
                             const CoordFactory& coord_factory, double coord_eps_factor);

}  // namespace c0embed

#endif
