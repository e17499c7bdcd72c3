#ifndef C0EMBED_METRIC_CORE_HPP
#define C0EMBED_METRIC_CORE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace c0embed {

// Absolute tolerance for metric axiom checks. Certified strict inequalities
// elsewhere are never hidden behind this: they carry explicit margins.
inline constexpr double kAxiomTol = 1e-9;

enum class errc {
  asymmetry,
  nonzero_diagonal,
  zero_off_diagonal,
  triangle_violation,
  empty_pair_set,
  empty_set,
  bad_index,
  lipschitz_hypothesis_violated,
  lower_bound_hypothesis_violated,
  gap_hypothesis_violated,
  no_feasible_epsilon,
  non_decreasing_eps_seq,
  eps_seq_exhausted,
  provider_hypothesis_violated,
  cover_hypothesis_violated,
  too_large,
  scale_infeasible,
  not_good,
  seed_too_small,
  shape_mismatch,
  bad_spec,
  io_error,
  parse_error,
  schema_error,
  invariant_error,
  bad_config,
};

const char* errc_name(errc c);

class calc_error : public std::runtime_error {
 public:
  calc_error(errc code, const std::string& msg, long i = -1, long j = -1, long k = -1)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code), i_(i), j_(j), k_(k) {}
  errc code() const { return code_; }
  long i() const { return i_; }
  long j() const { return j_; }
  long k() const { return k_; }

 private:
  errc code_;
  long i_, j_, k_;
};

/// A validated finite metric space. Optionally coordinate-backed, in which
/// case dist equals the l^p distance of the stored point vectors.
class MetricSpace {
 public:
  static MetricSpace from_matrix(std::vector<std::vector<double>> m,
                                 std::vector<std::string> labels = {});
  static MetricSpace from_points(double p, std::vector<std::vector<double>> pts,
                                 std::vector<std::string> labels = {});

  int size() const { return n_; }
  double dist(int i, int j) const { return d_[static_cast<size_t>(i) * n_ + j]; }
  double diameter() const { return diameter_; }
  double min_separation() const { return min_sep_; }

  bool has_coords() const { return static_cast<bool>(exponent_); }
  double exponent() const { return *exponent_; }
  const std::vector<std::vector<double>>& points() const { return points_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// d(x, S) = min over s in S of d(x, s).
  double dist_to_set(int x, std::span<const int> s) const;

 private:
  MetricSpace() = default;
  int n_ = 0;
  std::vector<double> d_;
  double diameter_ = 0;
  double min_sep_ = 0;
  std::optional<double> exponent_;
  std::vector<std::vector<double>> points_;
  std::vector<std::string> labels_;
};

/// Checks symmetry, zero diagonal, positivity off the diagonal and the
/// triangle inequality (tolerance kAxiomTol). Throws calc_error naming the
/// first violated axiom with witnessing indices.
MetricSpace validate_metric(const std::vector<std::vector<double>>& m,
                            std::vector<std::string> labels = {});

/// Collapses groups of points at mutual distance <= tol to their first
/// representative. Returns the reduced matrix and the kept row indices.
std::pair<std::vector<std::vector<double>>, std::vector<int>>
merge_duplicates(const std::vector<std::vector<double>>& m, double tol = kAxiomTol);

/// l^p norm of a vector; p may be infinity.
double p_norm(std::span<const double> v, double p);
/// l^p distance between two equally sized vectors.
double p_dist(std::span<const double> a, std::span<const double> b, double p);

/// A set of ordered index pairs (x, y), x != y, kept sorted and unique.
struct PairSet {
  std::vector<std::pair<int, int>> pairs;

  static PairSet of(std::vector<std::pair<int, int>> raw, int n);
  static PairSet all_distinct(int n);

  bool empty() const { return pairs.empty(); }
  size_t size() const { return pairs.size(); }
  bool contains(int x, int y) const;
};

struct Rectangle {
  std::vector<int> U, V;  // sorted
};

struct Ball {
  int center = 0;
  double radius = 0;  // balls are closed
};

/// gap of E: min of d(x,y) over the pairs. Equals the d1-distance from E to
/// the diagonal of MxM.
double gap(const MetricSpace& space, const PairSet& e);

/// max of d(x,y) over the pairs.
double diameter_of_pairs(const MetricSpace& space, const PairSet& e);

/// Smallest rectangle pi(E) = pi1(E) x pi2(E) containing E.
Rectangle rectangle(const PairSet& e);

/// gap between two point sets: min of d over U x V.
double set_gap(const MetricSpace& space, std::span<const int> u, std::span<const int> v);

/// d1((x,y),(x',y')) = d(x,x') + d(y,y') on MxM.
double d1(const MetricSpace& space, std::pair<int, int> a, std::pair<int, int> b);

/// Greedy farthest-first ordering of all points, seeded at `start`; ties go
/// to the lowest index.
std::vector<int> farthest_first_order(const MetricSpace& space, int start = 0);

}  // namespace c0embed

#endif
