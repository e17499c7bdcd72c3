#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "c0embed/metric_core.hpp"

using namespace c0embed;

namespace {

// 0 -- 1 -- 2 path metric: d(0,1) = d(1,2) = 1, d(0,2) = 2
MetricSpace path3() {
  return validate_metric({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
}

// seeded random valid metric via random points on a line segment
MetricSpace random_line_space(int n, unsigned seed) {
  std::vector<std::vector<double>> pts;
  uint64_t s = seed;
  auto rnd = [&]() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  };
  while (static_cast<int>(pts.size()) < n) {
    double v = std::floor(rnd() * 1000.0) / 100.0;
    bool dup = false;
    for (auto& q : pts) dup |= q[0] == v;
    if (!dup) pts.push_back({v});
  }
  return MetricSpace::from_points(1.0, pts);
}

}  // namespace

TEST_CASE("validate_metric accepts singletons and two-point spaces") {
  MetricSpace one = validate_metric({{0}});
  CHECK(one.size() == 1);
  MetricSpace two = validate_metric({{0, 1}, {1, 0}});
  CHECK(two.size() == 2);
  CHECK(two.dist(0, 1) == 1.0);
}

TEST_CASE("validate_metric reports the first violated axiom with witnesses") {
  CHECK_THROWS_WITH_AS(validate_metric({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}}),
                       doctest::Contains("TriangleViolation"), calc_error);
  try {
    validate_metric({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}});
  } catch (const calc_error& e) {
    CHECK(e.code() == errc::triangle_violation);
    CHECK(e.i() == 0);
    CHECK(e.k() == 2);
  }
  CHECK_THROWS_AS(validate_metric({{0, 1}, {2, 0}}), calc_error);
  try {
    validate_metric({{0, 1}, {2, 0}});
  } catch (const calc_error& e) {
    CHECK(e.code() == errc::asymmetry);
  }
  try {
    validate_metric({{1, 2}, {2, 0}});
  } catch (const calc_error& e) {
    CHECK(e.code() == errc::nonzero_diagonal);
  }
  try {
    validate_metric({{0, 0}, {0, 0}});
  } catch (const calc_error& e) {
    CHECK(e.code() == errc::zero_off_diagonal);
  }
}

TEST_CASE("merge_duplicates collapses zero-distance twins") {
  std::vector<std::vector<double>> m{{0, 0, 1}, {0, 0, 1}, {1, 1, 0}};
  auto [reduced, kept] = merge_duplicates(m);
  CHECK(kept == std::vector<int>{0, 2});
  CHECK(reduced.size() == 2);
  CHECK(reduced[0][1] == 1.0);
  CHECK_NOTHROW(validate_metric(reduced));
}

TEST_CASE("gap and diameter on the path metric") {
  MetricSpace s = path3();
  PairSet single = PairSet::of({{0, 2}}, 3);
  CHECK(gap(s, single) == 2.0);
  CHECK(diameter_of_pairs(s, single) == 2.0);
  PairSet both = PairSet::of({{0, 1}, {0, 2}}, 3);
  CHECK(gap(s, both) == 1.0);
  CHECK(diameter_of_pairs(s, both) == 2.0);
  CHECK_THROWS_AS(gap(s, PairSet{}), calc_error);
}

TEST_CASE("gap equals d1-distance from E to the diagonal") {
  MetricSpace s = random_line_space(7, 11);
  PairSet e = PairSet::of({{0, 3}, {2, 5}, {6, 1}}, 7);
  double d1_to_diag = std::numeric_limits<double>::infinity();
  for (auto [x, y] : e.pairs)
    for (int z = 0; z < 7; ++z)
      d1_to_diag = std::min(d1_to_diag, d1(s, {x, y}, {z, z}));
  CHECK(gap(s, e) == doctest::Approx(d1_to_diag).epsilon(1e-15));
}

TEST_CASE("gap and diameter agree with independent re-enumeration on random pair sets") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    MetricSpace s = random_line_space(9, seed);
    std::vector<std::pair<int, int>> raw;
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j)
        if (i != j && ((i * 31 + j * 7 + seed) % 3 == 0)) raw.emplace_back(i, j);
    if (raw.empty()) continue;
    PairSet e = PairSet::of(raw, 9);
    double mn = std::numeric_limits<double>::infinity(), mx = 0;
    for (auto [x, y] : raw) {
      mn = std::min(mn, s.dist(x, y));
      mx = std::max(mx, s.dist(x, y));
    }
    CHECK(gap(s, e) == mn);
    CHECK(diameter_of_pairs(s, e) == mx);
  }
}

TEST_CASE("rectangle projections and minimality") {
  PairSet a = PairSet::of({{0, 2}}, 4);
  Rectangle ra = rectangle(a);
  CHECK(ra.U == std::vector<int>{0});
  CHECK(ra.V == std::vector<int>{2});

  PairSet b = PairSet::of({{0, 2}, {1, 3}}, 4);
  Rectangle rb = rectangle(b);
  CHECK(rb.U == std::vector<int>{0, 1});
  CHECK(rb.V == std::vector<int>{2, 3});
  CHECK_FALSE(b.contains(0, 3));  // in pi(E) \ E
}

TEST_CASE("rectangle gap dominates: delta(pi(E)) <= delta(E) <= diam(E) <= diam(pi(E))") {
  for (unsigned seed = 2; seed <= 8; ++seed) {
    MetricSpace s = random_line_space(8, seed);
    std::vector<std::pair<int, int>> raw;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        if (i != j && ((i * 13 + j * 5 + seed) % 4 == 0)) raw.emplace_back(i, j);
    if (raw.empty()) continue;
    PairSet e = PairSet::of(raw, 8);
    Rectangle r = rectangle(e);
    double rect_gap = set_gap(s, r.U, r.V);
    double rect_diam = 0;
    for (int u : r.U)
      for (int v : r.V) rect_diam = std::max(rect_diam, s.dist(u, v));
    CHECK(rect_gap <= gap(s, e));
    CHECK(gap(s, e) <= diameter_of_pairs(s, e));
    CHECK(diameter_of_pairs(s, e) <= rect_diam);
  }
}

TEST_CASE("diameter of U x U is the usual diameter of U") {
  MetricSpace s = random_line_space(6, 3);
  std::vector<int> u{0, 2, 4};
  std::vector<std::pair<int, int>> raw;
  for (int a : u)
    for (int b : u)
      if (a != b) raw.emplace_back(a, b);
  double usual = 0;
  for (int a : u)
    for (int b : u) usual = std::max(usual, s.dist(a, b));
  CHECK(diameter_of_pairs(s, PairSet::of(raw, 6)) == usual);
}

TEST_CASE("set_gap basics") {
  MetricSpace two = validate_metric({{0, 1}, {1, 0}});
  std::vector<int> u{0}, uv{0, 1};
  CHECK(set_gap(two, u, uv) == 0.0);  // shared point
  MetricSpace s = path3();
  std::vector<int> a{0}, b{2};
  CHECK(set_gap(s, a, b) == 2.0);
  CHECK_THROWS_AS(set_gap(s, std::vector<int>{}, b), calc_error);
}

TEST_CASE("set_gap is a lower bound for every sampled pair") {
  MetricSpace s = random_line_space(9, 17);
  std::vector<int> u{0, 1, 4}, v{5, 7, 8};
  double g = set_gap(s, u, v);
  for (int a : u)
    for (int b : v) CHECK(g <= s.dist(a, b));
}

TEST_CASE("farthest-first order starts at the seed and visits everything") {
  MetricSpace s = path3();
  auto order = farthest_first_order(s, 0);
  CHECK(order == std::vector<int>{0, 2, 1});
  MetricSpace r = random_line_space(12, 5);
  auto ord = farthest_first_order(r, 0);
  std::vector<int> sorted = ord;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 12; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("coordinate-backed space distances equal the p-norm") {
  MetricSpace s = MetricSpace::from_points(1.0, {{0, 0}, {1, 0}, {1, 2}});
  CHECK(s.dist(0, 2) == 3.0);
  CHECK(s.has_coords());
  CHECK(s.exponent() == 1.0);
  MetricSpace e2 = MetricSpace::from_points(2.0, {{0, 0}, {3, 4}});
  CHECK(e2.dist(0, 1) == doctest::Approx(5.0).epsilon(1e-15));
}
