#include "c0embed/gallery_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace c0embed {

using nlohmann::json;

const char* kind_name(SpaceKind k) {
  switch (k) {
    case SpaceKind::lp_sample: return "lp_sample";
    case SpaceKind::graph_metric: return "graph_metric";
    case SpaceKind::l1_config: return "l1_config";
    case SpaceKind::counterexample: return "counterexample";
    case SpaceKind::csv: return "csv";
    case SpaceKind::json: return "json";
  }
  return "?";
}

SpaceKind kind_from_name(const std::string& s) {
  if (s == "lp_sample") return SpaceKind::lp_sample;
  if (s == "graph_metric") return SpaceKind::graph_metric;
  if (s == "l1_config") return SpaceKind::l1_config;
  if (s == "counterexample") return SpaceKind::counterexample;
  if (s == "csv") return SpaceKind::csv;
  if (s == "json") return SpaceKind::json;
  throw calc_error(errc::bad_spec, "unknown space kind '" + s + "'");
}

static double quantize(double v) { return std::round(v * 1e6) / 1e6; }

static MetricSpace gen_lp_sample(const SpaceSpec& spec) {
  if (spec.n < 1 || spec.dim < 1 || spec.p < 1 || spec.scale <= 0)
    throw calc_error(errc::bad_spec, "lp_sample needs n, dim >= 1, p >= 1, scale > 0");
  SplitMix64 rng(spec.seed);
  std::vector<std::vector<double>> pts;
  double sep = 0.02 * spec.scale;  // keeps Kuratowski ratios clear of float noise
  int stale = 0;
  while (static_cast<int>(pts.size()) < spec.n) {
    std::vector<double> cand(spec.dim);
    for (int c = 0; c < spec.dim; ++c) cand[c] = quantize(rng.uniform() * spec.scale);
    bool ok = true;
    for (const auto& q : pts)
      if (p_dist(cand, q, spec.p) < sep) { ok = false; break; }
    if (ok) {
      pts.push_back(std::move(cand));
      stale = 0;
    } else if (++stale > 5000) {
      sep *= 0.5;
      stale = 0;
    }
  }
  return MetricSpace::from_points(spec.p, std::move(pts));
}

// Connected weighted graph (random spanning path + extra chords) closed by
// Floyd-Warshall in integer micro-units, so path distances are exact.
static MetricSpace gen_graph_metric(const SpaceSpec& spec) {
  if (spec.n < 2) throw calc_error(errc::bad_spec, "graph_metric needs n >= 2");
  const int n = spec.n;
  SplitMix64 rng(spec.seed);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(0, i)]);

  const long long inf = (1LL << 60);
  std::vector<long long> w(static_cast<size_t>(n) * n, inf);
  auto set_edge = [&](int a, int b, long long units) {
    w[static_cast<size_t>(a) * n + b] = std::min(w[static_cast<size_t>(a) * n + b], units);
    w[static_cast<size_t>(b) * n + a] = w[static_cast<size_t>(a) * n + b];
  };
  for (int i = 0; i + 1 < n; ++i)
    set_edge(perm[i], perm[i + 1], rng.uniform_int(100000, 1000000));
  for (int extra = 0; extra < n; ++extra) {
    int a = rng.uniform_int(0, n - 1), b = rng.uniform_int(0, n - 1);
    if (a != b) set_edge(a, b, rng.uniform_int(100000, 1000000));
  }
  for (int i = 0; i < n; ++i) w[static_cast<size_t>(i) * n + i] = 0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      const long long wik = w[static_cast<size_t>(i) * n + k];
      if (wik >= inf) continue;
      for (int j = 0; j < n; ++j) {
        long long c = wik + w[static_cast<size_t>(k) * n + j];
        if (c < w[static_cast<size_t>(i) * n + j]) w[static_cast<size_t>(i) * n + j] = c;
      }
    }
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m[i][j] = static_cast<double>(w[static_cast<size_t>(i) * n + j]) * 1e-6;
  return validate_metric(m);
}

// Finite slice of the l^1 configuration u = e0, Y = {y : y_0 = 0}: the
// points +-(e0 + s e_i).
static MetricSpace gen_l1_config(const SpaceSpec& spec) {
  if (spec.n < 2 || spec.n % 2 != 0)
    throw calc_error(errc::bad_spec, "l1_config needs even n >= 2");
  const int m = spec.n / 2;
  const double s = quantize(spec.scale);
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  for (int i = 1; i <= m; ++i) {
    std::vector<double> v(m + 1, 0.0);
    v[0] = 1.0;
    v[i] = s;
    pts.push_back(v);
    labels.push_back("+e0+" + std::to_string(i));
    for (auto& c : v) c = -c;
    pts.push_back(v);
    labels.push_back("-e0-" + std::to_string(i));
  }
  return MetricSpace::from_points(1.0, std::move(pts), std::move(labels));
}

MetricSpace generate(const SpaceSpec& spec) {
  switch (spec.kind) {
    case SpaceKind::lp_sample: return gen_lp_sample(spec);
    case SpaceKind::graph_metric: return gen_graph_metric(spec);
    case SpaceKind::l1_config: return gen_l1_config(spec);
    case SpaceKind::counterexample: return counterexample_space(spec.p_max);
    case SpaceKind::csv: return load_space_csv(spec.path);
    case SpaceKind::json: return load_space_json(spec.path);
  }
  throw calc_error(errc::bad_spec, "unhandled space kind");
}

// ---------------------------------------------------------------------------
// distance-matrix CSV

static std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void save_space_csv(const MetricSpace& space, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw calc_error(errc::io_error, "cannot write " + path);
  const int n = space.size();
  out << n << "\n";
  const bool labeled = static_cast<int>(space.labels().size()) == n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      out << fmt(space.dist(i, j));
    }
    if (labeled) out << ',' << space.labels()[i];
    out << "\n";
  }
}

MetricSpace load_space_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw calc_error(errc::io_error, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line))
    throw calc_error(errc::parse_error, path + ":1: missing point count", 1);
  int n = 0;
  try {
    n = std::stoi(line);
  } catch (...) {
    throw calc_error(errc::parse_error, path + ":1: point count is not an integer", 1);
  }
  if (n < 0) throw calc_error(errc::parse_error, path + ":1: negative point count", 1);
  std::vector<std::vector<double>> m;
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw calc_error(errc::parse_error, path + ": unexpected end of file at row " +
                                              std::to_string(i + 2), i + 2);
    std::vector<std::string> tokens;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) tokens.push_back(tok);
    if (static_cast<int>(tokens.size()) != n && static_cast<int>(tokens.size()) != n + 1)
      throw calc_error(errc::parse_error,
                       path + ":" + std::to_string(i + 2) + ": expected " + std::to_string(n) +
                           " entries, got " + std::to_string(tokens.size()),
                       i + 2);
    std::vector<double> row(n);
    for (int j = 0; j < n; ++j) {
      try {
        size_t used = 0;
        row[j] = std::stod(tokens[j], &used);
        if (used != tokens[j].size()) throw std::invalid_argument("trailing");
      } catch (...) {
        throw calc_error(errc::parse_error,
                         path + ":" + std::to_string(i + 2) + ":" + std::to_string(j + 1) +
                             ": not a number: '" + tokens[j] + "'",
                         i + 2, j + 1);
      }
    }
    m.push_back(std::move(row));
    if (static_cast<int>(tokens.size()) == n + 1) labels.push_back(tokens[n]);
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw calc_error(errc::parse_error, path + ": labels on some rows only");
  return validate_metric(m, std::move(labels));
}

// ---------------------------------------------------------------------------
// JSON formats

static json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw calc_error(errc::io_error, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw calc_error(errc::schema_error, path + ": " + e.what());
  }
}

template <typename T>
static T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw calc_error(errc::schema_error, where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw calc_error(errc::schema_error, where + ": bad field '" + key + "': " + e.what());
  }
}

void save_space_json(const MetricSpace& space, const std::string& path) {
  if (!space.has_coords())
    throw calc_error(errc::bad_spec, "JSON space format is for coordinate-backed spaces");
  json j;
  j["p"] = space.exponent();
  j["points"] = space.points();
  if (!space.labels().empty()) j["labels"] = space.labels();
  std::ofstream out(path);
  if (!out) throw calc_error(errc::io_error, "cannot write " + path);
  out << j.dump() << "\n";
}

MetricSpace load_space_json(const std::string& path) {
  json j = parse_json_file(path);
  double p = field<double>(j, "p", path);
  auto pts = field<std::vector<std::vector<double>>>(j, "points", path);
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = field<std::vector<std::string>>(j, "labels", path);
  if (!labels.empty() && labels.size() != pts.size())
    throw calc_error(errc::schema_error, path + ": labels/points size mismatch");
  return MetricSpace::from_points(p, std::move(pts), std::move(labels));
}

static bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

void save_space(const MetricSpace& space, const std::string& path) {
  if (ends_with(path, ".json")) save_space_json(space, path);
  else save_space_csv(space, path);
}

MetricSpace load_space(const std::string& path) {
  if (ends_with(path, ".json")) return load_space_json(path);
  return load_space_csv(path);
}

void save_embedding(const Embedding& emb, const std::string& path, const AuditReport* report) {
  json j;
  j["lambda"] = emb.lambda;
  j["n"] = emb.n;
  j["cone"] = emb.cone;
  j["generator"] = kRngId;
  json coords = json::array();
  json meta = json::array();
  for (const auto& c : emb.coords) {
    coords.push_back(c.values);
    json mc;
    mc["block"] = c.block;
    mc["c"] = c.constant;
    mc["scale"] = c.scale;
    mc["eps"] = c.eps;
    mc["U"] = c.U;
    mc["V"] = c.V;
    mc["negated"] = c.negated;
    meta.push_back(std::move(mc));
  }
  j["coords"] = std::move(coords);
  j["meta"] = std::move(meta);
  j["order"] = emb.order;
  j["eps_seq"] = emb.eps_seq;
  json cert;
  json witness = json::array();
  if (!emb.witness.empty())
    for (int x = 0; x < emb.n; ++x)
      for (int y = 0; y < emb.n; ++y) {
        int w = emb.witness[static_cast<size_t>(x) * emb.n + y];
        if (w >= 0) witness.push_back(json::array({x, y, w}));
      }
  cert["witness"] = std::move(witness);
  if (report) {
    cert["min_lower_margin"] = report->min_lower_margin;
    cert["max_coord_lip"] = report->max_coord_lip;
  }
  j["cert"] = std::move(cert);
  std::ofstream out(path);
  if (!out) throw calc_error(errc::io_error, "cannot write " + path);
  out << j.dump() << "\n";
}

Embedding load_embedding(const std::string& path) {
  json j = parse_json_file(path);
  Embedding emb;
  emb.lambda = field<double>(j, "lambda", path);
  emb.n = field<int>(j, "n", path);
  emb.cone = field<bool>(j, "cone", path);
  auto coords = field<std::vector<std::vector<double>>>(j, "coords", path);
  if (!j.contains("meta") || !j.at("meta").is_array() || j.at("meta").size() != coords.size())
    throw calc_error(errc::schema_error, path + ": meta/coords size mismatch");
  for (size_t i = 0; i < coords.size(); ++i) {
    if (static_cast<int>(coords[i].size()) != emb.n)
      throw calc_error(errc::schema_error,
                       path + ": coords[" + std::to_string(i) + "] has wrong point count");
    const json& mc = j.at("meta").at(i);
    EmbeddingCoordinate ec;
    ec.values = std::move(coords[i]);
    ec.block = field<int>(mc, "block", path);
    ec.constant = field<double>(mc, "c", path);
    ec.scale = field<double>(mc, "scale", path);
    ec.eps = field<double>(mc, "eps", path);
    ec.U = field<std::vector<int>>(mc, "U", path);
    ec.V = field<std::vector<int>>(mc, "V", path);
    ec.negated = field<bool>(mc, "negated", path);
    emb.coords.push_back(std::move(ec));
  }
  if (j.contains("order")) emb.order = field<std::vector<int>>(j, "order", path);
  if (j.contains("eps_seq")) emb.eps_seq = field<std::vector<double>>(j, "eps_seq", path);
  if (j.contains("cert") && j.at("cert").contains("witness")) {
    const json& w = j.at("cert").at("witness");
    if (!w.empty()) {
      emb.witness.assign(static_cast<size_t>(emb.n) * emb.n, -1);
      for (const json& t : w) {
        if (!t.is_array() || t.size() != 3)
          throw calc_error(errc::schema_error, path + ": witness entries must be [i,j,coord]");
        int x = t.at(0).get<int>(), y = t.at(1).get<int>(), c = t.at(2).get<int>();
        if (x < 0 || y < 0 || x >= emb.n || y >= emb.n || c < 0 ||
            c >= static_cast<int>(emb.coords.size()))
          throw calc_error(errc::schema_error, path + ": witness entry out of range");
        emb.witness[static_cast<size_t>(x) * emb.n + y] = c;
      }
    }
  }
  return emb;
}

std::string audit_report_json(const AuditReport& rep, double lambda, const std::string& mode) {
  json j;
  j["ok"] = rep.ok;
  j["mode"] = mode;
  j["lambda"] = lambda;
  j["min_lower_margin"] = rep.min_lower_margin;
  j["min_upper_margin"] = rep.min_upper_margin;
  j["max_coord_lip"] = rep.max_coord_lip;
  j["min_lip_margin"] = rep.min_lip_margin;
  j["sup_ratio"] = rep.sup_ratio;
  j["inf_ratio"] = rep.inf_ratio;
  j["distortion"] = rep.distortion;
  j["witnesses_checked"] = rep.witnesses_checked;
  j["decay_checked"] = rep.decay_checked;
  j["nonnegative"] = rep.nonnegative;
  if (rep.violation) {
    json v;
    v["what"] = rep.violation->what;
    v["i"] = rep.violation->i;
    v["j"] = rep.violation->j;
    v["coord"] = rep.violation->coord;
    v["lhs"] = rep.violation->lhs;
    v["rhs"] = rep.violation->rhs;
    j["violation"] = std::move(v);
  }
  return j.dump();
}

std::string pigeonhole_report_json(const PigeonholeReport& rep) {
  json j;
  j["verdict"] = verdict_name(rep.verdict);
  j["C"] = rep.C;
  j["n0"] = rep.n0;
  j["p"] = rep.p;
  json w;
  switch (rep.verdict) {
    case PigeonholeVerdict::direct_violation:
      w["i"] = rep.i;
      w["j"] = rep.j;
      w["dist"] = rep.dist;
      w["image_dist"] = rep.image_dist;
      w["side"] = rep.side;
      break;
    case PigeonholeVerdict::pigeonhole_contradiction:
      w["k"] = rep.k;
      w["l"] = rep.l;
      w["coord"] = rep.coord;
      w["detail"] = rep.detail;
      break;
    case PigeonholeVerdict::inconclusive:
      w["required_p"] = rep.required_p;
      w["detail"] = rep.detail;
      break;
  }
  j["witness"] = std::move(w);
  return j.dump();
}

std::string report_csv_header() {
  return "kind,n,seed,lambda_target,distortion,coords,max_coord_lip,min_margin";
}

std::string report_csv_line(const ReportRow& row) {
  std::ostringstream os;
  os << row.kind << ',' << row.n << ',' << row.seed << ',' << fmt(row.lambda_target) << ','
     << fmt(row.distortion) << ',' << row.coords << ',' << fmt(row.max_coord_lip) << ','
     << fmt(row.min_margin);
  return os.str();
}

}  // namespace c0embed
