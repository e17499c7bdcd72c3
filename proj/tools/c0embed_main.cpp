// Command-line front end: build / audit / gallery / report / counterexample.
//
// Exit codes: 0 success (and, for build/audit, the requested audit passed),
// 1 construction or audit failure, 2 I/O or format problem, 3 bad options.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "c0embed/gallery_io.hpp"

using namespace c0embed;

namespace {

int classify(const calc_error& e) {
  switch (e.code()) {
    case errc::io_error:
    case errc::parse_error:
    case errc::schema_error:
      return 2;
    case errc::bad_config:
    case errc::bad_spec:
      return 3;
    default:
      return 1;
  }
}

struct BuildFlags {
  std::string input, output = "embedding.json", cert;
  double lambda = 2.0;
  std::string provider = "auto";
  std::string mode = "good";
  std::string order = "farthest-first";
  double eps_decay = 0.5;
  bool cone = false;
};

Provider pick_provider(const std::string& name, double lambda, bool cone,
                       const MetricSpace& space) {
  auto is = [&](double a, double b) { return std::fabs(a - b) <= 1e-12; };
  if (name == "fine") return Provider::fine;
  if (name == "annuli") return Provider::annuli;
  if (name == "lp") return Provider::lp;
  if (name == "cone-annuli") return Provider::cone_annuli;
  if (name == "cone-lp") return Provider::cone_lp;
  if (name != "auto") throw calc_error(errc::bad_config, "unknown provider '" + name + "'");
  if (cone) {
    if (is(lambda, 3.0)) return Provider::cone_annuli;
    if (space.has_coords() &&
        is(lambda, std::pow(1.0 + std::pow(2.0, space.exponent()), 1.0 / space.exponent())))
      return Provider::cone_lp;
    return Provider::fine;
  }
  if (is(lambda, 2.0)) return Provider::annuli;
  if (space.has_coords() && is(lambda, std::pow(2.0, 1.0 / space.exponent())))
    return Provider::lp;
  if (lambda > 1.0 && lambda < 2.0) return Provider::fine;
  throw calc_error(errc::bad_config, "no provider for lambda outside (1, 2] without --cone");
}

AuditMode mode_from(const std::string& m) {
  if (m == "plain") return AuditMode::plain;
  if (m == "good") return AuditMode::good;
  if (m == "strict") return AuditMode::strict;
  throw calc_error(errc::bad_config, "unknown mode '" + m + "' (plain|good|strict)");
}

BuildConfig build_config(const BuildFlags& f) {
  BuildConfig cfg;
  cfg.eps_decay = f.eps_decay;
  if (f.order == "input") cfg.order = BuildConfig::Order::input;
  else if (f.order == "farthest-first") cfg.order = BuildConfig::Order::farthest_first;
  else throw calc_error(errc::bad_config, "unknown order '" + f.order + "'");
  return cfg;
}

int run_build(const BuildFlags& f) {
  if (!(f.lambda > 1.0))
    throw calc_error(errc::bad_config, "invalid --lambda: must be > 1");
  MetricSpace space = load_space(f.input);
  Provider provider = pick_provider(f.provider, f.lambda, f.cone, space);
  bool cone = f.cone || provider == Provider::cone_annuli || provider == Provider::cone_lp;
  BuildConfig cfg = build_config(f);
  Embedding emb = cone ? build_cone_embedding(space, f.lambda, provider, cfg)
                       : build_good_embedding(space, f.lambda, provider, cfg);
  AuditMode mode = mode_from(f.mode);
  if (mode == AuditMode::strict && !cone) emb = strictify(space, emb);
  AuditReport rep = audit_embedding(space, emb, f.lambda, mode);
  save_embedding(emb, f.output, &rep);
  if (!f.cert.empty()) {
    std::ofstream out(f.cert);
    if (!out) throw calc_error(errc::io_error, "cannot write " + f.cert);
    out << audit_report_json(rep, f.lambda, f.mode) << "\n";
  }
  std::cout << (rep.ok ? "PASS" : "FAIL") << " mode=" << f.mode << " lambda=" << f.lambda
            << " provider=" << provider_name(provider) << " coords=" << emb.coords.size()
            << " distortion=" << rep.distortion << "\n";
  return rep.ok ? 0 : 1;
}

struct AuditFlags {
  std::string space, embedding, output;
  double lambda = 2.0;
  std::string mode = "good";
  int n0_hint = 1;
};

int run_audit(const AuditFlags& f) {
  MetricSpace space = load_space(f.space);
  Embedding emb = load_embedding(f.embedding);
  std::string verdict;
  bool ok = false;
  if (f.mode == "pigeonhole") {
    std::vector<std::vector<double>> table;
    table.reserve(emb.coords.size());
    for (const auto& c : emb.coords) table.push_back(c.values);
    PigeonholeReport rep = pigeonhole_audit(space, table, f.n0_hint);
    verdict = pigeonhole_report_json(rep);
    ok = rep.verdict != PigeonholeVerdict::inconclusive;
    std::cout << verdict_name(rep.verdict) << "\n";
  } else {
    AuditReport rep = audit_embedding(space, emb, f.lambda, mode_from(f.mode));
    verdict = audit_report_json(rep, f.lambda, f.mode);
    ok = rep.ok;
    std::cout << (rep.ok ? "PASS" : "FAIL") << " mode=" << f.mode
              << " distortion=" << rep.distortion << "\n";
  }
  if (!f.output.empty()) {
    std::ofstream out(f.output);
    if (!out) throw calc_error(errc::io_error, "cannot write " + f.output);
    out << verdict << "\n";
  }
  return ok ? 0 : 1;
}

struct GalleryFlags {
  std::string kind = "lp_sample";
  double p = 2.0;
  int n = 8, dim = 3, p_max = 3;
  uint64_t seed = 1;
  double scale = 4.0;
  std::string output = "space.json";
};

SpaceSpec to_spec(const GalleryFlags& f) {
  SpaceSpec spec;
  spec.kind = kind_from_name(f.kind);
  spec.p = f.p;
  spec.n = f.n;
  spec.dim = f.dim;
  spec.seed = f.seed;
  spec.scale = f.scale;
  spec.p_max = f.p_max;
  return spec;
}

int run_gallery(const GalleryFlags& f) {
  MetricSpace space = generate(to_spec(f));
  save_space(space, f.output);
  std::cout << "wrote " << f.output << " (" << f.kind << ", n=" << space.size() << ")\n";
  return 0;
}

struct ReportFlags {
  std::string batch;
  bool builtin = false;
  std::string output = "report.csv";
  std::string outdir = ".";
};

struct BatchItem {
  SpaceSpec spec;
  double lambda = 2.0;
  std::string provider = "auto";
  bool cone = false;
};

std::vector<BatchItem> builtin_batch() {
  // reproduces the headline lambda targets 2, 2^{1/2}, 3, (1+4)^{1/2}
  std::vector<BatchItem> items;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    BatchItem plain;
    plain.spec.kind = SpaceKind::lp_sample;
    plain.spec.p = 1;
    plain.spec.n = 14;
    plain.spec.dim = 3;
    plain.spec.seed = seed;
    plain.lambda = 2.0;
    items.push_back(plain);

    BatchItem l2 = plain;
    l2.spec.p = 2;
    l2.lambda = std::sqrt(2.0);
    items.push_back(l2);

    BatchItem cone = plain;
    cone.lambda = 3.0;
    cone.cone = true;
    items.push_back(cone);

    BatchItem cone_l2 = l2;
    cone_l2.lambda = std::sqrt(5.0);
    cone_l2.cone = true;
    items.push_back(cone_l2);
  }
  return items;
}

std::vector<BatchItem> parse_batch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw calc_error(errc::io_error, "cannot read " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw calc_error(errc::schema_error, path + ": " + e.what());
  }
  if (!j.is_array()) throw calc_error(errc::schema_error, path + ": batch must be an array");
  std::vector<BatchItem> items;
  for (const auto& row : j) {
    BatchItem it;
    it.spec.kind = kind_from_name(row.value("kind", std::string("lp_sample")));
    it.spec.p = row.value("p", 2.0);
    it.spec.n = row.value("n", 8);
    it.spec.dim = row.value("dim", 3);
    it.spec.seed = row.value("seed", 1ULL);
    it.spec.scale = row.value("scale", 4.0);
    it.spec.p_max = row.value("p_max", 3);
    it.spec.path = row.value("path", std::string());
    it.lambda = row.value("lambda", 2.0);
    it.provider = row.value("provider", std::string("auto"));
    it.cone = row.value("cone", false);
    items.push_back(std::move(it));
  }
  return items;
}

int worker_cap() {
  if (const char* env = std::getenv("C0EMBED_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

int run_report(const ReportFlags& f) {
  std::vector<BatchItem> items = f.builtin ? builtin_batch() : parse_batch(f.batch);
  std::vector<ReportRow> rows(items.size());
  std::vector<std::string> errors(items.size());
  std::atomic<size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      size_t i = cursor.fetch_add(1);
      if (i >= items.size()) return;
      const BatchItem& it = items[i];
      try {
        MetricSpace space = generate(it.spec);
        Provider provider = pick_provider(it.provider, it.lambda, it.cone, space);
        bool cone = it.cone || provider == Provider::cone_annuli || provider == Provider::cone_lp;
        Embedding emb = cone ? build_cone_embedding(space, it.lambda, provider)
                             : build_good_embedding(space, it.lambda, provider);
        AuditReport rep = audit_embedding(space, emb, it.lambda,
                                          cone ? AuditMode::strict : AuditMode::good);
        if (!rep.ok) throw calc_error(errc::invariant_error, "audit failed in batch");
        ReportRow& row = rows[i];
        row.kind = kind_name(it.spec.kind);
        row.n = space.size();
        row.seed = it.spec.seed;
        row.lambda_target = it.lambda;
        row.distortion = rep.distortion;
        row.coords = static_cast<int>(emb.coords.size());
        row.max_coord_lip = rep.max_coord_lip;
        row.min_margin = std::min(rep.min_lower_margin, rep.min_upper_margin);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  int workers = std::min<int>(worker_cap(), static_cast<int>(items.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (size_t i = 0; i < items.size(); ++i)
    if (!errors[i].empty()) {
      std::cerr << "batch item " << i << ": " << errors[i] << "\n";
      return 1;
    }
  std::ofstream out(f.output);
  if (!out) throw calc_error(errc::io_error, "cannot write " + f.output);
  out << report_csv_header() << "\n";
  for (const auto& row : rows) out << report_csv_line(row) << "\n";
  std::cout << "wrote " << f.output << " (" << rows.size() << " rows)\n";
  return 0;
}

struct CexFlags {
  int p_max = 4;
  std::string output = "counterexample.json";
};

int run_counterexample(const CexFlags& f) {
  MetricSpace space = counterexample_space(f.p_max);
  save_space_json(space, f.output);
  std::cout << "wrote " << f.output << " (n=" << space.size() << ", p_max=" << f.p_max << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certificate-carrying low-distortion embeddings into sup-norm coordinates"};
  app.require_subcommand(1);

  BuildFlags bf;
  CLI::App* build = app.add_subcommand("build", "build an embedding and audit it");
  build->add_option("--input", bf.input, "space file (.csv or .json)")->required();
  build->add_option("--output", bf.output, "embedding JSON output");
  build->add_option("--cert", bf.cert, "write the audit certificate JSON here");
  build->add_option("--lambda", bf.lambda, "distortion target");
  build->add_option("--provider", bf.provider, "auto|fine|annuli|lp|cone-annuli|cone-lp");
  build->add_option("--mode", bf.mode, "audit mode: plain|good|strict");
  build->add_option("--order", bf.order, "input|farthest-first");
  build->add_option("--eps-decay", bf.eps_decay, "epsilon ladder ratio in (0,1)");
  build->add_flag("--cone", bf.cone, "build into the nonnegative cone");

  AuditFlags af;
  CLI::App* audit = app.add_subcommand("audit", "audit an embedding file against a space");
  audit->add_option("--space", af.space, "space file")->required();
  audit->add_option("--embedding", af.embedding, "embedding JSON")->required();
  audit->add_option("--lambda", af.lambda, "distortion target");
  audit->add_option("--mode", af.mode, "plain|good|strict|pigeonhole");
  audit->add_option("--n0-hint", af.n0_hint, "threshold coordinate hint (pigeonhole)");
  audit->add_option("--output", af.output, "write the verdict JSON here");

  GalleryFlags gf;
  CLI::App* gallery = app.add_subcommand("gallery", "generate a test space");
  gallery->add_option("--kind", gf.kind, "lp_sample|graph_metric|l1_config|counterexample");
  gallery->add_option("--p", gf.p, "lp exponent");
  gallery->add_option("--n", gf.n, "point count");
  gallery->add_option("--dim", gf.dim, "dimension");
  gallery->add_option("--seed", gf.seed, "random seed");
  gallery->add_option("--scale", gf.scale, "coordinate scale");
  gallery->add_option("--pmax", gf.p_max, "counterexample size parameter");
  gallery->add_option("--output", gf.output, "output path (.csv or .json)");

  ReportFlags rf;
  CLI::App* report = app.add_subcommand("report", "run a batch and emit a distortion table");
  report->add_option("--batch", rf.batch, "batch JSON file");
  report->add_flag("--builtin", rf.builtin, "use the built-in lambda-target batch");
  report->add_option("--output", rf.output, "CSV output path");

  CexFlags cf;
  CLI::App* cex = app.add_subcommand("counterexample", "generate the cone counterexample space");
  cex->add_option("--pmax", cf.p_max, "size parameter");
  cex->add_option("--output", cf.output, "output JSON path");

  CLI11_PARSE(app, argc, argv);
  try {
    if (build->parsed()) return run_build(bf);
    if (audit->parsed()) return run_audit(af);
    if (gallery->parsed()) return run_gallery(gf);
    if (report->parsed()) return run_report(rf);
    if (cex->parsed()) return run_counterexample(cf);
  } catch (const calc_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}
