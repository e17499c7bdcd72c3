#ifndef C0EMBED_GALLERY_IO_HPP
#define C0EMBED_GALLERY_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "c0embed/embedding_builder.hpp"
#include "c0embed/positive_cone.hpp"

namespace c0embed {

/// Portable seeded generator (splitmix64); every generated corpus records
/// this identifier so runs can be reproduced bit for bit.
inline constexpr const char* kRngId = "splitmix64";

struct SplitMix64 {
  uint64_t state = 0;
  explicit SplitMix64(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
  }
};

enum class SpaceKind { lp_sample, graph_metric, l1_config, counterexample, csv, json };

const char* kind_name(SpaceKind k);
SpaceKind kind_from_name(const std::string& s);

struct SpaceSpec {
  SpaceKind kind = SpaceKind::lp_sample;
  double p = 2.0;      // lp_sample exponent
  int n = 8;           // point count (lp_sample, graph: nodes; l1_config: 2*m)
  int dim = 3;         // lp_sample dimension
  uint64_t seed = 1;
  double scale = 4.0;
  int p_max = 3;       // counterexample
  std::string path;    // csv / json
};

/// Deterministic for a fixed spec; every output passes validate_metric.
MetricSpace generate(const SpaceSpec& spec);

void save_space_csv(const MetricSpace& space, const std::string& path);
MetricSpace load_space_csv(const std::string& path);
void save_space_json(const MetricSpace& space, const std::string& path);
MetricSpace load_space_json(const std::string& path);
/// Dispatches on the .csv / .json extension.
void save_space(const MetricSpace& space, const std::string& path);
MetricSpace load_space(const std::string& path);

void save_embedding(const Embedding& emb, const std::string& path,
                    const AuditReport* report = nullptr);
Embedding load_embedding(const std::string& path);

std::string audit_report_json(const AuditReport& rep, double lambda, const std::string& mode);
std::string pigeonhole_report_json(const PigeonholeReport& rep);

struct ReportRow {
  std::string kind;
  int n = 0;
  uint64_t seed = 0;
  double lambda_target = 0;
  double distortion = 0;
  int coords = 0;
  double max_coord_lip = 0;
  double min_margin = 0;
};

std::string report_csv_header();
std::string report_csv_line(const ReportRow& row);

}  // namespace c0embed

#endif
