#include "l1lab/results_io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "l1lab/errors.hpp"

#ifndef L1LAB_VERSION
#define L1LAB_VERSION "unknown"
#endif

namespace l1lab {

namespace {

using nlohmann::json;

constexpr const char* kEstimatesHeader =
    "T,M,N,kind,profile,trials,flagged,rho_c_mean,rho_c_stderr,max_density_z,"
    "block_density,block_stderr,block_target";

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("not a number: '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("not an integer: '" + s + "'");
  }
  return v;
}

Eigen::VectorXd parse_vector(const std::string& s) {
  const auto parts = split(s, ';');
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
  return v;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json estimate_json(const DensityEstimate& e) {
  return json{{"T", e.T},
              {"M", e.M},
              {"N", e.N},
              {"kind", to_string(e.kind)},
              {"profile", e.profile},
              {"trials", e.trials},
              {"flagged", e.flagged},
              {"rho_c_mean", e.rho_c_mean},
              {"rho_c_stderr", e.rho_c_stderr},
              {"per_block_density", to_std(e.per_block_density)},
              {"per_block_stderr", to_std(e.per_block_stderr)},
              {"target_density", to_std(e.target_density)},
              {"max_density_z", e.max_density_z}};
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool timing) {
  int T = records.empty() ? 0 : records.front().T;
  out << "trial_id,T,M,N,kind,profile,seed,K_c";
  for (int t = 1; t <= T; ++t) out << ",K_" << t;
  out << ",solves,wall_time_s\n";
  for (const TrialRecord& r : records) {
    out << r.trial_id << ',' << r.T << ',' << r.M << ',' << r.N << ',' << to_string(r.kind) << ','
        << r.profile << ',' << r.seed << ',' << (r.flagged ? -1 : r.K_c);
    for (int k : r.block_counts) out << ',' << k;
    out << ',' << r.solve_count << ',';
    if (timing) out << format_double(r.wall_time);
    out << '\n';
  }
}

void write_estimates_csv(std::ostream& out, const std::vector<DensityEstimate>& estimates) {
  out << kEstimatesHeader << '\n';
  for (const DensityEstimate& e : estimates) {
    out << e.T << ',' << e.M << ',' << e.N << ',' << to_string(e.kind) << ',' << e.profile << ','
        << e.trials << ',' << e.flagged << ',' << format_double(e.rho_c_mean) << ','
        << format_double(e.rho_c_stderr) << ',' << format_double(e.max_density_z) << ','
        << join(e.per_block_density) << ',' << join(e.per_block_stderr) << ','
        << join(e.target_density) << '\n';
  }
}

std::vector<DensityEstimate> read_estimates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty estimates file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kEstimatesHeader) throw FormatError("unexpected estimates header: " + line);
  std::vector<DensityEstimate> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line, ',');
    if (f.size() != 13) {
      throw FormatError("line " + std::to_string(lineno) + ": expected 13 fields, got " +
                        std::to_string(f.size()));
    }
    DensityEstimate e;
    e.T = parse_int(f[0]);
    e.M = parse_int(f[1]);
    e.N = parse_int(f[2]);
    e.kind = parse_dictionary_kind(f[3]);
    e.profile = f[4];
    e.trials = parse_int(f[5]);
    e.flagged = parse_int(f[6]);
    e.rho_c_mean = parse_double(f[7]);
    e.rho_c_stderr = parse_double(f[8]);
    e.max_density_z = parse_double(f[9]);
    e.per_block_density = parse_vector(f[10]);
    e.per_block_stderr = parse_vector(f[11]);
    e.target_density = parse_vector(f[12]);
    out.push_back(std::move(e));
  }
  return out;
}

std::string series_key(const DensityEstimate& e) {
  return to_string(e.kind) + "/" + e.profile + "/T" + std::to_string(e.T);
}

void write_fig2_csv(std::ostream& out, const std::vector<DensityEstimate>& estimates) {
  out << "one_over_N,rho_c_mean,stderr,series\n";
  for (const DensityEstimate& e : estimates) {
    out << format_double(1.0 / e.N) << ',' << format_double(e.rho_c_mean) << ','
        << format_double(e.rho_c_stderr) << ',' << series_key(e) << '\n';
  }
}

void write_fig1_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "alpha,rho_c_theory_uniform,rho_c_theory_localized\n";
  for (const CurvePoint& p : curve) {
    out << format_double(p.alpha) << ',' << format_double(p.uniform) << ',';
    if (p.localized) out << format_double(*p.localized);
    out << '\n';
  }
}

void write_manifest(std::ostream& out, const std::string& config_json, std::uint64_t seed,
                    const std::vector<SeriesSummary>& series, const std::string& timestamp) {
  json doc;
  doc["software"] = {{"name", "l1lab"}, {"version", L1LAB_VERSION}};
  doc["timestamp"] = timestamp;
  doc["master_seed"] = seed;
  doc["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  json list = json::array();
  for (const SeriesSummary& s : series) {
    json item;
    item["series"] = s.key;
    item["estimates"] = json::array();
    for (const auto& e : s.estimates) item["estimates"].push_back(estimate_json(e));
    if (s.fit) {
      json points = json::array();
      for (const auto& [n, rho] : s.fit->points_used) points.push_back({n, rho});
      item["fit"] = {{"a", s.fit->a},
                     {"b", s.fit->b},
                     {"c", s.fit->c},
                     {"residual_rms", s.fit->residual_rms},
                     {"points_used", points}};
    }
    if (s.theory) item["theory"] = *s.theory;
    list.push_back(std::move(item));
  }
  doc["series"] = std::move(list);
  out << doc.dump(2) << '\n';
}

std::vector<std::pair<std::string, double>> read_manifest_theory(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  std::vector<std::pair<std::string, double>> out;
  if (!doc.contains("series")) return out;
  for (const auto& s : doc["series"]) {
    if (s.contains("theory") && s.contains("series")) {
      out.emplace_back(s["series"].get<std::string>(), s["theory"].get<double>());
    }
  }
  return out;
}

}  // namespace l1lab
