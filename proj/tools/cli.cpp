#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "l1lab/density_profile.hpp"
#include "l1lab/errors.hpp"
#include "l1lab/experiment.hpp"
#include "l1lab/replica_solver.hpp"
#include "l1lab/results_io.hpp"

namespace l1lab::cli {

namespace {

using nlohmann::json;

// Reads flat JSON objects, or the object stored under the selected
// subcommand's name, as CLI11 configuration for that subcommand. Command-line
// flags still take precedence.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config", "top level must be an object");
    const auto selected = app_->get_subcommands();
    if (selected.empty()) return {};
    const std::string section = selected.front()->get_name();
    const json& scope = doc.contains(section) && doc[section].is_object() ? doc[section] : doc;
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : scope.items()) {
      if (value.is_object()) continue;
      CLI::ConfigItem item;
      item.parents = {section};
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  const CLI::App* app_;
};

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> profile_names(const std::string& choice) {
  if (choice == "both") return {"uniform", "localized"};
  return {choice};
}

std::vector<DictionaryKind> kinds(const std::string& choice) {
  if (choice == "both") return {DictionaryKind::concat_orthogonal, DictionaryKind::iid_gaussian};
  return {parse_dictionary_kind(choice)};
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  if (!std::filesystem::exists(path)) throw UsageError("no such file: " + path);
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read " + path);
  return f;
}

// ---------------------------------------------------------------------------

struct TheoryArgs {
  std::string T = "2..8";
  std::string profile = "both";
  std::string alpha = "0.05:0.95:0.05";
  std::string out;
  bool curve = false;
  bool at_check = false;
};

int cmd_theory(const TheoryArgs& a, std::ostream& out) {
  if (a.curve) {
    const std::vector<double> grid = parse_grid(a.alpha);
    for (double alpha : grid) {
      if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in (0, 1]");
    }
    std::vector<CurvePoint> curve;
    out << pad("alpha", 10) << pad("uniform", 10) << "localized\n";
    for (double alpha : grid) {
      CurvePoint p;
      p.alpha = alpha;
      p.uniform = critical_point_uniform(alpha).rho_c;
      const double blocks = 1.0 / alpha;
      const long T = std::lround(blocks);
      if (T >= 2 && std::abs(blocks - static_cast<double>(T)) < 1e-9) {
        p.localized = critical_point(DensityProfile::localized(static_cast<int>(T))).rho_c;
      }
      out << pad(fixed(alpha, 6), 10) << pad(fixed(p.uniform, 6), 10)
          << (p.localized ? fixed(*p.localized, 6) : "-") << '\n';
      curve.push_back(p);
    }
    if (!a.out.empty()) {
      auto f = open_out(a.out);
      write_fig1_csv(f, curve);
    }
    return kOk;
  }

  const std::vector<int> Ts = parse_int_range(a.T);
  for (int T : Ts) {
    if (T < 2 || T > 64) throw UsageError("T must lie in 2..64");
  }
  const auto names = profile_names(a.profile);

  out << pad("T", 4) << pad("profile", 11) << pad("rho_c", 10) << pad("rho_c_4dp", 10);
  if (a.at_check) out << pad("at_eigen_gap", 14) << "at_det";
  out << '\n';

  std::ostringstream csv;
  csv << "T,profile,rho_c,mu_star,eta,at_eigen_gap,at_det\n";
  for (int T : Ts) {
    for (const std::string& name : names) {
      const DensityProfile profile = profile_by_name(name, T);
      CriticalPoint cp = critical_point(profile);
      std::optional<AtReport> at;
      if (a.at_check) at = at_stability(cp, profile);
      out << pad(std::to_string(T), 4) << pad(name, 11) << pad(fixed(cp.rho_c, 6), 10)
          << pad(fixed(cp.rho_c, 4), 10);
      if (at) out << pad(sci(at->eigen_gap), 14) << sci(at->det);
      out << '\n';
      csv << T << ',' << name << ',' << format_double(cp.rho_c) << ','
          << format_double(cp.mu_star) << ',' << (cp.eta ? format_double(*cp.eta) : "") << ','
          << (at ? format_double(at->eigen_gap) : "") << ','
          << (at ? format_double(at->det) : "") << '\n';
    }
  }
  if (!a.out.empty()) {
    auto f = open_out(a.out);
    f << csv.str();
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct McArgs {
  int T = 2;
  std::string M = "8..16";
  int trials = 2000;
  std::uint64_t seed = 7;
  std::string profile = "uniform";
  std::string kind = "concat_orthogonal";
  int workers = 0;
  std::string out = "mc_estimates.csv";
  std::string trials_out;
  std::string fig2_out;
  std::string manifest;
  bool timing = false;
};

json mc_config_json(const McArgs& a) {
  return json{{"T", a.T},           {"M", a.M},       {"trials", a.trials},
              {"seed", a.seed},     {"profile", a.profile}, {"kind", a.kind},
              {"out", a.out},       {"trials_out", a.trials_out},
              {"fig2_out", a.fig2_out}, {"timing", a.timing}};
}

int cmd_mc(const McArgs& a, std::ostream& out, std::ostream& err) {
  if (a.T < 1 || a.T > 64) throw UsageError("T must lie in 1..64");
  if (a.trials < 1) throw UsageError("trials must be >= 1");
  if (a.workers < 0) throw UsageError("workers must be >= 0");
  const std::vector<int> Ms = parse_int_range(a.M);
  for (int M : Ms) {
    if (M < 1 || M > 4096) throw UsageError("M must lie in 1..4096");
  }
  const auto kind_list = kinds(a.kind);
  const auto names = profile_names(a.profile);

  std::vector<DensityEstimate> estimates;
  std::vector<TrialRecord> records;
  std::vector<SeriesSummary> series;
  bool empty_point = false;

  out << pad("kind", 19) << pad("profile", 11) << pad("M", 5) << pad("N", 6) << pad("trials", 8)
      << pad("flagged", 9) << pad("rho_c", 10) << pad("stderr", 10) << "density_z\n";
  for (DictionaryKind kind : kind_list) {
    for (const std::string& name : names) {
      const DensityProfile profile = profile_by_name(name, a.T);
      SeriesSummary summary;
      for (int M : Ms) {
        TrialParams params{kind, a.T, M, profile};
        const std::string key = to_string(kind) + "/" + name + "/T" + std::to_string(a.T) +
                                "/M" + std::to_string(M);
        EstimateRun run = estimate_density(params, a.trials, derive_seed(a.seed, key), a.workers);
        const DensityEstimate& e = run.estimate;
        out << pad(to_string(kind), 19) << pad(name, 11) << pad(std::to_string(M), 5)
            << pad(std::to_string(e.N), 6) << pad(std::to_string(e.trials), 8)
            << pad(std::to_string(e.flagged), 9) << pad(fixed(e.rho_c_mean, 6), 10)
            << pad(fixed(e.rho_c_stderr, 6), 10) << fixed(e.max_density_z, 2) << '\n';
        if (e.trials == 0) {
          err << "error: no valid trials at M = " << M << " (" << key << ")\n";
          empty_point = true;
        }
        summary.key = series_key(e);
        summary.estimates.push_back(e);
        estimates.push_back(e);
        records.insert(records.end(), run.records.begin(), run.records.end());
      }
      try {
        summary.fit = fit_threshold(summary.estimates);
      } catch (const IllConditioned&) {
      }
      if (kind == DictionaryKind::concat_orthogonal && a.T >= 2) {
        summary.theory = critical_point(profile).rho_c;
      }
      if (summary.fit) {
        out << "  fit " << summary.key << ": a = " << fixed(summary.fit->a, 6)
            << "  b = " << fixed(summary.fit->b, 6) << "  c = " << fixed(summary.fit->c, 6);
        if (summary.theory) out << "  theory = " << fixed(*summary.theory, 6);
        out << '\n';
      }
      series.push_back(std::move(summary));
    }
  }

  {
    auto f = open_out(a.out);
    write_estimates_csv(f, estimates);
  }
  if (!a.trials_out.empty()) {
    auto f = open_out(a.trials_out);
    write_trials_csv(f, records, a.timing);
  }
  if (!a.fig2_out.empty()) {
    auto f = open_out(a.fig2_out);
    write_fig2_csv(f, estimates);
  }
  if (!a.manifest.empty()) {
    auto f = open_out(a.manifest);
    write_manifest(f, mc_config_json(a).dump(), a.seed, series, utc_timestamp());
  }
  return empty_point ? kNumericalFailure : kOk;
}

// ---------------------------------------------------------------------------

std::map<std::string, std::vector<DensityEstimate>> group(const std::vector<DensityEstimate>& all,
                                                          std::vector<std::string>& order) {
  std::map<std::string, std::vector<DensityEstimate>> by_key;
  for (const auto& e : all) {
    const std::string key = series_key(e);
    if (!by_key.count(key)) order.push_back(key);
    by_key[key].push_back(e);
  }
  return by_key;
}

std::optional<double> theory_for(const DensityEstimate& e) {
  if (e.kind != DictionaryKind::concat_orthogonal || e.T < 2) return std::nullopt;
  if (e.profile != "uniform" && e.profile != "localized") return std::nullopt;
  return critical_point(profile_by_name(e.profile, e.T)).rho_c;
}

struct FitArgs {
  std::string csv;
  std::string series;
  std::string manifest;
  std::string json_out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  auto in = open_in(a.csv);
  const auto all = read_estimates_csv(in);
  std::map<std::string, double> manifest_theory;
  if (!a.manifest.empty()) {
    auto mf = open_in(a.manifest);
    for (const auto& [k, v] : read_manifest_theory(mf)) manifest_theory[k] = v;
  }

  std::vector<std::string> order;
  const auto by_key = group(all, order);
  if (!a.series.empty() && !by_key.count(a.series)) {
    throw UsageError("series '" + a.series + "' not present in " + a.csv);
  }
  json report = json::array();
  for (const std::string& key : order) {
    if (!a.series.empty() && key != a.series) continue;
    const auto& ests = by_key.at(key);
    const ThresholdFit fit = fit_threshold(ests);
    std::optional<double> theory;
    if (auto it = manifest_theory.find(key); it != manifest_theory.end()) {
      theory = it->second;
    } else if (a.manifest.empty()) {
      theory = theory_for(ests.front());
    }
    out << "series " << key << '\n';
    for (const auto& [n, rho] : fit.points_used) {
      out << "  N = " << pad(std::to_string(n), 5) << "rho_c = " << fixed(rho, 6) << '\n';
    }
    out << "  a = " << fixed(fit.a, 6) << "  b = " << fixed(fit.b, 6) << "  c = "
        << fixed(fit.c, 6) << "  residual_rms = " << sci(fit.residual_rms) << '\n';
    if (theory) {
      out << "  theory = " << fixed(*theory, 6) << "  a - theory = " << fixed(fit.a - *theory, 6)
          << '\n';
    }
    json item{{"series", key}, {"a", fit.a}, {"b", fit.b}, {"c", fit.c},
              {"residual_rms", fit.residual_rms}};
    if (theory) item["theory"] = *theory;
    report.push_back(item);
  }
  if (!a.json_out.empty()) {
    auto f = open_out(a.json_out);
    f << report.dump(2) << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string T = "2..8";
  std::string estimates;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  if (!a.estimates.empty()) {
    auto in = open_in(a.estimates);
    const auto all = read_estimates_csv(in);
    std::vector<std::string> order;
    const auto by_key = group(all, order);
    out << pad("series", 34) << pad("experiment", 12) << pad("theory", 10) << "difference\n";
    for (const std::string& key : order) {
      const auto& ests = by_key.at(key);
      const ThresholdFit fit = fit_threshold(ests);
      const auto theory = theory_for(ests.front());
      out << pad(key, 34) << pad(fixed(fit.a, 4), 12)
          << pad(theory ? fixed(*theory, 4) : "-", 10)
          << (theory ? fixed(fit.a - *theory, 4) : "-") << '\n';
    }
    return kOk;
  }

  const std::vector<int> Ts = parse_int_range(a.T);
  for (int T : Ts) {
    if (T < 2 || T > 64) throw UsageError("T must lie in 2..64");
  }
  out << pad("T", 4) << pad("uniform", 10) << pad("localized", 11) << "rot_invariant\n";
  for (int T : Ts) {
    const double u = critical_point(DensityProfile::uniform(T)).rho_c;
    const double l = critical_point(DensityProfile::localized(T)).rho_c;
    const double ri = critical_point_uniform(1.0 / T).rho_c;
    out << pad(std::to_string(T), 4) << pad(fixed(u, 4), 10) << pad(fixed(l, 4), 11)
        << fixed(ri, 4) << '\n';
  }
  return kOk;
}

}  // namespace

std::vector<int> parse_int_range(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad integer '" + s + "' in " + text);
    return v;
  };
  std::vector<int> out;
  try {
    if (const auto dots = text.find(".."); dots != std::string::npos) {
      const int lo = to_int(text.substr(0, dots));
      const int hi = to_int(text.substr(dots + 2));
      if (hi < lo) throw std::invalid_argument("empty range " + text);
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      std::stringstream ss(text);
      std::string part;
      while (std::getline(ss, part, ',')) out.push_back(to_int(part));
    }
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("integer out of range in " + text);
  }
  if (out.empty()) throw std::invalid_argument("empty range " + text);
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::stringstream ss(text);
  std::string part;
  std::vector<double> v;
  while (std::getline(ss, part, ':')) {
    std::size_t used = 0;
    v.push_back(std::stod(part, &used));
    if (used != part.size()) throw std::invalid_argument("bad number '" + part + "'");
  }
  if (v.size() == 1) return v;
  if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) {
    throw std::invalid_argument("grid must be start:stop:step with step > 0, got " + text);
  }
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((v[1] - v[0]) / v[2] + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(v[0] + static_cast<double>(i) * v[2]);
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Critical densities of l1 recovery with concatenated orthogonal dictionaries",
               "l1lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", L1LAB_VERSION_STRING);
  // Subcommands pass --config up to the top-level app, which routes the
  // selected section back down.
  app.fallthrough();
  app.set_config("--config", "", "JSON file of option defaults (flags take precedence)");
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);

  TheoryArgs theory;
  auto* t = app.add_subcommand("theory", "Replica critical densities (table or alpha curve)");
  t->allow_config_extras(CLI::config_extras_mode::error);
  t->add_option("--T", theory.T, "block counts, e.g. 2..8 or 3,5")->capture_default_str();
  t->add_option("--profile", theory.profile)
      ->check(CLI::IsMember({"uniform", "localized", "both"}))
      ->capture_default_str();
  t->add_flag("--curve", theory.curve, "emit rho_c(alpha) over --alpha");
  t->add_option("--alpha", theory.alpha, "grid start:stop:step")->capture_default_str();
  t->add_flag("--at-check", theory.at_check, "append AT eigen-gap and determinant");
  t->add_option("--out", theory.out, "CSV output path");

  McArgs mc;
  auto* m = app.add_subcommand("mc", "Monte Carlo estimate of critical densities");
  m->allow_config_extras(CLI::config_extras_mode::error);
  m->add_option("--T", mc.T)->capture_default_str();
  m->add_option("--M", mc.M, "module sizes, e.g. 8..16")->capture_default_str();
  m->add_option("--trials", mc.trials)->capture_default_str();
  m->add_option("--seed", mc.seed)->capture_default_str();
  m->add_option("--profile", mc.profile)
      ->check(CLI::IsMember({"uniform", "localized", "both"}))
      ->capture_default_str();
  m->add_option("--kind", mc.kind)
      ->check(CLI::IsMember({"concat_orthogonal", "iid_gaussian", "concat", "gaussian", "both"}))
      ->capture_default_str();
  m->add_option("--workers", mc.workers, "threads, 0 = all cores")->capture_default_str();
  m->add_option("--out", mc.out, "estimates CSV")->capture_default_str();
  m->add_option("--trials-out", mc.trials_out, "per-trial CSV");
  m->add_option("--fig2-out", mc.fig2_out, "one_over_N,rho_c_mean,stderr,series CSV");
  m->add_option("--manifest", mc.manifest, "JSON manifest path");
  m->add_flag("--timing", mc.timing, "fill wall_time_s in the per-trial CSV");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Quadratic 1/N extrapolation of an estimates CSV");
  f->allow_config_extras(CLI::config_extras_mode::error);
  f->add_option("csv", fit.csv, "estimates CSV written by mc")->required();
  f->add_option("--series", fit.series, "restrict to one series key");
  f->add_option("--manifest", fit.manifest, "manifest providing theory values");
  f->add_option("--json", fit.json_out, "write fits as JSON");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Theory table, or experiment against theory");
  c->allow_config_extras(CLI::config_extras_mode::error);
  c->add_option("--T", cmp.T)->capture_default_str();
  c->add_option("--estimates", cmp.estimates, "estimates CSV to compare with theory");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (t->parsed()) return cmd_theory(theory, out);
    if (m->parsed()) return cmd_mc(mc, out, err);
    if (f->parsed()) return cmd_fit(fit, out);
    if (c->parsed()) return cmd_compare(cmp, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const InvalidProfile& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kUsageError;
}

}  // namespace l1lab::cli
