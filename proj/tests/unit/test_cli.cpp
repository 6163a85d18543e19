#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "l1lab/results_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "l1lab");
  std::ostringstream out, err;
  const int code = l1lab::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("l1lab_cli_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("argument parsing helpers") {
  using l1lab::cli::parse_grid;
  using l1lab::cli::parse_int_range;
  CHECK(parse_int_range("2..5") == std::vector<int>{2, 3, 4, 5});
  CHECK(parse_int_range("3") == std::vector<int>{3});
  CHECK(parse_int_range("2,4,6") == std::vector<int>{2, 4, 6});
  CHECK_THROWS_AS(parse_int_range("5..2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_int_range("2..x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_int_range(""), std::invalid_argument);
  const auto g = parse_grid("0.05:0.95:0.05");
  CHECK(g.size() == 19);
  CHECK(g.back() == doctest::Approx(0.95));
  CHECK(parse_grid("0.5") == std::vector<double>{0.5});
  CHECK_THROWS_AS(parse_grid("0.1:0.2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("0.1:0.2:0"), std::invalid_argument);
}

TEST_CASE("theory table") {
  TempDir dir;
  const Result r = run({"theory", "--T", "2", "--profile", "uniform", "--out", dir / "t.csv"});
  CHECK(r.code == 0);
  CHECK(r.out.find("0.1928 ") != std::string::npos);
  const auto csv = lines(slurp(dir / "t.csv"));
  REQUIRE(csv.size() == 2);
  CHECK(csv[0] == "T,profile,rho_c,mu_star,eta,at_eigen_gap,at_det");
  CHECK(csv[1].rfind("2,uniform,0.19284", 0) == 0);

  const Result at = run({"theory", "--T", "3..4", "--profile", "localized", "--at-check"});
  CHECK(at.code == 0);
  CHECK(at.out.find("at_eigen_gap") != std::string::npos);
  CHECK(lines(at.out).size() == 3);
}

TEST_CASE("theory curve is increasing") {
  TempDir dir;
  const Result r = run({"theory", "--curve", "--alpha", "0.05:0.95:0.05", "--out", dir / "c.csv"});
  REQUIRE(r.code == 0);
  const auto csv = lines(slurp(dir / "c.csv"));
  REQUIRE(csv.size() == 20);
  CHECK(csv[0] == "alpha,rho_c_theory_uniform,rho_c_theory_localized");
  double prev = 0.0;
  int localized = 0;
  for (std::size_t i = 1; i < csv.size(); ++i) {
    std::stringstream ss(csv[i]);
    std::string a, u, l;
    std::getline(ss, a, ',');
    std::getline(ss, u, ',');
    std::getline(ss, l, ',');
    const double value = std::stod(u);
    CHECK(value > prev);
    prev = value;
    if (!l.empty()) {
      ++localized;
      CHECK(std::stod(l) > value);
    }
  }
  // alpha = 0.05, 0.1, 0.2, 0.25, 0.5 are 1/T for integer T.
  CHECK(localized == 5);
}

TEST_CASE("mc writes estimates and is reproducible") {
  TempDir dir;
  const std::vector<std::string> base{"mc",        "--T",       "2",          "--M",
                                      "6..8",      "--trials",  "40",         "--seed",
                                      "7",         "--profile", "localized"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a);
  };
  const Result one = with({"--workers", "1", "--out", dir / "a.csv", "--trials-out",
                           dir / "ta.csv", "--manifest", dir / "m.json", "--fig2-out",
                           dir / "f.csv"});
  REQUIRE(one.code == 0);
  const Result many = with({"--workers", "4", "--out", dir / "b.csv", "--trials-out",
                            dir / "tb.csv"});
  REQUIRE(many.code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "ta.csv") == slurp(dir / "tb.csv"));
  CHECK(lines(slurp(dir / "a.csv")).size() == 4);
  CHECK(lines(slurp(dir / "ta.csv")).size() == 1 + 3 * 40);
  CHECK(lines(slurp(dir / "f.csv")).size() == 4);

  const auto doc = nlohmann::json::parse(slurp(dir / "m.json"));
  CHECK(doc["master_seed"] == 7);
  CHECK(doc["config"]["trials"] == 40);
  REQUIRE(doc["series"].size() == 1);
  CHECK(doc["series"][0]["series"] == "concat_orthogonal/localized/T2");
  CHECK(doc["series"][0]["theory"].get<double>() == doctest::Approx(0.226666).epsilon(1e-5));
  CHECK(doc["series"][0].contains("fit"));
}

TEST_CASE("mc with both kinds") {
  TempDir dir;
  const Result r = run({"mc", "--T", "3", "--M", "4", "--trials", "5", "--kind", "both",
                        "--profile", "both", "--out", dir / "e.csv"});
  REQUIRE(r.code == 0);
  const auto csv = lines(slurp(dir / "e.csv"));
  CHECK(csv.size() == 5);
}

TEST_CASE("fit recovers an exact quadratic") {
  TempDir dir;
  std::vector<l1lab::DensityEstimate> ests;
  for (int M : {8, 10, 12, 16}) {
    l1lab::DensityEstimate e;
    e.T = 2;
    e.M = M;
    e.N = 2 * M;
    e.profile = "uniform";
    e.trials = 10;
    e.rho_c_mean = 0.2 - 0.5 / e.N + 3.0 / (double(e.N) * e.N);
    e.per_block_density = e.per_block_stderr = e.target_density = Eigen::Vector2d(0.1, 0.1);
    ests.push_back(e);
  }
  {
    std::ofstream f(dir / "q.csv");
    l1lab::write_estimates_csv(f, ests);
  }
  const Result r = run({"fit", dir / "q.csv", "--json", dir / "fit.json"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("a = 0.200000") != std::string::npos);
  CHECK(r.out.find("theory = 0.192845") != std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(dir / "fit.json"));
  CHECK(std::abs(doc[0]["a"].get<double>() - 0.2) <= 1e-12);
  CHECK(std::abs(doc[0]["b"].get<double>() + 0.5) <= 1e-12);
  CHECK(std::abs(doc[0]["c"].get<double>() - 3.0) <= 1e-12);

  const Result cmp = run({"compare", "--estimates", dir / "q.csv"});
  CHECK(cmp.code == 0);
  CHECK(cmp.out.find("0.2000") != std::string::npos);

  ests.resize(2);
  {
    std::ofstream f(dir / "short.csv");
    l1lab::write_estimates_csv(f, ests);
  }
  const Result ill = run({"fit", dir / "short.csv"});
  CHECK(ill.code == 1);
  CHECK_FALSE(ill.err.empty());
  CHECK(run({"fit", dir / "q.csv", "--series", "nope"}).code == 2);
}

TEST_CASE("errors and exit codes") {
  const Result missing = run({"fit", "/nonexistent/estimates.csv"});
  CHECK(missing.code != 0);
  CHECK(missing.err.find("no such file") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"theory", "--T", "1"}).code == 2);
  CHECK(run({"theory", "--T", "5..2"}).code == 2);
  CHECK(run({"theory", "--profile", "banded"}).code == 2);
  CHECK(run({"theory", "--curve", "--alpha", "0:1:0.5"}).code == 2);
  CHECK(run({"mc", "--trials", "0"}).code == 2);
  CHECK(run({"mc", "--kind", "dct", "--trials", "1", "--M", "4"}).code == 2);
  CHECK(run({"theory", "--no-such-flag"}).code == 2);
  const Result version = run({"--version"});
  CHECK(version.code == 0);
  CHECK_FALSE(version.out.empty());
}

TEST_CASE("compare table") {
  const Result r = run({"compare", "--T", "2..3"});
  REQUIRE(r.code == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() == 3);
  CHECK(out[1].find("0.1928") != std::string::npos);
  CHECK(out[1].find("0.2267") != std::string::npos);
}

TEST_CASE("JSON config with flag precedence") {
  TempDir dir;
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"mc": {"T": 2, "M": "5..7", "trials": 12, "seed": 3, "profile": "uniform"}})";
  }
  const Result r = run({"mc", "--config", dir / "cfg.json", "--trials", "4", "--out",
                        dir / "e.csv", "--trials-out", dir / "t.csv"});
  REQUIRE(r.code == 0);
  CHECK(lines(slurp(dir / "e.csv")).size() == 4);
  CHECK(lines(slurp(dir / "t.csv")).size() == 1 + 3 * 4);

  {
    std::ofstream f(dir / "flat.json");
    f << R"({"T": "2", "profile": "localized"})";
  }
  const Result flat = run({"theory", "--config", dir / "flat.json"});
  CHECK(flat.code == 0);
  CHECK(flat.out.find("0.2267") != std::string::npos);

  {
    std::ofstream f(dir / "extra.json");
    f << R"({"T": "2", "colour": "blue"})";
  }
  CHECK(run({"theory", "--config", dir / "extra.json"}).code == 2);
  {
    std::ofstream f(dir / "broken.json");
    f << "{";
  }
  CHECK(run({"theory", "--config", dir / "broken.json"}).code == 2);
}

}  // TEST_SUITE
