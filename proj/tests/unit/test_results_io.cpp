#include <doctest.h>

#include <json.hpp>

#include <sstream>

#include "l1lab/errors.hpp"
#include "l1lab/results_io.hpp"

using namespace l1lab;

namespace {

DensityEstimate sample_estimate(int M, double rho) {
  DensityEstimate e;
  e.T = 2;
  e.M = M;
  e.N = 2 * M;
  e.kind = DictionaryKind::concat_orthogonal;
  e.profile = "uniform";
  e.trials = 100;
  e.flagged = 1;
  e.rho_c_mean = rho;
  e.rho_c_stderr = 0.1 / 3.0;
  e.per_block_density = Eigen::Vector2d(0.1, 1.0 / 7.0);
  e.per_block_stderr = Eigen::Vector2d(1e-3, 2e-3);
  e.target_density = Eigen::Vector2d(0.12, 0.13);
  e.max_density_z = 2.5;
  return e;
}

}  // namespace

TEST_SUITE("results_io") {

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("estimates CSV round trip") {
  const std::vector<DensityEstimate> in{sample_estimate(8, 0.2), sample_estimate(9, 1.0 / 9.0)};
  std::stringstream buf;
  write_estimates_csv(buf, in);
  const std::string text = buf.str();
  CHECK(text.rfind("T,M,N,kind,profile,trials,flagged,rho_c_mean,rho_c_stderr,max_density_z,"
                   "block_density,block_stderr,block_target\n",
                   0) == 0);
  const auto out = read_estimates_csv(buf);
  REQUIRE(out.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(out[i].M == in[i].M);
    CHECK(out[i].N == in[i].N);
    CHECK(out[i].flagged == 1);
    CHECK(out[i].rho_c_mean == in[i].rho_c_mean);
    CHECK(out[i].rho_c_stderr == in[i].rho_c_stderr);
    CHECK(out[i].per_block_density == in[i].per_block_density);
    CHECK(out[i].target_density == in[i].target_density);
  }
  std::stringstream again;
  write_estimates_csv(again, out);
  CHECK(again.str() == text);
}

TEST_CASE("malformed estimates CSV") {
  std::stringstream empty;
  CHECK_THROWS_AS(read_estimates_csv(empty), FormatError);
  std::stringstream header("T,M\n");
  CHECK_THROWS_AS(read_estimates_csv(header), FormatError);
  std::stringstream buf;
  write_estimates_csv(buf, {sample_estimate(8, 0.2)});
  std::string s = buf.str();
  s.replace(s.find("0.2,"), 4, "x.2,");
  std::stringstream bad(s);
  CHECK_THROWS_AS(read_estimates_csv(bad), FormatError);
}

TEST_CASE("trial CSV columns") {
  TrialRecord ok;
  ok.trial_id = 0;
  ok.T = 2;
  ok.M = 8;
  ok.N = 16;
  ok.profile = "uniform";
  ok.seed = 18446744073709551615ULL;
  ok.K_c = 3;
  ok.block_counts = {2, 2};
  ok.solve_count = 4;
  ok.wall_time = 0.25;
  TrialRecord bad = ok;
  bad.trial_id = 1;
  bad.flagged = true;

  std::stringstream plain;
  write_trials_csv(plain, {ok, bad}, false);
  CHECK(plain.str() ==
        "trial_id,T,M,N,kind,profile,seed,K_c,K_1,K_2,solves,wall_time_s\n"
        "0,2,8,16,concat_orthogonal,uniform,18446744073709551615,3,2,2,4,\n"
        "1,2,8,16,concat_orthogonal,uniform,18446744073709551615,-1,2,2,4,\n");
  std::stringstream timed;
  write_trials_csv(timed, {ok}, true);
  CHECK(timed.str().find(",4,0.25\n") != std::string::npos);
}

TEST_CASE("plot data") {
  std::stringstream fig2;
  write_fig2_csv(fig2, {sample_estimate(8, 0.2)});
  CHECK(fig2.str() == "one_over_N,rho_c_mean,stderr,series\n"
                      "0.0625,0.2," + format_double(0.1 / 3.0) +
                      ",concat_orthogonal/uniform/T2\n");
  std::stringstream fig1;
  write_fig1_csv(fig1, {{0.5, 0.19, 0.22}, {0.4, 0.15, std::nullopt}});
  CHECK(fig1.str() == "alpha,rho_c_theory_uniform,rho_c_theory_localized\n"
                      "0.5,0.19,0.22\n0.4,0.15,\n");
}

TEST_CASE("manifest") {
  SeriesSummary s;
  s.key = "concat_orthogonal/uniform/T2";
  s.estimates = {sample_estimate(8, 0.2)};
  s.theory = 0.1928;
  ThresholdFit fit;
  fit.a = 0.19;
  fit.points_used = {{16, 0.2}};
  s.fit = fit;
  std::stringstream buf;
  write_manifest(buf, R"({"T": 2})", 7, {s}, "2026-01-01T00:00:00Z");
  const auto doc = nlohmann::json::parse(buf.str());
  CHECK(doc["master_seed"] == 7);
  CHECK(doc["config"]["T"] == 2);
  CHECK(doc["timestamp"] == "2026-01-01T00:00:00Z");
  CHECK(doc["software"]["version"].is_string());
  CHECK(doc["series"][0]["fit"]["a"] == 0.19);
  CHECK(doc["series"][0]["estimates"].size() == 1);

  std::stringstream again(buf.str());
  const auto theory = read_manifest_theory(again);
  REQUIRE(theory.size() == 1);
  CHECK(theory[0].first == s.key);
  CHECK(theory[0].second == 0.1928);
  std::stringstream junk("{not json");
  CHECK_THROWS_AS(read_manifest_theory(junk), FormatError);
}

}  // TEST_SUITE
