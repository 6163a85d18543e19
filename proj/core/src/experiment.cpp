#include "l1lab/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "l1lab/basis_pursuit.hpp"
#include "l1lab/errors.hpp"

namespace l1lab {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN(); }
  double stderr_of_mean() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};

}  // namespace

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial_id) {
  return mix64(master + (trial_id + 1) * kGolden);
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return mix64(master ^ h);
}

TrialRecord run_trial(const TrialParams& params, std::uint64_t seed, int trial_id) {
  const auto start = std::chrono::steady_clock::now();
  const int T = params.T;
  const int M = params.M;
  if (params.profile.blocks() != T) {
    throw DomainError("profile has " + std::to_string(params.profile.blocks()) +
                      " blocks, experiment has T = " + std::to_string(T));
  }

  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.T = T;
  rec.M = M;
  rec.N = T * M;
  rec.kind = params.kind;
  rec.profile = params.profile.name();
  rec.seed = seed;
  rec.block_counts.assign(T, 0);

  Rng rng(seed);
  const Dictionary dict = build_dictionary(params.kind, T, M, rng());
  const Eigen::VectorXd weights = params.profile.selection_weights();

  std::vector<std::vector<int>> empty(T);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < M; ++i) empty[t].push_back(t * M + i);
  }

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(rec.N);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  int count = 0;
  while (true) {
    double total = 0.0;
    for (int t = 0; t < T; ++t) {
      if (weights[t] > 0.0 && !empty[t].empty()) total += weights[t];
    }
    if (total == 0.0) {
      rec.K_c = count - 1;
      break;
    }
    const double u = unit(rng) * total;
    int block = -1;
    double acc = 0.0;
    for (int t = 0; t < T; ++t) {
      if (weights[t] > 0.0 && !empty[t].empty()) {
        block = t;
        acc += weights[t];
        if (u < acc) break;
      }
    }
    auto& slots = empty[block];
    std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
    const std::size_t k = pick(rng);
    const int coord = slots[k];
    slots[k] = slots.back();
    slots.pop_back();
    x0[coord] = normal(rng);
    ++rec.block_counts[block];
    ++count;

    const Eigen::VectorXd y = dict.matrix * x0;
    const BpSolution sol = solve_bp(dict.matrix, y);
    ++rec.solve_count;
    if (sol.status != BpStatus::optimal) {
      rec.flagged = true;
      rec.flag_reason = "basis pursuit " + to_string(sol.status) + " at K = " +
                        std::to_string(count);
      rec.K_c = count - 1;
      break;
    }
    if (!recovery_success(x0, sol.xhat)) {
      rec.K_c = count - 1;
      break;
    }
  }
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

EstimateRun estimate_density(const TrialParams& params, int trials, std::uint64_t seed,
                             int workers) {
  if (trials < 1) throw DomainError("estimate_density needs trials >= 1");
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, trials);

  EstimateRun run;
  run.records.resize(trials);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&]() {
    while (true) {
      const int id = next.fetch_add(1);
      if (id >= trials) return;
      const std::uint64_t s = trial_seed(seed, static_cast<std::uint64_t>(id));
      try {
        run.records[id] = run_trial(params, s, id);
      } catch (const Error& e) {
        TrialRecord rec;
        rec.trial_id = id;
        rec.T = params.T;
        rec.M = params.M;
        rec.N = params.T * params.M;
        rec.kind = params.kind;
        rec.profile = params.profile.name();
        rec.seed = s;
        rec.block_counts.assign(params.T, 0);
        rec.flagged = true;
        rec.flag_reason = e.what();
        run.records[id] = std::move(rec);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(trials);
        return;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  DensityEstimate& est = run.estimate;
  est.T = params.T;
  est.M = params.M;
  est.N = params.T * params.M;
  est.kind = params.kind;
  est.profile = params.profile.name();

  Moments kc;
  std::vector<Moments> blocks(params.T);
  for (const TrialRecord& rec : run.records) {
    if (rec.flagged) {
      ++est.flagged;
      continue;
    }
    kc.add(static_cast<double>(rec.K_c) / est.N);
    for (int t = 0; t < params.T; ++t) {
      blocks[t].add(static_cast<double>(rec.block_counts[t]) / params.M);
    }
  }
  est.trials = kc.n;
  est.rho_c_mean = kc.mean();
  est.rho_c_stderr = kc.stderr_of_mean();

  const Eigen::VectorXd weights = params.profile.selection_weights();
  est.per_block_density.resize(params.T);
  est.per_block_stderr.resize(params.T);
  est.target_density.resize(params.T);
  const double mean_nonzeros = est.rho_c_mean * est.N + 1.0;
  for (int t = 0; t < params.T; ++t) {
    est.per_block_density[t] = blocks[t].mean();
    est.per_block_stderr[t] = blocks[t].stderr_of_mean();
    est.target_density[t] = weights[t] * mean_nonzeros / params.M;
    const double diff = std::abs(est.per_block_density[t] - est.target_density[t]);
    double z = 0.0;
    if (est.per_block_stderr[t] > 0.0) {
      z = diff / est.per_block_stderr[t];
    } else if (diff > 1e-12) {
      z = std::numeric_limits<double>::infinity();
    }
    est.max_density_z = std::max(est.max_density_z, z);
  }
  return run;
}

bool densities_match(const DensityEstimate& est, double z) {
  if (est.trials == 0) return false;
  for (Eigen::Index t = 0; t < est.target_density.size(); ++t) {
    if (est.target_density[t] == 0.0 && est.per_block_density[t] != 0.0) return false;
  }
  return est.max_density_z <= z;
}

ThresholdFit fit_threshold(const std::vector<std::pair<int, double>>& points) {
  std::set<int> distinct;
  for (const auto& p : points) {
    if (p.first <= 0) throw DomainError("fit_threshold needs N >= 1");
    distinct.insert(p.first);
  }
  if (distinct.size() < 3) {
    throw IllConditioned("quadratic fit in 1/N needs at least 3 distinct N, got " +
                         std::to_string(distinct.size()));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double inv = 1.0 / points[i].first;
    a(i, 0) = 1.0;
    a(i, 1) = inv;
    a(i, 2) = inv * inv;
    b[i] = points[i].second;
  }
  const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(b);
  ThresholdFit fit;
  fit.a = coef[0];
  fit.b = coef[1];
  fit.c = coef[2];
  fit.residual_rms = std::sqrt((a * coef - b).squaredNorm() / static_cast<double>(n));
  fit.points_used = points;
  return fit;
}

ThresholdFit fit_threshold(const std::vector<DensityEstimate>& estimates) {
  std::vector<std::pair<int, double>> points;
  for (const auto& e : estimates) {
    if (e.trials > 0) points.emplace_back(e.N, e.rho_c_mean);
  }
  return fit_threshold(points);
}

}  // namespace l1lab
