// A/B timing harness: parallel kernels against their single-threaded
// reference implementations, plus the surrogate-vs-dispatch speedup that
// motivates the whole pipeline. Usage: duq_bench [scenarios] [threads]
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "duq/grid.hpp"
#include "duq/pipeline.hpp"
#include "duq/threads.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

namespace pl = duq::pipeline;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename Fn>
double timed(Fn&& fn) {
  const double t0 = now_seconds();
  fn();
  return now_seconds() - t0;
}

bool same_costs(const std::vector<duq::grid::CostSample>& a,
                const std::vector<duq::grid::CostSample>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].status != b[i].status || a[i].cost != b[i].cost) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const long n = argc > 1 ? std::atol(argv[1]) : 2000;
  const int threads = argc > 2 ? std::atoi(argv[2]) : 0;

  const auto sys = fixtures::five_bus();
  const auto ptdf = duq::grid::compute_ptdf(sys);
  const Eigen::MatrixXd scenarios = testutil::multimodal_wind(n, 2, 4, 7);

  std::printf("five-bus dispatch, %ld scenarios, %d worker(s)\n", n,
              duq::effective_threads(threads));

  std::vector<duq::grid::CostSample> serial, parallel;
  const double t_serial =
      timed([&] { serial = duq::grid::batch_solve_serial(sys, ptdf, scenarios); });
  const double t_parallel = timed(
      [&] { parallel = duq::grid::batch_solve(sys, ptdf, scenarios, threads); });
  std::printf("  batch_solve   serial %8.3f s   parallel %8.3f s   x%.2f   %s\n",
              t_serial, t_parallel, t_serial / t_parallel,
              same_costs(serial, parallel) ? "outputs identical"
                                           : "OUTPUTS DIFFER");

  Eigen::VectorXd costs(n);
  long good = 0;
  for (long i = 0; i < n; ++i)
    if (serial[i].status == duq::lp::LpStatus::Optimal)
      costs(good++) = serial[i].cost;
  costs.conservativeResize(good);

  const auto split = pl::sample_training_design(scenarios, 72, 1);
  Eigen::VectorXd y(split.train_indices.size());
  for (long i = 0; i < y.size(); ++i) y(i) = costs(split.train_indices[i]);
  const auto model = pl::fit_surrogate(split.train, y, {}, 1);

  Eigen::VectorXd ps, pp;
  const double t_pserial = timed([&] { ps = pl::predict_serial(model, scenarios); });
  const double t_pparallel =
      timed([&] { pp = pl::predict(model, scenarios, threads); });
  std::printf("  predict       serial %8.3f s   parallel %8.3f s   x%.2f   %s\n",
              t_pserial, t_pparallel, t_pserial / t_pparallel,
              ps == pp ? "outputs identical" : "OUTPUTS DIFFER");

  std::printf("  surrogate evaluation beats scenario dispatch by x%.0f\n",
              t_parallel / t_pparallel);
  return 0;
}
