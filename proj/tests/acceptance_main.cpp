// Acceptance gate: runs every verification check at its stated tolerance and
// prints one line per criterion. Exit status 0 means all criteria hold.
#include "fpf/verify.hpp"

#include <cstdio>

int main() {
  using Check = fpf::CheckResult (*)(const fpf::VerifyOptions&);
  const Check checks[] = {
      fpf::check_gain_identity,       fpf::check_linear_fpf_kalman,
      fpf::check_moment_oracle,       fpf::check_beta_simplex,
      fpf::check_beta_agreement,      fpf::check_grid_consistency,
      fpf::check_single_clutter_rmse, fpf::check_coalescence_ordering,
      fpf::check_ghost_recovery,      fpf::check_jpda_reduction,
  };
  const std::size_t total = std::size(checks);

  fpf::VerifyOptions options;
  std::size_t failed = 0;
  std::size_t index = 0;
  for (Check check : checks) {
    ++index;
    fpf::CheckResult r;
    try {
      r = check(options);
    } catch (const std::exception& e) {
      r.name = "criterion-" + std::to_string(index);
      r.detail = std::string("threw: ") + e.what();
      r.pass = false;
    }
    if (!r.pass) ++failed;
    std::printf("[%2zu/%zu] %s %-24s measured=%-12.6g tolerance=%-12.6g (%.2f s) %s\n",
                index, total, r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.measured, r.tolerance, r.seconds, r.detail.c_str());
    std::fflush(stdout);
  }

  if (failed == 0) {
    std::printf("acceptance: all %zu criteria satisfied\n", total);
    return 0;
  }
  std::printf("acceptance: %zu of %zu criteria failed\n", failed, total);
  return 1;
}
