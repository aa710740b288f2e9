#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lorentzlab/errors.hpp"
#include "lorentzlab/jump_law.hpp"
#include "lorentzlab/summary.hpp"
#include "lorentzlab/vec2.hpp"

namespace lorentzlab::stats {

using CovarianceMatrix = SymMat2;

// General (not necessarily symmetric) 2x2 matrix for cross-covariances.
struct Mat2 {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;
};

// Unbiased sample covariance of the recorded endpoints; needs >= 2.
CovarianceMatrix endpoint_covariance(const EnsembleSummary& summary);

// P(S_n = 0) for n = 0..n_max by dense lattice convolution of a finite jump
// law.  Guarded: n_max * support_radius <= 4096 and the reachable box must
// fit in memory.
std::vector<double> exact_return_law(const walk::JumpLaw& law,
                                     std::uint64_t n_max);

// P(S_n = 0) for the simple symmetric walk in closed form: rotating to two
// independent +-1 coordinates gives P(S_2m = 0) = (C(2m, m) 2^-2m)^2,
// evaluated by the stable ratio recurrence.  Exact for every n (odd: 0), no
// lattice box needed.
std::vector<double> ssrw_return_law(std::uint64_t n_max);

// P(+-1 walk is at 0 after n steps); 0 for odd n.
double one_d_central_probability(std::uint64_t n);

// G_n = sum_{k<=n} P(S_k = 0), compensated prefix sums.
std::vector<double> truncated_green(const std::vector<double>& return_law);

double least_squares_slope(const std::vector<double>& xs,
                           const std::vector<double>& ys);

// Least-squares slope of G_n against ln n over even n in [n_lo, n_hi].
double green_log_slope(const std::vector<double>& green, std::uint64_t n_lo,
                       std::uint64_t n_hi);

// Sum of P(S_n = 0) over even n in [n_lo, n_hi] for the 3d walk whose three
// coordinates are independent +-1 walks (steps (+-1, +-1, +-1)/8): the
// transient sanity counterpart of the planar case.
double green_increment_sum_3d(std::uint64_t n_lo, std::uint64_t n_hi);

struct ReturnStats {
  std::uint64_t returns = 0;
  std::optional<std::uint64_t> first_return;
};

// Counts indices j >= 1 entering the origin ball from outside (radius 0 on
// the lattice means the exact origin).
ReturnStats return_statistics(const std::vector<walk::Site>& path);
ReturnStats return_statistics(const std::vector<geom::Vec2>& points,
                              double ball_radius);

struct KsResult {
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t count = 0;
};

// One-sample Kolmogorov-Smirnov statistic against the centered normal with
// the given variance; pass iff below the asymptotic 0.01-level threshold
// 1.628/sqrt(count).  Needs >= 1e3 samples.
KsResult gaussian_marginal_test(std::vector<double> samples, double variance);

// n * P_hat(S_n = 0).  Even n enforced for parity-restricted laws; the
// ensemble must have >= 1e5 trajectories.
double llt_origin_estimate(std::uint64_t at_origin, std::uint64_t count,
                           std::uint64_t time, bool require_even = true);

struct HillResult {
  double alpha = 0.0;
  std::size_t k = 0;            // order statistics used
  double order_threshold = 0.0;  // X_(k+1)
  bool non_heavy_warning = false;
};

// Hill tail-index estimator over the top order statistics.  Needs >= 1e4
// samples and 0 < top_fraction <= 0.05.  Flags apparently non-heavy input.
HillResult hill_tail_index(std::vector<double> magnitudes,
                           double top_fraction);

struct FddResult {
  SymMat2 cov_lo, cov_hi;
  Mat2 cross;
  std::uint64_t time_lo = 0, time_hi = 0;
};

// Covariances of the two recorded snapshot marginals and their
// cross-covariance, all divided by scale^2 (pass scale = sqrt(n) for the
// diffusive normalization).
FddResult fdd_covariance(const EnsembleSummary& summary, double scale);

struct Chi2Result {
  double statistic = 0.0;
  std::uint64_t dof = 0;
  double p_value = 0.0;
};

// Pearson goodness-of-fit of observed counts against cell probabilities.
Chi2Result chi2_gof(const std::vector<std::uint64_t>& observed,
                    const std::vector<double>& probs);

// Regularized upper incomplete gamma Q(a, x) (series / continued fraction).
double gamma_q(double a, double x);

// Standard normal CDF.
double normal_cdf(double z);

// Inverse-transform Pareto deviate with survival x^-2 on [1, inf).
double pareto2_deviate(double u);

}  // namespace lorentzlab::stats
