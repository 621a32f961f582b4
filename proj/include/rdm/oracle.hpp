#pragma once

#include <vector>

#include "rdm/diffusion.hpp"
#include "rdm/numerics.hpp"

namespace rdm {

// Discrete distribution over a few atoms. Weights are normalized on
// construction; atoms must be distinct and share one dimension.
struct PointMixture {
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;

  static PointMixture make(std::vector<std::vector<double>> atoms,
                           std::vector<double> weights);
  std::size_t dim() const { return atoms.empty() ? 0 : atoms[0].size(); }
};

// Axis-aligned Gaussian mixture (diagonal covariances, given as variances).
struct GaussianMixture {
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> vars;
  std::vector<double> weights;

  static GaussianMixture make(std::vector<std::vector<double>> means,
                              std::vector<std::vector<double>> vars,
                              std::vector<double> weights);
  std::size_t dim() const { return means.empty() ? 0 : means[0].size(); }
};

std::vector<double> sample_point_mixture(const PointMixture& mix,
                                         SeededRng& rng);
std::vector<double> sample_gaussian_mixture(const GaussianMixture& mix,
                                            SeededRng& rng);

// Exact posterior mean of x0 given x under x = x0 + q*U(-0.5,0.5)^dim:
// the uniform likelihood is flat, so it is the weight-renormalized mean of
// the atoms inside the box |x - atom|_inf <= q/2.
std::vector<double> posterior_mean_points(const PointMixture& mix,
                                          const std::vector<double>& x,
                                          double q);

// Same posterior under a Gaussian mixture, by per-dimension midpoint
// quadrature over the corruption window clipped to +-6 sigma, grid_points
// points per dimension. Diagonal covariances factorize the integrals.
std::vector<double> posterior_mean_gmm(const GaussianMixture& mix,
                                       const std::vector<double>& x, double q,
                                       std::size_t grid_points = 4096);

// Exact 1-D Wasserstein-1 between empirical samples: sort both sides and
// average |a_(i) - b_(i)|. Unequal sizes compare interpolated quantiles.
double w1_distance_1d(std::vector<double> a, std::vector<double> b);

// Average of w1_distance_1d over random unit projections.
double sliced_w1(const std::vector<std::vector<double>>& a,
                 const std::vector<std::vector<double>>& b,
                 std::size_t directions, SeededRng& rng);

// Adapters for reverse_sample: rows of the state tensor are independent
// points of the mixture's dimension. The point-mixture form is total:
// states outside every window (possible once randomness is injected)
// return the nearest atom, the wide-window limit of the posterior, where
// the raw posterior function would refuse.
DenoiserFn oracle_denoiser_fn(const PointMixture& mix);
DenoiserFn oracle_denoiser_fn(const GaussianMixture& mix,
                              std::size_t grid_points = 4096);

}  // namespace rdm
