#include "rdm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdm {

namespace {

void normalize_weights(std::vector<double>& w, std::size_t n_components) {
  if (w.size() != n_components)
    throw input_error("mixture weight count does not match components");
  double sum = 0.0;
  for (double x : w) {
    if (!(x > 0.0)) throw input_error("mixture weights must be positive");
    sum += x;
  }
  for (double& x : w) x /= sum;
}

}  // namespace

PointMixture PointMixture::make(std::vector<std::vector<double>> atoms,
                                std::vector<double> weights) {
  if (atoms.empty()) throw input_error("point mixture needs atoms");
  std::size_t d = atoms[0].size();
  if (d == 0) throw input_error("point mixture atoms need a dimension");
  for (const auto& a : atoms)
    if (a.size() != d) throw input_error("point mixture atoms differ in dim");
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      if (atoms[i] == atoms[j])
        throw input_error("point mixture atoms must be distinct");
  PointMixture m;
  m.atoms = std::move(atoms);
  m.weights = std::move(weights);
  normalize_weights(m.weights, m.atoms.size());
  return m;
}

GaussianMixture GaussianMixture::make(std::vector<std::vector<double>> means,
                                      std::vector<std::vector<double>> vars,
                                      std::vector<double> weights) {
  if (means.empty()) throw input_error("gaussian mixture needs components");
  std::size_t d = means[0].size();
  if (d == 0) throw input_error("gaussian mixture needs a dimension");
  if (vars.size() != means.size())
    throw input_error("gaussian mixture means/vars count mismatch");
  for (std::size_t j = 0; j < means.size(); ++j) {
    if (means[j].size() != d || vars[j].size() != d)
      throw input_error("gaussian mixture component dims differ");
    for (double v : vars[j])
      if (!(v > 0.0)) throw input_error("gaussian variances must be positive");
  }
  GaussianMixture m;
  m.means = std::move(means);
  m.vars = std::move(vars);
  m.weights = std::move(weights);
  normalize_weights(m.weights, m.means.size());
  return m;
}

std::vector<double> sample_point_mixture(const PointMixture& mix,
                                         SeededRng& rng) {
  double u = rng.uniform01(), acc = 0.0;
  std::size_t j = 0;
  for (; j + 1 < mix.weights.size(); ++j) {
    acc += mix.weights[j];
    if (u < acc) break;
  }
  return mix.atoms[j];
}

std::vector<double> sample_gaussian_mixture(const GaussianMixture& mix,
                                            SeededRng& rng) {
  double u = rng.uniform01(), acc = 0.0;
  std::size_t j = 0;
  for (; j + 1 < mix.weights.size(); ++j) {
    acc += mix.weights[j];
    if (u < acc) break;
  }
  std::vector<double> x(mix.dim());
  for (std::size_t d = 0; d < x.size(); ++d)
    x[d] = mix.means[j][d] + std::sqrt(mix.vars[j][d]) * rng.normal();
  return x;
}

std::vector<double> posterior_mean_points(const PointMixture& mix,
                                          const std::vector<double>& x,
                                          double q) {
  if (!(q > 0.0)) throw input_error("posterior_mean_points: q must be positive");
  if (x.size() != mix.dim())
    throw input_error("posterior_mean_points: dimension mismatch");
  double half = q / 2.0;
  double mass = 0.0;
  std::vector<double> num(x.size(), 0.0);
  for (std::size_t j = 0; j < mix.atoms.size(); ++j) {
    bool inside = true;
    for (std::size_t d = 0; d < x.size(); ++d)
      if (std::fabs(x[d] - mix.atoms[j][d]) > half) {
        inside = false;
        break;
      }
    if (!inside) continue;
    mass += mix.weights[j];
    for (std::size_t d = 0; d < x.size(); ++d)
      num[d] += mix.weights[j] * mix.atoms[j][d];
  }
  if (mass <= 0.0)
    throw numeric_error(
        "posterior_mean_points: no atom within q/2 of the query "
        "(state not reachable by the forward process)");
  for (double& v : num) v /= mass;
  return num;
}

std::vector<double> posterior_mean_gmm(const GaussianMixture& mix,
                                       const std::vector<double>& x, double q,
                                       std::size_t grid_points) {
  if (!(q > 0.0)) throw input_error("posterior_mean_gmm: q must be positive");
  if (x.size() != mix.dim())
    throw input_error("posterior_mean_gmm: dimension mismatch");
  if (grid_points < 2)
    throw input_error("posterior_mean_gmm: grid_points must be >= 2");
  std::size_t dim = x.size(), nj = mix.weights.size();
  double half = q / 2.0;
  // Per component and dimension: mass and first moment of the Gaussian
  // restricted to the corruption window, by midpoint quadrature.
  std::vector<double> m0(nj * dim), m1(nj * dim);
  for (std::size_t j = 0; j < nj; ++j) {
    for (std::size_t d = 0; d < dim; ++d) {
      double mu = mix.means[j][d], sig = std::sqrt(mix.vars[j][d]);
      double lo = std::max(x[d] - half, mu - 6.0 * sig);
      double hi = std::min(x[d] + half, mu + 6.0 * sig);
      double zero_m0 = 0.0, zero_m1 = 0.0;
      if (hi > lo) {
        double h = (hi - lo) / double(grid_points);
        double inv = 1.0 / (sig * std::sqrt(2.0 * M_PI));
        for (std::size_t g = 0; g < grid_points; ++g) {
          double t = lo + (double(g) + 0.5) * h;
          double z = (t - mu) / sig;
          double pdf = inv * std::exp(-0.5 * z * z);
          zero_m0 += pdf;
          zero_m1 += t * pdf;
        }
        zero_m0 *= h;
        zero_m1 *= h;
      }
      m0[j * dim + d] = zero_m0;
      m1[j * dim + d] = zero_m1;
    }
  }
  double denom = 0.0;
  std::vector<double> num(dim, 0.0);
  for (std::size_t j = 0; j < nj; ++j) {
    double prod = mix.weights[j];
    for (std::size_t d = 0; d < dim; ++d) prod *= m0[j * dim + d];
    denom += prod;
    for (std::size_t d = 0; d < dim; ++d) {
      double m0d = m0[j * dim + d];
      if (m0d > 0.0)
        num[d] += prod * m1[j * dim + d] / m0d;
    }
  }
  if (!(denom > 1e-300))
    throw numeric_error(
        "posterior_mean_gmm: vanishing probability mass in the corruption "
        "window (numeric underflow)");
  for (double& v : num) v /= denom;
  return num;
}

double w1_distance_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw input_error("w1_distance_1d: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      acc += std::fabs(a[i] - b[i]);
    return acc / double(a.size());
  }
  // Unequal sizes: compare interpolated quantile functions on a common grid.
  std::size_t m = std::max(a.size(), b.size());
  auto quantile = [](const std::vector<double>& s, double p) {
    double pos = p * double(s.size()) - 0.5;
    if (pos <= 0.0) return s.front();
    if (pos >= double(s.size() - 1)) return s.back();
    std::size_t i = std::size_t(pos);
    double frac = pos - double(i);
    return s[i] * (1.0 - frac) + s[i + 1] * frac;
  };
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double p = (double(i) + 0.5) / double(m);
    acc += std::fabs(quantile(a, p) - quantile(b, p));
  }
  return acc / double(m);
}

double sliced_w1(const std::vector<std::vector<double>>& a,
                 const std::vector<std::vector<double>>& b,
                 std::size_t directions, SeededRng& rng) {
  if (a.empty() || b.empty()) throw input_error("sliced_w1: empty sample set");
  std::size_t dim = a[0].size();
  if (dim == 0) throw input_error("sliced_w1: zero-dimensional samples");
  for (const auto& v : a)
    if (v.size() != dim) throw input_error("sliced_w1: dimension mismatch");
  for (const auto& v : b)
    if (v.size() != dim) throw input_error("sliced_w1: dimension mismatch");
  if (directions == 0) throw input_error("sliced_w1: need >= 1 direction");
  std::vector<double> proj_a(a.size()), proj_b(b.size()), u(dim);
  double acc = 0.0;
  for (std::size_t k = 0; k < directions; ++k) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        u[d] = rng.normal();
        norm += u[d] * u[d];
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (std::size_t d = 0; d < dim; ++d) u[d] /= norm;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += u[d] * a[i][d];
      proj_a[i] = s;
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += u[d] * b[i][d];
      proj_b[i] = s;
    }
    acc += w1_distance_1d(proj_a, proj_b);
  }
  return acc / double(directions);
}

namespace {

// Rows of the tensor are independent points for the oracle.
template <typename Fn>
LatentTensor map_rows(const LatentTensor& x, std::size_t dim, Fn&& fn) {
  if (x.cols() != dim)
    throw input_error("oracle denoiser: tensor last dim must equal mixture dim");
  LatentTensor out(x.shape);
  std::size_t rows = x.rows();
  std::vector<double> pt(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t d = 0; d < dim; ++d) pt[d] = x[r * dim + d];
    std::vector<double> y = fn(pt);
    for (std::size_t d = 0; d < dim; ++d) out[r * dim + d] = y[d];
  }
  return out;
}

}  // namespace

DenoiserFn oracle_denoiser_fn(const PointMixture& mix) {
  return [mix](const LatentTensor& x, double q) {
    return map_rows(x, mix.dim(), [&mix, q](const std::vector<double>& pt) {
      // Injected randomness can push a state outside every window even
      // though the forward process cannot. A denoiser must still answer;
      // the nearest atom is the wide-window limit of the posterior.
      bool reachable = false;
      for (const auto& atom : mix.atoms) {
        double far = 0.0;
        for (std::size_t d = 0; d < atom.size(); ++d)
          far = std::max(far, std::abs(pt[d] - atom[d]));
        if (far <= q * 0.5) {
          reachable = true;
          break;
        }
      }
      if (reachable) return posterior_mean_points(mix, pt, q);
      std::size_t best = 0;
      double best_far = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < mix.atoms.size(); ++a) {
        double far = 0.0;
        for (std::size_t d = 0; d < mix.atoms[a].size(); ++d)
          far = std::max(far, std::abs(pt[d] - mix.atoms[a][d]));
        if (far < best_far) {
          best_far = far;
          best = a;
        }
      }
      return mix.atoms[best];
    });
  };
}

DenoiserFn oracle_denoiser_fn(const GaussianMixture& mix,
                              std::size_t grid_points) {
  return [mix, grid_points](const LatentTensor& x, double q) {
    return map_rows(x, mix.dim(), [&](const std::vector<double>& pt) {
      return posterior_mean_gmm(mix, pt, q, grid_points);
    });
  };
}

}  // namespace rdm
