#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rdm/entropy.hpp"
#include "rdm/numerics.hpp"

namespace rdm {

enum class NoiseForm { gaussian, uniform, entropy_model, none };

NoiseForm noise_form_from_string(const std::string& s);
std::string to_string(NoiseForm f);

// N = 0 means pass-through (no reverse steps); beta = 0 or noise none makes
// sampling deterministic.
struct SamplerConfig {
  double q0 = 0.7;
  std::size_t N = 2;
  double beta = 0.075;
  NoiseForm noise = NoiseForm::gaussian;
  std::uint64_t seed = 0;
};

// Any denoiser usable by the sampler: maps (state, q) to a prediction of
// the clean latent. Both trained networks and analytic oracles fit here.
using DenoiserFn = std::function<LatentTensor(const LatentTensor&, double)>;

DenoiserFn make_denoiser_fn(const DenoiserParams& params);

// Linear schedule q_i = q0*(N-i)/N, so q_N = 0 and interior points stay
// positive. N = 0 returns the empty pass-through marker.
std::vector<double> make_schedule(double q0, std::size_t N);

// Quantize when the model supports q, otherwise simulate with uniform
// dequantization noise. The boundary q == q_min takes the quantized branch.
LatentTensor forward_compress(const LatentTensor& y0, double q,
                              const ChannelEntropyModel* model, SeededRng& rng);

// One training step: sample q_t ~ U(q_min, q_max), corrupt, regress the
// clean latent, step the optimizer. Returns the pre-step loss.
double train_denoiser_step(DenoiserParams& params, OptimizerState& opt,
                           const LatentTensor& y0,
                           const ChannelEntropyModel* model, SeededRng& q_rng,
                           SeededRng& noise_rng, double q_min = 0.05,
                           double q_max = 2.0);

// (x_hat0 - x_t)/q elementwise.
LatentTensor score(const LatentTensor& x_hat0, const LatentTensor& x_t,
                   double q);

// y + ((q_i - q_next)/q_i)*(x_hat0 - y); q_next = 0 returns x_hat0 exactly.
LatentTensor euler_step(const LatentTensor& y_i, const LatentTensor& x_hat0,
                        double q_i, double q_next);

// y + alpha*(eps - d) with alpha = beta*sqrt(max(q_next - q_min_sched, 0)).
// beta = 0, noise none, or alpha = 0 return y without consuming randomness.
LatentTensor inject_randomness(const LatentTensor& y, const LatentTensor& d,
                               double q_next, double beta, NoiseForm form,
                               const ChannelEntropyModel* model, SeededRng& rng,
                               double q_min_sched = 0.05);

// The reverse loop: per step, predict, take the Euler step toward the
// prediction, then optionally inject noise at the destination scale.
LatentTensor reverse_sample(const LatentTensor& y_compressed,
                            const SamplerConfig& config,
                            const DenoiserFn& denoiser,
                            const ChannelEntropyModel* model,
                            double q_min_sched = 0.05);

}  // namespace rdm
