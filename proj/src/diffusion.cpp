#include "rdm/diffusion.hpp"

#include <cmath>

#include "rdm/quantizer.hpp"

namespace rdm {

NoiseForm noise_form_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseForm::gaussian;
  if (s == "uniform") return NoiseForm::uniform;
  if (s == "entropy" || s == "entropy_model") return NoiseForm::entropy_model;
  if (s == "none") return NoiseForm::none;
  throw input_error("unknown noise form '" + s +
                    "' (expected gaussian|uniform|entropy|none)");
}

std::string to_string(NoiseForm f) {
  switch (f) {
    case NoiseForm::gaussian: return "gaussian";
    case NoiseForm::uniform: return "uniform";
    case NoiseForm::entropy_model: return "entropy";
    case NoiseForm::none: return "none";
  }
  return "?";
}

DenoiserFn make_denoiser_fn(const DenoiserParams& params) {
  return [&params](const LatentTensor& x, double q) {
    return denoiser_forward(params, x, q);
  };
}

std::vector<double> make_schedule(double q0, std::size_t N) {
  if (N == 0) return {};  // pass-through marker
  if (!(q0 > 0.0)) throw input_error("make_schedule: q0 must be positive");
  std::vector<double> qs(N + 1);
  for (std::size_t i = 0; i <= N; ++i)
    qs[i] = q0 * double(N - i) / double(N);
  return qs;
}

LatentTensor forward_compress(const LatentTensor& y0, double q,
                              const ChannelEntropyModel* model,
                              SeededRng& rng) {
  if (!(q > 0.0)) throw input_error("forward_compress: q must be positive");
  if (model && model->supports(q)) return quantize_scaled(y0, q);
  return simulate_quantize(y0, q, rng);
}

double train_denoiser_step(DenoiserParams& params, OptimizerState& opt,
                           const LatentTensor& y0,
                           const ChannelEntropyModel* model, SeededRng& q_rng,
                           SeededRng& noise_rng, double q_min, double q_max) {
  if (!(q_min > 0.0 && q_min < q_max))
    throw input_error("train_denoiser_step: need 0 < q_min < q_max");
  require_finite(y0, "train_denoiser_step input");
  double q_t = q_rng.uniform(q_min, q_max);
  LatentTensor y_t = forward_compress(y0, q_t, model, noise_rng);
  auto [loss, grads] = denoiser_backward(params, y_t, q_t, y0);
  adamw_step(opt, params, grads);
  return loss;
}

LatentTensor score(const LatentTensor& x_hat0, const LatentTensor& x_t,
                   double q) {
  if (!same_shape(x_hat0, x_t))
    throw input_error("score: shape mismatch");
  if (q == 0.0) throw input_error("score: q must be nonzero");
  if (!(q > 0.0)) throw input_error("score: q must be positive");
  LatentTensor d(x_t.shape);
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = (x_hat0[i] - x_t[i]) / q;
  return d;
}

LatentTensor euler_step(const LatentTensor& y_i, const LatentTensor& x_hat0,
                        double q_i, double q_next) {
  if (!same_shape(y_i, x_hat0))
    throw input_error("euler_step: shape mismatch");
  if (!(q_i > 0.0)) throw input_error("euler_step: q_i must be positive");
  if (!(q_next >= 0.0) || !(q_next < q_i))
    throw input_error("euler_step: need q_i > q_next >= 0");
  if (q_next == 0.0) return x_hat0;  // full interpolation collapses exactly
  double frac = (q_i - q_next) / q_i;
  LatentTensor out(y_i.shape);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = y_i[i] + frac * (x_hat0[i] - y_i[i]);
  return out;
}

LatentTensor inject_randomness(const LatentTensor& y, const LatentTensor& d,
                               double q_next, double beta, NoiseForm form,
                               const ChannelEntropyModel* model, SeededRng& rng,
                               double q_min_sched) {
  if (!(beta >= 0.0)) throw input_error("inject_randomness: beta must be >= 0");
  if (!same_shape(y, d))
    throw input_error("inject_randomness: shape mismatch");
  if (beta == 0.0 || form == NoiseForm::none) return y;
  double alpha = beta * std::sqrt(std::max(q_next - q_min_sched, 0.0));
  if (alpha == 0.0) return y;

  LatentTensor eps(y.shape);
  switch (form) {
    case NoiseForm::gaussian:
      for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
      break;
    case NoiseForm::uniform: {
      // (u - 0.5) has std 1/sqrt(12); normalize to unit variance.
      const double s = std::sqrt(12.0);
      for (std::size_t i = 0; i < eps.size(); ++i)
        eps[i] = (rng.uniform01() - 0.5) * s;
      break;
    }
    case NoiseForm::entropy_model: {
      if (!model)
        throw input_error(
            "inject_randomness: entropy noise form needs an entropy model");
      eps = entropy_model_sample(*model, q_next, y.shape, rng);
      break;
    }
    case NoiseForm::none:
      return y;
  }
  LatentTensor out(y.shape);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = y[i] + alpha * (eps[i] - d[i]);
  return out;
}

LatentTensor reverse_sample(const LatentTensor& y_compressed,
                            const SamplerConfig& config,
                            const DenoiserFn& denoiser,
                            const ChannelEntropyModel* model,
                            double q_min_sched) {
  if (config.N == 0) return y_compressed;
  require_finite(y_compressed, "reverse_sample input");
  std::vector<double> qs = make_schedule(config.q0, config.N);
  SeededRng rng = SeededRng(config.seed, 0x6e6f6973ull).derive(1);
  LatentTensor y = y_compressed;
  for (std::size_t i = 0; i < config.N; ++i) {
    double q_i = qs[i], q_next = qs[i + 1];
    LatentTensor x_hat0 = denoiser(y, q_i);
    if (!same_shape(x_hat0, y))
      throw input_error("reverse_sample: denoiser changed the shape");
    LatentTensor d = score(x_hat0, y, q_i);
    y = euler_step(y, x_hat0, q_i, q_next);
    if (config.beta > 0.0 && config.noise != NoiseForm::none)
      y = inject_randomness(y, d, q_next, config.beta, config.noise, model,
                            rng, q_min_sched);
  }
  require_finite(y, "reverse_sample output");
  return y;
}

}  // namespace rdm
