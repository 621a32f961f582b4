#include "rdm/quantizer.hpp"

#include <cmath>

namespace rdm {

LatentTensor quantize_scaled(const LatentTensor& y, double q) {
  if (!(q > 0.0)) throw input_error("quantize_scaled: q must be positive");
  require_finite(y, "quantize_scaled input");
  LatentTensor out(y.shape);
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = std::round(y[i] / q) * q;
  return out;
}

std::vector<std::int32_t> symbolize(const LatentTensor& y, double q) {
  if (!(q > 0.0)) throw input_error("symbolize: q must be positive");
  require_finite(y, "symbolize input");
  std::vector<std::int32_t> k(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double r = std::round(y[i] / q);
    if (r < -2147483648.0 || r > 2147483647.0)
      throw range_error("symbolize: symbol overflows 32-bit range");
    k[i] = std::int32_t(r);
  }
  return k;
}

LatentTensor desymbolize(const std::vector<std::int32_t>& k,
                         const std::vector<std::size_t>& shape, double q) {
  if (!(q > 0.0)) throw input_error("desymbolize: q must be positive");
  LatentTensor out(shape);
  if (out.size() != k.size())
    throw input_error("desymbolize: symbol count does not match shape");
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = double(k[i]) * q;
  return out;
}

LatentTensor simulate_quantize(const LatentTensor& y, double q,
                               SeededRng& rng) {
  if (!(q >= 0.0)) throw input_error("simulate_quantize: q must be >= 0");
  require_finite(y, "simulate_quantize input");
  if (q == 0.0) return y;
  LatentTensor out(y.shape);
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = y[i] + (rng.uniform01() - 0.5) * q;
  return out;
}

}  // namespace rdm
