#pragma once

#include <cstdint>
#include <vector>

#include "rdm/numerics.hpp"

namespace rdm {

// round(y/q)*q elementwise, ties away from zero. Output elements are integer
// multiples of q up to one ulp.
LatentTensor quantize_scaled(const LatentTensor& y, double q);

// round(y/q) elementwise. desymbolize(symbolize(y, q), q) equals
// quantize_scaled(y, q) exactly.
std::vector<std::int32_t> symbolize(const LatentTensor& y, double q);
LatentTensor desymbolize(const std::vector<std::int32_t>& k,
                         const std::vector<std::size_t>& shape, double q);

// y + u*q with u iid uniform on [-0.5, 0.5). q = 0 returns y unchanged.
LatentTensor simulate_quantize(const LatentTensor& y, double q, SeededRng& rng);

}  // namespace rdm
