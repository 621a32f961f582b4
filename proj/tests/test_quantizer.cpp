#include <cmath>
#include <vector>

#include "doctest.h"
#include "rdm/numerics.hpp"
#include "rdm/quantizer.hpp"

using namespace rdm;

namespace {

LatentTensor random_tensor(std::size_t n, SeededRng& rng, double lo, double hi) {
  LatentTensor t({n});
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("rounding snaps to the nearest lattice point, ties away from zero") {
  LatentTensor y({4}, {2.3, 2.3, -2.5, 2.5});
  CHECK(quantize_scaled(y, 1.0).data == std::vector<double>{2.0, 2.0, -3.0, 3.0});
  LatentTensor h = quantize_scaled(y, 0.5);
  CHECK(h.data[0] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(h.data[2] == doctest::Approx(-2.5).epsilon(1e-15));
  CHECK_THROWS_AS(quantize_scaled(y, 0.0), input_error);
  CHECK_THROWS_AS(quantize_scaled(y, -0.5), input_error);
}

TEST_CASE("symbolization composes back to the scaled lattice") {
  SeededRng rng(31, 0);
  for (double q : {0.05, 0.3, 0.7, 1.0, 2.0}) {
    LatentTensor y = random_tensor(4096, rng, -8.0, 8.0);
    auto k = symbolize(y, q);
    LatentTensor via = desymbolize(k, y.shape, q);
    LatentTensor direct = quantize_scaled(y, q);
    CHECK(via.data == direct.data);  // identical arithmetic, bit-exact
  }
}

TEST_CASE("quantization is idempotent and bounded by half a step") {
  SeededRng rng(32, 0);
  for (double q : {0.1, 0.5, 1.3}) {
    LatentTensor y = random_tensor(2048, rng, -5.0, 5.0);
    LatentTensor once = quantize_scaled(y, q);
    LatentTensor twice = quantize_scaled(once, q);
    CHECK(once.data == twice.data);
    for (std::size_t i = 0; i < y.size(); ++i)
      CHECK(std::abs(once[i] - y[i]) <= q / 2 + 1e-12);
  }
}

TEST_CASE("symbol indices that overflow 32 bits are rejected") {
  LatentTensor y({1}, {1e12});
  CHECK_THROWS_AS(symbolize(y, 1e-4), rdm::range_error);
}

TEST_CASE("simulated quantization adds uniform noise with variance q^2/12") {
  SeededRng rng(33, 0);
  const std::size_t n = 1000000;
  LatentTensor y({n});
  for (auto& v : y.data) v = 3.7;  // constant input isolates the noise
  LatentTensor s = simulate_quantize(y, 1.0, rng);
  double sum = 0, sq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = s[i] - 3.7;
    CHECK(std::abs(d) <= 0.5);
    sum += d;
    sq += d * d;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.001);
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.012));
}

TEST_CASE("simulating at scale zero is the identity and draws nothing") {
  SeededRng rng(34, 0);
  LatentTensor y({3}, {0.1, -2.0, 5.5});
  std::uint64_t before = rng.counter();
  LatentTensor s = simulate_quantize(y, 0.0, rng);
  CHECK(s.data == y.data);
  CHECK(rng.counter() == before);
  CHECK_THROWS_AS(simulate_quantize(y, -1.0, rng), input_error);
}

TEST_CASE("corruption error grows monotonically with the scale") {
  SeededRng rng(35, 0);
  LatentTensor y = random_tensor(100000, rng, -4.0, 4.0);
  double prev = -1.0;
  for (double q : {0.1, 0.4, 0.8, 1.2, 1.6, 2.0}) {
    SeededRng noise(36, 0);
    LatentTensor s = simulate_quantize(y, q, noise);
    double mse = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double d = s[i] - y[i];
      mse += d * d;
    }
    mse /= double(y.size());
    CHECK(mse > prev);
    prev = mse;
    CHECK(mse == doctest::Approx(q * q / 12.0).epsilon(0.02));
  }
}
