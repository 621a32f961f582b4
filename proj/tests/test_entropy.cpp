#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "rdm/entropy.hpp"
#include "rdm/numerics.hpp"

using namespace rdm;

namespace {

ChannelEntropyModel unit_model() {
  ChannelEntropyModel m;
  m.mu = {0.0};
  m.log_s = {0.0};
  return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> logistic_draws(std::size_t n, double mu, double s,
                                   SeededRng& rng) {
  std::vector<double> xs(n);
  for (auto& x : xs) {
    double u = rng.uniform01();
    u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
    x = mu + s * std::log(u / (1.0 - u));
  }
  return xs;
}

// Draws a symbol index from a frequency table.
std::int32_t draw_symbol(const FrequencyTable& t, SeededRng& rng) {
  std::uint32_t target = std::uint32_t(rng.below(FrequencyTable::kTotal));
  std::size_t i = 0;
  while (t.cum[i + 1] <= target) ++i;
  return t.k_lo + std::int32_t(i);
}

}  // namespace

TEST_CASE("symbol probability of the center bin matches the logistic cdf") {
  ChannelEntropyModel m = unit_model();
  double p0 = symbol_prob(m, 0, 0, 1.0);
  CHECK(p0 == doctest::Approx(2.0 * sigmoid(0.5) - 1.0).epsilon(1e-12));
  CHECK(p0 == doctest::Approx(0.244919).epsilon(1e-5));
  // Symmetric model, symmetric bins.
  for (std::int32_t k : {1, 2, 5})
    CHECK(symbol_prob(m, 0, k, 1.0) ==
          doctest::Approx(symbol_prob(m, 0, -k, 1.0)).epsilon(1e-12));
}

TEST_CASE("alphabet probabilities sum to one after tail folding") {
  ChannelEntropyModel m;
  m.mu = {0.0, 1.3};
  m.log_s = {0.0, std::log(0.35)};
  for (double q : {0.05, 0.3, 1.0, 2.0}) {
    for (std::size_t c = 0; c < 2; ++c) {
      Alphabet a = alphabet_range(m, c, q);
      CHECK(a.count() <= 4096);
      double sum = 0.0;
      for (std::int32_t k = a.k_lo; k <= a.k_hi; ++k)
        sum += symbol_prob(m, c, k, q);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("alphabets cover the transform's value range") {
  ChannelEntropyModel m = unit_model();
  m.log_s = {std::log(0.01)};  // tight model, wide data
  for (double q : {0.05, 0.5, 1.0, 2.0}) {
    Alphabet a = alphabet_range(m, 0, q);
    std::int32_t need = std::int32_t(std::llround(8.0 / q));
    CHECK(a.k_lo <= -need);
    CHECK(a.k_hi >= need);
  }
}

TEST_CASE("out-of-range queries are rejected") {
  ChannelEntropyModel m = unit_model();
  CHECK(m.supports(0.05));
  CHECK(m.supports(2.0));
  CHECK(!m.supports(0.049));
  CHECK(!m.supports(2.001));
  CHECK_THROWS_AS(symbol_prob(m, 0, 0, 0.01), unsupported_rate_error);
  CHECK_THROWS_AS(rate_bits(m, {0}, 3.0), unsupported_rate_error);
  CHECK_THROWS_AS(FrequencyTable::from_model(m, 0, 0.001),
                  unsupported_rate_error);
  CHECK_THROWS_AS(symbol_prob(m, 1, 0, 1.0), input_error);  // bad channel
}

TEST_CASE("rate accounting routes symbols to channels round-robin") {
  ChannelEntropyModel m;
  m.mu = {0.0, 5.0};
  m.log_s = {0.0, 0.0};
  std::vector<std::int32_t> ks = {0, 5, 1, 4};
  double manual = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i)
    manual -= std::log2(symbol_prob(m, i % 2, ks[i], 1.0));
  CHECK(rate_bits(m, ks, 1.0) == doctest::Approx(manual).epsilon(1e-12));
  CHECK(rate_bits(m, {}, 1.0) == 0.0);
}

TEST_CASE("rate-distortion loss combines nats and squared error") {
  ChannelEntropyModel m = unit_model();
  LatentTensor y({2, 1}, {0.3, -0.2});
  double p0 = 2.0 * sigmoid(0.5) - 1.0;
  double expected = -std::log(p0) + 2.0 * (0.3 * 0.3 + 0.2 * 0.2) / 2.0;
  CHECK(rd_loss(m, y, 1.0, 2.0) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("fit recovers logistic parameters from samples") {
  SeededRng data_rng(101, 0);
  auto xs = logistic_draws(20000, 3.0, 2.0, data_rng);
  LatentTensor t({xs.size(), 1}, xs);
  FitOptions opts;
  std::ostringstream log;
  opts.log = &log;
  SeededRng rng(55, 0);
  ChannelEntropyModel m = fit_entropy_model({t}, opts, rng);
  REQUIRE(m.channels() == 1);
  CHECK(m.mu[0] == doctest::Approx(3.0).epsilon(0.034));    // +- 0.1
  CHECK(m.scale(0) == doctest::Approx(2.0).epsilon(0.05));  // +- 0.1

  // Doubling the data doubles location and scale.
  LatentTensor t2 = t;
  for (auto& v : t2.data) v *= 2.0;
  SeededRng rng2(55, 0);
  ChannelEntropyModel m2 = fit_entropy_model({t2}, opts, rng2);
  CHECK(m2.mu[0] == doctest::Approx(2.0 * m.mu[0]).epsilon(0.04));
  CHECK(m2.scale(0) == doctest::Approx(2.0 * m.scale(0)).epsilon(0.05));
}

TEST_CASE("constant data floors the scale with a warning") {
  LatentTensor t({5000, 1}, std::vector<double>(5000, 5.0));
  FitOptions opts;
  opts.epochs = 50;
  std::ostringstream log;
  opts.log = &log;
  SeededRng rng(56, 0);
  ChannelEntropyModel m = fit_entropy_model({t}, opts, rng);
  CHECK(m.mu[0] == doctest::Approx(5.0).epsilon(0.01));
  CHECK(m.scale(0) == doctest::Approx(1e-6).epsilon(1e-9));
  CHECK(log.str().find("floored") != std::string::npos);
}

TEST_CASE("frequency tables agree with the model to the quantum") {
  ChannelEntropyModel m;
  m.mu = {0.3};
  m.log_s = {std::log(0.8)};
  for (double q : {0.05, 0.3, 1.0, 2.0}) {
    FrequencyTable t = FrequencyTable::from_model(m, 0, q);
    Alphabet a = alphabet_range(m, 0, q);
    CHECK(t.k_lo == a.k_lo);
    CHECK(t.k_hi() == a.k_hi);
    CHECK(t.cum.back() == FrequencyTable::kTotal);
    std::uint32_t total = 0;
    for (std::size_t i = 0; i < t.freq.size(); ++i) {
      CHECK(t.freq[i] >= 1);
      CHECK(t.cum[i + 1] - t.cum[i] == t.freq[i]);
      total += t.freq[i];
      double p = symbol_prob(m, 0, t.k_lo + std::int32_t(i), q);
      CHECK(std::abs(double(t.freq[i]) / FrequencyTable::kTotal - p) <=
            2.0 / FrequencyTable::kTotal);
    }
    CHECK(total == FrequencyTable::kTotal);
  }
}

TEST_CASE("coded cost tracks the model cost for likely symbols") {
  // Comparing -log2(freq/total) against -log2(p) for every symbol with
  // p >= 2^-7; the 16-bit quantum cannot hold this bound for much rarer
  // symbols.
  ChannelEntropyModel m;
  m.mu = {0.1};
  m.log_s = {std::log(0.6)};
  for (double q : {0.1, 0.5, 1.0, 2.0}) {
    FrequencyTable t = FrequencyTable::from_model(m, 0, q);
    for (std::size_t i = 0; i < t.freq.size(); ++i) {
      double p = symbol_prob(m, 0, t.k_lo + std::int32_t(i), q);
      if (p < 1.0 / 128.0) continue;
      double coded = -std::log2(double(t.freq[i]) / FrequencyTable::kTotal);
      CHECK(std::abs(coded + std::log2(p)) < 0.01);
    }
  }
}

TEST_CASE("range coder round-trips arbitrary symbol streams") {
  SeededRng rng(77, 0);
  for (int trial = 0; trial < 30; ++trial) {
    ChannelEntropyModel m;
    m.mu = {rng.uniform(-2.0, 2.0)};
    m.log_s = {rng.uniform(std::log(0.1), std::log(2.0))};
    double q = rng.uniform(0.05, 2.0);
    FrequencyTable t = FrequencyTable::from_model(m, 0, q);
    std::size_t n = 1 + rng.below(500);
    std::vector<std::int32_t> ks(n);
    for (auto& k : ks) {
      // Mix of likely symbols and uniform over the whole alphabet to hit
      // the minimum-frequency tails.
      k = (rng.uniform01() < 0.5)
              ? draw_symbol(t, rng)
              : t.k_lo + std::int32_t(rng.below(t.freq.size()));
    }
    Bitstream bs = range_encode(ks, t);
    CHECK(range_decode(bs, t, n) == ks);
  }
}

TEST_CASE("range coder handles empty and single-symbol alphabets") {
  FrequencyTable t = FrequencyTable::from_probs(7, {1.0});
  Bitstream empty = range_encode({}, t);
  CHECK(range_decode(empty, t, 0).empty());

  std::vector<std::int32_t> ks(100, 7);
  Bitstream bs = range_encode(ks, t);
  CHECK(bs.bytes.size() <= 16);  // certain symbols cost nearly nothing
  CHECK(range_decode(bs, t, 100) == ks);
}

TEST_CASE("coded length approaches the table entropy") {
  // Uniform over 256 symbols: exactly 8 bits each.
  FrequencyTable uni = FrequencyTable::from_probs(
      -128, std::vector<double>(256, 1.0 / 256.0));
  SeededRng rng(78, 0);
  std::vector<std::int32_t> ks(100);
  for (auto& k : ks) k = -128 + std::int32_t(rng.below(256));
  Bitstream bs = range_encode(ks, uni);
  CHECK(bs.bytes.size() >= 100);  // entropy floor
  CHECK(bs.bytes.size() <= 110);

  // Skewed source: cost within 1% + 32 bits of the table's own entropy sum.
  FrequencyTable skew =
      FrequencyTable::from_probs(0, {0.7, 0.2, 0.05, 0.05});
  std::vector<std::int32_t> sym(50000);
  double ideal = 0.0;
  for (auto& k : sym) {
    k = draw_symbol(skew, rng);
    ideal -= std::log2(double(skew.freq[std::size_t(k)]) /
                       FrequencyTable::kTotal);
  }
  Bitstream sb = range_encode(sym, skew);
  CHECK(double(sb.bit_length()) <= ideal * 1.01 + 32.0);
  CHECK(range_decode(sb, skew, sym.size()) == sym);
}

TEST_CASE("per-position tables follow the provider") {
  ChannelEntropyModel m;
  m.mu = {0.0, 4.0};
  m.log_s = {0.0, std::log(0.5)};
  FrequencyTable t0 = FrequencyTable::from_model(m, 0, 1.0);
  FrequencyTable t1 = FrequencyTable::from_model(m, 1, 1.0);
  auto provider = [&](std::size_t pos) -> const FrequencyTable& {
    return pos % 2 == 0 ? t0 : t1;
  };
  std::vector<std::int32_t> ks = {0, 4, -1, 5, 1, 3, 0, 4};
  Bitstream bs = range_encode(ks, provider);
  CHECK(range_decode(bs, provider, ks.size()) == ks);
}

TEST_CASE("encoding a symbol outside the table is an error") {
  FrequencyTable t = FrequencyTable::from_probs(0, {0.5, 0.5});
  CHECK_THROWS_AS(range_encode({0, 1, 2}, t), rdm::range_error);
  CHECK_THROWS_AS(range_encode({-1}, t), rdm::range_error);
}

TEST_CASE("truncated payloads are detected") {
  FrequencyTable uni = FrequencyTable::from_probs(
      0, std::vector<double>(256, 1.0 / 256.0));
  SeededRng rng(79, 0);
  std::vector<std::int32_t> ks(200);
  for (auto& k : ks) k = std::int32_t(rng.below(256));
  Bitstream bs = range_encode(ks, uni);
  Bitstream cut;
  cut.bytes.assign(bs.bytes.begin(), bs.bytes.begin() + 40);
  CHECK_THROWS_AS(range_decode(cut, uni, 200), decode_error);
}

TEST_CASE("model sampling standardizes every channel") {
  ChannelEntropyModel m;
  m.mu = {0.5, -1.2};
  m.log_s = {std::log(0.7), std::log(0.4)};
  SeededRng rng(80, 0);
  std::uint64_t before = rng.counter();
  const std::size_t rows = 500000;
  LatentTensor s = entropy_model_sample(m, 0.3, {rows, 2}, rng);
  CHECK(rng.counter() - before == rows * 2);  // one uniform per element
  for (std::size_t c = 0; c < 2; ++c) {
    double sum = 0, sq = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      double v = s[r * 2 + c];
      sum += v;
      sq += v * v;
    }
    double mean = sum / rows;
    CHECK(std::abs(mean) < 0.01);
    CHECK(sq / rows - mean * mean == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("sampling a degenerate channel is an error") {
  ChannelEntropyModel m;
  m.mu = {0.0};
  m.log_s = {std::log(1e-6)};
  SeededRng rng(81, 0);
  CHECK_THROWS_AS(entropy_model_sample(m, 2.0, {10}, rng), numeric_error);
}

TEST_CASE("model files round-trip and reject corruption") {
  ChannelEntropyModel m;
  m.mu = {0.25, -3.5, 0.0};
  m.log_s = {0.0, std::log(0.2), std::log(1.7)};
  m.q_min = 0.1;
  m.q_max = 1.5;
  auto bytes = serialize_entropy_model(m);
  ChannelEntropyModel back = parse_entropy_model(bytes);
  CHECK(back.mu == m.mu);
  CHECK(back.log_s == m.log_s);
  CHECK(back.q_min == m.q_min);
  CHECK(back.q_max == m.q_max);
  CHECK(back.id() == m.id());

  auto corrupt = bytes;
  corrupt[20] ^= 0x40;
  CHECK_THROWS_AS(parse_entropy_model(corrupt), decode_error);
  auto cut = bytes;
  cut.resize(cut.size() - 5);
  CHECK_THROWS_AS(parse_entropy_model(cut), decode_error);

  std::string path =
      (std::filesystem::temp_directory_path() / "rdm_test_model.rdme").string();
  save_entropy_model(path, m);
  CHECK(load_entropy_model(path).id() == m.id());
  std::filesystem::remove(path);
}

TEST_CASE("coded rate decreases as the scale coarsens") {
  SeededRng rng(82, 0);
  ChannelEntropyModel m = unit_model();
  std::vector<double> qs = {0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0};
  std::vector<double> mean_rate(qs.size(), 0.0);
  const int tensors = 64;
  for (int i = 0; i < tensors; ++i) {
    LatentTensor y({256, 1});
    for (auto& v : y.data) v = rng.uniform(-4.0, 4.0);
    for (std::size_t j = 0; j < qs.size(); ++j) {
      std::vector<std::int32_t> ks(y.size());
      for (std::size_t e = 0; e < y.size(); ++e)
        ks[e] = std::int32_t(std::llround(y[e] / qs[j]));
      mean_rate[j] += rate_bits(m, ks, qs[j]) / tensors;
    }
  }
  for (std::size_t j = 1; j < qs.size(); ++j)
    CHECK(mean_rate[j] < mean_rate[j - 1]);
}
