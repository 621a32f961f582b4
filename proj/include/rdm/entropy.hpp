#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "rdm/numerics.hpp"

namespace rdm {

// Per-channel logistic distribution over quantized symbols. Channel of a
// flat element index i is i % channels(), which makes the last tensor dim
// the channel axis.
struct ChannelEntropyModel {
  std::vector<double> mu;
  std::vector<double> log_s;
  double q_min = 0.05;
  double q_max = 2.0;

  std::size_t channels() const { return mu.size(); }
  bool supports(double q) const { return q >= q_min && q <= q_max; }
  double scale(std::size_t c) const;
  // Content hash over the canonical serialization; stable across
  // save/load round trips.
  std::uint64_t id() const;
};

// Symbol range [k_lo, k_hi] for one channel at scale q. Both coder sides
// derive it from the model alone: the smallest symmetric range holding
// >= 1 - 2^-20 of the mass, widened to cover |k| <= round(8/q) so every
// value the pipeline produces stays codable, capped at 4096 symbols.
struct Alphabet {
  std::int32_t k_lo = 0;
  std::int32_t k_hi = 0;
  std::size_t count() const { return std::size_t(k_hi - k_lo + 1); }
};

Alphabet alphabet_range(const ChannelEntropyModel& model, std::size_t channel,
                        double q);

// P(symbol k) under the discretized logistic; tail mass is folded into the
// alphabet's edge symbols so the alphabet sums to 1.
double symbol_prob(const ChannelEntropyModel& model, std::size_t channel,
                   std::int32_t k, double q);

// Sum of -log2 P(k) over the sequence; channel = index % channels.
double rate_bits(const ChannelEntropyModel& model,
                 const std::vector<std::int32_t>& symbols, double q);

// rate in nats per element + lambda * mean squared quantization error.
double rd_loss(const ChannelEntropyModel& model, const LatentTensor& y,
               double q, double lambda);

// Gradient fit of (mu, log s) per channel minimizing expected coded rate
// over q ~ U(q_min, q_max). channels = 0 infers the count from the last dim
// of the first tensor. Degenerate channels get s floored at 1e-6 with a
// warning on `log` (or stderr when null).
struct FitOptions {
  int epochs = 300;
  double lr = 0.05;
  double q_min = 0.05;
  double q_max = 2.0;
  std::size_t channels = 0;
  std::ostream* log = nullptr;
};
ChannelEntropyModel fit_entropy_model(const std::vector<LatentTensor>& data,
                                      const FitOptions& opts, SeededRng& rng);

// Integer frequencies over an alphabet, total exactly 2^16, every symbol
// >= 1. Built by largest-remainder rounding of the model probabilities.
struct FrequencyTable {
  static constexpr std::uint32_t kTotal = 1u << 16;
  std::int32_t k_lo = 0;
  std::vector<std::uint32_t> freq;
  std::vector<std::uint32_t> cum;  // size freq.size()+1, cum.back() == kTotal

  std::int32_t k_hi() const { return k_lo + std::int32_t(freq.size()) - 1; }
  static FrequencyTable from_probs(std::int32_t k_lo,
                                   const std::vector<double>& probs);
  static FrequencyTable from_model(const ChannelEntropyModel& model,
                                   std::size_t channel, double q);
};

struct Bitstream {
  std::vector<std::uint8_t> bytes;
  std::uint64_t bit_length() const { return std::uint64_t(bytes.size()) * 8; }
};

using TableProvider = std::function<const FrequencyTable&(std::size_t pos)>;

// Bit-exact carryless range coding. decode(encode(s)) == s for any symbol
// sequence within the tables' alphabets.
Bitstream range_encode(const std::vector<std::int32_t>& symbols,
                       const TableProvider& tables);
Bitstream range_encode(const std::vector<std::int32_t>& symbols,
                       const FrequencyTable& table);
std::vector<std::int32_t> range_decode(const Bitstream& bs,
                                       const TableProvider& tables,
                                       std::size_t count);
std::vector<std::int32_t> range_decode(const Bitstream& bs,
                                       const FrequencyTable& table,
                                       std::size_t count);

// Draws symbols from the model at scale q and returns (k*q - mean)/std with
// analytic moments of the discrete distribution, so each channel has zero
// mean and unit variance in expectation. Consumes one uniform per element.
LatentTensor entropy_model_sample(const ChannelEntropyModel& model, double q,
                                  const std::vector<std::size_t>& shape,
                                  SeededRng& rng);

// Model file: magic "RDME", version, channel count, q range, per-channel
// (mu, log s), trailing content hash.
std::vector<std::uint8_t> serialize_entropy_model(const ChannelEntropyModel& m);
ChannelEntropyModel parse_entropy_model(const std::vector<std::uint8_t>& bytes);
void save_entropy_model(const std::string& path, const ChannelEntropyModel& m);
ChannelEntropyModel load_entropy_model(const std::string& path);

}  // namespace rdm
