#include "rdm/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>

#include "rdm/quantizer.hpp"

namespace rdm {

namespace {

inline double logistic_cdf(double x, double mu, double s) {
  double z = (x - mu) / s;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

constexpr double kMassTarget = 1.0 - 0x1.0p-20;
constexpr std::size_t kMaxAlphabet = 4096;
constexpr double kCoverValueRange = 8.0;

void check_supported(const ChannelEntropyModel& m, double q, const char* who) {
  if (!(q > 0.0)) throw input_error(std::string(who) + ": q must be positive");
  if (!m.supports(q))
    throw unsupported_rate_error(std::string(who) + ": q=" + std::to_string(q) +
                                 " outside supported range [" +
                                 std::to_string(m.q_min) + ", " +
                                 std::to_string(m.q_max) + "]");
}

void check_channel(const ChannelEntropyModel& m, std::size_t channel,
                   const char* who) {
  if (channel >= m.channels())
    throw input_error(std::string(who) + ": channel index out of range");
}

// Raw (unfolded) probability of symbol k.
inline double raw_prob(double mu, double s, double q, double k) {
  return logistic_cdf((k + 0.5) * q, mu, s) - logistic_cdf((k - 0.5) * q, mu, s);
}

std::uint64_t fnv1a(const std::uint8_t* p, std::size_t n) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(std::uint8_t(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(std::uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& b, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(b, v);
}

// Everything that identifies the model: version, channel count, q range,
// per-channel parameters. The content hash runs over exactly these bytes.
std::vector<std::uint8_t> model_core_bytes(const ChannelEntropyModel& m) {
  std::vector<std::uint8_t> b;
  put_u32(b, 1);  // version
  put_u32(b, std::uint32_t(m.channels()));
  put_f64(b, m.q_min);
  put_f64(b, m.q_max);
  for (std::size_t c = 0; c < m.channels(); ++c) {
    put_f64(b, m.mu[c]);
    put_f64(b, m.log_s[c]);
  }
  return b;
}

}  // namespace

double ChannelEntropyModel::scale(std::size_t c) const {
  return std::exp(log_s[c]);
}

std::uint64_t ChannelEntropyModel::id() const {
  std::vector<std::uint8_t> core = model_core_bytes(*this);
  return fnv1a(core.data(), core.size());
}

Alphabet alphabet_range(const ChannelEntropyModel& model, std::size_t channel,
                        double q) {
  check_supported(model, q, "alphabet_range");
  check_channel(model, channel, "alphabet_range");
  double mu = model.mu[channel], s = model.scale(channel);
  std::int64_t k_c = std::llround(mu / q);
  std::int64_t l_max = (kMaxAlphabet - 1) / 2;  // symmetric cap before union
  auto mass = [&](std::int64_t l) {
    return logistic_cdf((double(k_c + l) + 0.5) * q, mu, s) -
           logistic_cdf((double(k_c - l) - 0.5) * q, mu, s);
  };
  std::int64_t lo_l = 0, hi_l = l_max;
  if (mass(l_max) < kMassTarget) {
    lo_l = l_max;
  } else {
    while (lo_l < hi_l) {  // smallest l with mass(l) >= target
      std::int64_t mid = (lo_l + hi_l) / 2;
      if (mass(mid) >= kMassTarget)
        hi_l = mid;
      else
        lo_l = mid + 1;
    }
  }
  std::int64_t cover = std::llround(kCoverValueRange / q);
  std::int64_t lo = std::min(k_c - lo_l, -cover);
  std::int64_t hi = std::max(k_c + lo_l, cover);
  while (hi - lo + 1 > std::int64_t(kMaxAlphabet)) {
    if (k_c - lo > hi - k_c)
      ++lo;
    else
      --hi;
  }
  Alphabet a;
  a.k_lo = std::int32_t(lo);
  a.k_hi = std::int32_t(hi);
  return a;
}

namespace {

double folded_prob(const ChannelEntropyModel& model, std::size_t channel,
                   const Alphabet& a, std::int32_t k, double q) {
  double mu = model.mu[channel], s = model.scale(channel);
  if (k < a.k_lo || k > a.k_hi)
    throw range_error("symbol " + std::to_string(k) +
                      " outside alphabet [" + std::to_string(a.k_lo) + ", " +
                      std::to_string(a.k_hi) + "]");
  double hi_edge = logistic_cdf((double(k) + 0.5) * q, mu, s);
  double lo_edge = logistic_cdf((double(k) - 0.5) * q, mu, s);
  if (k == a.k_lo) lo_edge = 0.0;   // fold lower tail
  if (k == a.k_hi) hi_edge = 1.0;   // fold upper tail
  return hi_edge - lo_edge;
}

}  // namespace

double symbol_prob(const ChannelEntropyModel& model, std::size_t channel,
                   std::int32_t k, double q) {
  check_supported(model, q, "symbol_prob");
  check_channel(model, channel, "symbol_prob");
  Alphabet a = alphabet_range(model, channel, q);
  return folded_prob(model, channel, a, k, q);
}

double rate_bits(const ChannelEntropyModel& model,
                 const std::vector<std::int32_t>& symbols, double q) {
  check_supported(model, q, "rate_bits");
  std::size_t c_count = model.channels();
  if (c_count == 0) throw input_error("rate_bits: model has no channels");
  std::vector<Alphabet> alphabets(c_count);
  for (std::size_t c = 0; c < c_count; ++c)
    alphabets[c] = alphabet_range(model, c, q);
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    std::size_t c = i % c_count;
    double p = folded_prob(model, c, alphabets[c], symbols[i], q);
    if (!(p > 0.0))
      throw numeric_error("rate_bits: zero-probability symbol " +
                          std::to_string(symbols[i]));
    bits -= std::log2(p);
  }
  return bits;
}

double rd_loss(const ChannelEntropyModel& model, const LatentTensor& y,
               double q, double lambda) {
  check_supported(model, q, "rd_loss");
  if (!(lambda >= 0.0)) throw input_error("rd_loss: lambda must be >= 0");
  if (y.size() == 0) throw input_error("rd_loss: empty tensor");
  double rate = rate_bits(model, symbolize(y, q), q);
  LatentTensor yq = quantize_scaled(y, q);
  double dist = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double d = yq[i] - y[i];
    dist += d * d;
  }
  dist /= double(y.size());
  return rate * M_LN2 / double(y.size()) + lambda * dist;
}

ChannelEntropyModel fit_entropy_model(const std::vector<LatentTensor>& data,
                                      const FitOptions& opts, SeededRng& rng) {
  if (data.empty()) throw input_error("fit_entropy_model: empty data");
  if (!(opts.q_min > 0.0 && opts.q_min < opts.q_max))
    throw input_error("fit_entropy_model: need 0 < q_min < q_max");
  if (opts.epochs < 1) throw input_error("fit_entropy_model: epochs must be >= 1");
  std::size_t c_count = opts.channels ? opts.channels : data[0].cols();
  if (c_count == 0) throw input_error("fit_entropy_model: zero channels");

  std::vector<std::vector<double>> chan(c_count);
  for (const LatentTensor& t : data) {
    require_finite(t, "fit_entropy_model data");
    for (std::size_t i = 0; i < t.size(); ++i)
      chan[i % c_count].push_back(t[i]);
  }
  for (std::size_t c = 0; c < c_count; ++c)
    if (chan[c].empty())
      throw input_error("fit_entropy_model: channel " + std::to_string(c) +
                        " has no data");

  constexpr double kLogSFloor = -13.815510557964274;  // ln(1e-6)
  constexpr double kLogisticStd = 1.8137993642342178; // pi/sqrt(3)
  ChannelEntropyModel m;
  m.q_min = opts.q_min;
  m.q_max = opts.q_max;
  m.mu.resize(c_count);
  m.log_s.resize(c_count);
  std::ostream& log = opts.log ? *opts.log : std::cerr;
  std::vector<bool> warned(c_count, false);
  for (std::size_t c = 0; c < c_count; ++c) {
    const std::vector<double>& xs = chan[c];
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= double(xs.size());
    m.mu[c] = mean;
    double raw = std::log(std::sqrt(var) / kLogisticStd + 1e-300);
    m.log_s[c] = std::max(raw, kLogSFloor);
    if (raw < kLogSFloor) {
      // At the floor the bin mass saturates and the gradient vanishes, so
      // this is the only chance to say anything about degenerate data.
      warned[c] = true;
      log << "warning: channel " << c
          << " scale floored at 1e-6 (near-constant data)\n";
    }
  }
  SeededRng q_rng = rng.derive(1);
  SeededRng batch_rng = rng.derive(2);
  constexpr std::size_t kBatchCap = 8192;
  std::vector<double> am(2 * c_count, 0.0), av(2 * c_count, 0.0);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

  for (int e = 0; e < opts.epochs; ++e) {
    double q = q_rng.uniform(opts.q_min, opts.q_max);
    double lr = opts.lr * (1.0 - 0.99 * double(e) / double(std::max(opts.epochs - 1, 1)));
    double epoch_bits = 0.0;
    std::size_t epoch_n = 0;
    for (std::size_t c = 0; c < c_count; ++c) {
      const std::vector<double>& xs = chan[c];
      double mu = m.mu[c], s = std::exp(m.log_s[c]);
      double g_mu = 0.0, g_ls = 0.0, nll = 0.0;
      std::size_t n = std::min(xs.size(), kBatchCap);
      for (std::size_t j = 0; j < n; ++j) {
        double x = xs.size() <= kBatchCap ? xs[j]
                                          : xs[batch_rng.below(xs.size())];
        double k = std::round(x / q);
        double za = ((k - 0.5) * q - mu) / s;
        double zb = ((k + 0.5) * q - mu) / s;
        double fa = sigmoid(za), fb = sigmoid(zb);
        double p = fb - fa;
        double da = fa * (1.0 - fa), db = fb * (1.0 - fb);
        double pc = std::max(p, 1e-12);
        // dNLL/dmu = -(1/P) dP/dmu with dP/dmu = (da - db)/s
        g_mu += -(da - db) / (s * pc);
        g_ls += -(za * da - zb * db) / pc;
        nll += -std::log(pc);
      }
      g_mu /= double(n);
      g_ls /= double(n);
      epoch_bits += nll / M_LN2;
      epoch_n += n;
      double* mm = &am[2 * c];
      double* vv = &av[2 * c];
      double t = double(e + 1);
      double g[2] = {g_mu, g_ls};
      double upd[2];
      for (int d = 0; d < 2; ++d) {
        mm[d] = b1 * mm[d] + (1.0 - b1) * g[d];
        vv[d] = b2 * vv[d] + (1.0 - b2) * g[d] * g[d];
        double mh = mm[d] / (1.0 - std::pow(b1, t));
        double vh = vv[d] / (1.0 - std::pow(b2, t));
        upd[d] = lr * mh / (std::sqrt(vh) + eps);
      }
      m.mu[c] -= upd[0];
      m.log_s[c] -= upd[1];
      if (m.log_s[c] < kLogSFloor) {
        m.log_s[c] = kLogSFloor;
        if (!warned[c]) {
          warned[c] = true;
          log << "warning: channel " << c
              << " scale floored at 1e-6 (near-constant data)\n";
        }
      }
    }
    if (opts.log && (e % std::max(opts.epochs / 10, 1) == 0 || e == opts.epochs - 1))
      log << "entropy fit epoch " << e << " q=" << q
          << " rate=" << epoch_bits / double(epoch_n) << " bits/elem\n";
  }
  return m;
}

FrequencyTable FrequencyTable::from_probs(std::int32_t k_lo,
                                          const std::vector<double>& probs) {
  std::size_t n = probs.size();
  if (n == 0) throw input_error("frequency table needs at least one symbol");
  if (n > kTotal / 2)
    throw input_error("alphabet too large for 16-bit frequency total");
  FrequencyTable t;
  t.k_lo = k_lo;
  t.freq.assign(n, 0);
  std::vector<double> rem(n);
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double p = probs[i];
    if (!(p >= 0.0) || !std::isfinite(p))
      throw input_error("frequency table probabilities must be finite and >= 0");
    double raw = p * double(kTotal);
    double base = std::floor(raw);
    t.freq[i] = std::uint32_t(std::max(base, 1.0));
    rem[i] = raw - base;
    sum += t.freq[i];
  }
  std::int64_t diff = std::int64_t(kTotal) - sum;
  if (diff > 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::sort(order.begin(), order.end(), [&rem](std::size_t a, std::size_t b) {
      if (rem[a] != rem[b]) return rem[a] > rem[b];
      return a < b;
    });
    for (std::int64_t j = 0; j < diff; ++j)
      t.freq[order[std::size_t(j) % n]] += 1;
  } else if (diff < 0) {
    // The 1-quantum floor on rare symbols can overshoot the total. Take the
    // excess back one quantum per bin per round, never below 1, so no single
    // probability is distorted by more than a few quanta.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::sort(order.begin(), order.end(),
              [&t](std::size_t a, std::size_t b) {
                if (t.freq[a] != t.freq[b]) return t.freq[a] > t.freq[b];
                return a < b;
              });
    while (diff < 0) {
      bool took = false;
      for (std::size_t idx : order) {
        if (diff == 0) break;
        if (t.freq[idx] > 1) {
          t.freq[idx] -= 1;
          ++diff;
          took = true;
        }
      }
      if (!took) throw input_error("cannot fit alphabet into frequency total");
    }
  }
  t.cum.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) t.cum[i + 1] = t.cum[i] + t.freq[i];
  return t;
}

FrequencyTable FrequencyTable::from_model(const ChannelEntropyModel& model,
                                          std::size_t channel, double q) {
  Alphabet a = alphabet_range(model, channel, q);
  std::vector<double> probs(a.count());
  for (std::size_t i = 0; i < a.count(); ++i)
    probs[i] = folded_prob(model, channel, a,
                           a.k_lo + std::int32_t(i), q);
  return from_probs(a.k_lo, probs);
}

namespace {

constexpr std::uint64_t kTop = 1ull << 56;
constexpr std::uint64_t kBot = 1ull << 48;
constexpr std::uint64_t kFlushAlign = 1ull << 40;

class RangeEncoder {
 public:
  void encode(std::uint32_t cum, std::uint32_t freq, std::uint32_t tot) {
    std::uint64_t r = range_ / tot;
    low_ += r * cum;
    range_ = r * freq;
    normalize();
  }
  std::vector<std::uint8_t> finish() {
    // Any codeword with these top 24 bits and arbitrary lower 40 bits lies
    // in [low, low+range): range >= 2^48 after normalize.
    std::uint64_t x = (low_ + (kFlushAlign - 1)) & ~(kFlushAlign - 1);
    out_.push_back(std::uint8_t(x >> 56));
    out_.push_back(std::uint8_t(x >> 48));
    out_.push_back(std::uint8_t(x >> 40));
    return std::move(out_);
  }

 private:
  void normalize() {
    while (true) {
      if ((low_ ^ (low_ + range_)) < kTop) {
        // top byte settled, emit it
      } else if (range_ < kBot) {
        range_ = (0 - low_) & (kBot - 1);  // carryless underflow handling
      } else {
        break;
      }
      out_.push_back(std::uint8_t(low_ >> 56));
      low_ <<= 8;
      range_ <<= 8;
    }
  }
  std::uint64_t low_ = 0;
  std::uint64_t range_ = ~0ull;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(const std::vector<std::uint8_t>& bytes)
      : p_(bytes.data()), end_(bytes.data() + bytes.size()) {
    for (int i = 0; i < 8; ++i) code_ = (code_ << 8) | next_byte();
  }
  std::uint32_t decode_freq(std::uint32_t tot) {
    r_ = range_ / tot;
    std::uint64_t v = (code_ - low_) / r_;
    return v >= tot ? tot - 1 : std::uint32_t(v);
  }
  void decode_update(std::uint32_t cum, std::uint32_t freq) {
    low_ += r_ * cum;
    range_ = r_ * freq;
    while (true) {
      if ((low_ ^ (low_ + range_)) < kTop) {
      } else if (range_ < kBot) {
        range_ = (0 - low_) & (kBot - 1);
      } else {
        break;
      }
      code_ = (code_ << 8) | next_byte();
      low_ <<= 8;
      range_ <<= 8;
    }
  }

 private:
  std::uint8_t next_byte() {
    if (p_ < end_) {
      ++consumed_;
      return *p_++;
    }
    // The flush leaves 40 free low bits, so a few zero reads past the end
    // are part of a valid stream; more means truncation.
    if (++overrun_ > 16)
      throw decode_error("bitstream exhausted at byte " +
                         std::to_string(consumed_));
    return 0;
  }
  const std::uint8_t* p_;
  const std::uint8_t* end_;
  std::uint64_t low_ = 0, range_ = ~0ull, code_ = 0, r_ = 0;
  std::size_t consumed_ = 0, overrun_ = 0;
};

void check_table(const FrequencyTable& t) {
  if (t.freq.empty() || t.cum.size() != t.freq.size() + 1 ||
      t.cum.back() != FrequencyTable::kTotal)
    throw input_error("malformed frequency table");
}

}  // namespace

Bitstream range_encode(const std::vector<std::int32_t>& symbols,
                       const TableProvider& tables) {
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const FrequencyTable& t = tables(i);
    check_table(t);
    std::int32_t k = symbols[i];
    if (k < t.k_lo || k > t.k_hi())
      throw range_error("symbol " + std::to_string(k) + " at position " +
                        std::to_string(i) + " outside table alphabet [" +
                        std::to_string(t.k_lo) + ", " +
                        std::to_string(t.k_hi()) + "]");
    std::size_t idx = std::size_t(k - t.k_lo);
    enc.encode(t.cum[idx], t.freq[idx], FrequencyTable::kTotal);
  }
  Bitstream bs;
  bs.bytes = enc.finish();
  return bs;
}

Bitstream range_encode(const std::vector<std::int32_t>& symbols,
                       const FrequencyTable& table) {
  return range_encode(symbols,
                      [&table](std::size_t) -> const FrequencyTable& {
                        return table;
                      });
}

std::vector<std::int32_t> range_decode(const Bitstream& bs,
                                       const TableProvider& tables,
                                       std::size_t count) {
  std::vector<std::int32_t> out;
  out.reserve(count);
  if (count == 0) return out;
  RangeDecoder dec(bs.bytes);
  for (std::size_t i = 0; i < count; ++i) {
    const FrequencyTable& t = tables(i);
    check_table(t);
    std::uint32_t target = dec.decode_freq(FrequencyTable::kTotal);
    // cum is strictly increasing where freq > 0; find the bucket.
    std::size_t idx =
        std::size_t(std::upper_bound(t.cum.begin(), t.cum.end(), target) -
                    t.cum.begin()) - 1;
    if (idx >= t.freq.size())
      throw decode_error("range decoder lost sync at symbol " +
                         std::to_string(i));
    dec.decode_update(t.cum[idx], t.freq[idx]);
    out.push_back(t.k_lo + std::int32_t(idx));
  }
  return out;
}

std::vector<std::int32_t> range_decode(const Bitstream& bs,
                                       const FrequencyTable& table,
                                       std::size_t count) {
  return range_decode(bs,
                      [&table](std::size_t) -> const FrequencyTable& {
                        return table;
                      },
                      count);
}

LatentTensor entropy_model_sample(const ChannelEntropyModel& model, double q,
                                  const std::vector<std::size_t>& shape,
                                  SeededRng& rng) {
  check_supported(model, q, "entropy_model_sample");
  std::size_t c_count = model.channels();
  if (c_count == 0) throw input_error("entropy_model_sample: empty model");
  struct ChanTab {
    std::int32_t k_lo;
    std::vector<double> cum;  // cumulative probabilities
    double mean, std;
  };
  std::vector<ChanTab> tabs(c_count);
  for (std::size_t c = 0; c < c_count; ++c) {
    Alphabet a = alphabet_range(model, c, q);
    ChanTab& t = tabs[c];
    t.k_lo = a.k_lo;
    t.cum.resize(a.count());
    double acc = 0.0, mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < a.count(); ++i) {
      double p = folded_prob(model, c, a, a.k_lo + std::int32_t(i), q);
      double v = double(a.k_lo + std::int32_t(i)) * q;
      acc += p;
      mean += p * v;
      sq += p * v * v;
      t.cum[i] = acc;
    }
    double var = sq - mean * mean;
    t.mean = mean;
    t.std = var > 0.0 ? std::sqrt(var) : 0.0;
    if (t.std < 1e-12)
      throw numeric_error(
          "entropy_model_sample: zero standard deviation at q=" +
          std::to_string(q) + " (channel " + std::to_string(c) + ")");
  }
  LatentTensor out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ChanTab& t = tabs[i % c_count];
    double u = rng.uniform01();
    std::size_t idx =
        std::size_t(std::upper_bound(t.cum.begin(), t.cum.end(), u) -
                    t.cum.begin());
    if (idx >= t.cum.size()) idx = t.cum.size() - 1;
    double v = double(t.k_lo + std::int32_t(idx)) * q;
    out[i] = (v - t.mean) / t.std;
  }
  return out;
}

std::vector<std::uint8_t> serialize_entropy_model(const ChannelEntropyModel& m) {
  if (m.channels() == 0 || m.log_s.size() != m.mu.size())
    throw input_error("cannot serialize malformed entropy model");
  std::vector<std::uint8_t> core = model_core_bytes(m);
  std::vector<std::uint8_t> b;
  b.push_back('R');
  b.push_back('D');
  b.push_back('M');
  b.push_back('E');
  b.insert(b.end(), core.begin(), core.end());
  put_u64(b, fnv1a(core.data(), core.size()));
  return b;
}

ChannelEntropyModel parse_entropy_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || bytes[0] != 'R' || bytes[1] != 'D' ||
      bytes[2] != 'M' || bytes[3] != 'E')
    throw decode_error("not an entropy model file (bad magic)");
  if (bytes.size() < 4 + 4 + 4 + 16 + 8)
    throw decode_error("entropy model file truncated");
  std::size_t pos = 4;
  auto get_u32 = [&bytes, &pos]() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  };
  auto get_f64 = [&bytes, &pos]() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[pos + i]) << (8 * i);
    pos += 8;
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  };
  std::uint32_t version = get_u32();
  if (version != 1)
    throw decode_error("unsupported entropy model version " +
                       std::to_string(version));
  std::uint32_t c_count = get_u32();
  if (c_count == 0 || c_count > (1u << 20))
    throw decode_error("entropy model channel count out of range");
  if (bytes.size() != 4 + 8 + 16 + std::size_t(c_count) * 16 + 8)
    throw decode_error("entropy model file has wrong length");
  ChannelEntropyModel m;
  m.q_min = get_f64();
  m.q_max = get_f64();
  if (!(m.q_min > 0.0 && m.q_min < m.q_max))
    throw decode_error("entropy model q range invalid");
  m.mu.resize(c_count);
  m.log_s.resize(c_count);
  for (std::uint32_t c = 0; c < c_count; ++c) {
    m.mu[c] = get_f64();
    m.log_s[c] = get_f64();
    if (!std::isfinite(m.mu[c]) || !std::isfinite(m.log_s[c]))
      throw decode_error("entropy model parameters non-finite");
  }
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= std::uint64_t(bytes[pos + i]) << (8 * i);
  if (stored != m.id())
    throw decode_error("entropy model file corrupt (content hash mismatch)");
  return m;
}

void save_entropy_model(const std::string& path, const ChannelEntropyModel& m) {
  write_file_bytes(path, serialize_entropy_model(m));
}

ChannelEntropyModel load_entropy_model(const std::string& path) {
  return parse_entropy_model(read_file_bytes(path));
}

}  // namespace rdm
