#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdm {

// Error taxonomy. Everything user-facing derives from rdm::error so the CLI
// can catch one type and print a one-line diagnostic.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct input_error : error {
  using error::error;
};
struct range_error : error {
  using error::error;
};
struct unsupported_rate_error : error {
  using error::error;
};
struct decode_error : error {
  using error::error;
};
struct numeric_error : error {
  using error::error;
};

// Dense row-major tensor of doubles. The last dim is the feature/channel
// axis; leading dims are batch. Invariant: data.size() == product(shape).
struct LatentTensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  LatentTensor() = default;
  explicit LatentTensor(std::vector<std::size_t> s);
  LatentTensor(std::vector<std::size_t> s, std::vector<double> d);

  std::size_t size() const { return data.size(); }
  std::size_t cols() const { return shape.empty() ? 0 : shape.back(); }
  std::size_t rows() const {
    std::size_t c = cols();
    return c == 0 ? 0 : data.size() / c;
  }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
};

bool same_shape(const LatentTensor& a, const LatentTensor& b);
// Throws input_error naming `ctx` if any element is NaN/Inf.
void require_finite(const LatentTensor& t, const char* ctx);
void require_finite(const double* p, std::size_t n, const char* ctx);

// Counter-based RNG: every output is a pure function of (seed, stream,
// counter), so identical construction replays identically and derived
// streams never perturb each other.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent stream keyed by (this stream, substream).
  SeededRng derive(std::uint64_t substream) const;

  std::uint64_t next_u64();
  // [0, 1), 53-bit resolution.
  double uniform01();
  // [lo, hi)
  double uniform(double lo, double hi);
  // Integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n);
  // Standard normal via the AS241 inverse CDF: consumes exactly one
  // uniform per draw, which keeps all noise forms aligned on one
  // underlying uniform stream.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_, stream_, state_, counter_;
};

// Inverse standard-normal CDF (Wichura AS241, double precision).
double inverse_normal_cdf(double u);

// Fourier features of c = ln(max(q, q_min)/q_min) with frequencies
// 1, 2, 4, ...: [sin(c), cos(c), sin(2c), cos(2c), ...]. dims must be even.
std::vector<double> q_embed(double q, std::size_t dims, double q_min);

// Four dense layers with SiLU between them; input is the flattened latent
// row concatenated with q_embed(q). All parameters live in one contiguous
// vector so the optimizer and serialization see a single flat array.
struct DenoiserParams {
  std::size_t in_dim = 0;
  std::size_t hidden = 256;
  std::size_t out_dim = 0;
  std::size_t emb_dims = 16;
  double q_min = 0.05;
  std::vector<double> theta;

  static DenoiserParams init(std::size_t in_dim, std::size_t hidden,
                             std::size_t out_dim, std::size_t emb_dims,
                             SeededRng& rng, double q_min = 0.05);

  std::size_t net_in() const { return in_dim + emb_dims; }
  std::size_t param_count() const;
  // Offsets into theta.
  std::size_t off_w1() const { return 0; }
  std::size_t off_b1() const { return hidden * net_in(); }
  std::size_t off_w2() const { return off_b1() + hidden; }
  std::size_t off_b2() const { return off_w2() + hidden * hidden; }
  std::size_t off_w3() const { return off_b2() + hidden; }
  std::size_t off_b3() const { return off_w3() + hidden * hidden; }
  std::size_t off_w4() const { return off_b3() + hidden; }
  std::size_t off_b4() const { return off_w4() + out_dim * hidden; }
};

// x rows are samples of in_dim features; returns same shape with out_dim
// features per row (in_dim == out_dim for the denoiser use).
LatentTensor denoiser_forward(const DenoiserParams& params,
                              const LatentTensor& x, double q);

// Mean squared error over all output elements plus exact analytic gradients
// laid out like params.theta.
std::pair<double, std::vector<double>> denoiser_backward(
    const DenoiserParams& params, const LatentTensor& x, double q,
    const LatentTensor& target);

struct OptimizerState {
  double lr = 1e-3;
  double weight_decay = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m, v;
};

// One decoupled-weight-decay Adam step. Rejects non-finite gradients
// without touching params or state.
void adamw_step(OptimizerState& state, DenoiserParams& params,
                const std::vector<double>& grads);

// Named-tensor container file: magic "RDMC", version, then per tensor
// name, dims and raw little-endian doubles. Round-trips bit-identically.
struct NamedTensor {
  std::string name;
  std::vector<std::size_t> dims;
  std::vector<double> data;
};

std::vector<std::uint8_t> serialize_tensors(const std::vector<NamedTensor>& ts);
std::vector<NamedTensor> parse_tensors(const std::vector<std::uint8_t>& bytes);
void save_tensors(const std::string& path, const std::vector<NamedTensor>& ts);
std::vector<NamedTensor> load_tensors(const std::string& path);

// Denoiser (+ optional optimizer moments for resuming) as a checkpoint.
std::vector<NamedTensor> denoiser_to_tensors(const DenoiserParams& p,
                                             const OptimizerState* opt = nullptr);
DenoiserParams denoiser_from_tensors(const std::vector<NamedTensor>& ts,
                                     OptimizerState* opt = nullptr);
void save_denoiser(const std::string& path, const DenoiserParams& p,
                   const OptimizerState* opt = nullptr);
DenoiserParams load_denoiser(const std::string& path,
                             OptimizerState* opt = nullptr);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path,
                      const std::vector<std::uint8_t>& bytes);

}  // namespace rdm
