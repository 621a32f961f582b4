#include "rdm/numerics.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace rdm {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw input_error("tensor shape must have at least one dim");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw input_error("tensor dims must be positive");
    if (d > (std::size_t(1) << 40) / n)
      throw input_error("tensor shape too large");
    n *= d;
  }
  return n;
}

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double silu(double x) { return x * sigmoid(x); }

inline double dsilu(double x) {
  double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

// out[r][o] = b[o] + dot(w[o], in[r]) for all rows; w is [nout][nin].
void dense_forward(const double* in, std::size_t rows, std::size_t nin,
                   const double* w, const double* b, std::size_t nout,
                   double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * nin;
    double* y = out + r * nout;
    for (std::size_t o = 0; o < nout; ++o) {
      const double* wr = w + o * nin;
      double acc = b[o];
      for (std::size_t i = 0; i < nin; ++i) acc += wr[i] * x[i];
      y[o] = acc;
    }
  }
}

}  // namespace

LatentTensor::LatentTensor(std::vector<std::size_t> s)
    : shape(std::move(s)), data(shape_product(shape), 0.0) {}

LatentTensor::LatentTensor(std::vector<std::size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (shape_product(shape) != data.size())
    throw input_error("tensor data length does not match shape");
}

bool same_shape(const LatentTensor& a, const LatentTensor& b) {
  return a.shape == b.shape;
}

void require_finite(const double* p, std::size_t n, const char* ctx) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(p[i]))
      throw input_error(std::string(ctx) + ": non-finite value at index " +
                        std::to_string(i));
}

void require_finite(const LatentTensor& t, const char* ctx) {
  require_finite(t.ptr(), t.size(), ctx);
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), counter_(0) {
  state_ = mix64(mix64(seed) ^ mix64(stream ^ 0xA5A5A5A55A5A5A5Aull));
}

SeededRng SeededRng::derive(std::uint64_t substream) const {
  return SeededRng(seed_, mix64(stream_ ^ mix64(substream ^ 0xC3C3C3C33C3C3C3Cull)));
}

std::uint64_t SeededRng::next_u64() {
  return mix64(state_ + counter_++ * 0x9E3779B97F4A7C15ull);
}

double SeededRng::uniform01() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw input_error("SeededRng::below: n must be positive");
  // 64-bit multiply-shift; bias is ~n/2^64, negligible for desk-scale n.
  return (std::uint64_t)(((__uint128_t)next_u64() * n) >> 64);
}

double SeededRng::normal() {
  double u = uniform01();
  // Keep strictly inside (0, 1); the 0 endpoint has probability 2^-53.
  if (u <= 0.0) u = 0x1.0p-54;
  return inverse_normal_cdf(u);
}

double inverse_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw input_error("inverse_normal_cdf: u must lie in (0, 1)");
  double q = u - 0.5;
  if (std::fabs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
            1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
          1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0 ? -val : val;
}

std::vector<double> q_embed(double q, std::size_t dims, double q_min) {
  if (!(q > 0.0)) throw input_error("q_embed: q must be positive");
  if (dims == 0 || dims % 2 != 0)
    throw input_error("q_embed: dims must be a positive even number");
  if (!(q_min > 0.0)) throw input_error("q_embed: q_min must be positive");
  double c = std::log(std::max(q, q_min) / q_min);
  std::vector<double> out(dims);
  double omega = 1.0;
  for (std::size_t k = 0; k < dims / 2; ++k) {
    out[2 * k] = std::sin(omega * c);
    out[2 * k + 1] = std::cos(omega * c);
    omega *= 2.0;
  }
  return out;
}

DenoiserParams DenoiserParams::init(std::size_t in_dim, std::size_t hidden,
                                    std::size_t out_dim, std::size_t emb_dims,
                                    SeededRng& rng, double q_min) {
  if (in_dim == 0 || hidden == 0 || out_dim == 0)
    throw input_error("denoiser dims must be positive");
  if (emb_dims == 0 || emb_dims % 2 != 0)
    throw input_error("denoiser embedding dims must be positive and even");
  DenoiserParams p;
  p.in_dim = in_dim;
  p.hidden = hidden;
  p.out_dim = out_dim;
  p.emb_dims = emb_dims;
  p.q_min = q_min;
  p.theta.assign(p.param_count(), 0.0);
  auto fill = [&rng, &p](std::size_t off, std::size_t nout, std::size_t nin) {
    double scale = std::sqrt(2.0 / double(nin));
    for (std::size_t i = 0; i < nout * nin; ++i)
      p.theta[off + i] = scale * rng.normal();
  };
  fill(p.off_w1(), hidden, p.net_in());
  fill(p.off_w2(), hidden, hidden);
  fill(p.off_w3(), hidden, hidden);
  fill(p.off_w4(), out_dim, hidden);
  return p;
}

std::size_t DenoiserParams::param_count() const {
  return hidden * net_in() + hidden + hidden * hidden + hidden +
         hidden * hidden + hidden + out_dim * hidden + out_dim;
}

namespace {

struct Acts {
  std::size_t rows = 0;
  std::vector<double> in;        // [rows][net_in]
  std::vector<double> z1, a1;    // [rows][hidden]
  std::vector<double> z2, a2;
  std::vector<double> z3, a3;
  std::vector<double> out;       // [rows][out_dim]
};

std::size_t check_rows(const DenoiserParams& p, const LatentTensor& x) {
  if (x.size() == 0) throw input_error("denoiser input is empty");
  if (x.size() == p.in_dim) return 1;
  if (x.cols() == p.in_dim) return x.rows();
  throw input_error("denoiser input shape does not match network input size");
}

void run_forward(const DenoiserParams& p, const LatentTensor& x, double q,
                 Acts& a) {
  if (!(q > 0.0)) throw input_error("denoiser q must be positive");
  require_finite(x, "denoiser input");
  if (p.theta.size() != p.param_count())
    throw input_error("denoiser parameter vector has wrong length");
  std::size_t rows = check_rows(p, x);
  std::size_t ni = p.net_in(), h = p.hidden, no = p.out_dim;
  std::vector<double> emb = q_embed(q, p.emb_dims, p.q_min);
  a.rows = rows;
  a.in.resize(rows * ni);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = x.ptr() + r * p.in_dim;
    double* dst = a.in.data() + r * ni;
    std::memcpy(dst, src, p.in_dim * sizeof(double));
    std::memcpy(dst + p.in_dim, emb.data(), p.emb_dims * sizeof(double));
  }
  const double* th = p.theta.data();
  a.z1.resize(rows * h);
  a.a1.resize(rows * h);
  dense_forward(a.in.data(), rows, ni, th + p.off_w1(), th + p.off_b1(), h,
                a.z1.data());
  for (std::size_t i = 0; i < rows * h; ++i) a.a1[i] = silu(a.z1[i]);
  a.z2.resize(rows * h);
  a.a2.resize(rows * h);
  dense_forward(a.a1.data(), rows, h, th + p.off_w2(), th + p.off_b2(), h,
                a.z2.data());
  for (std::size_t i = 0; i < rows * h; ++i) a.a2[i] = silu(a.z2[i]);
  a.z3.resize(rows * h);
  a.a3.resize(rows * h);
  dense_forward(a.a2.data(), rows, h, th + p.off_w3(), th + p.off_b3(), h,
                a.z3.data());
  for (std::size_t i = 0; i < rows * h; ++i) a.a3[i] = silu(a.z3[i]);
  a.out.resize(rows * no);
  dense_forward(a.a3.data(), rows, h, th + p.off_w4(), th + p.off_b4(), no,
                a.out.data());
}

// dIn[r][i] += sum_o dOut[r][o]*w[o][i]; dW[o][i] += sum_r dOut[r][o]*in[r][i].
void dense_backward(const double* in, std::size_t rows, std::size_t nin,
                    const double* w, std::size_t nout, const double* dout,
                    double* dw, double* db, double* din) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * nin;
    const double* g = dout + r * nout;
    if (din) {
      double* gi = din + r * nin;
      for (std::size_t i = 0; i < nin; ++i) gi[i] = 0.0;
      for (std::size_t o = 0; o < nout; ++o) {
        const double* wr = w + o * nin;
        double go = g[o];
        for (std::size_t i = 0; i < nin; ++i) gi[i] += go * wr[i];
      }
    }
    for (std::size_t o = 0; o < nout; ++o) {
      double go = g[o];
      db[o] += go;
      double* dwr = dw + o * nin;
      for (std::size_t i = 0; i < nin; ++i) dwr[i] += go * x[i];
    }
  }
}

}  // namespace

LatentTensor denoiser_forward(const DenoiserParams& params,
                              const LatentTensor& x, double q) {
  Acts a;
  run_forward(params, x, q, a);
  std::vector<std::size_t> out_shape;
  if (x.cols() == params.in_dim) {
    out_shape = x.shape;
    out_shape.back() = params.out_dim;
  } else {
    out_shape = {params.out_dim};  // whole tensor was a single sample
  }
  LatentTensor out(out_shape, std::move(a.out));
  require_finite(out, "denoiser output");
  return out;
}

std::pair<double, std::vector<double>> denoiser_backward(
    const DenoiserParams& params, const LatentTensor& x, double q,
    const LatentTensor& target) {
  Acts a;
  run_forward(params, x, q, a);
  require_finite(target, "denoiser target");
  std::size_t rows = a.rows, h = params.hidden, no = params.out_dim;
  std::size_t ni = params.net_in();
  if (target.size() != rows * no)
    throw input_error("denoiser target shape does not match output");
  double n = double(rows * no);
  double loss = 0.0;
  std::vector<double> dout(rows * no);
  for (std::size_t i = 0; i < rows * no; ++i) {
    double r = a.out[i] - target[i];
    loss += r * r;
    dout[i] = 2.0 * r / n;
  }
  loss /= n;

  std::vector<double> grads(params.param_count(), 0.0);
  const double* th = params.theta.data();
  double* g = grads.data();
  std::vector<double> d3(rows * h), d2(rows * h), d1(rows * h);

  dense_backward(a.a3.data(), rows, h, th + params.off_w4(), no, dout.data(),
                 g + params.off_w4(), g + params.off_b4(), d3.data());
  for (std::size_t i = 0; i < rows * h; ++i) d3[i] *= dsilu(a.z3[i]);
  dense_backward(a.a2.data(), rows, h, th + params.off_w3(), h, d3.data(),
                 g + params.off_w3(), g + params.off_b3(), d2.data());
  for (std::size_t i = 0; i < rows * h; ++i) d2[i] *= dsilu(a.z2[i]);
  dense_backward(a.a1.data(), rows, h, th + params.off_w2(), h, d2.data(),
                 g + params.off_w2(), g + params.off_b2(), d1.data());
  for (std::size_t i = 0; i < rows * h; ++i) d1[i] *= dsilu(a.z1[i]);
  dense_backward(a.in.data(), rows, ni, th + params.off_w1(), h, d1.data(),
                 g + params.off_w1(), g + params.off_b1(), nullptr);
  return {loss, std::move(grads)};
}

void adamw_step(OptimizerState& state, DenoiserParams& params,
                const std::vector<double>& grads) {
  std::size_t n = params.theta.size();
  if (grads.size() != n)
    throw input_error("optimizer gradient length does not match parameters");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(grads[i]))
      throw numeric_error("optimizer step rejected: non-finite gradient");
  if (state.m.empty()) state.m.assign(n, 0.0);
  if (state.v.empty()) state.v.assign(n, 0.0);
  if (state.m.size() != n || state.v.size() != n)
    throw input_error("optimizer state does not match parameter count");
  state.step += 1;
  double b1 = state.beta1, b2 = state.beta2;
  double c1 = 1.0 - std::pow(b1, double(state.step));
  double c2 = 1.0 - std::pow(b2, double(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    double gi = grads[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * gi;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * gi * gi;
    double mh = state.m[i] / c1;
    double vh = state.v[i] / c2;
    params.theta[i] -= state.lr * (mh / (std::sqrt(vh) + state.eps) +
                                   state.weight_decay * params.theta[i]);
  }
}

namespace {

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

struct ByteReader {
  const std::uint8_t* p;
  std::size_t n, pos = 0;
  std::uint32_t u32() {
    if (pos + 4 > n) throw decode_error("file truncated reading u32 at byte " +
                                        std::to_string(pos));
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    if (pos + 8 > n) throw decode_error("file truncated reading u64 at byte " +
                                        std::to_string(pos));
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    std::uint64_t v = u64();
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::string str(std::size_t len) {
    if (pos + len > n) throw decode_error("file truncated reading string");
    std::string s(reinterpret_cast<const char*>(p + pos), len);
    pos += len;
    return s;
  }
};

constexpr std::uint32_t kTensorFileVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize_tensors(const std::vector<NamedTensor>& ts) {
  std::vector<std::uint8_t> b;
  b.push_back('R');
  b.push_back('D');
  b.push_back('M');
  b.push_back('C');
  put_u32(b, kTensorFileVersion);
  put_u32(b, std::uint32_t(ts.size()));
  for (const NamedTensor& t : ts) {
    put_u32(b, std::uint32_t(t.name.size()));
    b.insert(b.end(), t.name.begin(), t.name.end());
    put_u32(b, std::uint32_t(t.dims.size()));
    std::size_t n = 1;
    for (std::size_t d : t.dims) {
      put_u64(b, d);
      n *= d;
    }
    if (n != t.data.size())
      throw input_error("tensor '" + t.name + "' dims do not match data");
    for (double d : t.data) put_f64(b, d);
  }
  return b;
}

std::vector<NamedTensor> parse_tensors(const std::vector<std::uint8_t>& bytes) {
  ByteReader r{bytes.data(), bytes.size()};
  if (bytes.size() < 4 || bytes[0] != 'R' || bytes[1] != 'D' ||
      bytes[2] != 'M' || bytes[3] != 'C')
    throw decode_error("not a checkpoint file (bad magic)");
  r.pos = 4;
  std::uint32_t version = r.u32();
  if (version != kTensorFileVersion)
    throw decode_error("unsupported checkpoint version " +
                       std::to_string(version));
  std::uint32_t count = r.u32();
  std::vector<NamedTensor> ts;
  ts.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    std::uint32_t name_len = r.u32();
    t.name = r.str(name_len);
    std::uint32_t rank = r.u32();
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      std::uint64_t dim = r.u64();
      if (dim == 0 || dim > (1ull << 32))
        throw decode_error("checkpoint tensor dim out of range");
      t.dims.push_back(std::size_t(dim));
      n *= std::size_t(dim);
    }
    t.data.resize(n);
    for (std::size_t k = 0; k < n; ++k) t.data[k] = r.f64();
    ts.push_back(std::move(t));
  }
  return ts;
}

void save_tensors(const std::string& path, const std::vector<NamedTensor>& ts) {
  write_file_bytes(path, serialize_tensors(ts));
}

std::vector<NamedTensor> load_tensors(const std::string& path) {
  return parse_tensors(read_file_bytes(path));
}

std::vector<NamedTensor> denoiser_to_tensors(const DenoiserParams& p,
                                             const OptimizerState* opt) {
  std::vector<NamedTensor> ts;
  ts.push_back({"cfg",
                {5},
                {double(p.in_dim), double(p.hidden), double(p.out_dim),
                 double(p.emb_dims), p.q_min}});
  auto push = [&ts, &p](const char* name, std::size_t off, std::size_t nout,
                        std::size_t nin) {
    NamedTensor t;
    t.name = name;
    if (nin == 0)
      t.dims = {nout};
    else
      t.dims = {nout, nin};
    t.data.assign(p.theta.begin() + off,
                  p.theta.begin() + off + nout * (nin == 0 ? 1 : nin));
    ts.push_back(std::move(t));
  };
  push("w1", p.off_w1(), p.hidden, p.net_in());
  push("b1", p.off_b1(), p.hidden, 0);
  push("w2", p.off_w2(), p.hidden, p.hidden);
  push("b2", p.off_b2(), p.hidden, 0);
  push("w3", p.off_w3(), p.hidden, p.hidden);
  push("b3", p.off_b3(), p.hidden, 0);
  push("w4", p.off_w4(), p.out_dim, p.hidden);
  push("b4", p.off_b4(), p.out_dim, 0);
  if (opt && !opt->m.empty()) {
    ts.push_back({"opt_cfg",
                  {6},
                  {opt->lr, opt->weight_decay, opt->beta1, opt->beta2, opt->eps,
                   double(opt->step)}});
    ts.push_back({"opt_m", {opt->m.size()}, opt->m});
    ts.push_back({"opt_v", {opt->v.size()}, opt->v});
  }
  return ts;
}

DenoiserParams denoiser_from_tensors(const std::vector<NamedTensor>& ts,
                                     OptimizerState* opt) {
  auto find = [&ts](const std::string& name) -> const NamedTensor* {
    for (const NamedTensor& t : ts)
      if (t.name == name) return &t;
    return nullptr;
  };
  const NamedTensor* cfg = find("cfg");
  if (!cfg || cfg->data.size() != 5)
    throw decode_error("checkpoint missing denoiser config");
  DenoiserParams p;
  p.in_dim = std::size_t(cfg->data[0]);
  p.hidden = std::size_t(cfg->data[1]);
  p.out_dim = std::size_t(cfg->data[2]);
  p.emb_dims = std::size_t(cfg->data[3]);
  p.q_min = cfg->data[4];
  p.theta.assign(p.param_count(), 0.0);
  auto pull = [&find, &p](const char* name, std::size_t off, std::size_t count) {
    const NamedTensor* t = find(name);
    if (!t || t->data.size() != count)
      throw decode_error(std::string("checkpoint tensor '") + name +
                         "' missing or has wrong size");
    std::copy(t->data.begin(), t->data.end(), p.theta.begin() + off);
  };
  pull("w1", p.off_w1(), p.hidden * p.net_in());
  pull("b1", p.off_b1(), p.hidden);
  pull("w2", p.off_w2(), p.hidden * p.hidden);
  pull("b2", p.off_b2(), p.hidden);
  pull("w3", p.off_w3(), p.hidden * p.hidden);
  pull("b3", p.off_b3(), p.hidden);
  pull("w4", p.off_w4(), p.out_dim * p.hidden);
  pull("b4", p.off_b4(), p.out_dim);
  if (opt) {
    const NamedTensor* oc = find("opt_cfg");
    if (oc && oc->data.size() == 6) {
      opt->lr = oc->data[0];
      opt->weight_decay = oc->data[1];
      opt->beta1 = oc->data[2];
      opt->beta2 = oc->data[3];
      opt->eps = oc->data[4];
      opt->step = std::uint64_t(oc->data[5]);
      const NamedTensor* m = find("opt_m");
      const NamedTensor* v = find("opt_v");
      if (!m || !v || m->data.size() != p.theta.size() ||
          v->data.size() != p.theta.size())
        throw decode_error("checkpoint optimizer state is inconsistent");
      opt->m = m->data;
      opt->v = v->data;
    }
  }
  return p;
}

void save_denoiser(const std::string& path, const DenoiserParams& p,
                   const OptimizerState* opt) {
  save_tensors(path, denoiser_to_tensors(p, opt));
}

DenoiserParams load_denoiser(const std::string& path, OptimizerState* opt) {
  return denoiser_from_tensors(load_tensors(path), opt);
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw input_error("cannot open file: " + path);
  f.seekg(0, std::ios::end);
  std::streamoff len = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len), 0);
  if (len > 0) f.read(reinterpret_cast<char*>(bytes.data()), len);
  if (!f) throw input_error("failed reading file: " + path);
  return bytes;
}

void write_file_bytes(const std::string& path,
                      const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw input_error("cannot create file: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          std::streamsize(bytes.size()));
  if (!f) throw input_error("failed writing file: " + path);
}

}  // namespace rdm
