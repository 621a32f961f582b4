#include "rdm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "rdm/quantizer.hpp"

namespace rdm {

namespace {

constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamQ = 2;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamBatch = 4;
constexpr std::uint64_t kStreamFit = 5;
constexpr std::uint64_t kStreamEvalData = 6;
constexpr std::uint64_t kStreamEvalRef = 7;
constexpr std::uint64_t kStreamEvalNoise = 8;

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
  const std::vector<std::uint8_t>& b;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > b.size())
      throw decode_error("bitstream truncated at byte " + std::to_string(pos));
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    std::uint64_t v = u64();
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// PGM

namespace {

// Reads one whitespace-delimited token, skipping '#' comments.
std::string pgm_token(const std::vector<std::uint8_t>& b, std::size_t& pos) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos])) tok.push_back(char(b[pos++]));
  if (tok.empty()) throw input_error("malformed pgm: unexpected end of header");
  return tok;
}

std::size_t pgm_number(const std::vector<std::uint8_t>& b, std::size_t& pos) {
  std::string tok = pgm_token(b, pos);
  for (char c : tok)
    if (!std::isdigit((unsigned char)c))
      throw input_error("malformed pgm: expected number, got '" + tok + "'");
  return std::stoull(tok);
}

}  // namespace

ImageTensor parse_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  if (pgm_token(bytes, pos) != "P5")
    throw input_error("malformed pgm: expected P5 magic");
  std::size_t w = pgm_number(bytes, pos);
  std::size_t h = pgm_number(bytes, pos);
  std::size_t maxval = pgm_number(bytes, pos);
  if (w == 0 || h == 0) throw input_error("malformed pgm: zero dimensions");
  if (maxval != 255)
    throw input_error("unsupported pgm maxval " + std::to_string(maxval) +
                      " (only 255 is handled)");
  pos += 1;  // single whitespace byte after maxval
  if (pos + w * h > bytes.size())
    throw input_error("malformed pgm: pixel data truncated");
  ImageTensor img;
  img.width = w;
  img.height = h;
  img.px.resize(w * h);
  for (std::size_t i = 0; i < w * h; ++i) img.px[i] = bytes[pos + i] / 255.0;
  return img;
}

ImageTensor load_pgm(const std::string& path) {
  return parse_pgm(read_file_bytes(path));
}

std::vector<std::uint8_t> serialize_pgm(const ImageTensor& img) {
  if (img.width == 0 || img.height == 0 ||
      img.px.size() != img.width * img.height)
    throw input_error("image dims do not match pixel count");
  std::string header = "P5\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.px.size());
  for (double v : img.px) {
    double c = std::clamp(v, 0.0, 1.0);
    out.push_back(std::uint8_t(std::lround(c * 255.0)));
  }
  return out;
}

void save_pgm(const std::string& path, const ImageTensor& img) {
  write_file_bytes(path, serialize_pgm(img));
}

double image_mse(const ImageTensor& a, const ImageTensor& b) {
  if (a.width != b.width || a.height != b.height)
    throw input_error("image size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.px.size(); ++i) {
    double d = a.px[i] - b.px[i];
    acc += d * d;
  }
  return acc / double(a.px.size());
}

// ---------------------------------------------------------------------------
// Blockwise DCT

namespace {

struct DctBasis {
  double t[kBlock][kBlock];  // t[u][x], orthonormal rows
  DctBasis() {
    for (std::size_t u = 0; u < kBlock; ++u) {
      double s = (u == 0) ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
      for (std::size_t x = 0; x < kBlock; ++x)
        t[u][x] = s * std::cos((2.0 * x + 1.0) * u * std::numbers::pi /
                               (2.0 * kBlock));
    }
  }
};

const DctBasis& dct_basis() {
  static const DctBasis basis;
  return basis;
}

}  // namespace

LatentTensor analysis_transform(const ImageTensor& img) {
  if (img.width == 0 || img.height == 0 ||
      img.px.size() != img.width * img.height)
    throw input_error("image dims do not match pixel count");
  const DctBasis& basis = dct_basis();
  std::size_t bx = (img.width + kBlock - 1) / kBlock;
  std::size_t by = (img.height + kBlock - 1) / kBlock;
  LatentTensor out({by, bx, kBlock * kBlock});
  double block[kBlock][kBlock];
  double tmp[kBlock][kBlock];
  for (std::size_t byi = 0; byi < by; ++byi) {
    for (std::size_t bxi = 0; bxi < bx; ++bxi) {
      for (std::size_t y = 0; y < kBlock; ++y) {
        std::size_t sy = std::min(byi * kBlock + y, img.height - 1);
        for (std::size_t x = 0; x < kBlock; ++x) {
          std::size_t sx = std::min(bxi * kBlock + x, img.width - 1);
          block[y][x] = img.at(sy, sx);
        }
      }
      // tmp = T * block, coef = tmp * T^t
      for (std::size_t u = 0; u < kBlock; ++u)
        for (std::size_t x = 0; x < kBlock; ++x) {
          double acc = 0.0;
          for (std::size_t y = 0; y < kBlock; ++y)
            acc += basis.t[u][y] * block[y][x];
          tmp[u][x] = acc;
        }
      double* dst = &out.data[(byi * bx + bxi) * kBlock * kBlock];
      for (std::size_t u = 0; u < kBlock; ++u)
        for (std::size_t v = 0; v < kBlock; ++v) {
          double acc = 0.0;
          for (std::size_t x = 0; x < kBlock; ++x)
            acc += tmp[u][x] * basis.t[v][x];
          dst[u * kBlock + v] = acc;
        }
    }
  }
  return out;
}

ImageTensor synthesis_transform(const LatentTensor& y, std::size_t orig_w,
                                std::size_t orig_h) {
  if (y.shape.size() != 3 || y.shape[2] != kBlock * kBlock)
    throw input_error("latent must have shape [blocks_y, blocks_x, 64]");
  std::size_t by = y.shape[0], bx = y.shape[1];
  if (orig_w == 0 || orig_h == 0 || orig_w > bx * kBlock ||
      orig_h > by * kBlock || (orig_w + kBlock - 1) / kBlock != bx ||
      (orig_h + kBlock - 1) / kBlock != by)
    throw input_error("image dims inconsistent with latent block grid");
  const DctBasis& basis = dct_basis();
  ImageTensor img;
  img.width = orig_w;
  img.height = orig_h;
  img.px.assign(orig_w * orig_h, 0.0);
  double tmp[kBlock][kBlock];
  for (std::size_t byi = 0; byi < by; ++byi) {
    for (std::size_t bxi = 0; bxi < bx; ++bxi) {
      const double* src = &y.data[(byi * bx + bxi) * kBlock * kBlock];
      // tmp = T^t * coef, block = tmp * T
      for (std::size_t yy = 0; yy < kBlock; ++yy)
        for (std::size_t v = 0; v < kBlock; ++v) {
          double acc = 0.0;
          for (std::size_t u = 0; u < kBlock; ++u)
            acc += basis.t[u][yy] * src[u * kBlock + v];
          tmp[yy][v] = acc;
        }
      for (std::size_t yy = 0; yy < kBlock; ++yy) {
        std::size_t py = byi * kBlock + yy;
        if (py >= orig_h) continue;
        for (std::size_t xx = 0; xx < kBlock; ++xx) {
          std::size_t px = bxi * kBlock + xx;
          if (px >= orig_w) continue;
          double acc = 0.0;
          for (std::size_t v = 0; v < kBlock; ++v)
            acc += tmp[yy][v] * basis.t[v][xx];
          img.at(py, px) = std::clamp(acc, 0.0, 1.0);
        }
      }
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// Texture corpus

ImageTensor gen_texture(SeededRng& rng, std::size_t n) {
  if (n == 0) throw input_error("texture size must be positive");
  ImageTensor img;
  img.width = n;
  img.height = n;
  img.px.assign(n * n, 0.0);
  constexpr double tau = 2.0 * std::numbers::pi;
  auto add_wave = [&](double fy, double fx, double amp, double phase) {
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x)
        img.at(y, x) += amp * std::cos(tau * (fy * (double(y) / n) +
                                              fx * (double(x) / n)) +
                                       phase);
  };
  // One wave is always in the mid band so every patch has structure the
  // block transform resolves.
  {
    double fy = rng.uniform(1.5, 4.0);
    double fx = rng.uniform(1.5, 4.0);
    double amp = rng.uniform(0.5, 1.0);
    double phase = rng.uniform(0.0, tau);
    add_wave(fy, fx, amp, phase);
  }
  std::size_t extra = 2 + rng.below(4);
  for (std::size_t i = 0; i < extra; ++i) {
    double fy = rng.uniform(0.5, 6.0);
    double fx = rng.uniform(0.5, 6.0);
    double base = rng.uniform(0.2, 1.0);
    double falloff = rng.uniform(0.8, 1.5);
    double amp = base / std::pow(std::hypot(fy, fx), falloff);
    double phase = rng.uniform(0.0, tau);
    add_wave(fy, fx, amp, phase);
  }
  if (rng.uniform01() < 0.5) {
    double cy = rng.uniform(0.2, 0.8);
    double cx = rng.uniform(0.2, 0.8);
    double s = rng.uniform(0.05, 0.25);
    double amp = rng.uniform(-1.0, 1.0);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        double dy = double(y) / n - cy, dx = double(x) / n - cx;
        img.at(y, x) += amp * std::exp(-(dy * dy + dx * dx) / (2.0 * s * s));
      }
  }
  double lo = *std::min_element(img.px.begin(), img.px.end());
  double hi = *std::max_element(img.px.begin(), img.px.end());
  double inv = 1.0 / std::max(hi - lo, 1e-9);
  double span = rng.uniform(0.6, 1.0);
  double base = rng.uniform(0.0, 1.0 - span);
  for (double& v : img.px) {
    v = base + span * ((v - lo) * inv);
    v = std::lround(v * 255.0) / 255.0;  // land on representable gray levels
  }
  return img;
}

std::vector<ImageTensor> gen_texture_corpus(std::size_t count, SeededRng rng,
                                            std::size_t n) {
  std::vector<ImageTensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SeededRng img_rng = rng.derive(i);
    out.push_back(gen_texture(img_rng, n));
  }
  return out;
}

std::vector<std::pair<std::string, ImageTensor>> load_corpus_dir(
    const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw input_error("corpus directory not found: " + dir);
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw input_error("no .pgm files in " + dir);
  std::vector<std::pair<std::string, ImageTensor>> out;
  out.reserve(paths.size());
  for (const auto& p : paths)
    out.emplace_back(p.stem().string(), load_pgm(p.string()));
  return out;
}

// ---------------------------------------------------------------------------
// Bitstream

namespace {

constexpr char kMagic[4] = {'R', 'D', 'M', 'B'};
constexpr std::uint32_t kBitstreamVersion = 1;

std::vector<FrequencyTable> channel_tables(const ChannelEntropyModel& model,
                                           double q) {
  std::vector<FrequencyTable> tables;
  tables.reserve(model.channels());
  for (std::size_t c = 0; c < model.channels(); ++c)
    tables.push_back(FrequencyTable::from_model(model, c, q));
  return tables;
}

}  // namespace

BitstreamHeader read_header(const std::vector<std::uint8_t>& bytes) {
  ByteReader r{bytes};
  r.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw decode_error("not a codec bitstream (bad magic)");
  r.pos = 4;
  BitstreamHeader h;
  h.version = r.u32();
  if (h.version != kBitstreamVersion)
    throw decode_error("unsupported bitstream version " +
                       std::to_string(h.version));
  h.q0 = r.f64();
  for (auto& d : h.dims) d = r.u64();
  h.orig_w = r.u32();
  h.orig_h = r.u32();
  h.model_id = r.u64();
  h.payload_len = r.u64();
  if (!std::isfinite(h.q0) || h.q0 <= 0.0)
    throw decode_error("bitstream header has invalid scale");
  if (h.dims[2] != kBlock * kBlock || h.dims[0] == 0 || h.dims[1] == 0)
    throw decode_error("bitstream header has invalid latent dims");
  if (h.orig_w == 0 || h.orig_h == 0 ||
      (h.orig_w + kBlock - 1) / kBlock != h.dims[1] ||
      (h.orig_h + kBlock - 1) / kBlock != h.dims[0])
    throw decode_error("bitstream header image dims inconsistent with grid");
  return h;
}

EncodeResult encode_image(const ImageTensor& img, double q0,
                          const ChannelEntropyModel& model) {
  if (!model.supports(q0))
    throw unsupported_rate_error(
        "scale " + std::to_string(q0) +
        " is outside the entropy model's coded range [" +
        std::to_string(model.q_min) + ", " + std::to_string(model.q_max) +
        "]");
  if (model.channels() != kBlock * kBlock)
    throw input_error("entropy model must have 64 channels for image coding");
  LatentTensor lat = analysis_transform(img);
  std::vector<std::int32_t> symbols = symbolize(lat, q0);
  std::vector<FrequencyTable> tables = channel_tables(model, q0);
  Bitstream payload = range_encode(
      symbols, [&](std::size_t pos) -> const FrequencyTable& {
        return tables[pos % tables.size()];
      });

  EncodeResult res;
  res.bytes.reserve(kHeaderBytes + payload.bytes.size());
  for (char c : kMagic) res.bytes.push_back(std::uint8_t(c));
  put_u32(res.bytes, kBitstreamVersion);
  put_f64(res.bytes, q0);
  for (std::size_t d : lat.shape) put_u64(res.bytes, d);
  put_u32(res.bytes, std::uint32_t(img.width));
  put_u32(res.bytes, std::uint32_t(img.height));
  put_u64(res.bytes, model.id());
  put_u64(res.bytes, payload.bytes.size());
  res.bytes.insert(res.bytes.end(), payload.bytes.begin(),
                   payload.bytes.end());
  res.bpp = double(res.bytes.size()) * 8.0 / double(img.width * img.height);
  return res;
}

void encode_image_file(const ImageTensor& img, double q0,
                       const ChannelEntropyModel& model,
                       const std::string& path) {
  write_file_bytes(path, encode_image(img, q0, model).bytes);
}

ImageTensor decode_image(const std::vector<std::uint8_t>& bytes,
                         const ChannelEntropyModel& model,
                         const DenoiserParams* denoiser,
                         const SamplerConfig& config) {
  BitstreamHeader h = read_header(bytes);
  if (h.model_id != model.id())
    throw input_error(
        "entropy model mismatch: bitstream was coded with a different model "
        "(refusing to decode)");
  std::size_t avail = bytes.size() - kHeaderBytes;
  if (h.payload_len > avail)
    throw decode_error("bitstream truncated: header declares " +
                       std::to_string(h.payload_len) + " payload bytes, " +
                       std::to_string(avail) + " present");
  if (h.payload_len < avail)
    throw decode_error("bitstream has trailing bytes past the payload");
  if (config.N > 0 && denoiser == nullptr)
    throw input_error("reverse sampling requested but no denoiser given");

  Bitstream payload;
  payload.bytes.assign(bytes.begin() + kHeaderBytes, bytes.end());
  std::size_t count = h.dims[0] * h.dims[1] * h.dims[2];
  std::vector<FrequencyTable> tables = channel_tables(model, h.q0);
  std::vector<std::int32_t> symbols = range_decode(
      payload,
      [&](std::size_t pos) -> const FrequencyTable& {
        return tables[pos % tables.size()];
      },
      count);
  LatentTensor lat =
      desymbolize(symbols, {h.dims[0], h.dims[1], h.dims[2]}, h.q0);
  if (config.N > 0) {
    SamplerConfig cfg = config;
    cfg.q0 = h.q0;
    lat = reverse_sample(lat, cfg, make_denoiser_fn(*denoiser), &model);
  }
  return synthesis_transform(lat, h.orig_w, h.orig_h);
}

ImageTensor decode_image_file(const std::string& path,
                              const ChannelEntropyModel& model,
                              const DenoiserParams* denoiser,
                              const SamplerConfig& config) {
  return decode_image(read_file_bytes(path), model, denoiser, config);
}

// ---------------------------------------------------------------------------
// Training drivers

LatentTensor corpus_latent_rows(const std::vector<ImageTensor>& imgs) {
  if (imgs.empty()) throw input_error("empty corpus");
  std::vector<double> rows;
  std::size_t count = 0;
  for (const ImageTensor& img : imgs) {
    LatentTensor lat = analysis_transform(img);
    rows.insert(rows.end(), lat.data.begin(), lat.data.end());
    count += lat.size() / (kBlock * kBlock);
  }
  return LatentTensor({count, kBlock * kBlock}, std::move(rows));
}

ChannelEntropyModel train_entropy_on_images(const std::vector<ImageTensor>& imgs,
                                            int epochs, std::uint64_t seed,
                                            double q_min, double q_max,
                                            std::ostream* log) {
  if (imgs.empty()) throw input_error("empty corpus");
  std::vector<LatentTensor> lats;
  lats.reserve(imgs.size());
  for (const ImageTensor& img : imgs) lats.push_back(analysis_transform(img));
  FitOptions opts;
  opts.epochs = epochs;
  opts.q_min = q_min;
  opts.q_max = q_max;
  opts.log = log;
  SeededRng rng(seed, kStreamFit);
  return fit_entropy_model(lats, opts, rng);
}

DenoiserParams train_denoiser_on_rows(const LatentTensor& rows,
                                      const ChannelEntropyModel* model,
                                      const DenoiserTrainOptions& opts) {
  if (rows.shape.size() != 2 || rows.rows() == 0)
    throw input_error("training data must be a nonempty [rows, dim] tensor");
  std::size_t dim = rows.cols();
  DenoiserParams params;
  if (opts.init) {
    params = *opts.init;
    if (params.in_dim != dim)
      throw input_error("checkpoint input width does not match training data");
  } else {
    SeededRng init_rng(opts.seed, kStreamInit);
    params = DenoiserParams::init(dim, opts.hidden, dim, opts.emb_dims,
                                  init_rng, opts.q_min);
  }
  OptimizerState local_opt;
  OptimizerState& opt = opts.opt_io ? *opts.opt_io : local_opt;
  SeededRng q_rng(opts.seed, kStreamQ);
  SeededRng noise_rng(opts.seed, kStreamNoise);
  SeededRng batch_rng(opts.seed, kStreamBatch);

  std::size_t nrows = rows.rows();
  std::size_t batch = std::min(opts.batch, nrows);
  LatentTensor y0({batch, dim});
  double loss_acc = 0.0;
  std::size_t loss_n = 0;
  for (std::size_t step = 0; step < opts.steps; ++step) {
    double frac = double(step) / double(opts.steps);
    if (frac < 0.5)
      opt.lr = 1e-3;
    else if (frac < 0.8)
      opt.lr = 2e-4;
    else if (frac < 0.95)
      opt.lr = 5e-5;
    else
      opt.lr = 1e-5;
    for (std::size_t b = 0; b < batch; ++b) {
      std::size_t r = batch_rng.below(nrows);
      std::copy_n(&rows.data[r * dim], dim, &y0.data[b * dim]);
    }
    loss_acc += train_denoiser_step(params, opt, y0, model, q_rng, noise_rng,
                                    opts.q_min, opts.q_max);
    ++loss_n;
    if (opts.log && ((step + 1) % 1000 == 0 || step + 1 == opts.steps)) {
      *opts.log << "denoiser step " << (step + 1) << "/" << opts.steps
                << " lr " << opt.lr << " loss " << (loss_acc / double(loss_n))
                << "\n";
      loss_acc = 0.0;
      loss_n = 0;
    }
  }
  return params;
}

DenoiserParams train_denoiser_on_images(const std::vector<ImageTensor>& imgs,
                                        const ChannelEntropyModel* model,
                                        const DenoiserTrainOptions& opts) {
  return train_denoiser_on_rows(corpus_latent_rows(imgs), model, opts);
}

// ---------------------------------------------------------------------------
// Rate-distortion sweep

std::vector<RdRow> rd_sweep(
    const std::vector<std::pair<std::string, ImageTensor>>& images,
    const std::vector<double>& qs, const ChannelEntropyModel& model,
    const DenoiserParams& denoiser, const SamplerConfig& config,
    unsigned threads) {
  if (images.empty() || qs.empty())
    throw input_error("rd sweep needs at least one image and one scale");
  struct Task {
    std::size_t img;
    double q0;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < images.size(); ++i)
    for (double q : qs) tasks.push_back({i, q});
  std::size_t rows_per_task = config.N > 0 ? 2 : 1;
  std::vector<RdRow> rows(tasks.size() * rows_per_task);

  parallel_for(tasks.size(), threads, [&](std::size_t t) {
    const auto& [name, img] = images[tasks[t].img];
    double q0 = tasks[t].q0;
    EncodeResult enc = encode_image(img, q0, model);

    SamplerConfig direct = config;
    direct.N = 0;
    ImageTensor rec0 = decode_image(enc.bytes, model, &denoiser, direct);
    double mse0 = image_mse(img, rec0);
    RdRow& r0 = rows[t * rows_per_task];
    r0 = {name, q0, 0, enc.bpp, mse0,
          mse0 > 0.0 ? 10.0 * std::log10(1.0 / mse0)
                     : std::numeric_limits<double>::infinity()};
    if (rows_per_task == 2) {
      ImageTensor recN = decode_image(enc.bytes, model, &denoiser, config);
      double mseN = image_mse(img, recN);
      rows[t * rows_per_task + 1] =
          {name, q0, config.N, enc.bpp, mseN,
           mseN > 0.0 ? 10.0 * std::log10(1.0 / mseN)
                      : std::numeric_limits<double>::infinity()};
    }
  });
  return rows;
}

std::string rd_csv(const std::vector<RdRow>& rows) {
  std::ostringstream os;
  os << "image,q0,steps,bpp,mse,psnr\n";
  os.precision(10);
  for (const RdRow& r : rows)
    os << r.image << "," << r.q0 << "," << r.steps << "," << r.bpp << ","
       << r.mse << "," << r.psnr << "\n";
  return os.str();
}

std::string rd_svg(const std::vector<RdRow>& rows) {
  if (rows.empty()) throw input_error("no rows to plot");
  double bmin = rows[0].bpp, bmax = rows[0].bpp;
  double pmin = rows[0].psnr, pmax = rows[0].psnr;
  for (const RdRow& r : rows) {
    if (!std::isfinite(r.psnr)) continue;
    bmin = std::min(bmin, r.bpp);
    bmax = std::max(bmax, r.bpp);
    pmin = std::min(pmin, r.psnr);
    pmax = std::max(pmax, r.psnr);
  }
  if (bmax <= bmin) bmax = bmin + 1.0;
  if (pmax <= pmin) pmax = pmin + 1.0;
  const double w = 640, h = 480, ml = 60, mr = 20, mt = 20, mb = 45;
  auto sx = [&](double b) {
    return ml + (b - bmin) / (bmax - bmin) * (w - ml - mr);
  };
  auto sy = [&](double p) {
    return h - mb - (p - pmin) / (pmax - pmin) * (h - mt - mb);
  };
  // Mean psnr per (steps, q0), one polyline per step count.
  std::map<std::size_t, std::map<double, std::pair<double, std::size_t>>> agg;
  for (const RdRow& r : rows)
    if (std::isfinite(r.psnr)) {
      auto& cell = agg[r.steps][r.bpp];
      cell.first += r.psnr;
      cell.second += 1;
    }
  const char* colors[] = {"#31708f", "#c0392b", "#27ae60", "#8e44ad"};
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
     << "\">\n";
  os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#fff\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << (h - mb) << "\" x2=\"" << (w - mr)
     << "\" y2=\"" << (h - mb) << "\" stroke=\"#333\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << (h - mb) << "\" stroke=\"#333\"/>\n";
  os << "<text x=\"" << (w / 2) << "\" y=\"" << (h - 10)
     << "\" text-anchor=\"middle\" font-size=\"14\">bits per pixel</text>\n";
  os << "<text x=\"15\" y=\"" << (h / 2)
     << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 15 "
     << (h / 2) << ")\">psnr (db)</text>\n";
  std::size_t ci = 0;
  for (const auto& [steps, curve] : agg) {
    const char* color = colors[ci % 4];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [bpp, cell] : curve)
      os << sx(bpp) << "," << sy(cell.first / double(cell.second)) << " ";
    os << "\"/>\n";
    for (const auto& [bpp, cell] : curve)
      os << "<circle cx=\"" << sx(bpp) << "\" cy=\""
         << sy(cell.first / double(cell.second)) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
    os << "<text x=\"" << (w - mr - 5) << "\" y=\"" << (mt + 15 + 18 * ci)
       << "\" text-anchor=\"end\" font-size=\"13\" fill=\"" << color
       << "\">steps=" << steps << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Sampler ablation

std::vector<EvalRow> eval_sampler(const EvalSamplerSpec& spec,
                                  const DenoiserFn& denoiser,
                                  const ChannelEntropyModel* model,
                                  unsigned threads) {
  if (spec.dist.dim() != 1)
    throw input_error("sampler ablation runs on 1-d mixtures");
  if (spec.betas.empty() || spec.forms.empty())
    throw input_error("sampler ablation needs betas and noise forms");
  if (spec.samples == 0 || spec.reps == 0)
    throw input_error("samples and reps must be positive");
  for (NoiseForm f : spec.forms)
    if (f == NoiseForm::entropy_model && model == nullptr)
      throw input_error("entropy noise form needs an entropy model");

  std::size_t B = spec.betas.size(), F = spec.forms.size(), R = spec.reps;
  std::size_t M = spec.samples;
  std::vector<double> w1s(B * F * R), mses(B * F * R);

  parallel_for(B * F * R, threads, [&](std::size_t t) {
    std::size_t rep = t % R;
    std::size_t fi = (t / R) % F;
    std::size_t bi = t / (R * F);

    // Data, reference, and sampler streams depend only on the rep, so every
    // (beta, form) cell of one rep sees identical draws.
    SeededRng data_rng = SeededRng(spec.seed, kStreamEvalData).derive(rep);
    SeededRng ref_rng = SeededRng(spec.seed, kStreamEvalRef).derive(rep);
    std::uint64_t sampler_seed =
        SeededRng(spec.seed, kStreamEvalNoise).derive(rep).next_u64();

    LatentTensor x0({M, 1});
    for (std::size_t i = 0; i < M; ++i)
      x0.data[i] = sample_point_mixture(spec.dist, data_rng)[0];
    std::vector<double> ref(M);
    for (std::size_t i = 0; i < M; ++i)
      ref[i] = sample_point_mixture(spec.dist, ref_rng)[0];

    // Simulated corruption rather than the lattice: atoms that sit on the
    // lattice would pass through quantization untouched and leave the
    // sampler nothing to do.
    LatentTensor y = forward_compress(x0, spec.q0, nullptr, data_rng);
    SamplerConfig cfg;
    cfg.q0 = spec.q0;
    cfg.N = spec.steps;
    cfg.beta = spec.betas[bi];
    cfg.noise = spec.forms[fi];
    cfg.seed = sampler_seed;
    LatentTensor out = reverse_sample(y, cfg, denoiser, model);

    double w1 = w1_distance_1d(out.data, ref);
    double mse = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      double d = out.data[i] - x0.data[i];
      mse += d * d;
    }
    w1s[t] = w1;
    mses[t] = mse / double(M);
  });

  std::vector<EvalRow> rows;
  rows.reserve(B * F);
  for (std::size_t bi = 0; bi < B; ++bi)
    for (std::size_t fi = 0; fi < F; ++fi) {
      double w1 = 0.0, mse = 0.0;
      for (std::size_t rep = 0; rep < R; ++rep) {
        w1 += w1s[(bi * F + fi) * R + rep];
        mse += mses[(bi * F + fi) * R + rep];
      }
      rows.push_back({spec.betas[bi], spec.forms[fi], w1 / double(R),
                      mse / double(R)});
    }
  return rows;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  os << "beta,form,w1,mse\n";
  os.precision(10);
  for (const EvalRow& r : rows)
    os << r.beta << "," << to_string(r.form) << "," << r.w1 << "," << r.mse
       << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Worker pool

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned count = unsigned(std::min<std::size_t>(threads, n));
  pool.reserve(count);
  for (unsigned i = 0; i < count; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace rdm
