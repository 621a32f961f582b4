#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rdm/diffusion.hpp"
#include "rdm/entropy.hpp"
#include "rdm/numerics.hpp"
#include "rdm/oracle.hpp"

namespace rdm {

// Grayscale image, row-major, values in [0, 1].
struct ImageTensor {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> px;

  double at(std::size_t y, std::size_t x) const { return px[y * width + x]; }
  double& at(std::size_t y, std::size_t x) { return px[y * width + x]; }
};

ImageTensor load_pgm(const std::string& path);
ImageTensor parse_pgm(const std::vector<std::uint8_t>& bytes);
void save_pgm(const std::string& path, const ImageTensor& img);
std::vector<std::uint8_t> serialize_pgm(const ImageTensor& img);

double image_mse(const ImageTensor& a, const ImageTensor& b);

// 8x8 blockwise orthonormal DCT. The image is padded to block multiples by
// edge replication; latent shape is [blocks_y, blocks_x, 64] with the
// coefficient index as channel. synthesis crops back to the original dims
// and clamps to [0, 1].
constexpr std::size_t kBlock = 8;
LatentTensor analysis_transform(const ImageTensor& img);
ImageTensor synthesis_transform(const LatentTensor& y, std::size_t orig_w,
                                std::size_t orig_h);

// Procedural 64x64 texture patches: a guaranteed mid-band wave plus a few
// random waves and an optional blob, normalized to [0, 1] and quantized to
// 8-bit levels.
ImageTensor gen_texture(SeededRng& rng, std::size_t n = 64);
std::vector<ImageTensor> gen_texture_corpus(std::size_t count, SeededRng rng,
                                            std::size_t n = 64);

// Bitstream container: magic "RDMB", version, q0 as a raw float bit
// pattern, latent dims, original image dims, entropy model id, payload
// byte length, range-coded payload.
struct BitstreamHeader {
  std::uint32_t version = 1;
  double q0 = 0.0;
  std::array<std::uint64_t, 3> dims{};  // blocks_y, blocks_x, 64
  std::uint32_t orig_w = 0;
  std::uint32_t orig_h = 0;
  std::uint64_t model_id = 0;
  std::uint64_t payload_len = 0;
};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 3 * 8 + 4 + 4 + 8 + 8;

BitstreamHeader read_header(const std::vector<std::uint8_t>& bytes);

struct EncodeResult {
  std::vector<std::uint8_t> bytes;
  double bpp = 0.0;  // file bits / original pixel count, header included
};

// q0 must be inside the model's supported range: the coded path never
// falls back to simulation.
EncodeResult encode_image(const ImageTensor& img, double q0,
                          const ChannelEntropyModel& model);
void encode_image_file(const ImageTensor& img, double q0,
                       const ChannelEntropyModel& model,
                       const std::string& path);

// Reads symbols losslessly, then runs the reverse sampler (config.q0 is
// taken from the header). denoiser may be null only when config.N == 0.
ImageTensor decode_image(const std::vector<std::uint8_t>& bytes,
                         const ChannelEntropyModel& model,
                         const DenoiserParams* denoiser,
                         const SamplerConfig& config);
ImageTensor decode_image_file(const std::string& path,
                              const ChannelEntropyModel& model,
                              const DenoiserParams* denoiser,
                              const SamplerConfig& config);

// Training drivers shared by the CLI and the test harnesses.
ChannelEntropyModel train_entropy_on_images(const std::vector<ImageTensor>& imgs,
                                            int epochs, std::uint64_t seed,
                                            double q_min = 0.05,
                                            double q_max = 2.0,
                                            std::ostream* log = nullptr);

struct DenoiserTrainOptions {
  std::size_t steps = 30000;
  std::size_t hidden = 256;
  std::size_t batch = 64;
  std::size_t emb_dims = 16;
  std::uint64_t seed = 0;
  double q_min = 0.05;
  double q_max = 2.0;
  std::ostream* log = nullptr;
  const DenoiserParams* init = nullptr;  // resume from checkpoint
  OptimizerState* opt_io = nullptr;      // in: resume state, out: final state
};
// Staged learning rate over the step budget; corruption uses the entropy
// model's lattice when q is in its range, else simulation.
DenoiserParams train_denoiser_on_rows(const LatentTensor& rows,
                                      const ChannelEntropyModel* model,
                                      const DenoiserTrainOptions& opts);
DenoiserParams train_denoiser_on_images(const std::vector<ImageTensor>& imgs,
                                        const ChannelEntropyModel* model,
                                        const DenoiserTrainOptions& opts);

// Stack all 64-coefficient block rows of a corpus into one [rows, 64] pool.
LatentTensor corpus_latent_rows(const std::vector<ImageTensor>& imgs);

std::vector<std::pair<std::string, ImageTensor>> load_corpus_dir(
    const std::string& dir);

// Rate-distortion sweep: per (image, q0) encode once and decode at N = 0
// and at config.N, one CSV row per decode.
struct RdRow {
  std::string image;
  double q0 = 0.0;
  std::size_t steps = 0;
  double bpp = 0.0;
  double mse = 0.0;
  double psnr = 0.0;
};
std::vector<RdRow> rd_sweep(
    const std::vector<std::pair<std::string, ImageTensor>>& images,
    const std::vector<double>& qs, const ChannelEntropyModel& model,
    const DenoiserParams& denoiser, const SamplerConfig& config,
    unsigned threads = 0);
std::string rd_csv(const std::vector<RdRow>& rows);
std::string rd_svg(const std::vector<RdRow>& rows);

// Sampler ablation harness: corrupt `samples` draws from a 1-D mixture at
// q0, reverse-sample per (beta, form), report W1 to the data distribution
// and MSE to the originals, averaged over `reps` independent repetitions.
// All forms at a fixed rep share data, corruption, and sampler seeds, so
// beta = 0 rows are identical across forms by construction.
struct EvalRow {
  double beta = 0.0;
  NoiseForm form = NoiseForm::gaussian;
  double w1 = 0.0;
  double mse = 0.0;
};
struct EvalSamplerSpec {
  PointMixture dist;
  double q0 = 0.5;
  std::size_t steps = 8;
  std::vector<double> betas;
  std::vector<NoiseForm> forms;
  std::size_t samples = 10000;
  std::size_t reps = 1;
  std::uint64_t seed = 0;
};
std::vector<EvalRow> eval_sampler(const EvalSamplerSpec& spec,
                                  const DenoiserFn& denoiser,
                                  const ChannelEntropyModel* model,
                                  unsigned threads = 0);
std::string eval_csv(const std::vector<EvalRow>& rows);

// Fixed worker pool over an atomic index; item order and results are
// independent of the thread count. threads = 0 uses the hardware count.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace rdm
