#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rdm/pipeline.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size())
      throw rdm::input_error("bad number in list: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw rdm::input_error("empty number list");
  return out;
}

std::vector<rdm::NoiseForm> parse_form_list(const std::string& s) {
  std::vector<rdm::NoiseForm> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(rdm::noise_form_from_string(item));
  }
  if (out.empty()) throw rdm::input_error("empty noise form list");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  rdm::write_file_bytes(path,
                        std::vector<std::uint8_t>(text.begin(), text.end()));
}

// Either a directory of .pgm files or a procedurally generated batch.
struct CorpusArgs {
  std::string dir;
  std::size_t gen_count = 0;
  std::uint64_t gen_seed = 1;

  void attach(CLI::App* sub) {
    sub->add_option("--corpus", dir, "directory of .pgm training images");
    sub->add_option("--gen-textures", gen_count,
                    "generate this many 64x64 texture patches instead");
    sub->add_option("--texture-seed", gen_seed,
                    "seed for --gen-textures (default 1)");
  }
  std::vector<std::pair<std::string, rdm::ImageTensor>> load() const {
    if (!dir.empty() && gen_count > 0)
      throw rdm::input_error("--corpus and --gen-textures are exclusive");
    if (!dir.empty()) return rdm::load_corpus_dir(dir);
    if (gen_count == 0)
      throw rdm::input_error("need --corpus DIR or --gen-textures N");
    auto imgs = rdm::gen_texture_corpus(gen_count, rdm::SeededRng(gen_seed));
    std::vector<std::pair<std::string, rdm::ImageTensor>> out;
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      std::ostringstream name;
      name << "tex" << std::setw(3) << std::setfill('0') << i;
      out.emplace_back(name.str(), std::move(imgs[i]));
    }
    return out;
  }
  std::vector<rdm::ImageTensor> load_images() const {
    std::vector<rdm::ImageTensor> out;
    for (auto& [name, img] : load()) out.push_back(std::move(img));
    return out;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffusion-quantization codec toolkit"};
  app.require_subcommand(1);

  // train-entropy
  auto* te = app.add_subcommand("train-entropy",
                                "fit the per-channel entropy model");
  CorpusArgs te_corpus;
  te_corpus.attach(te);
  int te_epochs = 300;
  std::uint64_t te_seed = 0;
  double te_qmin = 0.05, te_qmax = 2.0;
  std::string te_out;
  te->add_option("--epochs", te_epochs, "fit epochs (default 300)");
  te->add_option("--seed", te_seed, "rng seed");
  te->add_option("--q-min", te_qmin, "smallest supported scale");
  te->add_option("--q-max", te_qmax, "largest supported scale");
  te->add_option("--out", te_out, "output model path (.rdme)")->required();
  te->callback([&] {
    auto imgs = te_corpus.load_images();
    rdm::ChannelEntropyModel model = rdm::train_entropy_on_images(
        imgs, te_epochs, te_seed, te_qmin, te_qmax, &std::cerr);
    rdm::save_entropy_model(te_out, model);
    std::cout << "wrote entropy model (" << model.channels()
              << " channels, id " << std::hex << model.id() << std::dec
              << ") to " << te_out << "\n";
  });

  // train-denoiser
  auto* td = app.add_subcommand("train-denoiser",
                                "train the latent denoiser network");
  CorpusArgs td_corpus;
  td_corpus.attach(td);
  std::string td_model, td_resume, td_out;
  rdm::DenoiserTrainOptions td_opts;
  td->add_option("--model", td_model,
                 "entropy model for lattice-true corruption (optional)");
  td->add_option("--steps", td_opts.steps, "training steps (default 30000)");
  td->add_option("--hidden", td_opts.hidden, "hidden width (default 256)");
  td->add_option("--batch", td_opts.batch, "batch rows (default 64)");
  td->add_option("--seed", td_opts.seed, "rng seed");
  td->add_option("--q-min", td_opts.q_min, "low end of the scale range");
  td->add_option("--q-max", td_opts.q_max, "high end of the scale range");
  td->add_option("--resume", td_resume, "checkpoint to continue from");
  td->add_option("--out", td_out, "output checkpoint path (.rdmc)")
      ->required();
  td->callback([&] {
    auto imgs = td_corpus.load_images();
    rdm::ChannelEntropyModel model;
    bool has_model = !td_model.empty();
    if (has_model) model = rdm::load_entropy_model(td_model);
    rdm::DenoiserParams resume;
    rdm::OptimizerState opt;
    rdm::DenoiserTrainOptions opts = td_opts;
    opts.log = &std::cerr;
    opts.opt_io = &opt;
    if (!td_resume.empty()) {
      resume = rdm::load_denoiser(td_resume, &opt);
      opts.init = &resume;
    }
    rdm::DenoiserParams params = rdm::train_denoiser_on_images(
        imgs, has_model ? &model : nullptr, opts);
    rdm::save_denoiser(td_out, params, &opt);
    std::cout << "wrote denoiser checkpoint (" << params.theta.size()
              << " weights) to " << td_out << "\n";
  });

  // encode
  auto* en = app.add_subcommand("encode", "compress a .pgm image");
  std::string en_in, en_model, en_out;
  double en_q = 0.0;
  en->add_option("--input", en_in, "input .pgm image")->required();
  en->add_option("--model", en_model, "entropy model (.rdme)")->required();
  en->add_option("--q", en_q, "quantization scale")->required();
  en->add_option("--out", en_out, "output bitstream path")->required();
  en->callback([&] {
    rdm::ImageTensor img = rdm::load_pgm(en_in);
    rdm::ChannelEntropyModel model = rdm::load_entropy_model(en_model);
    rdm::EncodeResult res = rdm::encode_image(img, en_q, model);
    rdm::write_file_bytes(en_out, res.bytes);
    std::cout << en_out << ": " << res.bytes.size() << " bytes, "
              << std::setprecision(6) << res.bpp << " bpp\n";
  });

  // decode
  auto* de = app.add_subcommand("decode", "decompress a bitstream");
  std::string de_in, de_model, de_net, de_out, de_noise = "gaussian";
  rdm::SamplerConfig de_cfg;
  de->add_option("--input", de_in, "input bitstream")->required();
  de->add_option("--model", de_model, "entropy model (.rdme)")->required();
  de->add_option("--net", de_net, "denoiser checkpoint (.rdmc)");
  de->add_option("--steps", de_cfg.N,
                 "reverse sampling steps, 0 decodes the lattice directly");
  de->add_option("--beta", de_cfg.beta, "noise injection strength");
  de->add_option("--noise", de_noise,
                 "noise form: gaussian|uniform|entropy|none");
  de->add_option("--seed", de_cfg.seed, "sampler seed");
  de->add_option("--out", de_out, "output .pgm path")->required();
  de->callback([&] {
    rdm::ChannelEntropyModel model = rdm::load_entropy_model(de_model);
    de_cfg.noise = rdm::noise_form_from_string(de_noise);
    rdm::DenoiserParams net;
    bool has_net = !de_net.empty();
    if (has_net) net = rdm::load_denoiser(de_net);
    rdm::ImageTensor img = rdm::decode_image_file(
        de_in, model, has_net ? &net : nullptr, de_cfg);
    rdm::save_pgm(de_out, img);
    std::cout << de_out << ": " << img.width << "x" << img.height << ", "
              << de_cfg.N << " steps\n";
  });

  // rd-sweep
  auto* rd = app.add_subcommand("rd-sweep",
                                "rate-distortion curve over a scale grid");
  CorpusArgs rd_corpus;
  rd_corpus.attach(rd);
  std::string rd_model, rd_net, rd_qs = "0.1,0.2,0.4,0.7,1.0,1.5,2.0";
  std::string rd_noise = "gaussian", rd_out, rd_svg_path;
  rdm::SamplerConfig rd_cfg;
  unsigned rd_threads = 0;
  rd->add_option("--model", rd_model, "entropy model (.rdme)")->required();
  rd->add_option("--net", rd_net, "denoiser checkpoint (.rdmc)")->required();
  rd->add_option("--qs", rd_qs, "comma-separated scale grid");
  rd->add_option("--steps", rd_cfg.N, "reverse steps for the sampled rows");
  rd->add_option("--beta", rd_cfg.beta, "noise injection strength");
  rd->add_option("--noise", rd_noise, "noise form");
  rd->add_option("--seed", rd_cfg.seed, "sampler seed");
  rd->add_option("--threads", rd_threads, "worker threads, 0 = hardware");
  rd->add_option("--out", rd_out, "output csv path")->required();
  rd->add_option("--svg", rd_svg_path, "also write an svg plot here");
  rd->callback([&] {
    auto images = rd_corpus.load();
    rdm::ChannelEntropyModel model = rdm::load_entropy_model(rd_model);
    rdm::DenoiserParams net = rdm::load_denoiser(rd_net);
    rd_cfg.noise = rdm::noise_form_from_string(rd_noise);
    std::vector<rdm::RdRow> rows = rdm::rd_sweep(
        images, parse_double_list(rd_qs), model, net, rd_cfg, rd_threads);
    write_text(rd_out, rdm::rd_csv(rows));
    if (!rd_svg_path.empty()) write_text(rd_svg_path, rdm::rd_svg(rows));
    std::cout << rd_out << ": " << rows.size() << " rows\n";
  });

  // eval-sampler
  auto* ev = app.add_subcommand(
      "eval-sampler", "ablate noise forms and strengths on a point mixture");
  std::string ev_atoms = "-1,1", ev_weights, ev_betas = "0,0.05,0.1";
  std::string ev_forms = "gaussian,uniform", ev_net, ev_model, ev_out;
  rdm::EvalSamplerSpec ev_spec;
  unsigned ev_threads = 0;
  ev->add_option("--atoms", ev_atoms, "mixture atom positions (1-d)");
  ev->add_option("--weights", ev_weights, "atom weights (default equal)");
  ev->add_option("--q0", ev_spec.q0, "corruption scale (default 0.5)");
  ev->add_option("--steps", ev_spec.steps, "reverse steps (default 8)");
  ev->add_option("--betas", ev_betas, "injection strengths to sweep");
  ev->add_option("--forms", ev_forms, "noise forms to sweep");
  ev->add_option("--samples", ev_spec.samples, "draws per repetition");
  ev->add_option("--reps", ev_spec.reps, "independent repetitions");
  ev->add_option("--seed", ev_spec.seed, "rng seed");
  ev->add_option("--net", ev_net,
                 "denoiser checkpoint; omit to use the exact posterior");
  ev->add_option("--model", ev_model,
                 "entropy model, required by the entropy noise form");
  ev->add_option("--threads", ev_threads, "worker threads, 0 = hardware");
  ev->add_option("--out", ev_out, "output csv path")->required();
  ev->callback([&] {
    std::vector<double> atoms = parse_double_list(ev_atoms);
    std::vector<std::vector<double>> pts;
    for (double a : atoms) pts.push_back({a});
    std::vector<double> ws =
        ev_weights.empty() ? std::vector<double>(atoms.size(), 1.0)
                           : parse_double_list(ev_weights);
    ev_spec.dist = rdm::PointMixture::make(pts, ws);
    ev_spec.betas = parse_double_list(ev_betas);
    ev_spec.forms = parse_form_list(ev_forms);
    rdm::ChannelEntropyModel model;
    bool has_model = !ev_model.empty();
    if (has_model) model = rdm::load_entropy_model(ev_model);
    rdm::DenoiserParams net;
    rdm::DenoiserFn fn;
    if (!ev_net.empty()) {
      net = rdm::load_denoiser(ev_net);
      fn = rdm::make_denoiser_fn(net);
    } else {
      fn = rdm::oracle_denoiser_fn(ev_spec.dist);
    }
    std::vector<rdm::EvalRow> rows = rdm::eval_sampler(
        ev_spec, fn, has_model ? &model : nullptr, ev_threads);
    write_text(ev_out, rdm::eval_csv(rows));
    std::cout << rdm::eval_csv(rows);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const rdm::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
