#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ndpp/errors.hpp"

namespace ndpp::cli {
namespace {

const std::vector<std::string> kModels{"ndpp-mlp", "ndpp-cnn", "bn-mlp", "bn-cnn", "plain-mlp", "plain-cnn", "linear"};

bool is_cnn(const std::string& model) { return model.size() > 4 && model.substr(model.size() - 4) == "-cnn"; }

Flavor flavor_of(const std::string& model) {
  if (model.rfind("ndpp", 0) == 0) return Flavor::ndpp;
  if (model.rfind("bn", 0) == 0) return Flavor::bn_baseline;
  return Flavor::plain;
}

// Flags shared by every subcommand that touches a model or dataset.
void add_train_flags(CLI::App& app, RunConfig& c, std::string& scale) {
  app.add_option("--model", c.model, "model")->check(CLI::IsMember(kModels));
  app.add_option("--dataset", c.dataset, "blobs, ar1 or idx:<prefix>");
  app.add_option("--lr", c.sgd.learning_rate, "learning rate");
  app.add_option("--momentum", c.sgd.momentum, "SGD momentum");
  app.add_option("--weight-decay", c.sgd.weight_decay, "L2 weight decay");
  app.add_option("--epochs", c.epochs, "epochs");
  app.add_option("--batch-size", c.batch_size, "mini-batch size");
  app.add_option("--workers", c.workers, "simulated data-parallel workers");
  app.add_option("--scale-mode", scale, "none, musigma or l1")
      ->check(CLI::IsMember({"none", "musigma", "mu_sigma", "l1"}));
  app.add_option("--block-size", c.block_size, "decorrelation block width (0 = default)");
  app.add_option("--subsample", c.subsample, "covariance subsampling stride");
  app.add_option("--epsilon", c.epsilon, "covariance regulariser");
  app.add_option("--gain", c.gain, "input gain of the ar1 dataset");
  app.add_option("--max-steps", c.max_steps, "stop after this many steps (0 = no cap)");
  app.add_option("--log-every", c.log_every, "steps between CSV rows");
  app.add_option("--out", c.out, "output path (default stdout)");
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

void echo(const RunConfig& c, std::ostream& out) {
  for (const std::string& line : c.echo()) out << "# " << line << '\n';
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  const auto results = run_suites(c.suite, c);
  if (results.empty()) throw ContractError("unknown suite: " + c.suite);
  bool ok = true;
  for (const SuiteResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Dataset raw = load_dataset(c);
  Model model = make_model(c, raw);
  const Dataset data = adapt_dataset(raw, model);
  TrainConfig tc;
  tc.sgd = c.sgd;
  tc.epochs = c.epochs;
  tc.batch_size = c.batch_size;
  tc.workers = c.workers;
  tc.log_every = c.log_every;
  tc.max_steps = c.max_steps;
  tc.seed = c.seed;
  if (tc.sgd.schedule == Schedule::cosine && tc.sgd.total_steps == 0)
    tc.sgd.total_steps = c.epochs * std::max<std::size_t>(1, data.train_size() / c.batch_size);
  const TrainResult r = train(model, data, tc);

  if (c.out.empty()) {
    write_metrics_csv(out, r.log);
  } else {
    std::ofstream f(c.out);
    if (!f) throw std::runtime_error("cannot write " + c.out);
    write_metrics_csv(f, r.log);
  }
  if (r.divergence) {
    err << "divergence at step " << r.divergence->step << ": loss " << r.divergence->offending_loss
        << " (last finite loss " << r.divergence->last_finite_loss << ")\n";
    return kExitFailure;
  }
  if (r.steps == 0) {
    out << "# final steps=0\n";
    return kExitOk;
  }
  const double train_acc = evaluate(model, data.train_x, data.train_y);
  out << "# final steps=" << r.steps << " train_acc=" << fixed(train_acc) << " eval_acc=" << fixed(r.final_eval_acc)
      << " newton_failures=" << r.newton_failures << '\n';
  return kExitOk;
}

int cmd_kernel(const RunConfig& c, std::ostream& out) {
  const KernelReport k = compute_kernel(c.source, c.size, c.rho, c.seed);
  std::ostringstream csv;
  csv << std::setprecision(10);
  for (std::size_t r = 0; r < c.size; ++r) {
    for (std::size_t col = 0; col < c.size; ++col) csv << (col ? "," : "") << k.kernel(r, col);
    csv << '\n';
  }
  if (c.out.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(c.out);
    if (!f) throw std::runtime_error("cannot write " + c.out);
    f << csv.str();
  }
  auto sign = [](double v) { return v > 0 ? "positive" : v < 0 ? "negative" : "zero"; };
  out << "# centre=" << sign(k.centre) << " surround_mean=" << sign(k.neighbour_mean) << " centre_value=" << fixed(k.centre)
      << " surround_mean_value=" << fixed(k.neighbour_mean)
      << " max_surround_ratio=" << fixed(k.centre != 0 ? k.max_surround / std::abs(k.centre) : 0.0) << '\n';
  return kExitOk;
}

int cmd_bench(const RunConfig& c, std::ostream& out) {
  std::ostringstream csv;
  csv << kBenchHeader << '\n' << std::setprecision(6);
  for (const BenchShape& s : bench_ladder()) {
    const BenchRow r = bench_layer(s, c.bench_batch, c.bench_subsample, c.repeats);
    csv << s.kernel << ',' << s.stride << ',' << s.ch_in << ',' << s.ch_out << ',' << s.h << ',' << s.w << ',' << r.t_getx
        << ',' << r.t_cov << ',' << r.t_isqrt << ',' << r.t_fuse << ',' << r.t_conv << '\n';
  }
  if (c.out.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(c.out);
    if (!f) throw std::runtime_error("cannot write " + c.out);
    f << csv.str();
  }
  if (c.scaling) {
    const double n1 = time_covariance(8192, 64, c.repeats), n2 = time_covariance(16384, 64, c.repeats);
    const double b1 = time_isqrt(128, c.repeats), b2 = time_isqrt(256, c.repeats);
    out << "# cov_ratio_2N=" << fixed(n2 / n1, 4) << " isqrt_ratio_2B=" << fixed(b2 / b1, 4) << '\n';
  }
  return kExitOk;
}

}  // namespace

void RunConfig::validate() const {
  sgd.validate();
  NdppLayerConfig layer;
  layer.scale_mode = scale_mode;
  layer.block_size = block_size;
  layer.subsample = subsample;
  layer.epsilon = epsilon;
  layer.sync_workers = workers;
  layer.validate();
  if (batch_size == 0) throw ContractError("batch size must be positive");
  if (log_every == 0) throw ContractError("log interval must be positive");
  if (!(gain > 0.0)) throw ContractError("gain must be positive");
  if (dataset != "blobs" && dataset != "ar1" && dataset.rfind("idx:", 0) != 0)
    throw ContractError("unknown dataset: " + dataset);
  if (std::find(kModels.begin(), kModels.end(), model) == kModels.end()) throw ContractError("unknown model: " + model);
  if (size == 0) throw ContractError("kernel size must be positive");
  if (!(rho > -1.0 && rho < 1.0)) throw ContractError("rho must lie in (-1, 1)");
  if (bench_batch == 0 || bench_subsample == 0 || repeats < 1) throw ContractError("bench settings must be positive");
}

std::vector<std::string> RunConfig::echo() const {
  std::vector<std::string> l{"subcommand=" + subcommand, "seed=" + std::to_string(seed)};
  auto add = [&](const std::string& k, const std::string& v) { l.push_back(k + "=" + v); };
  if (subcommand == "verify") {
    add("epsilon", fixed(epsilon));
    add("suite", suite.empty() ? "all" : suite);
  }
  if (subcommand == "train") {
    add("model", model);
    add("dataset", dataset);
    add("lr", fixed(sgd.learning_rate));
    add("momentum", fixed(sgd.momentum));
    add("weight_decay", fixed(sgd.weight_decay));
    add("epochs", std::to_string(epochs));
    add("batch_size", std::to_string(batch_size));
    add("workers", std::to_string(workers));
    add("scale_mode", to_string(scale_mode));
    add("block_size", std::to_string(block_size));
    add("subsample", std::to_string(subsample));
    add("epsilon", fixed(epsilon));
    add("gain", fixed(gain));
    add("max_steps", std::to_string(max_steps));
    add("log_every", std::to_string(log_every));
  }
  if (subcommand == "kernel") {
    add("source", source);
    add("size", std::to_string(size));
    add("rho", fixed(rho));
  }
  if (subcommand == "bench") {
    add("batch", std::to_string(bench_batch));
    add("subsample", std::to_string(bench_subsample));
    add("repeats", std::to_string(repeats));
    add("scaling", scaling ? "true" : "false");
  }
  add("out", out.empty() ? "-" : out);
  return l;
}

ModelOptions RunConfig::model_options() const {
  ModelOptions o;
  o.scale_mode = scale_mode;
  o.block_size = block_size;
  o.subsample = subsample;
  o.epsilon = epsilon;
  o.sync_workers = workers;
  o.seed = seed;
  return o;
}

Dataset load_dataset(const RunConfig& c) {
  if (c.dataset == "blobs") return make_blobs(1024, 256, 8, 4.0, c.seed);
  if (c.dataset == "ar1") {
    Ar1TaskSpec spec;
    spec.gain = c.gain;
    return make_ar1_images(2048, 512, spec, c.seed);
  }
  return load_idx_dataset(c.dataset.substr(4));
}

Model make_model(const RunConfig& c, const Dataset& data) {
  const Shape sample = data.sample_shape();
  std::size_t features = 1;
  for (std::size_t s : sample) features *= s;
  if (c.model == "linear") return build_linear(features, data.classes, c.model_options());
  if (is_cnn(c.model)) {
    if (!data.is_image()) throw ContractError(c.model + " needs an image dataset");
    return build_cnn(sample, data.classes, flavor_of(c.model), c.model_options());
  }
  return build_mlp(features, data.classes, flavor_of(c.model), c.model_options());
}

Dataset adapt_dataset(const Dataset& data, const Model& model) {
  if (!data.is_image() || model.name().find("cnn") != std::string::npos) return data;
  Dataset flat = data;
  const std::size_t f = data.train_x.size() / data.train_size();
  flat.train_x = data.train_x.reshaped({data.train_size(), f});
  flat.eval_x = data.eval_x.reshaped({data.eval_y.size(), f});
  return flat;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Network deconvolution layers: verification, training, kernels and benchmarks"};
  app.require_subcommand(1);
  RunConfig c;
  std::string scale = "none";

  CLI::App* verify = app.add_subcommand("verify", "run the built-in verification suites");
  verify->add_option("--suite", c.suite, "run only this suite")->check(CLI::IsMember(suite_names()));
  verify->add_option("--epsilon", c.epsilon, "regulariser (validated only)");
  verify->add_option("--seed", c.seed, "random seed");

  CLI::App* trn = app.add_subcommand("train", "train a model and write per-step metrics as CSV");
  add_train_flags(*trn, c, scale);
  trn->add_option("--seed", c.seed, "random seed");

  CLI::App* kernel = app.add_subcommand("kernel", "print the spatial deconvolution kernel of an image as CSV");
  kernel->add_option("--source", c.source, "ar1, noise (flat spectrum, random phase), gaussian (i.i.d. pixels), or a PGM/CSV image path");
  kernel->add_option("--size", c.size, "kernel (and image crop) size");
  kernel->add_option("--rho", c.rho, "AR(1) coefficient for --source ar1");
  kernel->add_option("--seed", c.seed, "random seed");
  kernel->add_option("--out", c.out, "CSV path (default stdout)");

  CLI::App* bench = app.add_subcommand("bench", "time the stages of an ND++ convolution");
  bench->add_option("--batch", c.bench_batch, "samples per timed batch");
  bench->add_option("--subsample", c.bench_subsample, "covariance subsampling stride");
  bench->add_option("--repeats", c.repeats, "timed repeats (median reported)");
  bench->add_flag("--scaling", c.scaling, "also time covariance at N, 2N and Newton at B, 2B");
  bench->add_option("--out", c.out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  c.subcommand = app.get_subcommands().front()->get_name();
  try {
    c.scale_mode = parse_scale_mode(scale);
    c.validate();
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  echo(c, out);

  try {
    if (c.subcommand == "verify") return cmd_verify(c, out);
    if (c.subcommand == "train") return cmd_train(c, out, err);
    if (c.subcommand == "kernel") return cmd_kernel(c, out);
    return cmd_bench(c, out);
  } catch (const ContractError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace ndpp::cli
