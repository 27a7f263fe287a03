#ifndef NDPP_TOOLS_CLI_HPP
#define NDPP_TOOLS_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ndpp/datasets.hpp"
#include "ndpp/layer_config.hpp"
#include "ndpp/model.hpp"
#include "ndpp/train.hpp"

namespace ndpp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

/// Fully-resolved settings of one invocation.
struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 1;
  std::string model = "ndpp-mlp";
  std::string dataset = "blobs";
  SgdConfig sgd{0.1, 0.0, 0.0, Schedule::constant, 0};
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  std::size_t workers = 1;
  std::size_t log_every = 1;
  ScaleMode scale_mode = ScaleMode::none;
  std::size_t block_size = 0;
  std::size_t subsample = 1;
  double epsilon = 1e-5;
  double gain = 1.0;           // ar1 dataset only
  std::size_t max_steps = 0;   // 0 = no cap
  std::string out;
  std::string suite;  // verify filter, empty = all
  // kernel
  std::string source = "ar1";
  std::size_t size = 32;
  double rho = 0.9;
  // bench
  std::size_t bench_batch = 64;
  std::size_t bench_subsample = 3;
  int repeats = 3;
  bool scaling = false;

  /// Throws ContractError on invalid combinations.
  void validate() const;
  /// "key=value" lines, one per field.
  std::vector<std::string> echo() const;
  ModelOptions model_options() const;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"whitening", "one-step", "gln", "sync", "gradcheck", "center-surround"};
  return names;
}

/// Runs the named suite (or all when `filter` is empty).
std::vector<SuiteResult> run_suites(const std::string& filter, const RunConfig& cfg);

/// Dataset and model named by the config; images feed MLPs flattened.
Dataset load_dataset(const RunConfig& cfg);
Model make_model(const RunConfig& cfg, const Dataset& data);
/// Flattens image samples when the model expects feature vectors.
Dataset adapt_dataset(const Dataset& data, const Model& model);

struct KernelReport {
  Tensor kernel;  // size x size, centred
  double centre = 0.0;
  double neighbour_mean = 0.0;  // mean of the 4-neighbourhood of the centre
  double max_surround = 0.0;    // largest |value| away from the centre
};

/// Source "ar1" (rho, seed), "noise" (Gaussian white noise, seed) or a
/// path to a PGM/CSV image.
KernelReport compute_kernel(const std::string& source, std::size_t size, double rho, std::uint64_t seed);

struct BenchShape {
  std::size_t kernel, stride, ch_in, ch_out, h, w;
};

struct BenchRow {
  BenchShape shape;
  std::size_t subsample = 1;
  double t_getx = 0, t_cov = 0, t_isqrt = 0, t_fuse = 0, t_conv = 0;  // milliseconds
};

std::vector<BenchShape> bench_ladder();
/// Times each stage of one ND++ convolution on a batch of `batch` samples,
/// median of `repeats` runs.
BenchRow bench_layer(const BenchShape& shape, std::size_t batch, std::size_t subsample, int repeats);
/// Milliseconds for covariance of an n x b matrix / inverse square root of
/// a b x b matrix (median of repeats).
double time_covariance(std::size_t n, std::size_t b, int repeats);
double time_isqrt(std::size_t b, int repeats);

inline constexpr const char* kBenchHeader = "kernel,stride,ch_in,ch_out,h,w,t_getX,t_cov,t_isqrt,t_fuse,t_conv";

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ndpp::cli

#endif  // NDPP_TOOLS_CLI_HPP
