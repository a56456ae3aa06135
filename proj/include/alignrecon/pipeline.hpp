#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alignrecon/metrics.hpp"
#include "alignrecon/sampling.hpp"
#include "alignrecon/simulate.hpp"
#include "alignrecon/solver.hpp"

namespace alignrecon {

// One simulated acquisition: phantom pair, mask, noisy k-space and a
// (possibly) misaligned reference. Every random draw derives from `seed`.
struct ExperimentSpec {
  std::size_t size = 128;
  MaskPattern pattern = MaskPattern::Equispaced;
  double acceleration = 4.0;
  double center_alloc = 0.32;
  double noise_sigma = 0.01;
  double misalign_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentInputs {
  PhantomPair phantom;
  SamplingMask mask;
  KSpace ktilde;
  Misaligned reference;  // reference.image is what the solver sees
};

// Independent stream seeds for each random component of an experiment.
enum class SeedStream : std::uint64_t { Phantom = 1, Mask = 2, Noise = 3, Misalign = 4 };
std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream);

ExperimentInputs prepare_experiment(const ExperimentSpec& spec);

enum class Variant { ZeroFilled, SingleModal, MultiNoAlign, MultiAlign };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

struct VariantResult {
  Variant variant = Variant::ZeroFilled;
  Reconstruction recon;
  MetricReport metrics;
  double endpoint_error = 0.0;  // mean |phi - true field|
};

// ZeroFilled ignores the config; SingleModal uses lambda = 0 and no reference;
// MultiNoAlign keeps phi = 0; MultiAlign runs the full alternating scheme.
VariantResult run_variant(const ExperimentInputs& inputs, const SolverConfig& cfg, Variant variant);

enum class SweepAxis { Sigma, Stages };

struct SweepSpec {
  ExperimentSpec base;
  SolverConfig solver;
  SweepAxis axis = SweepAxis::Sigma;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::vector<Variant> variants;
};

struct SweepRow {
  SweepAxis axis = SweepAxis::Sigma;
  double value = 0.0;
  Variant variant = Variant::ZeroFilled;
  std::uint64_t seed = 0;
  MetricReport metrics;
  double endpoint_error = 0.0;
};

struct SweepSummaryRow {
  double value = 0.0;
  Variant variant = Variant::ZeroFilled;
  std::size_t count = 0;
  double psnr_mean = 0.0, psnr_std = 0.0;
  double ssim_mean = 0.0, ssim_std = 0.0;
  double mae_mean = 0.0, mae_std = 0.0;
  double epe_mean = 0.0, epe_std = 0.0;
};

// Cells (value x seed) are independent and may run concurrently; rows come
// back in (value, seed, variant) order regardless of scheduling.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads = 1);
std::vector<SweepSummaryRow> summarize(const std::vector<SweepRow>& rows);

std::string to_string(SweepAxis axis);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
void write_sweep_summary_csv(const std::vector<SweepSummaryRow>& rows, SweepAxis axis,
                             const std::filesystem::path& path);
void write_trace_csv(const SolverTrace& trace, const std::filesystem::path& path);

}  // namespace alignrecon
