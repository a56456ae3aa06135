#include "alignrecon/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>

#include "alignrecon/transform.hpp"

namespace alignrecon {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(acc / static_cast<double>(v.size() - 1)) : 0.0;
}

std::vector<SweepRow> run_cell(const SweepSpec& spec, double value, std::uint64_t seed) {
  ExperimentSpec exp = spec.base;
  exp.seed = seed;
  SolverConfig cfg = spec.solver;
  if (spec.axis == SweepAxis::Sigma)
    exp.misalign_sigma = value;
  else
    cfg.stages = static_cast<int>(std::lround(value));
  const ExperimentInputs inputs = prepare_experiment(exp);
  std::vector<SweepRow> rows;
  for (Variant v : spec.variants) {
    const VariantResult r = run_variant(inputs, cfg, v);
    rows.push_back({spec.axis, value, v, seed, r.metrics, r.endpoint_error});
  }
  return rows;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
}

ExperimentInputs prepare_experiment(const ExperimentSpec& spec) {
  PhantomPair phantom = phantom_pair(spec.size, derive_seed(spec.seed, SeedStream::Phantom));
  MaskSpec mask_spec{spec.size, spec.acceleration, spec.center_alloc, derive_seed(spec.seed, SeedStream::Mask)};
  SamplingMask mask = make_mask(spec.pattern, mask_spec, spec.size);
  KSpace ktilde = acquire(phantom.target, mask, spec.noise_sigma, derive_seed(spec.seed, SeedStream::Noise));
  Misaligned reference =
      misalign(phantom.reference, {spec.misalign_sigma, derive_seed(spec.seed, SeedStream::Misalign)});
  return {std::move(phantom), std::move(mask), std::move(ktilde), std::move(reference)};
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::ZeroFilled: return "zero_filled";
    case Variant::SingleModal: return "single_modal";
    case Variant::MultiNoAlign: return "multi_noalign";
    case Variant::MultiAlign: return "multi_align";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::ZeroFilled, Variant::SingleModal, Variant::MultiNoAlign, Variant::MultiAlign})
    if (to_string(v) == name) return v;
  throw InvalidParameter("unknown variant '" + name + "'");
}

VariantResult run_variant(const ExperimentInputs& inputs, const SolverConfig& cfg, Variant variant) {
  const ComplexImage& truth = inputs.phantom.target;
  VariantResult res;
  res.variant = variant;
  switch (variant) {
    case Variant::ZeroFilled:
      res.recon = {zero_filled(inputs.ktilde, inputs.mask), DisplacementField(truth.shape()), {}};
      break;
    case Variant::SingleModal:
      res.recon = reconstruct_single_modal(inputs.ktilde, inputs.mask, cfg, truth);
      break;
    case Variant::MultiNoAlign: {
      SolverConfig c = cfg;
      c.align_substeps = 0;
      res.recon = reconstruct(inputs.ktilde, inputs.mask, inputs.reference.image, c, truth);
      break;
    }
    case Variant::MultiAlign:
      res.recon = reconstruct(inputs.ktilde, inputs.mask, inputs.reference.image, cfg, truth);
      break;
  }
  res.metrics = evaluate(res.recon.x, truth);
  // The solver's phi maps target coordinates into the misaligned reference,
  // i.e. it estimates the inverse of the simulated field. Compare against the
  // numerical inverse so the error is zero for perfect recovery.
  res.endpoint_error = mean_endpoint_error(res.recon.phi, inverse_field(inputs.reference.field));
  return res;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads) {
  std::vector<std::pair<double, std::uint64_t>> cells;
  for (double v : spec.values)
    for (std::uint64_t s : spec.seeds) cells.emplace_back(v, s);

  std::vector<std::vector<SweepRow>> results(cells.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) results[i] = run_cell(spec, cells[i].first, cells[i].second);
  } else {
    for (std::size_t start = 0; start < cells.size(); start += threads) {
      std::vector<std::future<std::vector<SweepRow>>> batch;
      for (std::size_t i = start; i < std::min(cells.size(), start + threads); ++i)
        batch.push_back(std::async(std::launch::async, run_cell, std::cref(spec), cells[i].first, cells[i].second));
      for (std::size_t i = 0; i < batch.size(); ++i) results[start + i] = batch[i].get();
    }
  }
  std::vector<SweepRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

std::vector<SweepSummaryRow> summarize(const std::vector<SweepRow>& rows) {
  std::map<std::pair<double, int>, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) groups[{r.value, static_cast<int>(r.variant)}].push_back(&r);
  std::vector<SweepSummaryRow> out;
  for (const auto& [key, members] : groups) {
    SweepSummaryRow s;
    s.value = key.first;
    s.variant = static_cast<Variant>(key.second);
    s.count = members.size();
    std::vector<double> p, q, m, e;
    for (const auto* r : members) {
      p.push_back(r->metrics.psnr);
      q.push_back(r->metrics.ssim);
      m.push_back(r->metrics.mae);
      e.push_back(r->endpoint_error);
    }
    mean_std(p, s.psnr_mean, s.psnr_std);
    mean_std(q, s.ssim_mean, s.ssim_std);
    mean_std(m, s.mae_mean, s.mae_std);
    mean_std(e, s.epe_mean, s.epe_std);
    out.push_back(s);
  }
  return out;
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::Sigma ? "sigma" : "stages"; }

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "axis,value,variant,seed,psnr_db,ssim,mae,endpoint_error\n";
  for (const auto& r : rows)
    out << to_string(r.axis) << ',' << fmt(r.value) << ',' << to_string(r.variant) << ',' << r.seed << ','
        << fmt(r.metrics.psnr) << ',' << fmt(r.metrics.ssim) << ',' << fmt(r.metrics.mae) << ','
        << fmt(r.endpoint_error) << '\n';
}

void write_sweep_summary_csv(const std::vector<SweepSummaryRow>& rows, SweepAxis axis,
                             const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << to_string(axis)
      << ",variant,n,psnr_mean,psnr_std,ssim_mean,ssim_std,mae_mean,mae_std,endpoint_error_mean,endpoint_error_std\n";
  for (const auto& r : rows)
    out << fmt(r.value) << ',' << to_string(r.variant) << ',' << r.count << ',' << fmt(r.psnr_mean) << ','
        << fmt(r.psnr_std) << ',' << fmt(r.ssim_mean) << ',' << fmt(r.ssim_std) << ',' << fmt(r.mae_mean) << ','
        << fmt(r.mae_std) << ',' << fmt(r.epe_mean) << ',' << fmt(r.epe_std) << '\n';
}

void write_trace_csv(const SolverTrace& trace, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "stage,data_fidelity,psi,tv,psnr_db,alpha_used\n";
  for (const auto& s : trace.stages)
    out << s.stage << ',' << fmt(s.data_fidelity) << ',' << fmt(s.psi) << ',' << fmt(s.tv) << ','
        << (s.psnr ? fmt(*s.psnr) : std::string("nan")) << ',' << fmt(s.alpha_used) << '\n';
}

}  // namespace alignrecon
