#include "alignrecon/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include "alignrecon/io.hpp"
#include "alignrecon/run_config.hpp"

namespace alignrecon {

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> accel;
  std::string pattern;
  std::optional<double> sigma;
  std::optional<int> stages;
  bool no_align = false;
  bool no_ref = false;
  std::vector<std::string> overrides;
};

struct Inputs {
  std::string input;
  std::string mask;
  std::string kspace;
  std::string ref;
  std::string truth;
  std::string image;
  std::string label = "image";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value run configuration");
  cmd->add_option("--out", f.out, "output directory (overrides the config's out)");
  cmd->add_option("--seed", f.seed, "experiment seed");
  cmd->add_option("--accel", f.accel, "acceleration factor")->check(CLI::IsMember({4.0, 8.0}));
  cmd->add_option("--pattern", f.pattern, "mask pattern")->check(CLI::IsMember({"equispaced", "random"}));
  cmd->add_option("--sigma", f.sigma, "misalignment scale");
  cmd->add_option("--stages", f.stages, "number of stages K");
  cmd->add_flag("--no-align", f.no_align, "keep the displacement field at zero");
  cmd->add_flag("--no-ref", f.no_ref, "single-modal reconstruction without the reference");
  cmd->add_option("--set", f.overrides, "extra key=value overrides, applied last");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (!f.out.empty()) cfg.out = f.out;
  if (f.seed) cfg.experiment.seed = *f.seed;
  if (f.accel) cfg.experiment.acceleration = *f.accel;
  if (!f.pattern.empty()) cfg.experiment.pattern = parse_mask_pattern(f.pattern);
  if (f.sigma) cfg.experiment.misalign_sigma = *f.sigma;
  if (f.stages) cfg.solver.stages = *f.stages;
  if (f.no_align) cfg.align = false;
  if (f.no_ref) cfg.use_ref = false;
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidSpec("--set expects key=value, got '" + kv + "'");
    set_run_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

// Tracks the current step so runtime errors carry context.
struct Context {
  std::string command;
  std::string step;
  std::ostream& out;
};

fs::path prepare_out(const RunConfig& cfg, Context& ctx) {
  ctx.step = "creating output directory";
  fs::create_directories(cfg.out);
  save_run_config(cfg, cfg.out / "config.txt");
  return cfg.out;
}

void note(Context& ctx, const fs::path& path) { ctx.out << "wrote " << path.string() << '\n'; }

SolverConfig effective_solver(const RunConfig& cfg) {
  SolverConfig s = cfg.solver;
  if (!cfg.align) s.align_substeps = 0;
  return s;
}

SamplingMask config_mask(const RunConfig& cfg) {
  const auto& e = cfg.experiment;
  const MaskSpec spec{e.size, e.acceleration, e.center_alloc, derive_seed(e.seed, SeedStream::Mask)};
  return make_mask(e.pattern, spec, e.size);
}

PhantomPair config_phantom(const RunConfig& cfg) {
  return phantom_pair(cfg.experiment.size, derive_seed(cfg.experiment.seed, SeedStream::Phantom));
}

void cmd_mask(const RunConfig& cfg, Context& ctx) {
  const fs::path dir = prepare_out(cfg, ctx);
  ctx.step = "building mask";
  const SamplingMask mask = config_mask(cfg);
  ctx.step = "writing outputs";
  write_grid(dir / "mask.grid", mask);
  export_png(mask, dir / "mask.png");
  note(ctx, dir / "mask.grid");
  ctx.out << "sampled columns: " << mask.sampled_count() << " of " << mask.width() << '\n';
}

void cmd_phantom(const RunConfig& cfg, Context& ctx) {
  const fs::path dir = prepare_out(cfg, ctx);
  ctx.step = "generating phantom";
  const PhantomPair p = config_phantom(cfg);
  ctx.step = "writing outputs";
  write_grid(dir / "target.grid", p.target);
  write_grid(dir / "reference.grid", p.reference);
  export_png(p.target, dir / "target.png");
  export_png(p.reference, dir / "reference.png");
  note(ctx, dir / "target.grid");
  note(ctx, dir / "reference.grid");
}

void cmd_misalign(const RunConfig& cfg, const Inputs& in, Context& ctx) {
  const fs::path dir = prepare_out(cfg, ctx);
  ctx.step = "reading reference";
  const ComplexImage ref = in.input.empty() ? config_phantom(cfg).reference : read_complex_image(in.input);
  ctx.step = "misaligning";
  const Misaligned m =
      misalign(ref, {cfg.experiment.misalign_sigma, derive_seed(cfg.experiment.seed, SeedStream::Misalign)});
  ctx.step = "writing outputs";
  write_grid(dir / "reference_misaligned.grid", m.image);
  write_grid(dir / "field.grid", m.field);
  export_png(m.image, dir / "reference_misaligned.png");
  note(ctx, dir / "reference_misaligned.grid");
  note(ctx, dir / "field.grid");
  ctx.out << "max |field| component: " << max_abs_component(m.field) << " px\n";
}

void cmd_acquire(const RunConfig& cfg, const Inputs& in, Context& ctx) {
  const fs::path dir = prepare_out(cfg, ctx);
  ctx.step = "reading inputs";
  const ComplexImage target = in.input.empty() ? config_phantom(cfg).target : read_complex_image(in.input);
  const SamplingMask mask = in.mask.empty() ? config_mask(cfg) : read_mask(in.mask);
  ctx.step = "acquiring";
  const KSpace k = acquire(target, mask, cfg.experiment.noise_sigma, derive_seed(cfg.experiment.seed, SeedStream::Noise));
  ctx.step = "writing outputs";
  write_grid(dir / "kspace.grid", k);
  write_grid(dir / "mask.grid", mask);
  export_png(zero_filled(k, mask), dir / "zero_filled.png");
  note(ctx, dir / "kspace.grid");
}

void cmd_recon(const RunConfig& cfg, const Inputs& in, Context& ctx) {
  const fs::path dir = prepare_out(cfg, ctx);
  const SolverConfig solver = effective_solver(cfg);

  ctx.step = "reading inputs";
  std::optional<KSpace> k;
  std::optional<SamplingMask> mask;
  std::optional<ComplexImage> ref, truth;
  if (in.kspace.empty()) {
    // Simulate the whole acquisition from the config.
    ExperimentInputs sim = prepare_experiment(cfg.experiment);
    k = std::move(sim.ktilde);
    mask = std::move(sim.mask);
    ref = std::move(sim.reference.image);
    truth = std::move(sim.phantom.target);
  } else {
    if (in.mask.empty()) throw InvalidSpec("recon: --kspace requires --mask");
    k = read_kspace(in.kspace);
    mask = read_mask(in.mask);
    if (cfg.use_ref) {
      if (in.ref.empty()) throw InvalidSpec("recon: --kspace requires --ref unless --no-ref is given");
      ref = read_complex_image(in.ref);
    }
  }
  if (!in.truth.empty()) truth = read_complex_image(in.truth);

  ctx.step = "reconstructing";
  const Reconstruction r = cfg.use_ref ? reconstruct(*k, *mask, *ref, solver, truth)
                                       : reconstruct_single_modal(*k, *mask, solver, truth);
  const ComplexImage x0 = zero_filled(*k, *mask);

  ctx.step = "writing outputs";
  write_grid(dir / "x.grid", r.x);
  write_grid(dir / "phi.grid", r.phi);
  write_grid(dir / "zero_filled.grid", x0);
  write_trace_csv(r.trace, dir / "trace.csv");
  export_png(r.x, dir / "x.png");
  note(ctx, dir / "x.grid");
  note(ctx, dir / "phi.grid");
  note(ctx, dir / "trace.csv");
  if (truth) {
    export_png(error_map(r.x, *truth), dir / "error.png", Colormap::Signed);
    const std::vector<LabeledReport> rows{{"zero_filled", evaluate(x0, *truth)}, {"recon", evaluate(r.x, *truth)}};
    write_metrics_csv(rows, dir / "metrics.csv");
    note(ctx, dir / "error.png");
    ctx.out << format_metrics_csv(rows);
  } else {
    // Without ground truth the error map shows the change from the zero-filled start.
    export_png(error_map(r.x, x0), dir / "error.png", Colormap::Signed);
    note(ctx, dir / "error.png");
  }
}

void cmd_eval(const RunConfig& cfg, const Inputs& in, Context& ctx) {
  if (in.image.empty() || in.truth.empty()) throw InvalidSpec("eval requires --image and --truth");
  const fs::path dir = prepare_out(cfg, ctx);
  ctx.step = "reading inputs";
  const ComplexImage image = read_complex_image(in.image);
  const ComplexImage truth = read_complex_image(in.truth);
  ctx.step = "evaluating";
  const std::vector<LabeledReport> rows{{in.label, evaluate(image, truth)}};
  ctx.step = "writing outputs";
  write_metrics_csv(rows, dir / "metrics.csv");
  ctx.out << format_metrics_csv(rows);
}

void cmd_sweep(const RunConfig& cfg, Context& ctx) {
  const fs::path dir = prepare_out(cfg, ctx);
  SweepSpec spec;
  spec.base = cfg.experiment;
  spec.solver = cfg.solver;
  spec.axis = cfg.sweep_axis;
  spec.values = cfg.sweep_values;
  spec.seeds = cfg.seeds;
  spec.variants = {Variant::ZeroFilled, Variant::SingleModal};
  if (cfg.use_ref) {
    spec.variants.push_back(Variant::MultiNoAlign);
    if (cfg.align) spec.variants.push_back(Variant::MultiAlign);
  }
  ctx.step = "running sweep";
  const auto rows = run_sweep(spec, cfg.threads);
  ctx.step = "writing outputs";
  write_sweep_csv(rows, dir / "sweep.csv");
  write_sweep_summary_csv(summarize(rows), spec.axis, dir / "sweep_summary.csv");
  note(ctx, dir / "sweep.csv");
  note(ctx, dir / "sweep_summary.csv");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint alignment and reconstruction for multi-modal undersampled MRI"};
  app.name("alignrecon");
  app.require_subcommand(1);

  CommonFlags flags;
  Inputs in;
  auto* mask = app.add_subcommand("mask", "generate a Cartesian sampling mask");
  auto* phantom = app.add_subcommand("phantom", "generate a target/reference phantom pair");
  auto* mis = app.add_subcommand("misalign", "apply a random affine + free-form misalignment");
  auto* acq = app.add_subcommand("acquire", "simulate undersampled noisy k-space");
  auto* recon = app.add_subcommand("recon", "reconstruct from k-space and a reference");
  auto* eval = app.add_subcommand("eval", "PSNR / SSIM / MAE of an image against ground truth");
  auto* sweep = app.add_subcommand("sweep", "sweep misalignment scale or stage count over seeds");
  for (auto* cmd : {mask, phantom, mis, acq, recon, eval, sweep}) add_common(cmd, flags);
  mis->add_option("--input", in.input, "reference image grid (default: phantom reference)");
  acq->add_option("--input", in.input, "target image grid (default: phantom target)");
  acq->add_option("--mask", in.mask, "mask grid (default: generated from the config)");
  recon->add_option("--kspace", in.kspace, "k-space grid (default: simulate from the config)");
  recon->add_option("--mask", in.mask, "mask grid");
  recon->add_option("--ref", in.ref, "reference image grid");
  recon->add_option("--truth", in.truth, "ground-truth image grid for metrics");
  eval->add_option("--image", in.image, "image grid");
  eval->add_option("--truth", in.truth, "ground-truth image grid");
  eval->add_option("--label", in.label, "row label");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  Context ctx{cmd->get_name(), "loading configuration", out};
  RunConfig cfg;
  try {
    cfg = resolve_config(flags);
  } catch (const Error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (cmd == mask) cmd_mask(cfg, ctx);
    else if (cmd == phantom) cmd_phantom(cfg, ctx);
    else if (cmd == mis) cmd_misalign(cfg, in, ctx);
    else if (cmd == acq) cmd_acquire(cfg, in, ctx);
    else if (cmd == recon) cmd_recon(cfg, in, ctx);
    else if (cmd == eval) cmd_eval(cfg, in, ctx);
    else cmd_sweep(cfg, ctx);
  } catch (const InvalidSpec& e) {
    err << "usage error: " << ctx.command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << ctx.command << " (" << ctx.step << "): " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace alignrecon
