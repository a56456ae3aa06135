#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "alignrecon/cli.hpp"
#include "alignrecon/io.hpp"
#include "alignrecon/run_config.hpp"
#include "alignrecon/solver.hpp"

using namespace alignrecon;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "alignrecon_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parsing and errors") {
    const RunConfig c = parse_run_config("# comment\nstages = 3\n\nlambda=0.5 # trailing\nseeds = 1, 2,3\n");
    CHECK(c.solver.stages == 3);
    CHECK(c.solver.lambda == 0.5);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(c.solver.eta == SolverConfig{}.eta);

    CHECK_THROWS_AS(parse_run_config("nonsense = 1\n"), InvalidSpec);
    CHECK_THROWS_AS(parse_run_config("stages = 1\nstages = 2\n"), InvalidSpec);
    CHECK_THROWS_AS(parse_run_config("stages = many\n"), InvalidSpec);
    CHECK_THROWS_AS(parse_run_config("just a line\n"), InvalidSpec);
    CHECK_THROWS_AS(parse_run_config("pattern = spiral\n"), InvalidSpec);
    CHECK_THROWS_AS(parse_run_config("align = maybe\n"), InvalidSpec);
  }

  TEST_CASE("format then parse reproduces the config") {
    RunConfig c;
    c.solver.lambda = 0.005;
    c.solver.alpha = 1.0 / 3.0;
    c.experiment.noise_sigma = 0.1 + 0.2;
    c.seeds = {4, 5};
    c.sweep_axis = SweepAxis::Stages;
    c.sweep_values = {1, 4, 8};
    c.align = false;
    const std::string text = format_run_config(c);
    CHECK(format_run_config(parse_run_config(text)) == text);
    CHECK(parse_run_config(text).solver.alpha == c.solver.alpha);
    CHECK(text.find("lambda = 0.005\n") != std::string::npos);
    // Every key appears once.
    for (const auto& key : run_config_keys()) CHECK(text.find(key + " = ") != std::string::npos);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 1") {
    CHECK(run({}) == kExitUsage);
    CHECK(run({"frobnicate"}) == kExitUsage);
    CHECK(run({"mask", "--accel", "5"}) == kExitUsage);
    CHECK(run({"mask", "--set", "bogus=1", "--out", scratch("bogus").string()}) == kExitUsage);
    CHECK(run({"mask", "--config", "/nonexistent/config.txt"}) == kExitUsage);
    CHECK(run({"--help"}) == kExitOk);
  }

  TEST_CASE("runtime errors exit with 2") {
    const fs::path dir = scratch("runtime");
    std::ofstream(dir / "junk.grid") << "not a grid";
    std::string err;
    CHECK(run({"eval", "--image", (dir / "junk.grid").string(), "--truth", (dir / "junk.grid").string(), "--out",
               dir.string()},
              nullptr, &err) == kExitRuntime);
    CHECK(err.find("error: eval") != std::string::npos);
  }

  TEST_CASE("mask command writes grid and image") {
    const fs::path dir = scratch("mask");
    CHECK(run({"mask", "--out", dir.string(), "--accel", "8", "--set", "size=64"}) == kExitOk);
    CHECK(read_mask(dir / "mask.grid").sampled_count() == 8);
    CHECK(fs::exists(dir / "mask.png"));
    CHECK(fs::exists(dir / "config.txt"));
  }

  TEST_CASE("recon with zero stages writes the zero-filled image") {
    const fs::path dir = scratch("recon0");
    CHECK(run({"recon", "--out", dir.string(), "--stages", "0", "--set", "size=64"}) == kExitOk);
    const ComplexImage x = read_complex_image(dir / "x.grid");
    const ComplexImage zf = read_complex_image(dir / "zero_filled.grid");
    CHECK(x == zf);
    for (const char* f : {"phi.grid", "trace.csv", "x.png", "error.png", "metrics.csv"}) CHECK(fs::exists(dir / f));
  }

  TEST_CASE("pipeline commands chain through files") {
    const fs::path dir = scratch("chain");
    const std::string d = dir.string();
    REQUIRE(run({"phantom", "--out", d, "--seed", "3", "--set", "size=64"}) == kExitOk);
    REQUIRE(run({"misalign", "--out", d, "--input", d + "/reference.grid", "--sigma", "1", "--set", "size=64"}) ==
            kExitOk);
    REQUIRE(run({"acquire", "--out", d, "--input", d + "/target.grid", "--set", "size=64"}) == kExitOk);
    REQUIRE(run({"recon", "--out", d + "/recon", "--kspace", d + "/kspace.grid", "--mask", d + "/mask.grid", "--ref",
                 d + "/reference_misaligned.grid", "--truth", d + "/target.grid", "--stages", "2"}) == kExitOk);
    const auto rows = read_metrics_csv(dir / "recon" / "metrics.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].report.psnr > rows[0].report.psnr);

    std::string out;
    REQUIRE(run({"eval", "--out", d + "/eval", "--image", d + "/target.grid", "--truth", d + "/target.grid"}, &out) ==
            kExitOk);
    const auto self = read_metrics_csv(dir / "eval" / "metrics.csv");
    REQUIRE(self.size() == 1);
    CHECK(self[0].report.psnr == 100.0);
    CHECK(self[0].report.ssim == 1.0);
    CHECK(self[0].report.mae == 0.0);
    CHECK(out.find("100.000000,1.000000,0.000000") != std::string::npos);
  }

  TEST_CASE("config copy reproduces the run") {
    const fs::path a = scratch("copy_a"), b = scratch("copy_b");
    REQUIRE(run({"recon", "--out", a.string(), "--stages", "2", "--sigma", "1", "--seed", "7", "--set", "size=64"}) ==
            kExitOk);
    REQUIRE(run({"recon", "--config", (a / "config.txt").string(), "--out", b.string()}) == kExitOk);
    std::ifstream fa(a / "x.grid", std::ios::binary), fb(b / "x.grid", std::ios::binary);
    const std::string xa{std::istreambuf_iterator<char>(fa), {}}, xb{std::istreambuf_iterator<char>(fb), {}};
    CHECK(xa == xb);
  }

  TEST_CASE("sweep writes long and summary tables") {
    const fs::path dir = scratch("sweep");
    REQUIRE(run({"sweep", "--out", dir.string(), "--stages", "1", "--set", "size=64", "--set", "seeds=0,1", "--set",
                 "sweep_values=0,1"}) == kExitOk);
    std::ifstream in(dir / "sweep.csv");
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 2 * 2 * 4);
    CHECK(fs::exists(dir / "sweep_summary.csv"));
  }
}
