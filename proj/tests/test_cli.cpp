#include "doctest.h"

#include "romx/cli.hpp"
#include "romx/matrix_io.hpp"
#include "romx/pod.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace romx;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("romx_cli_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto kv = cli::parse_config_text("# header\nsetup = ii\n  seed=7  # trailing\n\nk-grid = 2, 5\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("setup") == "ii");
  CHECK(kv.at("seed") == "7");
  CHECK(kv.at("k-grid") == "2, 5");
  CHECK_THROWS_AS(cli::parse_config_text("no equals sign"), ConfigError);
}

TEST_CASE("settings resolve onto the run config") {
  cli::RunConfig c;
  cli::apply_setting(c, "setup", "iv");
  cli::apply_setting(c, "particles", "12");
  cli::apply_setting(c, "k-grid", "2,5,10");
  cli::apply_setting(c, "strategy", "target,point");
  cli::apply_setting(c, "obs-factor", "4x2");
  cli::apply_setting(c, "psnr-db", "inf");
  const SetupSpec s = c.resolved_setup();
  CHECK(s.T == 5);
  CHECK(s.N == 12);
  CHECK(std::isinf(s.psnr_db));
  CHECK(c.options.k_grid == std::vector<int>{2, 5, 10});
  CHECK(c.options.strategies.size() == 2);
  CHECK_FALSE(c.strategy.has_value());
  CHECK(c.options.obs_factor1 == 4);
  CHECK(c.options.obs_factor2 == 2);
  CHECK_THROWS_AS(cli::apply_setting(c, "seed", "abc"), ConfigError);
  CHECK_THROWS_AS(cli::apply_setting(c, "colour", "red"), ConfigError);
  CHECK_THROWS_AS(cli::apply_setting(c, "rom", "svd"), ConfigError);
  CHECK_THROWS_AS(cli::apply_setting(c, "setup", "vii"), ConfigError);
  CHECK_THROWS_AS(cli::apply_setting(c, "n1", "12"), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--version"}).out == cli::version() + "\n");
  CHECK(run({}).code == cli::kConfigError);
  CHECK(run({"benchmark", "--no-such-flag"}).code == cli::kConfigError);
  CHECK(run({"benchmark", "--setup", "x"}).code == cli::kConfigError);
  const Run empty = run({"benchmark", "--strategy", "", "--out", fresh_dir("empty").string()});
  CHECK(empty.code == cli::kConfigError);
  CHECK(empty.err.find("no strategies selected") != std::string::npos);
  CHECK(run({"fit", "--data", "/nonexistent/romx", "--strategy", "target", "--rom", "pod", "--k", "1"})
            .code == cli::kIoError);
  CHECK(run({"generate", "--config", "/nonexistent/romx.cfg"}).code == cli::kIoError);
  // an output path under a regular file cannot be created
  const fs::path blocker = fresh_dir("blocker");
  { std::ofstream(blocker) << "x"; }
  CHECK(run({"generate", "--num-obs", "2", "--out", (blocker / "sub").string()}).code == cli::kIoError);
  fs::remove_all(blocker);
}

TEST_CASE("generate writes one file per trajectory, deterministically") {
  const fs::path a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  REQUIRE(run({"generate", "--setup", "i", "--seed", "7", "--out", a.string()}).code == 0);
  REQUIRE(run({"generate", "--setup", "i", "--seed", "7", "--out", b.string()}).code == 0);
  int count = 0;
  for (const auto& e : fs::directory_iterator(a / "trajectories")) {
    const Matrix x = read_romx(e.path());
    CHECK(x.rows() == 512);
    CHECK(x.cols() == 2);
    CHECK(slurp(e.path()) == slurp(b / "trajectories" / e.path().filename()));
    ++count;
  }
  CHECK(count == 30);
  CHECK(fs::exists(a / "observations" / "y_0030.romx"));
  CHECK(fs::exists(a / "parameters" / "theta_0001.txt"));
  CHECK(slurp(a / "manifest.txt") == slurp(b / "manifest.txt"));
  const std::string manifest = slurp(a / "manifest.txt");
  CHECK(manifest.find("version = " + cli::version()) != std::string::npos);
  CHECK(manifest.find("seed = 7") != std::string::npos);

  const fs::path iv = fresh_dir("gen_iv");
  REQUIRE(run({"generate", "--setup", "iv", "--out", iv.string()}).code == 0);
  count = 0;
  for (const auto& e : fs::directory_iterator(iv / "trajectories")) {
    CHECK(read_romx(e.path()).cols() == 5);
    ++count;
  }
  CHECK(count == 10);

  // the 32x16 grid gives n = 1024
  const fs::path big = fresh_dir("gen_big");
  REQUIRE(run({"generate", "--n1", "32", "--num-obs", "2", "--out", big.string()}).code == 0);
  CHECK(read_romx(big / "trajectories" / "x_0001.romx").rows() == 1024);
  for (const auto& d : {a, b, iv, big}) fs::remove_all(d);
}

TEST_CASE("fit passthrough examples") {
  const fs::path d = fresh_dir("fit_pod");
  fs::create_directories(d / "trajectories");
  Matrix c(3, 2);
  c << 2, 0, 0, 1, 0, 0;
  write_romx(d / "trajectories" / "x_0001.romx", c);
  REQUIRE(run({"fit", "--data", d.string(), "--out", d.string(), "--strategy", "target", "--rom", "pod",
               "--k", "1"})
              .code == 0);
  const fs::path pod = d / "fit" / "pod_target_k1";
  CHECK((read_romx(pod / "u.romx") - Matrix::Identity(3, 1)).norm() <= 1e-14);
  CHECK(slurp(pod / "fit.log").find("eigenvalues = 4") != std::string::npos);
  const std::string first = slurp(pod / "u.romx");
  REQUIRE(run({"fit", "--data", d.string(), "--out", d.string(), "--strategy", "target", "--rom", "pod",
               "--k", "1"})
              .code == 0);
  CHECK(slurp(pod / "u.romx") == first);
  CHECK(run({"fit", "--data", d.string(), "--out", d.string(), "--strategy", "enhanced", "--rom", "pod",
             "--k", "1"})
            .code == cli::kIoError);
  CHECK(run({"fit", "--data", d.string(), "--out", d.string(), "--rom", "pod", "--k", "1"}).code ==
        cli::kConfigError);
  fs::remove_all(d);

  // identity dynamics: x_2 = x_1 = e_i
  const fs::path e = fresh_dir("fit_dmd");
  fs::create_directories(e / "trajectories");
  for (int i = 0; i < 3; ++i) {
    Matrix x = Matrix::Zero(3, 2);
    x(i, 0) = x(i, 1) = 1.0;
    write_romx(e / "trajectories" / ("x_000" + std::to_string(i + 1) + ".romx"), x);
  }
  REQUIRE(run({"fit", "--data", e.string(), "--out", e.string(), "--strategy", "target", "--rom", "dmd",
               "--k", "3"})
              .code == 0);
  const fs::path dmd = e / "fit" / "dmd_target_k3";
  const LowRankOperator u = load_low_rank_operator(dmd);
  CHECK((u.dense() - Matrix::Identity(3, 3)).norm() <= 1e-10);
  fs::remove_all(e);
}

TEST_CASE("generate, fit and evaluate chain") {
  const fs::path d = fresh_dir("chain");
  const std::vector<std::string> common{"--setup", "ii", "--num-obs", "4", "--particles", "6", "--seed", "3",
                                        "--out", d.string()};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), common.begin(), common.end());
    return head;
  };
  REQUIRE(run(with({"generate"})).code == 0);
  REQUIRE(run(with({"fit", "--strategy", "enhanced", "--rom", "dmd", "--k", "5"})).code == 0);
  const Run ev = run(with({"evaluate", "--strategy", "enhanced", "--rom", "dmd", "--k", "5"}));
  REQUIRE(ev.code == 0);
  CHECK(ev.out.rfind("setup,rom,strategy,k,mean_error,seed\n", 0) == 0);
  CHECK(ev.out.find("ii,ROM-2,enhanced,5,") != std::string::npos);
  CHECK(ev.out.find("ii,ROM-2*,enhanced,5,") != std::string::npos);
  CHECK(slurp(d / "evaluate.csv") == ev.out);
  fs::remove_all(d);
}

TEST_CASE("benchmark outputs: schema, plot script, determinism") {
  const fs::path a = fresh_dir("bench_a"), b = fresh_dir("bench_b");
  const std::vector<std::string> base{"benchmark", "--setup", "i", "--num-obs", "5", "--particles", "6",
                                      "--k-grid", "2,5,10", "--seed", "11"};
  auto args = [&](const fs::path& out, const char* threads) {
    auto v = base;
    v.insert(v.end(), {"--out", out.string(), "--threads", threads});
    return v;
  };
  REQUIRE(run(args(a, "1")).code == 0);
  REQUIRE(run(args(b, "3")).code == 0);
  const std::string csv = slurp(a / "benchmark.csv");
  CHECK(csv == slurp(b / "benchmark.csv"));
  CHECK(csv.rfind("setup,rom,strategy,k,mean_error,seed\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    REQUIRE(fields.size() == 6);
    CHECK(fields[0] == "i");
    CHECK(fields[5] == "11");
    CHECK(std::stod(fields[4]) >= 0.0);
  }
  // k <= 5 for DMD on target/point (a has 5 columns); ensembles allow all three.
  CHECK(rows == (3 + 3 + 3 + 3) + (2 + 3 + 3 + 2) + (3 + 2));
  const std::string gp = slurp(a / "plot.gp");
  CHECK(gp.find("set logscale y") != std::string::npos);
  CHECK(gp.find("benchmark.csv") != std::string::npos);
  CHECK(slurp(a / "manifest.txt").find("k-grid = 2,5,10") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("config file with command-line override") {
  const fs::path d = fresh_dir("cfg");
  fs::create_directories(d);
  {
    std::ofstream cfg(d / "run.cfg");
    cfg << "# small run\nsetup = iii\nnum-obs = 3\nseed = 4\n";
  }
  REQUIRE(run({"generate", "--config", (d / "run.cfg").string(), "--seed", "9", "--out", (d / "o").string()})
              .code == 0);
  const std::string m = slurp(d / "o" / "manifest.txt");
  CHECK(m.find("setup = iii") != std::string::npos);
  CHECK(m.find("num-obs = 3") != std::string::npos);
  CHECK(m.find("seed = 9") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("prop1-check subcommand") {
  const fs::path d = fresh_dir("prop1");
  const Run r = run({"prop1-check", "--out", d.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("violations = 0") != std::string::npos);
  CHECK(fs::exists(d / "prop1.txt"));
  fs::remove_all(d);
}
