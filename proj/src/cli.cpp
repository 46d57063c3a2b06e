#include "romx/cli.hpp"

#include "romx/matrix_io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef ROMX_VERSION
#define ROMX_VERSION "dev"
#endif

namespace romx::cli {
namespace fs = std::filesystem;

std::string version() {
  return ROMX_VERSION;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "+inf") return std::numeric_limits<double>::infinity();
  return parse_number<double>(key, value);
}

int parse_int(const std::string& key, const std::string& value) {
  return parse_number<int>(key, value);
}

std::string join_k(const std::vector<int>& ks) {
  std::string s;
  for (std::size_t i = 0; i < ks.size(); ++i) s += (i ? "," : "") + std::to_string(ks[i]);
  return s;
}

}  // namespace

SetupSpec RunConfig::resolved_setup() const {
  SetupSpec s = SetupSpec::by_id(setup_id);
  const SetupOverrides& o = overrides;
  if (o.D) s.D = *o.D;
  if (o.T) s.T = *o.T;
  if (o.N) s.N = *o.N;
  if (o.psnr_db) s.psnr_db = *o.psnr_db;
  if (o.gamma) s.gamma = *o.gamma;
  if (o.rho) s.rho = *o.rho;
  if (o.nu_min) s.nu_min = *o.nu_min;
  if (o.nu_max) s.nu_max = *o.nu_max;
  if (o.amplitude) s.amplitude = *o.amplitude;
  s.validate();
  return s;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  BenchmarkOptions& o = c.options;
  if (key == "setup") {
    SetupSpec::by_id(value);
    c.setup_id = value;
  } else if (key == "seed") {
    c.options.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "n1" || key == "n2") {
    const int v = parse_int(key, value);
    rb::Grid g = key == "n1" ? rb::Grid(v, o.grid.n2) : rb::Grid(o.grid.n1, v);
    o.grid = g;
  } else if (key == "particles") {
    c.overrides.N = parse_int(key, value);
  } else if (key == "num-obs") {
    c.overrides.D = parse_int(key, value);
  } else if (key == "length") {
    c.overrides.T = parse_int(key, value);
  } else if (key == "psnr-db") {
    c.overrides.psnr_db = parse_real(key, value);
  } else if (key == "gamma") {
    c.overrides.gamma = parse_real(key, value);
  } else if (key == "rho") {
    c.overrides.rho = parse_real(key, value);
  } else if (key == "nu-min") {
    c.overrides.nu_min = parse_real(key, value);
  } else if (key == "nu-max") {
    c.overrides.nu_max = parse_real(key, value);
  } else if (key == "amplitude") {
    c.overrides.amplitude = parse_real(key, value);
  } else if (key == "k-grid") {
    o.k_grid.clear();
    for (const auto& item : split_list(value)) {
      const int k = parse_int(key, item);
      if (k < 1) throw ConfigError("k-grid entries must be >= 1");
      o.k_grid.push_back(k);
    }
  } else if (key == "strategy") {
    o.strategies.clear();
    for (const auto& item : split_list(value)) o.strategies.push_back(strategy_from_string(item));
    c.strategy = o.strategies.size() == 1 ? std::optional(o.strategies.front()) : std::nullopt;
  } else if (key == "rom") {
    o.roms.clear();
    for (const auto& item : split_list(value)) o.roms.push_back(rom_family_from_string(item));
    c.rom = o.roms.size() == 1 ? std::optional(o.roms.front()) : std::nullopt;
  } else if (key == "out") {
    c.out = value;
  } else if (key == "data") {
    c.data = fs::path(value);
  } else if (key == "fit") {
    c.fit_dir = fs::path(value);
  } else if (key == "k") {
    c.k = parse_int(key, value);
  } else if (key == "threads") {
    const int t = parse_int(key, value);
    if (t < 1) throw ConfigError("threads must be >= 1");
    o.threads = static_cast<unsigned>(t);
  } else if (key == "obs-factor") {
    const auto x = value.find('x');
    const int f1 = parse_int(key, value.substr(0, x));
    const int f2 = x == std::string::npos ? 1 : parse_int(key, value.substr(x + 1));
    o.obs_factor1 = f1;
    o.obs_factor2 = f2;
  } else if (key == "substeps") {
    o.substeps = parse_int(key, value);
  } else if (key == "dt") {
    o.dt = parse_real(key, value);
  } else if (key == "integrator") {
    if (value == "rk4") {
      o.integrator = rb::Integrator::RK4;
    } else if (value == "euler") {
      o.integrator = rb::Integrator::Euler;
    } else {
      throw ConfigError("integrator must be rk4 or euler");
    }
  } else if (key == "star-all") {
    o.star_all_strategies = value == "true" || value == "1" || value == "yes";
  } else if (key == "projection") {
    o.project_initial = !(value == "false" || value == "0" || value == "no" || value == "off");
  } else if (key == "instances") {
    c.prop1_instances = parse_int(key, value);
    if (c.prop1_instances < 1) throw ConfigError("instances must be >= 1");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::string manifest_text(const RunConfig& c, const std::string& command) {
  const SetupSpec s = c.resolved_setup();
  const BenchmarkOptions& o = c.options;
  std::ostringstream m;
  m << "# romx run manifest\n";
  m << "version = " << version() << "\n";
  m << "command = " << command << "\n";
  m << "setup = " << s.id << "\n";
  m << "seed = " << o.seed << "\n";
  m << "num-obs = " << s.D << "\nlength = " << s.T << "\nparticles = " << s.N << "\n";
  m << "psnr-db = " << fmt17(s.psnr_db) << "\n";
  m << "gamma = " << fmt17(s.gamma) << "\nrho = " << fmt17(s.rho) << "\n";
  m << "nu-min = " << fmt17(s.nu_min) << "\nnu-max = " << fmt17(s.nu_max) << "\n";
  m << "amplitude = " << fmt17(s.amplitude) << "\n";
  m << "n1 = " << o.grid.n1 << "\nn2 = " << o.grid.n2 << "\n";
  m << "substeps = " << o.substeps << "\ndt = " << fmt17(o.dt) << "\n";
  m << "integrator = " << (o.integrator == rb::Integrator::RK4 ? "rk4" : "euler") << "\n";
  m << "obs-factor = " << o.obs_factor1 << "x" << o.obs_factor2 << "\n";
  m << "k-grid = " << join_k(o.k_grid) << "\n";
  m << "strategy = ";
  for (std::size_t i = 0; i < o.strategies.size(); ++i) m << (i ? "," : "") << to_string(o.strategies[i]);
  m << "\nrom = ";
  for (std::size_t i = 0; i < o.roms.size(); ++i) m << (i ? "," : "") << to_string(o.roms[i]);
  m << "\nstar-all = " << (o.star_all_strategies ? "true" : "false") << "\n";
  m << "projection = " << (o.project_initial ? "true" : "false") << "\n";
  m << "# fixed design constants\n";
  m << "# wavenumbers-true = 2pi*{1,2}; wavenumbers-surrogate = 2pi*{1,2,3,4}\n";
  m << "# vertical-harmonics-true = 1; vertical-harmonics-surrogate = 2\n";
  m << "# mode-dims = 10 (true), 20 (surrogate); perturbation-dim = 40 (20 b + 20 tau)\n";
  m << "# projection-threshold = " << fmt17(o.projection_threshold) << " (zeta <= t * peak|y|)\n";
  m << "# dmd-pinv-tol = 1e-12; pod-rank-tol = 1e-13 (eigenvalue ratio)\n";
  m << "# zeta-0-weights = uniform\n";
  return m.str();
}

std::string benchmark_csv(const BenchmarkResult& r, std::uint64_t seed) {
  std::string out = "setup,rom,strategy,k,mean_error,seed\n";
  for (const auto& row : r.rows) {
    out += r.setup.id;
    out += ',';
    out += to_string(row.rom);
    out += ',';
    out += to_string(row.strategy);
    out += ',' + std::to_string(row.k) + ',' + fmt17(row.mean_error) + ',' + std::to_string(seed) + '\n';
  }
  return out;
}

std::string gnuplot_script(const BenchmarkResult& r, const std::string& csv_name) {
  std::ostringstream g;
  g << "# gnuplot -p plot.gp\n";
  g << "set datafile separator ','\n";
  g << "set logscale y\n";
  g << "set format y '%.0e'\n";
  g << "set xlabel 'k'\nset ylabel 'mean error'\n";
  g << "set title 'setup " << r.setup.id << "'\n";
  g << "set key outside right\n";
  std::vector<std::pair<std::string, std::string>> series;
  for (const auto& row : r.rows) {
    std::pair<std::string, std::string> key{std::string(to_string(row.rom)),
                                            std::string(to_string(row.strategy))};
    if (std::find(series.begin(), series.end(), key) == series.end()) series.push_back(key);
  }
  g << "plot \\\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& [rom, st] = series[i];
    g << "  '" << csv_name << "' using ($2 eq '" << rom << "' && $3 eq '" << st
      << "' ? $4 : 1/0):5 with linespoints title '" << rom << " " << st << "'"
      << (i + 1 < series.size() ? ", \\\n" : "\n");
  }
  return g.str();
}

namespace {

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw IoError("cannot create output directory " + p.string());
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("failed writing " + p.string());
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string indexed(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, i + 1, ext);
  return buf;
}

std::string vector_text(const Vector& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt17(v(i));
  return s;
}

Vector parse_vector(const std::string& s) {
  std::istringstream in(s);
  std::vector<double> vals;
  for (std::string tok; in >> tok;) vals.push_back(parse_real("vector", tok));
  Vector v(static_cast<Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<Index>(i)) = vals[i];
  return v;
}

std::string theta_text(const ModelParameters& p) {
  return "theta1 = " + vector_text(p.theta1) + "\ntheta2 = " + vector_text(p.theta2) +
         "\nrho = " + fmt17(p.theta3.rho) + "\nnu = " + fmt17(p.theta3.nu) + "\n";
}

ModelParameters parse_theta(const std::string& text) {
  const auto kv = parse_config_text(text);
  ModelParameters p;
  try {
    p.theta1 = parse_vector(kv.at("theta1"));
    p.theta2 = parse_vector(kv.at("theta2"));
    p.theta3.rho = parse_real("rho", kv.at("rho"));
    p.theta3.nu = parse_real("nu", kv.at("nu"));
  } catch (const std::out_of_range&) {
    throw IoError("parameter file is missing a field");
  }
  return p;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw IoError("missing input directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no " + ext + " files in " + dir.string());
  return files;
}

// Data written by `generate`; parameters and observations are optional so
// hand-made trajectory sets can be fitted with the target strategy.
struct LoadedData {
  std::vector<Trajectory> x;
  std::vector<ModelParameters> theta;
  std::vector<ObservationSequence> y;
  double zeta = 0.0;
};

LoadedData load_data(const fs::path& dir, bool need_all) {
  LoadedData d;
  for (const auto& f : sorted_files(dir / "trajectories", ".romx")) d.x.emplace_back(read_romx(f));
  const bool have_rest = fs::is_directory(dir / "parameters") && fs::is_directory(dir / "observations");
  if (!have_rest) {
    if (need_all) throw IoError("missing parameters/ or observations/ in " + dir.string());
    return d;
  }
  for (const auto& f : sorted_files(dir / "parameters", ".txt")) d.theta.push_back(parse_theta(read_text(f)));
  for (const auto& f : sorted_files(dir / "observations", ".romx")) d.y.emplace_back(read_romx(f));
  if (d.theta.size() != d.x.size() || d.y.size() != d.x.size()) {
    throw IoError("trajectory, parameter and observation counts differ in " + dir.string());
  }
  const auto kv = parse_config_text(read_text(dir / "data.txt"));
  if (!kv.count("zeta")) throw IoError("data.txt has no zeta");
  d.zeta = parse_real("zeta", kv.at("zeta"));
  return d;
}

int cmd_generate(const RunConfig& c, std::ostream& out) {
  const SetupSpec s = c.resolved_setup();
  const GeneratedData g = generate_data(s, c.options);
  const fs::path dir = c.out;
  ensure_dir(dir / "trajectories");
  ensure_dir(dir / "observations");
  ensure_dir(dir / "parameters");
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    write_romx(dir / "trajectories" / indexed("x", i, ".romx"), g.x[i].data());
    write_romx(dir / "observations" / indexed("y", i, ".romx"), g.y[i].data());
    write_text(dir / "parameters" / indexed("theta", i, ".txt"), theta_text(g.theta[i]));
  }
  write_text(dir / "data.txt", "D = " + std::to_string(g.x.size()) + "\nT = " +
                                   std::to_string(s.T) + "\nn = " +
                                   std::to_string(g.x.front().n()) + "\nzeta = " + fmt17(g.zeta) + "\n");
  write_text(dir / "manifest.txt", manifest_text(c, "generate"));
  out << "generated " << g.x.size() << " trajectories of shape " << g.x.front().n() << "x" << s.T
      << " (zeta " << fmt17(g.zeta) << ") in " << dir.string() << "\n";
  return kOk;
}

// Rebuilds the inputs the sampling strategies need from persisted data.
GeneratedData as_generated(const RunConfig& c, const SetupSpec& s, LoadedData&& d) {
  GeneratedData g;
  g.space = build_parameter_space(c.options.grid, s);
  g.x = std::move(d.x);
  g.theta = std::move(d.theta);
  g.y = std::move(d.y);
  g.zeta = d.zeta;
  return g;
}

fs::path fit_dir_for(const RunConfig& c, RomFamily rom, Strategy st, int k) {
  return c.out / "fit" / (std::string(to_string(rom)) + "_" + std::string(to_string(st)) + "_k" +
                          std::to_string(k));
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
  if (!c.strategy) throw ConfigError("fit needs exactly one --strategy");
  if (!c.rom) throw ConfigError("fit needs exactly one --rom");
  if (!c.k) throw ConfigError("fit needs --k");
  const Strategy st = *c.strategy;
  const RomFamily rom = *c.rom;
  const int k = *c.k;

  const auto t0 = std::chrono::steady_clock::now();
  LoadedData loaded = load_data(c.data_dir(), st != Strategy::Target);
  WeightedSnapshots snaps;
  if (st == Strategy::Target) {
    snaps = assemble_snapshots(st, loaded.x, {});
  } else {
    const SetupSpec s = c.resolved_setup();
    const GeneratedData g = as_generated(c, s, std::move(loaded));
    const rb::RayleighBenardModel model(rb_config_for(c.options, s), g.space.perturbation_basis);
    const ObservationOperator op =
        build_lowpass(c.options.grid, c.options.obs_factor1, c.options.obs_factor2, g.zeta);
    BenchmarkOptions o = c.options;
    o.strategies = {st};
    const StrategyData sd = sample_strategies(s, o, g, model, op);
    snaps = strategy_snapshots(st, g, sd);
  }

  const fs::path dir = fit_dir_for(c, rom, st, k);
  std::ostringstream log;
  log.precision(17);
  log << "rom = " << to_string(rom) << "\nstrategy = " << to_string(st) << "\nk = " << k << "\n";
  if (rom == RomFamily::Pod) {
    const PodBasis b = pod_fit(snaps.c, k);
    ensure_dir(dir);
    save_pod_basis(dir, b);
    log << "cost = " << pod_cost(b, snaps.c) << "\nrank = " << b.rank << "\n";
    log << "eigenvalues =";
    for (Index i = 0; i < b.eigenvalues.size(); ++i) log << ' ' << b.eigenvalues(i);
    log << "\n";
  } else {
    const LowRankOperator u = dmd_fit(snaps.a, snaps.b, k);
    ensure_dir(dir);
    save_low_rank_operator(dir, u);
    log << "cost = " << dmd_cost(u, snaps.a, snaps.b) << "\nspectral_norm = " << u.spectral_norm()
        << "\n";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(dir / "fit.log", log.str());
  write_text(dir / "timing.txt", "seconds = " + fmt17(secs) + "\n");
  write_text(dir / "manifest.txt", manifest_text(c, "fit"));
  out << "wrote " << dir.string() << "\n";
  return kOk;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const SetupSpec s = c.resolved_setup();
  LoadedData loaded = load_data(c.data_dir(), true);
  fs::path dir;
  if (c.fit_dir) {
    dir = *c.fit_dir;
  } else {
    if (!c.strategy || !c.rom || !c.k) {
      throw ConfigError("evaluate needs --fit DIR or one --strategy, --rom and --k");
    }
    dir = fit_dir_for(c, *c.rom, *c.strategy, *c.k);
  }
  const GeneratedData g = as_generated(c, s, std::move(loaded));
  const rb::RayleighBenardModel model(rb_config_for(c.options, s), g.space.perturbation_basis);

  const std::string st = c.strategy ? std::string(to_string(*c.strategy)) : "unknown";
  std::string csv = "setup,rom,strategy,k,mean_error,seed\n";
  auto emit = [&](RomVariant v, int k, double mean) {
    csv += s.id + "," + std::string(to_string(v)) + "," + st + "," + std::to_string(k) + "," +
           fmt17(mean) + "," + std::to_string(c.options.seed) + "\n";
  };
  const double D = static_cast<double>(g.x.size());
  if (fs::exists(dir / "u.romx")) {
    const PodBasis b = load_pod_basis(dir);
    double rom = 0.0, star = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      rom += frobenius_error(g.x[i], pod_rom_simulate(b, model, g.theta[i], static_cast<int>(g.x[i].T())));
      star += frobenius_error(g.x[i], pod_star_project(b, g.x[i]));
    }
    emit(RomVariant::Rom1, static_cast<int>(b.k), rom / D);
    emit(RomVariant::Rom1Star, static_cast<int>(b.k), star / D);
  } else if (fs::exists(dir / "w.romx")) {
    const LowRankOperator u = load_low_rank_operator(dir);
    double rom = 0.0, star = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      rom += frobenius_error(g.x[i], dmd_rom_simulate(u, model, g.theta[i], static_cast<int>(g.x[i].T())));
      star += frobenius_error(g.x[i], dmd_star_predict(u, g.x[i]));
    }
    emit(RomVariant::Rom2, static_cast<int>(u.k()), rom / D);
    emit(RomVariant::Rom2Star, static_cast<int>(u.k()), star / D);
  } else {
    throw IoError("no fitted ROM found in " + dir.string());
  }
  ensure_dir(c.out);
  write_text(c.out / "evaluate.csv", csv);
  out << csv;
  return kOk;
}

std::string sandwich_text(const BenchmarkResult& r) {
  const SandwichStats& w = r.sandwich;
  std::ostringstream s;
  s << "pod_checks = " << w.pod_checks << "\npod_lower_violations = " << w.pod_lower_violations
    << "\npod_observed_constant = " << fmt17(w.pod_max_ratio) << "\ndmd_checks = " << w.dmd_checks
    << "\ndmd_lower_violations = " << w.dmd_lower_violations
    << "\ndmd_upper_violations = " << w.dmd_upper_violations
    << "\ndmd_worst_lower_ratio = " << fmt17(w.dmd_worst_lower)
    << "\ndmd_worst_upper_ratio = " << fmt17(w.dmd_worst_upper) << "\nzeta = " << fmt17(r.zeta)
    << "\nmean_state_norm = " << fmt17(r.mean_state_norm) << "\n";
  return s.str();
}

int cmd_benchmark(const RunConfig& c, std::ostream& out) {
  const SetupSpec s = c.resolved_setup();
  if (c.options.strategies.empty()) throw ConfigError("no strategies selected");
  const std::string manifest = manifest_text(c, "benchmark");
  const BenchmarkResult r = run_setup(s, c.options);
  const std::string csv = benchmark_csv(r, c.options.seed);
  ensure_dir(c.out);
  write_text(c.out / "manifest.txt", manifest);
  write_text(c.out / "benchmark.csv", csv);
  write_text(c.out / "plot.gp", gnuplot_script(r, "benchmark.csv"));
  write_text(c.out / "sandwich.txt", sandwich_text(r));
  out << "wrote " << r.rows.size() << " rows to " << (c.out / "benchmark.csv").string() << "\n";
  return kOk;
}

int cmd_prop1(const RunConfig& c, std::ostream& out) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < c.prop1_instances; ++i) seeds.push_back(c.options.seed + static_cast<std::uint64_t>(i));
  const std::vector<std::pair<int, int>> dims{{1, 1}, {2, 1}, {3, 2}, {4, 2}, {6, 3}, {8, 4}};
  const Prop1Report rep = prop1_gaussian_check(dims, seeds);
  std::ostringstream s;
  s << "instances = " << rep.results.size() << "\nviolations = " << rep.violations
    << "\nstrict = " << rep.strict << "\nmin_slack = " << fmt17(rep.min_slack) << "\n";
  ensure_dir(c.out);
  write_text(c.out / "prop1.txt", s.str());
  out << s.str();
  return rep.violations == 0 ? kOk : kFailure;
}

struct Flag {
  const char* name;
  const char* help;
};

constexpr Flag kFlags[] = {
    {"setup", "benchmark setup: i, ii, iii, iv or v"},
    {"seed", "master RNG seed"},
    {"n1", "grid points along s1 (power of two)"},
    {"n2", "grid points along s2 (power of two)"},
    {"particles", "particles per observation sequence (N)"},
    {"num-obs", "number of observation sequences (D)"},
    {"length", "trajectory length (T)"},
    {"k-grid", "comma-separated ROM dimensions"},
    {"strategy", "comma-separated: target,enhanced,initial,point"},
    {"rom", "comma-separated: pod,dmd"},
    {"out", "output directory"},
    {"data", "directory written by generate (default: --out)"},
    {"psnr-db", "observation PSNR in dB (inf = noise-free)"},
    {"gamma", "initial-condition slice half-thickness"},
    {"rho", "Prandtl number"},
    {"nu-min", "lower end of the Rayleigh number range"},
    {"nu-max", "upper end of the Rayleigh number range"},
    {"amplitude", "initial amplitude half-width"},
    {"threads", "worker threads (default: ROMX_THREADS or hardware)"},
    {"obs-factor", "observation coarsening, F or F1xF2"},
    {"substeps", "integrator substeps per macro step"},
    {"dt", "substep size"},
    {"integrator", "rk4 or euler"},
    {"k", "ROM dimension for fit/evaluate"},
    {"fit", "fitted ROM directory for evaluate"},
    {"star-all", "idealized variants for every strategy (true/false)"},
    {"projection", "initial-condition projection in the enhanced sampler (true/false)"},
    {"instances", "prop1-check instance count"},
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"romx: reduced-order models from surrogate priors and observations"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  const char* names[] = {"generate", "fit", "evaluate", "benchmark", "prop1-check"};
  const char* descriptions[] = {"simulate hidden trajectories and observe them",
                                "fit one ROM from generated data", "evaluate a fitted ROM",
                                "run a full setup and write the error curves",
                                "check the KL inequality on linear-Gaussian instances"};
  std::map<std::string, std::string> given;
  std::string config_path;
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descriptions[i]);
    sub->add_option("--config", config_path, "key = value configuration file");
    for (const Flag& f : kFlags) {
      sub->add_option_function<std::string>(
          std::string("--") + f.name, [&given, name = f.name](const std::string& v) { given[name] = v; },
          f.help);
    }
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  std::string command;
  for (int i = 0; i < 5; ++i) {
    if (subs[static_cast<std::size_t>(i)]->parsed()) command = names[i];
  }

  try {
    RunConfig config;
    config.options.threads = default_thread_count();
    if (!config_path.empty()) {
      for (const auto& [k, v] : parse_config_text(read_text(config_path))) apply_setting(config, k, v);
    }
    // "setup" first so later per-field overrides are not order dependent.
    if (auto it = given.find("setup"); it != given.end()) apply_setting(config, "setup", it->second);
    for (const auto& [k, v] : given) {
      if (k != "setup") apply_setting(config, k, v);
    }

    if (const char* env = std::getenv("ROMX_THREADS")) {
      const long cap = std::atol(env);
      if (cap > 0) config.options.threads = std::min(config.options.threads, static_cast<unsigned>(cap));
    }

    if (command == "generate") return cmd_generate(config, out);
    if (command == "fit") return cmd_fit(config, out);
    if (command == "evaluate") return cmd_evaluate(config, out);
    if (command == "benchmark") return cmd_benchmark(config, out);
    if (command == "prop1-check") return cmd_prop1(config, out);
    err << "error: no subcommand\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DegenerateError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace romx::cli
