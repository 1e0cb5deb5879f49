// hinfx: explicit min-max control synthesis from the command line.
//
//   hinfx synth    --spec problem.yaml --out DIR
//   hinfx check    --out DIR
//   hinfx simulate --out DIR --x0 1.5,-0.3 --steps 40 --disturbance worst
//   hinfx oracle   --out DIR --samples 50
//
// Exit codes: 0 pass, 1 failure, 2 input error.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hinfx/errors.hpp"
#include "hinfx/serialize.hpp"
#include "hinfx/specfile.hpp"
#include "hinfx/verify.hpp"

namespace fs = std::filesystem;
using namespace hinfx;

namespace {

struct TolOverrides {
  std::optional<double> feas, kkt, act, pd, interior, step, redundancy, dedup, cont, c1;

  void attach(CLI::App* app) {
    app->add_option("--tol-feas", feas, "feasibility slack");
    app->add_option("--tol-kkt", kkt, "KKT residual");
    app->add_option("--tol-act", act, "activation threshold");
    app->add_option("--tol-pd", pd, "definiteness threshold");
    app->add_option("--tol-interior", interior, "Chebyshev radius of a flat set");
    app->add_option("--tol-step", step, "outward facet step");
    app->add_option("--tol-redundancy", redundancy, "redundant-row slack");
    app->add_option("--tol-dedup", dedup, "identical-region match");
    app->add_option("--tol-cont", cont, "relative continuity gap");
    app->add_option("--tol-c1", c1, "gradient jump classified as C1");
  }

  void apply(Tolerances& t) const {
    for (auto [src, dst] : {std::pair{&feas, &t.feas}, {&kkt, &t.kkt}, {&act, &t.act},
                            {&pd, &t.pd}, {&interior, &t.interior}, {&step, &t.step},
                            {&redundancy, &t.redundancy}, {&dedup, &t.dedup},
                            {&cont, &t.cont}, {&c1, &t.c1}}) {
      if (*src) {
        if (!(**src > 0.0)) throw InputError("tolerances must be positive");
        *dst = **src;
      }
    }
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError(p.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw InputError(p.string() + ": cannot write");
  out << text;
}

fs::path stage_path(const fs::path& out, int j) { return out / ("stage_" + std::to_string(j) + ".txt"); }

std::string summary_line(const StageResult& s) {
  if (s.j == 0) return "stage 0: x-regions: 1";
  std::string line = fmt::format(
      "stage {}: x-regions: {} (merged {}, explored {}), z-regions: {} (merged {}, explored {})",
      s.j, s.x_regions, s.x_merged, s.x_explored, s.z_regions, s.z_merged, s.z_explored);
  const int overlaps = s.max_stats.overlapping_pairs + s.min_stats.overlapping_pairs;
  if (overlaps) line += fmt::format(", overlapping pairs: {}", overlaps);
  if (!s.XjStar.empty()) line += fmt::format(", X* pieces: {}", s.XjStar.size());
  return line;
}

// Everything a finished synthesis directory holds.
struct Artifacts {
  SpecFile spec;
  TerminalPair pair;
  ProblemSpec problem;
  std::vector<StageResult> stages;
};

Artifacts load_artifacts(const fs::path& dir, const TolOverrides& tol) {
  Artifacts a;
  a.spec = load_spec((dir / "spec.yaml").string());
  tol.apply(a.spec.tol);
  {
    std::istringstream is(read_file(dir / "terminal.txt"));
    RecordReader in(is, (dir / "terminal.txt").string());
    a.pair = read_terminal(in, a.spec.tol);
  }
  SpecFile fixed = a.spec;
  fixed.terminal = TerminalSource::Given;
  fixed.Pf = a.pair.P;
  fixed.Xf = RowSet::of(a.pair.Xf);
  a.problem = fixed.problem();
  for (int j = 0; j <= a.spec.N; ++j) {
    const fs::path p = stage_path(dir, j);
    std::istringstream is(read_file(p));
    RecordReader in(is, p.string());
    a.stages.push_back(read_stage(in, a.spec.tol));
  }
  // Constraint sets of the minimization are not dumped; rebuild them.
  for (int j = 1; j <= a.spec.N; ++j)
    a.stages[j].feasible_xu =
        build_min_problem(a.problem, a.stages[j].J, a.stages[j - 1].Xj, a.stages[j].Xj).feasible_xu;
  return a;
}

int cmd_synth(const std::string& spec_path, const fs::path& out, std::optional<std::uint64_t> seed,
              const TolOverrides& tol) {
  SpecFile sf = load_spec(spec_path);
  tol.apply(sf.tol);
  if (seed) sf.seed = *seed;
  fs::create_directories(out / "plot");
  write_file(out / "spec.yaml", serialize_spec(sf));

  TerminalPair pair;
  const ProblemSpec problem = sf.problem(&pair);
  {
    std::ostringstream os;
    write_terminal(os, pair);
    write_file(out / "terminal.txt", os.str());
  }
  std::string summary = fmt::format("mode {}\nhorizon {}\n", to_string(sf.mode), sf.N);
  const bool plots = problem.model.n() == 2;
  int last_x = 0, last_z = 0;
  run_recursion(problem, [&](const StageResult& s) {
    std::ostringstream os;
    write_stage(os, s);
    write_file(stage_path(out, s.j), os.str());
    if (plots) {
      std::ostringstream px;
      write_plot_loops(px, s.V.cells, problem.tol);
      write_file(out / "plot" / fmt::format("x_regions_{}.txt", s.j), px.str());
      if (!s.XjStar.empty()) {
        std::ostringstream ps;
        write_plot_loops(ps, s.XjStar, problem.tol);
        write_file(out / "plot" / fmt::format("xstar_{}.txt", s.j), ps.str());
      }
    }
    summary += summary_line(s) + "\n";
    last_x = s.x_regions;
    last_z = s.z_regions;
    std::cout << summary_line(s) << std::endl;
  });
  summary += fmt::format("final: x-regions: {}, z-regions: {}\n", last_x, last_z);
  write_file(out / "summary.txt", summary);
  return 0;
}

int cmd_check(const fs::path& dir, std::optional<std::uint64_t> seed, int samples,
              const TolOverrides& tol) {
  const Artifacts a = load_artifacts(dir, tol);
  std::mt19937_64 rng(seed.value_or(a.spec.seed));
  SuiteReport rep = terminal_suite(a.problem.model, a.pair, a.problem.X, a.problem.U, a.problem.W,
                                   rng, a.problem.tol);
  StageSuiteOptions so;
  so.samples = samples;
  rep.append(stage_suite(a.problem, a.stages, a.pair.Ku, rng, so));
  rep.append(closed_loop_suite(a.problem, a.stages, rng));
  write_file(dir / "check.txt", rep.text());
  std::cout << rep.text() << fmt::format("{} checks, {} failed\n", rep.lines.size(), rep.failures());
  return rep.ok() ? 0 : 1;
}

int cmd_oracle(const fs::path& dir, std::optional<std::uint64_t> seed, int samples,
               const TolOverrides& tol) {
  const Artifacts a = load_artifacts(dir, tol);
  std::mt19937_64 rng(seed.value_or(a.spec.seed));
  OracleSuiteOptions opt;
  opt.samples = samples;
  opt.config.tol = a.problem.tol;
  const SuiteReport rep = oracle_suite(a.problem, a.stages, rng, opt);
  write_file(dir / "oracle.txt", rep.text());
  std::cout << rep.text() << fmt::format("{} checks, {} failed\n", rep.lines.size(), rep.failures());
  return rep.ok() ? 0 : 1;
}

VectorXd parse_vector(const std::string& text, const std::string& what) {
  std::string t = text;
  for (char& c : t)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream ss(t);
  std::vector<double> v;
  for (std::string w; ss >> w;) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size()) throw InputError(what + ": not a number: '" + w + "'");
    v.push_back(d);
  }
  return Eigen::Map<VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int cmd_simulate(const fs::path& dir, const std::string& x0_text, int steps,
                 const std::string& mode, const std::string& wfile,
                 std::optional<std::uint64_t> seed, const TolOverrides& tol) {
  const Artifacts a = load_artifacts(dir, tol);
  if (a.spec.N < 1) throw InputError("simulation needs a horizon N >= 1");
  if (steps < 0) throw InputError("--steps must be nonnegative");
  const ClosedLoop loop = ClosedLoop::from_stages(a.problem, a.stages);
  const VectorXd x0 = parse_vector(x0_text, "--x0");
  if (x0.size() != a.problem.model.n())
    throw InputError(fmt::format("--x0 needs {} entries", a.problem.model.n()));
  if (!loop.XN.contains(x0, a.problem.tol.feas)) throw InputError("--x0 is outside X_N");

  DisturbanceSource src;
  src.seed = seed.value_or(a.spec.seed);
  if (mode == "zero") {
    src.kind = DisturbanceKind::Zero;
  } else if (mode == "worst") {
    src.kind = DisturbanceKind::Worst;
  } else if (mode == "random") {
    src.kind = DisturbanceKind::Random;
  } else if (mode == "adversary") {
    src.kind = DisturbanceKind::Adversary;
  } else if (mode == "file") {
    if (wfile.empty()) throw InputError("--disturbance file needs --disturbance-file");
    src.kind = DisturbanceKind::Sequence;
    std::istringstream is(read_file(wfile));
    int line = 0;
    for (std::string l; std::getline(is, l);) {
      ++line;
      if (l.find_first_not_of(" \t\r") == std::string::npos || l[0] == '#') continue;
      VectorXd w = parse_vector(l, wfile + ":" + std::to_string(line));
      if (w.size() != a.problem.model.p())
        throw InputError(fmt::format("{}:{}: a disturbance needs {} entries", wfile, line,
                                     a.problem.model.p()));
      if (!a.problem.W.contains(w, a.problem.tol.feas))
        throw InputError(fmt::format("{}:{}: disturbance outside W", wfile, line));
      src.sequence.push_back(std::move(w));
    }
  } else {
    throw InputError("--disturbance must be zero, worst, random, adversary or file");
  }

  try {
    const Trajectory t = simulate(loop, x0, src, steps, a.problem.tol);
    write_file(dir / "trajectory.csv", trajectory_csv(t));
    const auto c = finite_gain_certificate(a.problem.model, t);
    const std::string cert = fmt::format(
        "convention {}\noutput_energy {}\ndisturbance_energy {}\ninitial_value {}\nslack {}\n"
        "settled {}\nstatus {}\n",
        GainCertificate::kConvention, format_double(c.output_energy),
        format_double(c.disturbance_energy), format_double(c.initial_value), format_double(c.slack),
        c.settled ? "yes" : "no",
        !c.settled ? "inconclusive" : (c.slack >= -1e-7 ? "certified" : "violated"));
    write_file(dir / "certificate.txt", cert);
    std::cout << cert;
    return c.settled && c.slack < -1e-7 ? 1 : 0;
  } catch (const CertificateViolation& e) {
    std::cerr << "certificate violation: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit constrained min-max control synthesis"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log stage progress to stderr");

  std::string spec, out, x0, disturbance = "zero", wfile;
  std::optional<std::uint64_t> seed;
  int samples = 50, steps = 50;
  TolOverrides tol;

  auto* synth = app.add_subcommand("synth", "solve the recursion and write stage dumps");
  synth->add_option("--spec", spec, "problem file")->required();
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--seed", seed, "random seed");
  tol.attach(synth);

  auto* check = app.add_subcommand("check", "run the invariant suites on a synthesis directory");
  check->add_option("--out", out, "synthesis directory")->required();
  check->add_option("--seed", seed, "random seed");
  check->add_option("--samples", samples, "samples per sampled property")->check(CLI::PositiveNumber);
  tol.attach(check);

  auto* sim = app.add_subcommand("simulate", "closed-loop receding-horizon rollout");
  sim->add_option("--out", out, "synthesis directory")->required();
  sim->add_option("--x0", x0, "initial state, comma separated")->required();
  sim->add_option("--steps", steps, "number of steps");
  sim->add_option("--disturbance", disturbance, "zero | worst | random | adversary | file");
  sim->add_option("--disturbance-file", wfile, "one disturbance per line");
  sim->add_option("--seed", seed, "random seed");
  tol.attach(sim);

  auto* orc = app.add_subcommand("oracle", "compare against brute-force solutions");
  orc->add_option("--out", out, "synthesis directory")->required();
  orc->add_option("--samples", samples, "samples per stage")->check(CLI::PositiveNumber);
  orc->add_option("--seed", seed, "random seed");
  tol.attach(orc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto logger = spdlog::stderr_color_mt("hinfx");
  spdlog::set_default_logger(logger);
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (*synth) return cmd_synth(spec, out, seed, tol);
    if (*check) return cmd_check(out, seed, samples, tol);
    if (*sim) return cmd_simulate(out, x0, steps, disturbance, wfile, seed, tol);
    if (*orc) return cmd_oracle(out, seed, samples, tol);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
