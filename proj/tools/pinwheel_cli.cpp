// Command-line driver: solve, sweep, partition, nodal, verify, bubble,
// rsweep. Artifacts go under --out; manifest.json there lists them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pinwheel/errors.hpp"
#include "pinwheel/io.hpp"
#include "pinwheel/kernels.hpp"
#include "pinwheel/segregation.hpp"
#include "pinwheel/solver.hpp"
#include "pinwheel/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pinwheel;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Options {
  std::string config;
  std::string out = "pinwheel_out";
  int workers = 0;
  bool resume = false;
};

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Assertion failures print one `FAIL name key=value ...` line each.
struct Verdicts {
  int failures = 0;
  json flags = json::object();

  void expect(const std::string& name, bool ok, const std::string& detail) {
    flags[name] = ok;
    if (!ok) {
      ++failures;
      std::cout << "FAIL " << name << " " << detail << "\n";
    }
  }
};

std::string kv(const std::string& k, double v) {
  std::ostringstream os;
  os << k << "=" << std::setprecision(10) << v;
  return os.str();
}

class Run {
 public:
  Run(const Options& o, std::string command) : opts_(o), command_(std::move(command)), out_(o.out) {
    rc_ = opts_.config.empty() ? io::parse_config_text("") : io::parse_config(opts_.config);
    if (opts_.workers > 0) kernels::set_worker_count(opts_.workers);
    fs::create_directories(out_);
    const fs::path mpath = out_ / "manifest.json";
    if (fs::exists(mpath)) manifest_ = json::parse(io::read_text(mpath));
    if (!manifest_.contains("created")) manifest_["created"] = now_utc();
    manifest_["tool"] = "pinwheel";
    manifest_["version"] = kVersion;
    manifest_["out_dir"] = fs::absolute(out_).string();
    manifest_["workers"] = kernels::worker_count();
    manifest_["config"] = io::config_to_text(rc_);
    manifest_["schedule"] = rc_.schedule;
    if (!manifest_.contains("artifacts")) manifest_["artifacts"] = json::object();
    if (!manifest_.contains("verdicts")) manifest_["verdicts"] = json::object();
    io::write_atomic(out_ / "config.txt", io::config_to_text(rc_));
    artifact("config", "config.txt");
    status("running");
  }

  const SolverConfig& cfg() const { return rc_.solver; }
  const std::vector<double>& schedule() const { return rc_.schedule; }
  const fs::path& out() const { return out_; }
  json& manifest() { return manifest_; }
  bool resume() const { return opts_.resume; }

  GridPtr grid() {
    if (!grid_) grid_ = make_grid(cfg().n_r1, cfg().n_r2, cfg().n_phi, cfg().R);
    return grid_;
  }
  const PoissonSolver& solver() {
    if (!solver_) solver_ = std::make_unique<PoissonSolver>(grid());
    return *solver_;
  }

  void artifact(const std::string& key, const fs::path& rel) { manifest_["artifacts"][key] = rel.string(); }

  void status(const std::string& s) {
    manifest_["commands"][command_] = s;
    manifest_["updated"] = now_utc();
    io::write_atomic(out_ / "manifest.json", manifest_.dump(2) + "\n");
  }

  int finish(const Verdicts& v) {
    for (auto& [k, val] : v.flags.items()) manifest_["verdicts"][k] = val;
    status(v.failures == 0 ? "complete" : "failed");
    return v.failures == 0 ? 0 : 1;
  }

 private:
  Options opts_;
  std::string command_;
  fs::path out_;
  io::RunConfig rc_;
  json manifest_ = json::object();
  GridPtr grid_;
  std::unique_ptr<PoissonSolver> solver_;
};

void energy_bounds(Verdicts& v, const TraceRecord& r, int ell, double bound) {
  const double S = sobolev_constant(4);
  const double floor = 0.25 * ell * S * S * 0.95;
  v.expect("energy_bounds_beta_" + std::to_string(static_cast<long long>(r.beta)),
           r.j_value >= floor && r.j_value <= bound + 1e-3,
           kv("j", r.j_value) + " " + kv("floor", floor) + " " + kv("ceiling", bound + 1e-3));
}

int cmd_solve(Run& run) {
  const auto& cfg = run.cfg();
  const Competitor comp = best_competitor(cfg, run.grid());
  PinwheelState s0 = cfg.seed == "bump"     ? init_seed(cfg, run.grid())
                     : cfg.seed == "sector" ? sector_competitor(cfg, run.grid())
                                            : comp.state;
  const MinimizeResult r = minimize(s0, cfg, run.solver());
  const TraceRecord rec = trace_record(r, cfg, comp.j_value);
  io::write_state(run.out() / "solve", r.state);
  io::write_atomic(run.out() / "solve" / "summary.txt", io::checkpoint_summary(rec));
  run.artifact("solve_state", "solve");
  run.artifact("solve_summary", "solve/summary.txt");
  std::cout << "beta " << cfg.beta << " j_value " << std::setprecision(10) << rec.j_value << " iters " << rec.iters
            << " converged " << rec.converged << " competitor " << comp.j_value << "\n";
  Verdicts v;
  v.expect("converged", r.converged, kv("grad_norm", r.grad_norm) + " " + kv("iters", r.iterations));
  v.expect("no_concentration", !r.concentration, "half-mass radius below 4 cells");
  energy_bounds(v, rec, cfg.ell, comp.j_value);
  return run.finish(v);
}

int cmd_sweep(Run& run) {
  const auto& cfg = run.cfg();
  ContinuationOptions co;
  const fs::path trace_path = run.out() / "trace.csv";
  if (run.resume() && fs::exists(trace_path)) {
    ContinuationTrace prior;
    prior.records = io::read_trace_csv(trace_path);
    if (!prior.records.empty()) {
      const std::size_t k = prior.records.size() - 1;
      const fs::path dir = run.out() / "checkpoints" / ("beta_" + std::to_string(k));
      co.resume_state = io::read_state(dir, run.grid());
      co.resume_trace = std::move(prior);
      std::cout << "resuming after beta " << co.resume_trace->records.back().beta << "\n";
    }
  }
  ContinuationTrace partial;
  if (co.resume_trace) partial.records = co.resume_trace->records;
  co.on_checkpoint = [&](const TraceRecord& rec, const PinwheelState& st, std::size_t k) {
    const fs::path rel = fs::path("checkpoints") / ("beta_" + std::to_string(k));
    io::write_state(run.out() / rel, st);
    io::write_atomic(run.out() / rel / "summary.txt", io::checkpoint_summary(rec));
    partial.records.push_back(rec);
    io::write_trace_csv(trace_path, partial);
    run.manifest()["checkpoints"][k] = {{"beta", rec.beta}, {"dir", rel.string()}};
    run.artifact("trace", "trace.csv");
    run.status("running");
    std::cout << "beta " << rec.beta << " j_value " << std::setprecision(10) << rec.j_value << " overlap "
              << rec.overlap_max << " iters " << rec.iters << " converged " << rec.converged << std::endl;
  };
  PinwheelState final_state;
  const ContinuationTrace trace = beta_continuation(cfg, run.schedule(), run.solver(), co, &final_state);
  io::write_state(run.out() / "final", final_state);
  run.artifact("final_state", "final");
  run.manifest()["competitor_bound"] = trace.competitor_bound;
  run.manifest()["competitor_kind"] = trace.competitor_kind;

  Verdicts v;
  for (const auto& r : trace.records) energy_bounds(v, r, cfg.ell, trace.competitor_bound);
  if (cfg.ell > 1 && trace.records.size() > 1) {
    bool decreasing = true;
    for (std::size_t k = 1; k < trace.records.size(); ++k)
      decreasing = decreasing && trace.records[k].overlap_max < trace.records[k - 1].overlap_max;
    const auto& last = trace.records.back();
    v.expect("overlap_strictly_decreasing", decreasing, "see trace.csv");
    v.expect("final_beta_overlap_vs_kinetic", last.beta_times_overlap <= 0.1 * last.kinetic_total,
             kv("beta_times_overlap", last.beta_times_overlap) + " " + kv("kinetic", last.kinetic_total));
  }
  const SupNormVerdict sn = sup_norm_track(trace);
  std::cout << "sup_norm_growth " << sn.growth << " verdict " << (sn.bounded ? "bounded" : "unbounded") << "\n";
  run.manifest()["sup_norm_growth"] = sn.growth;
  run.manifest()["sup_norm_bounded"] = sn.bounded;
  int unconverged = 0;
  for (const auto& r : trace.records) unconverged += r.converged ? 0 : 1;
  run.manifest()["unconverged_betas"] = unconverged;
  return run.finish(v);
}

ContinuationTrace load_trace(Run& run) {
  ContinuationTrace t;
  t.records = io::read_trace_csv(run.out() / "trace.csv");
  if (t.records.empty()) throw IoError("trace.csv has no records; run `sweep` first");
  const auto& m = run.manifest();
  if (m.contains("competitor_bound")) {
    t.competitor_bound = m["competitor_bound"].get<double>();
    t.competitor_kind = m["competitor_kind"].get<std::string>();
  } else {
    const Competitor c = best_competitor(run.cfg(), run.grid());
    t.competitor_bound = c.j_value;
    t.competitor_kind = c.kind;
  }
  return t;
}

int cmd_partition(Run& run) {
  SolverConfig cfg = run.cfg();
  const ContinuationTrace trace = load_trace(run);
  cfg.beta = trace.records.back().beta;
  PinwheelState s = io::read_state(run.out() / "final", run.grid());
  s.beta = cfg.beta;

  Partition part = extract_partition(s, cfg.eta);
  part = classify_interface(s, std::move(part), cfg.gradient_floor, cfg.match_band);
  io::write_partition(run.out() / "partition.bin", part);
  run.artifact("partition", "partition.bin");

  Verdicts v;
  for (int i = 1; i <= s.ell() && s.ell() > 1; ++i) {
    const double d = partition_symmetry_defect(part, i);
    std::cout << "symmetry_defect_label_" << i << " " << d << "\n";
    v.expect("partition_symmetry_label_" + std::to_string(i), d <= 0.02, kv("defect", d));
  }
  std::vector<CellEnergy> cells;
  for (int i = 1; i <= s.ell(); ++i) {
    cells.push_back(solve_dirichlet_cell(s, part, i, cfg, run.solver()));
    const auto& c = cells.back();
    std::cout << "cell_" << i << " energy " << c.cell_energy << " system " << c.system_energy << " rel "
              << c.relative_difference << "\n";
    v.expect("cell_vs_system_" + std::to_string(i), c.relative_difference <= 0.05, kv("rel", c.relative_difference));
  }
  double lo = cells.front().cell_energy, hi = lo;
  for (const auto& c : cells) {
    lo = std::min(lo, c.cell_energy);
    hi = std::max(hi, c.cell_energy);
  }
  v.expect("cells_agree", (hi - lo) / lo <= 0.02, kv("spread", (hi - lo) / lo));

  const Competitor dc = disjoint_competitor(s, cfg);
  const OptimalityReport opt = optimality_report(trace, cells, &dc);
  const NodalReport nodal = nodal_build(s, cfg, run.solver());
  io::write_atomic(run.out() / "report.txt", io::report_text(opt, &nodal, &part));
  run.artifact("report", "report.txt");
  std::cout << io::report_text(opt, nullptr, nullptr);
  v.expect("optimality_chain", opt.chain_ok, kv("relative_gap", opt.relative_gap));
  v.expect("competitor_bound", opt.bound_ok,
           kv("c_ell_infinity", opt.c_ell_infinity_estimate) + " " + kv("bound", opt.competitor_bound));
  return run.finish(v);
}

int cmd_nodal(Run& run) {
  const auto& cfg = run.cfg();
  PinwheelState s = io::read_state(run.out() / "final", run.grid());
  const NodalReport r = nodal_build(s, cfg, run.solver());
  io::write_field(run.out() / "nodal.field", r.field, "nodal");
  run.artifact("nodal_field", "nodal.field");

  std::ostringstream os;
  os << "antisymmetry_defect = " << r.antisymmetry_defect << "\npde_residual = " << r.pde_residual
     << "\nnodal_positive_components = " << r.positive_components
     << "\nnodal_negative_components = " << r.negative_components << "\n";
  if (r.open_question) os << "open_question = diagnostics only for ell > 2\n";
  if (r.parity_warning) os << "parity_warning = odd ell\n";
  if (s.ell() % 2 == 0) {
    const Field w1 = bubble(4, cfg.target_radius(), run.grid());
    const DistinctnessVerdict d = distinctness_check(r.field, w1, s.ell(), 1);
    os << "distinct_from_bubble = " << to_string(d.verdict) << "\ndistinctness_reason = " << d.reason << "\n";
  }
  io::write_atomic(run.out() / "nodal.txt", os.str());
  run.artifact("nodal_report", "nodal.txt");
  std::cout << os.str();
  Verdicts v;
  if (r.antisymmetry_asserted)
    v.expect("nodal_antisymmetry", r.antisymmetry_ok, kv("defect", r.antisymmetry_defect) + " " + kv("tol", cfg.equiv_tol));
  return run.finish(v);
}

int cmd_verify(Run& run) {
  VerifyOptions vo;
  std::ostringstream os;
  Verdicts v;
  vo.on_check = [&](const Check& c) {
    os << c.name << " = " << c.value << " tol " << c.tolerance << " " << (c.pass ? "PASS" : "FAIL") << "\n";
    std::cout << (c.pass ? "ok   " : "bad  ") << c.name << " " << c.value << " (tol " << c.tolerance << ")" << std::endl;
    v.expect(c.name, c.pass, kv("value", c.value) + " " + kv("tol", c.tolerance));
  };
  verify_suite(vo);
  io::write_atomic(run.out() / "verify.txt", os.str());
  run.artifact("verify", "verify.txt");
  return run.finish(v);
}

int cmd_bubble(Run& run) {
  SolverConfig cfg = run.cfg();
  cfg.ell = 1;
  cfg.beta = 0.0;
  const double target = bubble_energy(4);
  PinwheelState fixture;
  fixture.components.push_back(bubble(4, cfg.target_radius(), run.grid()));
  const double fixture_j = nehari_normalize(fixture, cfg).j_value;
  const MinimizeResult r = minimize(init_seed(cfg, run.grid()), cfg, run.solver());
  const double err = std::abs(r.breakdown.j_value - target) / target;
  std::ostringstream os;
  os << std::setprecision(10) << "bubble_energy = " << r.breakdown.j_value << "\ntarget = " << target
     << "\nrelative_error = " << err << "\nfixture_energy = " << fixture_j << "\niters = " << r.iterations
     << "\nconverged = " << r.converged << "\n";
  io::write_atomic(run.out() / "bubble.txt", os.str());
  run.artifact("bubble", "bubble.txt");
  std::cout << os.str();
  Verdicts v;
  v.expect("bubble_energy", err <= 0.02, kv("energy", r.breakdown.j_value) + " " + kv("target", target));
  return run.finish(v);
}

// Energy of the truncated bubble for growing R at fixed radial spacing.
int cmd_rsweep(Run& run) {
  const auto& cfg = run.cfg();
  const double h = cfg.R / cfg.n_r1;
  const double target = bubble_energy(4);
  std::string csv = "R,n_r,energy,relative_error\n";
  SolverConfig c = cfg;
  c.ell = 1;
  c.beta = 0.0;
  for (double R : {5.0, 10.0, 20.0, 40.0}) {
    const int n = static_cast<int>(std::lround(R / h));
    auto g = make_grid(n, n, cfg.n_phi, R);
    PinwheelState s;
    s.components.push_back(bubble(4, c.target_radius(), g));
    const double j = nehari_normalize(s, c).j_value;
    std::ostringstream os;
    os << std::setprecision(10) << R << "," << n << "," << j << "," << (j - target) / target << "\n";
    csv += os.str();
    std::cout << os.str();
  }
  io::write_atomic(run.out() / "rsweep.csv", csv);
  run.artifact("rsweep", "rsweep.csv");
  return run.finish(Verdicts{});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pinwheel solutions of the critical competitive system in R^4"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "key = value configuration file");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--workers", o.workers, "worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--resume", o.resume, "sweep: continue after the last completed beta");

  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"solve", "minimize at the configured beta"},
      {"sweep", "beta continuation over the schedule"},
      {"partition", "partition, cell re-solves and optimality report of the final sweep state"},
      {"nodal", "alternating-sign field of the final sweep state"},
      {"verify", "invariant suite"},
      {"bubble", "single-equation fixture against the closed-form least energy"},
      {"rsweep", "truncation-radius study of the bubble energy"}};
  for (const auto& [name, help] : cmds) app.add_subcommand(name, help);
  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    Run run(o, cmd);
    if (cmd == "solve") return cmd_solve(run);
    if (cmd == "sweep") return cmd_sweep(run);
    if (cmd == "partition") return cmd_partition(run);
    if (cmd == "nodal") return cmd_nodal(run);
    if (cmd == "verify") return cmd_verify(run);
    if (cmd == "bubble") return cmd_bubble(run);
    return cmd_rsweep(run);
  } catch (const ConfigError& e) {
    std::cout << "ERROR type=config line=" << e.line() << " message=\"" << e.what() << "\"\n";
  } catch (const Error& e) {
    std::cout << "ERROR type=runtime message=\"" << e.what() << "\"\n";
  } catch (const std::exception& e) {
    std::cout << "ERROR type=internal message=\"" << e.what() << "\"\n";
  }
  return 2;
}
