#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "pinwheel/errors.hpp"
#include "pinwheel/io.hpp"

using namespace pinwheel;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pinwheel_test_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

Field random_field(const GridPtr& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Field u(g);
  for (std::size_t n = 0; n < g->size(); ++n) u[n] = nd(rng);
  u.enforce_dirichlet();
  return u;
}

bool same_values(const Field& a, const Field& b) { return std::ranges::equal(a.values(), b.values()); }

int config_error_line(const std::string& text) {
  try {
    io::parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
  const auto rc = io::parse_config_text("");
  const SolverConfig d;
  CHECK(rc.solver.N == 4);
  CHECK(rc.solver.ell == 2);
  CHECK(rc.solver.n_r1 == 96);
  CHECK(rc.solver.n_r2 == 96);
  CHECK(rc.solver.n_phi == 32);
  CHECK(rc.solver.R == 20.0);
  CHECK(rc.solver.grad_tol == d.grad_tol);
  REQUIRE(rc.schedule.size() == 11);
  CHECK(rc.schedule.front() == -1.0);
  CHECK(rc.schedule.back() == -1024.0);
  CHECK(rc.schedule == io::default_schedule());
  CHECK(io::parse_config_text("# only a comment\n\n   \n").schedule == rc.schedule);
}

TEST_CASE("two-stage schedule") {
  const auto rc = io::parse_config_text("beta_schedule = -1,-10\n");
  CHECK(rc.schedule == std::vector<double>{-1.0, -10.0});
}

TEST_CASE("config errors carry line numbers") {
  CHECK_THROWS_AS(io::parse_config_text("ell = 0\n"), ConfigError);
  CHECK(config_error_line("ell = 2\nfoo = 3\n") == 2);
  CHECK(config_error_line("\nR = 10\nR = 12\n") == 3);
  CHECK(config_error_line("n_r1 = ninety\n") == 1);
  CHECK(config_error_line("just words\n") == 1);
  CHECK(config_error_line("coupling_preconditioner = maybe\n") == 1);
  CHECK(config_error_line("beta_schedule =\n") == 1);
  CHECK_THROWS_AS(io::parse_config_text("beta = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(io::parse_config_text("beta_schedule = -1,-1\n"), ConfigError);
  CHECK_THROWS_AS(io::parse_config_text("beta_schedule = -2,-4\n"), ConfigError);
  CHECK_THROWS_AS(io::parse_config(fs::temp_directory_path() / "pinwheel_no_such_config.txt"), IoError);
}

TEST_CASE("config text round trip") {
  auto rc = io::parse_config_text("ell = 3\nR = 12.5\nbeta_schedule = -1,-3.25,-7\nseed = sector\neta = 0.002\n");
  const auto back = io::parse_config_text(io::config_to_text(rc));
  CHECK(back.solver.ell == 3);
  CHECK(back.solver.R == 12.5);
  CHECK(back.solver.seed == "sector");
  CHECK(back.solver.eta == 0.002);
  CHECK(back.schedule == rc.schedule);
  CHECK(io::config_to_text(back) == io::config_to_text(rc));
}

TEST_CASE("field and state dumps round trip bit for bit") {
  const auto dir = scratch_dir("field");
  auto g = make_grid(12, 10, 8, 3.0);
  const Field u = random_field(g, 7);
  io::write_field(dir / "u.field", u, "u");
  const Field v = io::read_field(dir / "u.field");
  CHECK(v.grid().n_r1() == 12);
  CHECK(v.grid().n_r2() == 10);
  CHECK(v.grid().n_phi() == 8);
  CHECK(v.grid().radius() == 3.0);
  CHECK(same_values(u, v));

  PinwheelState s;
  for (unsigned k = 0; k < 3; ++k) s.components.push_back(random_field(g, 11 + k));
  io::write_state(dir / "state", s);
  const auto t = io::read_state(dir / "state");
  REQUIRE(t.ell() == 3);
  for (int i = 0; i < 3; ++i) CHECK(same_values(t.components[i], s.components[i]));
  // Components share one grid object after reading.
  CHECK(t.components[0].grid_ptr() == t.components[2].grid_ptr());

  CHECK_THROWS_AS(io::read_field(dir / "u.field", make_grid(12, 10, 16, 3.0)), IoError);
  CHECK_THROWS_AS(io::read_state(dir / "empty"), IoError);

  // Truncated payload.
  std::string raw = io::read_text(dir / "u.field");
  raw.resize(raw.size() - 8);
  io::write_atomic(dir / "bad.field", raw);
  CHECK_THROWS_AS(io::read_field(dir / "bad.field"), IoError);
}

TEST_CASE("partition dump") {
  const auto dir = scratch_dir("partition");
  auto g = make_grid(8, 8, 4, 2.0);
  Partition p;
  p.grid = g;
  p.ell = 2;
  p.eta = 1e-3;
  p.label.assign(g->size(), 0);
  p.cls.assign(g->size(), CellClass::Outside);
  std::vector<std::uint8_t> expect(g->size(), 0);
  for (std::size_t n = 0; n < g->size(); ++n) {
    if (!g->active_node(n)) continue;
    switch (n % 4) {
      case 0:
        p.cls[n] = CellClass::Labeled, p.label[n] = 1, expect[n] = 1;
        break;
      case 1:
        p.cls[n] = CellClass::Labeled, p.label[n] = 2, expect[n] = 2;
        break;
      case 2:
        p.cls[n] = CellClass::Interface, expect[n] = kInterfaceCode;
        break;
      default:
        p.cls[n] = CellClass::Singular, expect[n] = kSingularCode;
    }
  }
  io::write_partition(dir / "p.bin", p);
  CHECK(io::read_partition_codes(dir / "p.bin") == expect);
  const auto text = io::read_text(dir / "p.bin");
  CHECK(text.rfind("pinwheel-partition\n", 0) == 0);
}

TEST_CASE("trace CSV round trip") {
  const auto dir = scratch_dir("trace");
  ContinuationTrace tr;
  for (int k = 0; k < 4; ++k) {
    TraceRecord r;
    r.beta = -std::pow(2.0, k);
    r.j_value = 100.0 + k / 3.0;
    r.kinetic_total = 4.0 * r.j_value;
    r.overlap_max = 1.0 / (k + 7.0);
    r.beta_times_overlap = std::abs(r.beta) * r.overlap_max;
    r.sup_norm = 1.0 + 0.1 * k;
    r.epsilon = k == 1 ? 0.75 : 1.0;
    r.iters = 10 + k;
    r.converged = k != 2;
    tr.records.push_back(r);
  }
  io::write_trace_csv(dir / "trace.csv", tr);
  const auto back = io::read_trace_csv(dir / "trace.csv");
  REQUIRE(back.size() == tr.records.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].beta == tr.records[k].beta);
    CHECK(back[k].j_value == tr.records[k].j_value);
    CHECK(back[k].overlap_max == tr.records[k].overlap_max);
    CHECK(back[k].beta_times_overlap == tr.records[k].beta_times_overlap);
    CHECK(back[k].epsilon == tr.records[k].epsilon);
    CHECK(back[k].iters == tr.records[k].iters);
    CHECK(back[k].converged == tr.records[k].converged);
  }
  // Same input, same bytes.
  CHECK(io::trace_csv(tr) == io::read_text(dir / "trace.csv"));

  io::write_atomic(dir / "bad.csv", "beta,j\n1,2\n");
  CHECK_THROWS_AS(io::read_trace_csv(dir / "bad.csv"), IoError);
  io::write_atomic(dir / "short.csv", std::string(io::kTraceColumns) + "\n-1,2,3\n");
  CHECK_THROWS_AS(io::read_trace_csv(dir / "short.csv"), IoError);
}

TEST_CASE("atomic writes replace the target and leave no temporary") {
  const auto dir = scratch_dir("atomic");
  const auto f = dir / "m.json";
  io::write_atomic(f, "first");
  io::write_atomic(f, "second");
  CHECK(io::read_text(f) == "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(io::read_text(dir / "missing"), IoError);
}

TEST_CASE("report uses the fixed key names") {
  OptimalityReport opt;
  opt.sum_cell_energy = 2.0;
  opt.c_ell_infinity_estimate = 2.0;
  NodalReport nodal;
  const auto txt = io::report_text(opt, &nodal, nullptr);
  for (const char* key : {"sum_cell_energy = ", "c_ell_infinity_estimate = ", "competitor_bound = ",
                          "antisymmetry_defect = ", "pde_residual = "})
    CHECK(txt.find(key) != std::string::npos);
}
