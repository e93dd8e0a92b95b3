#include "pinwheel/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pinwheel/errors.hpp"

namespace pinwheel::io {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

double to_double(const std::string& v, const std::string& key, int line) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x)) throw ConfigError(key + ": not a number: '" + v + "'", line);
  return x;
}

int to_int(const std::string& v, const std::string& key, int line) {
  int x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": not an integer: '" + v + "'", line);
  return x;
}

bool to_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'", line);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto real = [&](const char* k, double SolverConfig::*m) {
      t[k] = [k, m](RunConfig& rc, const std::string& v, int line) { rc.solver.*m = to_double(v, k, line); };
    };
    auto integer = [&](const char* k, int SolverConfig::*m) {
      t[k] = [k, m](RunConfig& rc, const std::string& v, int line) { rc.solver.*m = to_int(v, k, line); };
    };
    integer("N", &SolverConfig::N);
    integer("ell", &SolverConfig::ell);
    real("beta", &SolverConfig::beta);
    integer("n_r1", &SolverConfig::n_r1);
    integer("n_r2", &SolverConfig::n_r2);
    integer("n_phi", &SolverConfig::n_phi);
    real("R", &SolverConfig::R);
    real("grad_tol", &SolverConfig::grad_tol);
    real("nehari_tol", &SolverConfig::nehari_tol);
    real("equiv_tol", &SolverConfig::equiv_tol);
    integer("max_iters", &SolverConfig::max_iters);
    integer("reproject_period", &SolverConfig::reproject_period);
    real("gauge_radius", &SolverConfig::gauge_radius);
    real("armijo_c", &SolverConfig::armijo_c);
    integer("max_backtracks", &SolverConfig::max_backtracks);
    integer("inner_iters", &SolverConfig::inner_iters);
    real("inner_rtol", &SolverConfig::inner_rtol);
    real("seed_r1", &SolverConfig::seed_r1);
    real("seed_r2", &SolverConfig::seed_r2);
    real("seed_phi", &SolverConfig::seed_phi);
    real("seed_radius", &SolverConfig::seed_radius);
    real("seed_tilt", &SolverConfig::seed_tilt);
    real("eta", &SolverConfig::eta);
    real("gradient_floor", &SolverConfig::gradient_floor);
    real("match_band", &SolverConfig::match_band);
    t["coupling_preconditioner"] = [](RunConfig& rc, const std::string& v, int line) {
      rc.solver.coupling_preconditioner = to_bool(v, "coupling_preconditioner", line);
    };
    t["seed"] = [](RunConfig& rc, const std::string& v, int) { rc.solver.seed = v; };
    t["beta_schedule"] = [](RunConfig& rc, const std::string& v, int line) {
      rc.schedule.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) rc.schedule.push_back(to_double(trim(item), "beta_schedule", line));
      if (rc.schedule.empty()) throw ConfigError("beta_schedule: empty list", line);
    };
    return t;
  }();
  return table;
}

void check_schedule(const std::vector<double>& s) {
  if (s.front() < -1.0) throw ConfigError("beta_schedule must start at or above -1");
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] > 0.0) throw ConfigError("beta_schedule: beta must be <= 0");
    if (k > 0 && !(s[k] < s[k - 1])) throw ConfigError("beta_schedule must be strictly decreasing");
  }
}

struct Header {
  std::map<std::string, std::string> kv;
  std::size_t offset = 0;

  const std::string& at(const std::string& k, const fs::path& p) const {
    auto it = kv.find(k);
    if (it == kv.end()) throw IoError(p.string() + ": header lacks '" + k + "'");
    return it->second;
  }
};

Header read_header(const std::string& data, const fs::path& p, const std::string& magic) {
  Header h;
  std::size_t pos = 0;
  bool first = true;
  while (true) {
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) throw IoError(p.string() + ": header not terminated by end_header");
    const std::string line = data.substr(pos, nl - pos);
    pos = nl + 1;
    if (first) {
      if (line != magic) throw IoError(p.string() + ": expected '" + magic + "' header");
      first = false;
      continue;
    }
    if (line == "end_header") break;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw IoError(p.string() + ": malformed header line '" + line + "'");
    h.kv[line.substr(0, sp)] = line.substr(sp + 1);
  }
  h.offset = pos;
  return h;
}

std::string grid_header(const ReducedGrid& g) {
  std::ostringstream os;
  os << "n_r1 " << g.n_r1() << "\nn_r2 " << g.n_r2() << "\nn_phi " << g.n_phi() << "\nR " << fmt(g.radius())
     << "\norder r1-major\n";
  return os.str();
}

GridPtr grid_from(const Header& h, const fs::path& p, GridPtr grid) {
  const int n1 = std::stoi(h.at("n_r1", p)), n2 = std::stoi(h.at("n_r2", p)), np = std::stoi(h.at("n_phi", p));
  const double R = std::stod(h.at("R", p));
  if (grid) {
    if (grid->n_r1() != n1 || grid->n_r2() != n2 || grid->n_phi() != np || grid->radius() != R)
      throw IoError(p.string() + ": grid does not match");
    return grid;
  }
  return make_grid(n1, n2, np, R);
}

}  // namespace

std::vector<double> default_schedule() {
  std::vector<double> s;
  for (double b = -1.0; b >= -1024.0; b *= 2.0) s.push_back(b);
  return s;
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig rc;
  rc.schedule = default_schedule();
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto h = raw.find('#'); h != std::string_view::npos) raw = raw.substr(0, h);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'", line_no);
    if (seen.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
    if (value.empty()) throw ConfigError(key + ": missing value", line_no);
    seen[key] = line_no;
    it->second(rc, value, line_no);
  }
  rc.solver.validate();
  check_schedule(rc.schedule);
  return rc;
}

RunConfig parse_config(const fs::path& path) { return parse_config_text(read_text(path)); }

std::string config_to_text(const RunConfig& rc) {
  const auto& c = rc.solver;
  std::ostringstream os;
  os << "N = " << c.N << "\nell = " << c.ell << "\nbeta = " << fmt(c.beta) << "\nn_r1 = " << c.n_r1
     << "\nn_r2 = " << c.n_r2 << "\nn_phi = " << c.n_phi << "\nR = " << fmt(c.R) << "\ngrad_tol = " << fmt(c.grad_tol)
     << "\nnehari_tol = " << fmt(c.nehari_tol) << "\nequiv_tol = " << fmt(c.equiv_tol)
     << "\nmax_iters = " << c.max_iters << "\nreproject_period = " << c.reproject_period
     << "\ngauge_radius = " << fmt(c.gauge_radius) << "\narmijo_c = " << fmt(c.armijo_c)
     << "\nmax_backtracks = " << c.max_backtracks
     << "\ncoupling_preconditioner = " << (c.coupling_preconditioner ? "true" : "false")
     << "\ninner_iters = " << c.inner_iters << "\ninner_rtol = " << fmt(c.inner_rtol) << "\nseed = " << c.seed
     << "\nseed_r1 = " << fmt(c.seed_r1) << "\nseed_r2 = " << fmt(c.seed_r2) << "\nseed_phi = " << fmt(c.seed_phi)
     << "\nseed_radius = " << fmt(c.seed_radius) << "\nseed_tilt = " << fmt(c.seed_tilt) << "\neta = " << fmt(c.eta)
     << "\ngradient_floor = " << fmt(c.gradient_floor) << "\nmatch_band = " << fmt(c.match_band)
     << "\nbeta_schedule = ";
  for (std::size_t k = 0; k < rc.schedule.size(); ++k) os << (k ? "," : "") << fmt(rc.schedule[k]);
  os << "\n";
  return os.str();
}

void write_field(const fs::path& path, const Field& u, const std::string& name) {
  std::string out = "pinwheel-field\nname " + name + "\n" + grid_header(u.grid()) + "type f64le\nend_header\n";
  const auto v = u.values();
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  write_atomic(path, out);
}

Field read_field(const fs::path& path, GridPtr grid) {
  const std::string data = read_text(path);
  const Header h = read_header(data, path, "pinwheel-field");
  if (h.at("type", path) != "f64le") throw IoError(path.string() + ": unsupported type");
  grid = grid_from(h, path, std::move(grid));
  const std::size_t bytes = grid->size() * sizeof(double);
  if (data.size() - h.offset != bytes) throw IoError(path.string() + ": payload size does not match the grid");
  std::vector<double> v(grid->size());
  std::memcpy(v.data(), data.data() + h.offset, bytes);
  return Field(grid, std::move(v));
}

void write_state(const fs::path& dir, const PinwheelState& s) {
  fs::create_directories(dir);
  for (int i = 0; i < s.ell(); ++i)
    write_field(dir / ("u" + std::to_string(i + 1) + ".field"), s.components[i], "u" + std::to_string(i + 1));
}

PinwheelState read_state(const fs::path& dir, GridPtr grid) {
  PinwheelState s;
  for (int i = 1;; ++i) {
    const fs::path p = dir / ("u" + std::to_string(i) + ".field");
    if (!fs::exists(p)) break;
    s.components.push_back(read_field(p, grid));
    grid = s.components.back().grid_ptr();
  }
  if (s.components.empty()) throw IoError(dir.string() + ": no component fields");
  return s;
}

void write_partition(const fs::path& path, const Partition& p) {
  std::string out = "pinwheel-partition\nell " + std::to_string(p.ell) + "\n" + grid_header(*p.grid) +
                    "codes 0=unassigned_or_outside,1..ell=label,254=interface,255=singular\neta " + fmt(p.eta) +
                    "\ngradient_floor " + fmt(p.interface.gradient_floor) + "\nend_header\n";
  for (std::size_t n = 0; n < p.cls.size(); ++n) out.push_back(static_cast<char>(cell_code(p, n)));
  write_atomic(path, out);
}

std::vector<std::uint8_t> read_partition_codes(const fs::path& path) {
  const std::string data = read_text(path);
  const Header h = read_header(data, path, "pinwheel-partition");
  const std::size_t n = static_cast<std::size_t>(std::stoi(h.at("n_r1", path))) * std::stoi(h.at("n_r2", path)) *
                        std::stoi(h.at("n_phi", path));
  if (data.size() - h.offset != n) throw IoError(path.string() + ": payload size does not match the grid");
  return std::vector<std::uint8_t>(data.begin() + static_cast<std::ptrdiff_t>(h.offset), data.end());
}

const char* const kTraceColumns = "beta,j_value,kinetic_total,overlap_max,beta_times_overlap,sup_norm,epsilon,iters,converged";

std::string trace_csv(const ContinuationTrace& trace) {
  std::string out = std::string(kTraceColumns) + "\n";
  for (const auto& r : trace.records)
    out += fmt(r.beta) + "," + fmt(r.j_value) + "," + fmt(r.kinetic_total) + "," + fmt(r.overlap_max) + "," +
           fmt(r.beta_times_overlap) + "," + fmt(r.sup_norm) + "," + fmt(r.epsilon) + "," + std::to_string(r.iters) +
           "," + (r.converged ? "1" : "0") + "\n";
  return out;
}

void write_trace_csv(const fs::path& path, const ContinuationTrace& trace) { write_atomic(path, trace_csv(trace)); }

std::vector<TraceRecord> read_trace_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line != kTraceColumns) throw IoError(path.string() + ": unexpected CSV header");
  std::vector<TraceRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 9) throw IoError(path.string() + ": line " + std::to_string(line_no) + " has the wrong arity");
    TraceRecord r;
    try {
      r.beta = std::stod(f[0]);
      r.j_value = std::stod(f[1]);
      r.kinetic_total = std::stod(f[2]);
      r.overlap_max = std::stod(f[3]);
      r.beta_times_overlap = std::stod(f[4]);
      r.sup_norm = std::stod(f[5]);
      r.epsilon = std::stod(f[6]);
      r.iters = std::stoi(f[7]);
      r.converged = f[8] == "1";
    } catch (const std::exception&) {
      throw IoError(path.string() + ": line " + std::to_string(line_no) + " is not numeric");
    }
    out.push_back(r);
  }
  return out;
}

std::string checkpoint_summary(const TraceRecord& r) {
  std::ostringstream os;
  os << "beta = " << fmt(r.beta) << "\nj_value = " << fmt(r.j_value) << "\nkinetic_total = " << fmt(r.kinetic_total)
     << "\nepsilon = " << fmt(r.epsilon) << "\niters = " << r.iters << "\nconverged = " << (r.converged ? 1 : 0)
     << "\nconcentration = " << (r.concentration ? 1 : 0) << "\nsup_norm = " << fmt(r.sup_norm) << "\n";
  for (std::size_t i = 0; i < r.overlap.size(); ++i) {
    os << "overlap_row_" << i + 1 << " =";
    for (double x : r.overlap[i]) os << " " << fmt(x);
    os << "\n";
  }
  return os.str();
}

std::string report_text(const OptimalityReport& opt, const NodalReport* nodal, const Partition* part) {
  std::ostringstream os;
  os << "sum_cell_energy = " << fmt(opt.sum_cell_energy) << "\n"
     << "c_ell_infinity_estimate = " << fmt(opt.c_ell_infinity_estimate) << "\n"
     << "competitor_bound = " << fmt(opt.competitor_bound) << "\n"
     << "competitor_kind = " << opt.competitor_kind << "\n"
     << "relative_gap = " << fmt(opt.relative_gap) << "\n"
     << "chain_ok = " << (opt.chain_ok ? 1 : 0) << "\n"
     << "bound_ok = " << (opt.bound_ok ? 1 : 0) << "\n";
  for (const auto& c : opt.cells)
    os << "cell_" << c.label << " = " << fmt(c.cell_energy) << " system " << fmt(c.system_energy) << " rel "
       << fmt(c.relative_difference) << " iters " << c.iterations << " converged " << (c.converged ? 1 : 0) << "\n";
  if (part) {
    const auto& st = part->interface;
    os << "eta = " << fmt(part->eta) << "\n"
       << "gradient_floor = " << fmt(st.gradient_floor) << "\n"
       << "labeled_cells = " << part->count(CellClass::Labeled) << "\n"
       << "interface_cells = " << part->count(CellClass::Interface) << "\n"
       << "interface_matched = " << st.matched << "\n"
       << "interface_unmatched = " << st.unmatched << "\n"
       << "singular_cells = " << part->count(CellClass::Singular) << "\n"
       << "label_faces = " << st.label_faces << "\n"
       << "label_faces_matched = " << st.label_faces_matched << "\n"
       << "ratio_histogram =";
    for (int b : st.ratio_histogram) os << " " << b;
    os << "\n";
  }
  if (nodal) {
    os << "antisymmetry_defect = " << fmt(nodal->antisymmetry_defect) << "\n"
       << "pde_residual = " << fmt(nodal->pde_residual) << "\n"
       << "nodal_positive_components = " << nodal->positive_components << "\n"
       << "nodal_negative_components = " << nodal->negative_components << "\n"
       << "antisymmetry_asserted = " << (nodal->antisymmetry_asserted ? 1 : 0) << "\n"
       << "antisymmetry_ok = " << (nodal->antisymmetry_ok ? 1 : 0) << "\n";
    if (nodal->open_question)
      os << "open_question = for ell > 2 it is not known whether the alternating sum solves the single equation\n";
    if (nodal->parity_warning) os << "parity_warning = odd ell: the alternating sum has no sign symmetry\n";
  }
  return os.str();
}

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pinwheel::io
