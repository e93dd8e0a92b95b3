#include "pinwheel/segregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "pinwheel/errors.hpp"
#include "pinwheel/kernels.hpp"

namespace pinwheel {

namespace {

struct Node {
  int i, j, k;
};

// Face neighbour in direction d (0/1: r1 -/+, 2/3: r2 -/+, 4/5: phi -/+).
// Stepping below a coordinate axis lands on the same column with phi
// shifted by pi.
std::optional<Node> neighbor(const ReducedGrid& g, Node c, int d) {
  const int half = g.n_phi() / 2;
  switch (d) {
    case 0:
      if (c.i > 0) return Node{c.i - 1, c.j, c.k};
      return Node{0, c.j, (c.k + half) % g.n_phi()};
    case 1:
      if (c.i + 1 < g.n_r1() && g.active(c.i + 1, c.j)) return Node{c.i + 1, c.j, c.k};
      return std::nullopt;
    case 2:
      if (c.j > 0) return Node{c.i, c.j - 1, c.k};
      return Node{c.i, 0, (c.k + half) % g.n_phi()};
    case 3:
      if (c.j + 1 < g.n_r2() && g.active(c.i, c.j + 1)) return Node{c.i, c.j + 1, c.k};
      return std::nullopt;
    case 4:
      return Node{c.i, c.j, (c.k + g.n_phi() - 1) % g.n_phi()};
    default:
      return Node{c.i, c.j, (c.k + 1) % g.n_phi()};
  }
}

// Ambient-metric length of one step in direction d at column (i, j).
double step_length(const ReducedGrid& g, int i, int j, int d) {
  if (d < 2) return g.dr1();
  if (d < 4) return g.dr2();
  const double r1 = g.r1(i), r2 = g.r2(j);
  return g.dphi() * r1 * r2 / std::hypot(r1, r2);
}

// Central differences (r1, r2, phi-metric) at a node.
std::array<double, 3> grad_parts(const Field& u, int i, int j, int k) {
  const auto& g = u.grid();
  const double a = (extended_value(u, i + 1, j, k) - extended_value(u, i - 1, j, k)) / (2.0 * g.dr1());
  const double b = (extended_value(u, i, j + 1, k) - extended_value(u, i, j - 1, k)) / (2.0 * g.dr2());
  const double c = (extended_value(u, i, j, k + 1) - extended_value(u, i, j, k - 1)) / (2.0 * step_length(g, i, j, 4));
  return {a, b, c};
}

// |grad u| at node n, with the component along direction d replaced by the
// one-sided difference between n and the cell c it faces.
double one_sided_gradient(const Field& u, Node n, Node c, int d) {
  const auto& g = u.grid();
  auto parts = grad_parts(u, n.i, n.j, n.k);
  parts[d / 2] = (u.at(n.i, n.j, n.k) - u.at(c.i, c.j, c.k)) / step_length(g, n.i, n.j, d);
  return std::sqrt(parts[0] * parts[0] + parts[1] * parts[1] + parts[2] * parts[2]);
}

std::size_t nearest_cell(const ReducedGrid& g, const OrbitPoint& p, bool& inside) {
  const int i = std::clamp(static_cast<int>(std::floor(p.r1 / g.dr1())), 0, g.n_r1() - 1);
  const int j = std::clamp(static_cast<int>(std::floor(p.r2 / g.dr2())), 0, g.n_r2() - 1);
  const int k = static_cast<int>(std::floor(wrap_angle(p.phi) / g.dphi())) % g.n_phi();
  inside = g.active(i, j);
  return g.index(i, j, k);
}

double l2(const Field& u) { return std::sqrt(kernels::omp::weighted_pow(u.grid(), u.values(), 2.0)); }

}  // namespace

std::size_t Partition::count(CellClass c) const { return static_cast<std::size_t>(std::count(cls.begin(), cls.end(), c)); }

std::size_t Partition::label_count(int i) const {
  return static_cast<std::size_t>(std::count(label.begin(), label.end(), static_cast<std::uint8_t>(i)));
}

double Partition::label_measure(int i) const {
  const auto w = grid->weights();
  double m = 0.0;
  for (std::size_t n = 0; n < label.size(); ++n)
    if (label[n] == i) m += w[n / grid->n_phi()];
  return m;
}

std::uint8_t cell_code(const Partition& p, std::size_t n) {
  switch (p.cls[n]) {
    case CellClass::Labeled:
      return p.label[n];
    case CellClass::Interface:
      return kInterfaceCode;
    case CellClass::Singular:
      return kSingularCode;
    default:
      return 0;
  }
}

Partition extract_partition(const PinwheelState& s, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw PreconditionError("extract_partition: eta must lie in (0, 1)");
  const auto& g = s.grid();
  const int ell = s.ell();
  Partition p;
  p.grid = s.grid_ptr();
  p.ell = ell;
  p.eta = eta;
  p.label.assign(g.size(), 0);
  p.cls.assign(g.size(), CellClass::Outside);
  double top = 0.0;
  for (const auto& c : s.components) top = std::max(top, c.max_abs());
  const double cut = eta * top;

  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!g.active_node(n)) continue;
    p.cls[n] = CellClass::Unassigned;
    int best = -1;
    double v = -1.0;
    bool tie = false;
    for (int i = 0; i < ell; ++i) {
      const double x = s.components[i][n];
      if (x > v) {
        v = x;
        best = i;
        tie = false;
      } else if (x == v) {
        tie = true;
      }
    }
    if (!tie && v > cut) {
      p.label[n] = static_cast<std::uint8_t>(best + 1);
      p.cls[n] = CellClass::Labeled;
    }
  }

  std::vector<Field> grads;
  for (const auto& c : s.components) grads.push_back(gradient_magnitude(c));
  p.max_gradient.assign(g.size(), 0.0);
  for (const auto& gr : grads)
    for (std::size_t n = 0; n < g.size(); ++n) p.max_gradient[n] = std::max(p.max_gradient[n], gr[n]);

  for (int i = 1; i <= ell; ++i)
    if (p.label_count(i) == 0)
      throw DegeneratePartition("extract_partition: label " + std::to_string(i) + " is empty");
  return p;
}

Field gradient_magnitude(const Field& u) {
  const auto& g = u.grid();
  Field out(u.grid_ptr());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      for (int k = 0; k < g.n_phi(); ++k) {
        const auto p = grad_parts(u, i, j, k);
        out.at(i, j, k) = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      }
    }
  return out;
}

Partition classify_interface(const PinwheelState& s, Partition part, double gradient_floor, double match_band) {
  const auto& g = s.grid();
  const int ell = s.ell();
  if (part.ell != ell || part.label.size() != g.size())
    throw PreconditionError("classify_interface: partition does not match the state");
  for (int i = 1; i <= ell; ++i)
    if (part.label_count(i) == 0) throw DegeneratePartition("classify_interface: partition is degenerate");

  auto& st = part.interface;
  st = InterfaceStats{};
  const double top = *std::max_element(part.max_gradient.begin(), part.max_gradient.end());
  st.gradient_floor = gradient_floor * top;
  const double ratio_min = 1.0 - match_band;
  auto bin = [&](double r) { st.ratio_histogram[std::min(9, static_cast<int>(r * 10.0))]++; };

  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      for (int k = 0; k < g.n_phi(); ++k) {
        const std::size_t n = g.index(i, j, k);
        const Node c{i, j, k};

        if (part.cls[n] == CellClass::Labeled) {
          // Faces towards a cell with a larger label: each face once.
          const int a = part.label[n];
          for (int d = 0; d < 6; ++d) {
            const auto nb = neighbor(g, c, d);
            if (!nb) continue;
            const std::size_t m = g.index(nb->i, nb->j, nb->k);
            const int b = part.label[m];
            if (part.cls[m] != CellClass::Labeled || b <= a) continue;
            const double ga = one_sided_gradient(s.components[a - 1], c, *nb, d);
            const double gb = one_sided_gradient(s.components[b - 1], *nb, c, d ^ 1);
            ++st.label_faces;
            if (std::max(ga, gb) > 0.0 && std::min(ga, gb) / std::max(ga, gb) >= ratio_min) ++st.label_faces_matched;
          }
          continue;
        }
        if (part.cls[n] != CellClass::Unassigned) continue;

        // Largest one-sided gradient of u_l seen from neighbours labeled l.
        std::vector<double> side(ell, 0.0);
        for (int d = 0; d < 6; ++d) {
          const auto nb = neighbor(g, c, d);
          if (!nb) continue;
          const std::size_t m = g.index(nb->i, nb->j, nb->k);
          if (part.cls[m] != CellClass::Labeled) continue;
          const int l = part.label[m] - 1;
          side[l] = std::max(side[l], one_sided_gradient(s.components[l], *nb, c, d ^ 1));
        }
        const double here = std::max(part.max_gradient[n], *std::max_element(side.begin(), side.end()));
        if (here <= st.gradient_floor) {
          part.cls[n] = CellClass::Singular;
          ++st.singular;
          continue;
        }
        part.cls[n] = CellClass::Interface;
        std::vector<double> sorted = side;
        std::sort(sorted.rbegin(), sorted.rend());
        if (ell < 2 || !(sorted[1] > 0.0)) {
          ++st.unmatched;
          continue;
        }
        const double r = sorted[1] / sorted[0];
        bin(r);
        if (r >= ratio_min)
          ++st.matched;
        else
          ++st.unmatched;
      }
    }
  return part;
}

double partition_symmetry_defect(const Partition& p, int i) {
  const auto& g = *p.grid;
  const int ell = p.ell;
  if (i < 1 || i > ell) throw PreconditionError("partition_symmetry_defect: label out of range");
  const int target = sigma_index(i, 1, ell);
  const OrbitMap rho(ell, 1);
  double diff = 0.0, ref = 0.0;
  for (int a = 0; a < g.n_r1(); ++a)
    for (int b = 0; b < g.n_r2(); ++b) {
      if (!g.active(a, b)) continue;
      const double w = g.weight(a, b);
      for (int k = 0; k < g.n_phi(); ++k) {
        const std::size_t n = g.index(a, b, k);
        bool inside = false;
        const std::size_t m = nearest_cell(g, rho_orbit(g.node(a, b, k), rho), inside);
        const bool lhs = p.label[n] == target;
        const bool rhs = inside && p.label[m] == i;
        if (lhs) ref += w;
        if (lhs != rhs) diff += w;
      }
    }
  return ref > 0.0 ? diff / ref : 0.0;
}

CellEnergy solve_dirichlet_cell(const PinwheelState& s, const Partition& part, int i, const SolverConfig& cfg,
                                const PoissonSolver& solver) {
  if (i < 1 || i > s.ell()) throw PreconditionError("solve_dirichlet_cell: label out of range");
  if (part.label_count(i) == 0) throw PreconditionError("solve_dirichlet_cell: label " + std::to_string(i) + " is empty");
  const auto& g = s.grid();
  std::vector<unsigned char> mask(g.size(), 0);
  for (std::size_t n = 0; n < g.size(); ++n) mask[n] = part.label[n] == i ? 1 : 0;

  SolverConfig single = cfg;
  single.ell = 1;
  single.beta = 0.0;
  PinwheelState st;
  st.components.push_back(s.components[i - 1]);

  MinimizeOptions opts;
  opts.mask = &mask;
  opts.gauge = false;
  const auto r = minimize(st, single, solver, opts);

  CellEnergy out;
  out.label = i;
  out.cell_energy = r.breakdown.kinetic / cfg.N;
  out.system_energy = dirichlet_energy(s.components[i - 1]) / cfg.N;
  out.relative_difference = std::abs(out.cell_energy - out.system_energy) / out.system_energy;
  out.iterations = r.iterations;
  out.converged = r.converged;
  return out;
}

OptimalityReport optimality_report(const ContinuationTrace& trace, const std::vector<CellEnergy>& cells,
                                   const Competitor* final_competitor) {
  if (trace.records.empty()) throw PreconditionError("optimality_report: empty trace");
  OptimalityReport r;
  r.cells = cells;
  for (const auto& c : cells) r.sum_cell_energy += c.cell_energy;
  r.c_ell_infinity_estimate = trace.records.back().j_value;
  r.competitor_bound = trace.competitor_bound;
  r.competitor_kind = trace.competitor_kind;
  if (final_competitor && final_competitor->j_value < r.competitor_bound) {
    r.competitor_bound = final_competitor->j_value;
    r.competitor_kind = final_competitor->kind;
  }
  r.relative_gap = std::abs(r.sum_cell_energy - r.c_ell_infinity_estimate) / r.c_ell_infinity_estimate;
  r.chain_ok = r.relative_gap <= 0.05;
  r.bound_ok = r.c_ell_infinity_estimate <= r.competitor_bound + 1e-3;
  return r;
}

int count_components(const ReducedGrid& g, const std::vector<std::uint8_t>& in) {
  if (in.size() != g.size()) throw PreconditionError("count_components: size mismatch");
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::vector<Node> stack;
  int count = 0;
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      for (int k = 0; k < g.n_phi(); ++k) {
        const std::size_t n = g.index(i, j, k);
        if (!in[n] || seen[n]) continue;
        ++count;
        seen[n] = 1;
        stack.push_back({i, j, k});
        while (!stack.empty()) {
          const Node c = stack.back();
          stack.pop_back();
          for (int d = 0; d < 6; ++d) {
            const auto nb = neighbor(g, c, d);
            if (!nb) continue;
            const std::size_t m = g.index(nb->i, nb->j, nb->k);
            if (in[m] && !seen[m]) {
              seen[m] = 1;
              stack.push_back(*nb);
            }
          }
        }
      }
    }
  return count;
}

NodalReport nodal_build(const PinwheelState& s, const SolverConfig& cfg, const PoissonSolver& solver) {
  const auto& g = s.grid();
  const int ell = s.ell();
  NodalReport r;
  r.field = Field(s.grid_ptr());
  for (int i = 0; i < ell; ++i) r.field.axpy(i % 2 == 0 ? 1.0 : -1.0, s.components[i]);
  const Field& w = r.field;
  r.parity_warning = ell > 1 && ell % 2 == 1;
  r.open_question = ell > 2;

  const double norm = l2(w);
  if (ell % 2 == 0 && norm > 0.0) {
    Field sum = compose_rho(w, OrbitMap(ell, 1));
    sum += w;
    r.antisymmetry_defect = l2(sum) / norm;
  }
  r.antisymmetry_asserted = ell == 2;
  r.antisymmetry_ok = !r.antisymmetry_asserted || r.antisymmetry_defect <= cfg.equiv_tol;

  Field res(s.grid_ptr());
  kernels::omp::apply_stiffness(g, w.values(), res.values());
  const double wa = kernels::omp::stiffness_form(g, w.values(), w.values());
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      const double wt = g.weight(i, j);
      for (int k = 0; k < g.n_phi(); ++k) {
        const double v = w.at(i, j, k);
        res.at(i, j, k) -= wt * v * v * v;
      }
    }
  const Field ares = solver.solve(res);
  const double rr = std::inner_product(res.values().begin(), res.values().end(), ares.values().begin(), 0.0);
  r.pde_residual = wa > 0.0 ? std::sqrt(std::max(rr, 0.0) / wa) : 0.0;

  const double cut = cfg.eta * w.max_abs();
  std::vector<std::uint8_t> pos(g.size(), 0), neg(g.size(), 0);
  for (std::size_t n = 0; n < g.size(); ++n) {
    pos[n] = w[n] > cut ? 1 : 0;
    neg[n] = w[n] < -cut ? 1 : 0;
  }
  r.positive_components = count_components(g, pos);
  r.negative_components = count_components(g, neg);
  return r;
}

std::string to_string(Distinctness d) { return d == Distinctness::Distinct ? "distinct" : "inconclusive"; }

// The obstruction: rho_m = rho_l^n, so for n even a nodal solution w_l is
// rho_m-even. A genuine w_m is rho_m-odd when m is even, and one-signed
// when m = 1; both properties survive dilation. For odd m > 1 no such
// property is available and the verdict stays inconclusive.
DistinctnessVerdict distinctness_check(const Field& w_l, const Field& w_m, int l, int m, double amplitude,
                                       double tolerance) {
  if (m < 1 || l % m != 0 || (l / m) % 2 != 0)
    throw PreconditionError("distinctness_check: l must be an even multiple of m");
  DistinctnessVerdict v;
  const double top_l = w_l.max_abs(), top_m = w_m.max_abs();
  if (!(top_l > 0.0) || !(top_m > 0.0)) {
    v.reason = "no high-amplitude points";
    return v;
  }
  const OrbitMap rho(m, 1);
  auto parity_fraction = [&](const Field& w, double top, double sign, int& samples) {
    const auto& g = w.grid();
    int hit = 0;
    samples = 0;
    for (int i = 0; i < g.n_r1(); ++i)
      for (int j = 0; j < g.n_r2(); ++j) {
        if (!g.active(i, j)) continue;
        for (int k = 0; k < g.n_phi(); ++k) {
          const double x = w.at(i, j, k);
          if (std::abs(x) < amplitude * top) continue;
          ++samples;
          const double y = interpolate(w, rho_orbit(g.node(i, j, k), rho));
          if (std::abs(y - sign * x) <= tolerance * std::abs(x)) ++hit;
        }
      }
    return samples > 0 ? static_cast<double>(hit) / samples : 0.0;
  };
  v.symmetric_fraction = parity_fraction(w_l, top_l, 1.0, v.samples);
  v.conflict_witnessed = v.samples > 0 && v.symmetric_fraction >= 0.9;
  if (!v.conflict_witnessed) {
    v.reason = "w_l is not rho_m-even on the sampled points";
    return v;
  }
  auto sign_changing = [&](const Field& w, double top) {
    const auto vals = w.values();
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    return *lo < -amplitude * top && *hi > amplitude * top;
  };
  if (m % 2 == 0) {
    int samples = 0;
    const double odd = parity_fraction(w_m, top_m, -1.0, samples);
    if (odd >= 0.9) {
      v.verdict = Distinctness::Distinct;
      v.reason = "w_l is rho_m-even, w_m is rho_m-odd";
    } else {
      v.reason = "w_m is not rho_m-odd";
    }
  } else if (m == 1) {
    if (sign_changing(w_l, top_l) && !sign_changing(w_m, top_m)) {
      v.verdict = Distinctness::Distinct;
      v.reason = "w_l changes sign, w_m is one-signed";
    } else {
      v.reason = "sign structure does not separate the fields";
    }
  } else {
    v.reason = "no dilation-invariant obstruction for odd m > 1";
  }
  return v;
}

}  // namespace pinwheel
