#pragma once

// Grid kernels in two flavours: `serial` is the plain reference loop kept
// for testing; `omp` parallelizes over r1-rows. Every `omp` reduction sums
// each row serially and then combines the row partials in row order, so its
// result does not depend on the number of threads.

#include <span>
#include <vector>

#include "pinwheel/grid.hpp"

namespace pinwheel::kernels {

using Components = std::span<const std::span<const double>>;

namespace serial {

void apply_stiffness(const ReducedGrid& g, std::span<const double> u, std::span<double> out);
double stiffness_form(const ReducedGrid& g, std::span<const double> a, std::span<const double> b);
double weighted_sum(const ReducedGrid& g, std::span<const double> f);
double weighted_dot(const ReducedGrid& g, std::span<const double> a, std::span<const double> b);
double weighted_pow(const ReducedGrid& g, std::span<const double> u, double q);
double weighted_sq_sq(const ReducedGrid& g, std::span<const double> a, std::span<const double> b);
/// out = w * (u_i^3 + beta * sum_{j != i} u_j^2 u_i)
void reaction(const ReducedGrid& g, Components comps, int i, double beta, std::span<double> out);

}  // namespace serial

namespace omp {

void apply_stiffness(const ReducedGrid& g, std::span<const double> u, std::span<double> out);
double stiffness_form(const ReducedGrid& g, std::span<const double> a, std::span<const double> b);
double weighted_sum(const ReducedGrid& g, std::span<const double> f);
double weighted_dot(const ReducedGrid& g, std::span<const double> a, std::span<const double> b);
double weighted_pow(const ReducedGrid& g, std::span<const double> u, double q);
double weighted_sq_sq(const ReducedGrid& g, std::span<const double> a, std::span<const double> b);
void reaction(const ReducedGrid& g, Components comps, int i, double beta, std::span<double> out);

}  // namespace omp

/// Number of worker threads used by the omp kernels (1 without OpenMP).
int worker_count();
void set_worker_count(int n);

}  // namespace pinwheel::kernels
