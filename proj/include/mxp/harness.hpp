// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mxp/dense.hpp"
#include "mxp/gmres.hpp"
#include "mxp/lu.hpp"
#include "mxp/matgen.hpp"

namespace mxp {

/// One benchmark run: configuration, phase timings, refinement outcome,
/// backward error, figure of merit, and the validity verdict.
struct BenchReport {
    GenSpec spec;
    FactorConfig factor_cfg;
    RefineConfig refine_cfg;
    bool equilibrated = false;
    double t_scale = 0.0;
    double t_factor = 0.0;
    double t_refine = 0.0;
    double t_total = 0.0; // always t_scale + t_factor + t_refine
    int iterations = 0;
    double berr = std::numeric_limits<double>::quiet_NaN(); // NaN: no solution produced
    double fom_ops_per_sec = 0.0;
    bool valid = false;
    bool debug_only = false;
};

/// One sweep cell. Pivot sweeps fill max_pivot/max_pivot_col; norm sweeps
/// fill the residual norms. status is "ok" or "singular".
struct ExperimentRow {
    index_t n = 0;
    std::uint64_t seed = 0;
    Pivoting pivoting = Pivoting::partial;
    double max_pivot = 0.0;
    index_t max_pivot_col = 0;
    double norm1 = 0.0;
    double norm2 = 0.0;
    double norminf = 0.0;
    std::string status = "ok";
};

/// ||Ax-b||_inf / ((||A||_inf ||x||_inf + ||b||_inf) * (n * 2^-53)), all in
/// binary64. Throws DegenerateSystem when the scale denominator is zero.
double backward_error(const DenseMatrix& A, const Vector& x, const Vector& b);

/// Same formula from precomputed pieces (residual may be b-Ax or Ax-b; only
/// its infinity norm enters). Used by the refinement loop to avoid
/// recomputing ||A||_inf every iteration.
double scaled_backward_error(double norm_a_inf, const Vector& residual,
                             const Vector& x, const Vector& b);

/// Strict comparison against the validity threshold 16.
bool validate(double berr);

/// (2/3 n^3 + 3/2 n^2) / t_total; 0 for n == 0.
double figure_of_merit(index_t n, double t_total);

struct Equilibration {
    DenseMatrix A;    // R * A * C
    Vector row_scale; // R diagonal, exact powers of two
    Vector col_scale; // C diagonal, exact powers of two
};

/// Two-sided diagonal scaling: r_i is the largest power of two <= 1/(row i
/// max magnitude), then c_j likewise over the row-scaled columns. All output
/// magnitudes end up <= 1 and every scaling is exact in binary arithmetic.
/// Throws ZeroRow / ZeroColumn.
Equilibration equilibrate(const DenseMatrix& A);

/// In-place variant returning the scale diagonals; used by run_benchmark to
/// avoid a second matrix buffer.
std::pair<Vector, Vector> equilibrate_inplace(DenseMatrix& A);

/// Given that (RAC) y = R b was solved, maps y back: x_i = c_i * y_i
/// (exact, powers of two). row_scale is accepted for auditing symmetry; the
/// column scales alone undo the substitution. Validation always runs
/// against the original A and b.
Vector unscale_solution(const Vector& y, const Vector& col_scale,
                        const Vector& row_scale);

/// Test instrumentation: callbacks executed inside the untimed windows of
/// run_benchmark, letting tests verify that generation and validation time
/// never reaches the figure of merit.
struct BenchHooks {
    std::function<void()> after_generate;
    std::function<void()> before_validate;
};

/// Full pipeline: generate (untimed) -> optional equilibration (t_scale) ->
/// mixed no-pivot LU (t_factor) -> initial solve + GMRES refinement + scale
/// undo (t_refine) -> backward error and verdict (untimed). Factorization
/// breakdowns and refinement failures yield invalid reports, not exceptions;
/// a breakdown is recognizable by berr == NaN. linear_n inputs are
/// debug-only and never valid.
BenchReport run_benchmark(const GenSpec& spec, const FactorConfig& fcfg,
                          const RefineConfig& rcfg, bool use_equilibration,
                          const BenchHooks& hooks = {});

/// For each (n, seed): uniform matrix without diagonal scaling, entries
/// halved to the classical half-unit range the pivot-growth reference curves
/// assume, then fp64 partial-pivot LU, recording the largest selected pivot
/// and its column. Rows ordered by (n, seed); seeds run 0..seeds_per_size-1.
std::vector<ExperimentRow> experiment_pivot_sweep(const std::vector<index_t>& sizes,
                                                  int seeds_per_size);

/// For each (n, seed): the same half-unit-range uniform system as the pivot
/// sweep, fp64 LU in the requested pivoting mode, direct solve, residual
/// norms of Ax - b. Breakdown cells are recorded with status "singular" and
/// NaN norms.
std::vector<ExperimentRow> experiment_norm_sweep(const std::vector<index_t>& sizes,
                                                 int seeds_per_size,
                                                 Pivoting pivoting);

/// Memory-lean direct-solve check: factors the generated matrix in place
/// (no pivoting, cfg formats), solves in binary64, then evaluates the
/// backward error against elements regenerated on the fly — peak memory is
/// a single n^2 buffer. The streamed accumulation uses the same per-element
/// order as mat_norm_inf and matvec, so the result is bitwise identical to
/// the materialized evaluation.
double direct_solve_backward_error(const GenSpec& spec, const FactorConfig& cfg);

// CSV persistence. Fixed header rows; numbers serialized as shortest
// round-trip decimals; reruns with identical inputs produce identical bytes.
void write_bench_csv(std::ostream& out, const std::vector<BenchReport>& reports);
void write_bench_csv(const std::string& path, const std::vector<BenchReport>& reports);
std::vector<BenchReport> read_bench_csv(const std::string& path);
void write_pivot_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);
void write_pivot_csv(const std::string& path, const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> read_pivot_csv(const std::string& path);
void write_norm_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);
void write_norm_csv(const std::string& path, const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> read_norm_csv(const std::string& path);

const char* pivoting_name(Pivoting p);
Pivoting parse_pivoting(const std::string& name);

} // namespace mxp
