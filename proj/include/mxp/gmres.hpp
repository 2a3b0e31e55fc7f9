// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "mxp/dense.hpp"
#include "mxp/errors.hpp"
#include "mxp/lu.hpp"

namespace mxp {

enum class Reorthogonalize { never, heuristic };

struct RefineConfig {
    int max_iters = 50;
    double berr_target = 1.0;
    // The factors hold the low precision; applying them in binary64 keeps
    // the preconditioned operator linear to working-precision rounding.
    // Quantized application (binary32/binary16) injects noise relative to
    // the *initial* residual, which floors a non-restarted Krylov space far
    // above the backward-error target — useful as a stress knob, not as a
    // default.
    Format precond_fmt = Format::binary64;
    Reorthogonalize reorthogonalize = Reorthogonalize::heuristic;
    double happy_breakdown_tol = 1e-14;
};

struct RefineResult {
    Vector x;
    int iterations = 0;
    std::vector<double> berr_history; // one entry per iteration
    bool converged = false;
    double t_refine = 0.0; // wall seconds spent inside gmres_refine
};

/// Thrown when the refinement loop reaches max_iters without meeting
/// berr_target; carries the state at the cap so callers can report it.
struct NotConverged : Error {
    RefineResult result;
    explicit NotConverged(RefineResult r);
};

/// Per-iteration instrumentation: the Givens-estimated preconditioned
/// residual norm, the true scaled backward error of the current iterate,
/// and the iterate itself.
struct IterationInfo {
    int iteration = 0;
    double est_resid = 0.0;
    double berr = 0.0;
    const Vector& x;
};
using IterationObserver = std::function<void(const IterationInfo&)>;

/// Test/diagnostic capture of the final Arnoldi basis.
struct KrylovCapture {
    std::vector<Vector> basis;
};

/// x0 = lu_solve(f, b, cfg.precond_fmt).
Vector initial_solution(const LUFactors& f, const Vector& b, const RefineConfig& cfg);

/// M^-1 v = U^-1 (L^-1 (P v)) with arithmetic quantized to fmt.
Vector apply_preconditioner(const LUFactors& f, const Vector& v, Format fmt);

/// Left-preconditioned GMRES on M^-1 A x = M^-1 b from x0, all Krylov
/// arithmetic in binary64: modified Gram-Schmidt Arnoldi (one conditional
/// reorthogonalization pass when the post-orthogonalization norm falls below
/// 1/sqrt(2) of the pre-orthogonalization norm), Givens-rotation least
/// squares, no restarting. After each iteration the current iterate is
/// formed and the true residual's scaled backward error decides stopping
/// (berr < cfg.berr_target). A subdiagonal below happy_breakdown_tol times
/// the initial preconditioned residual norm forms the final iterate and
/// exits. Throws NotConverged at the iteration cap and NumericalBreakdown
/// on non-finite Krylov quantities.
RefineResult gmres_refine(const DenseMatrix& A, const LUFactors& f, const Vector& b,
                          const Vector& x0, const RefineConfig& cfg,
                          const IterationObserver& observer = {},
                          KrylovCapture* capture = nullptr);

} // namespace mxp
