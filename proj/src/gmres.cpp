// SPDX-License-Identifier: Apache-2.0
#include "mxp/gmres.hpp"

#include "mxp/harness.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace mxp {

NotConverged::NotConverged(RefineResult r)
    : Error("gmres_refine: backward-error target not reached within " +
            std::to_string(r.iterations) + " iterations"),
      result(std::move(r))
{
}

Vector initial_solution(const LUFactors& f, const Vector& b, const RefineConfig& cfg)
{
    return lu_solve(f, b, cfg.precond_fmt);
}

Vector apply_preconditioner(const LUFactors& f, const Vector& v, Format fmt)
{
    return lu_solve(f, v, fmt);
}

namespace {

Vector residual_of(const DenseMatrix& A, const Vector& x, const Vector& b)
{
    Vector r = matvec(A, x);
    for (index_t i = 0; i < r.len(); ++i) r[i] = b[i] - r[i];
    return r;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

RefineResult gmres_refine(const DenseMatrix& A, const LUFactors& f, const Vector& b,
                          const Vector& x0, const RefineConfig& cfg,
                          const IterationObserver& observer, KrylovCapture* capture)
{
    const index_t n = A.rows;
    if (A.cols != n || b.len() != n || x0.len() != n || f.n() != n)
        throw DimensionMismatch("gmres_refine: inconsistent operand sizes");
    if (cfg.max_iters < 1)
        throw std::invalid_argument("gmres_refine: max_iters must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    const double norm_a = mat_norm_inf(A);

    RefineResult res;
    res.x = x0;

    Vector r = residual_of(A, res.x, b);
    double berr = scaled_backward_error(norm_a, r, res.x, b);
    if (berr < cfg.berr_target) {
        res.converged = true;
        res.t_refine = seconds_since(t0);
        return res;
    }

    Vector z = apply_preconditioner(f, r, cfg.precond_fmt);
    const double beta = vec_norm(z, NormKind::two);
    if (!std::isfinite(beta))
        throw NumericalBreakdown("gmres_refine: non-finite preconditioned residual");
    if (beta == 0.0) {
        // The preconditioned residual vanished without meeting the target;
        // no Krylov space can be built from x0.
        res.t_refine = seconds_since(t0);
        return res;
    }

    const int m = cfg.max_iters;
    const int ldh = m + 1;
    std::vector<Vector> V;
    V.reserve(static_cast<std::size_t>(m) + 1);
    for (index_t i = 0; i < n; ++i) z[i] /= beta;
    V.push_back(std::move(z));

    std::vector<double> H(static_cast<std::size_t>(ldh) * m, 0.0);
    std::vector<double> cs(static_cast<std::size_t>(m), 0.0);
    std::vector<double> sn(static_cast<std::size_t>(m), 0.0);
    std::vector<double> g(static_cast<std::size_t>(m) + 1, 0.0);
    g[0] = beta;

    auto fill_capture = [&] {
        if (capture) capture->basis = V;
    };

    for (int it = 1; it <= m; ++it) {
        const int jc = it - 1;
        double* h = H.data() + static_cast<std::size_t>(jc) * ldh;

        Vector w = matvec(A, V[static_cast<std::size_t>(jc)]);
        w = apply_preconditioner(f, w, cfg.precond_fmt);

        // Modified Gram-Schmidt with one conditional reorthogonalization.
        const double pre_norm = vec_norm(w, NormKind::two);
        for (int k = 0; k <= jc; ++k) {
            const double hk = dot(V[static_cast<std::size_t>(k)], w);
            h[k] = hk;
            axpy(-hk, V[static_cast<std::size_t>(k)], w);
        }
        double post_norm = vec_norm(w, NormKind::two);
        if (cfg.reorthogonalize == Reorthogonalize::heuristic &&
            post_norm < pre_norm / std::numbers::sqrt2) {
            for (int k = 0; k <= jc; ++k) {
                const double corr = dot(V[static_cast<std::size_t>(k)], w);
                h[k] += corr;
                axpy(-corr, V[static_cast<std::size_t>(k)], w);
            }
            post_norm = vec_norm(w, NormKind::two);
        }
        h[jc + 1] = post_norm;
        for (int k = 0; k <= jc + 1; ++k)
            if (!std::isfinite(h[k]))
                throw NumericalBreakdown("gmres_refine: non-finite Hessenberg entry at iteration " +
                                         std::to_string(it));

        const bool happy = post_norm < cfg.happy_breakdown_tol * beta;
        if (!happy) {
            for (index_t i = 0; i < n; ++i) w[i] /= post_norm;
            V.push_back(std::move(w));
        }

        // Apply accumulated Givens rotations, then generate this column's.
        for (int k = 0; k < jc; ++k) {
            const double tmp = cs[k] * h[k] + sn[k] * h[k + 1];
            h[k + 1] = -sn[k] * h[k] + cs[k] * h[k + 1];
            h[k] = tmp;
        }
        const double rr = std::hypot(h[jc], h[jc + 1]);
        if (rr == 0.0) {
            cs[jc] = 1.0;
            sn[jc] = 0.0;
        } else {
            cs[jc] = h[jc] / rr;
            sn[jc] = h[jc + 1] / rr;
        }
        h[jc] = rr;
        h[jc + 1] = 0.0;
        g[jc + 1] = -sn[jc] * g[jc];
        g[jc] = cs[jc] * g[jc];
        const double est_resid = std::fabs(g[jc + 1]);

        // Form the iterate: back-solve the rotated Hessenberg system.
        std::vector<double> y(static_cast<std::size_t>(it), 0.0);
        for (int k = it - 1; k >= 0; --k) {
            double s = g[k];
            for (int c = k + 1; c < it; ++c)
                s -= H[static_cast<std::size_t>(c) * ldh + k] * y[static_cast<std::size_t>(c)];
            const double diag = H[static_cast<std::size_t>(k) * ldh + k];
            if (diag == 0.0)
                throw NumericalBreakdown("gmres_refine: zero diagonal in least-squares solve");
            y[static_cast<std::size_t>(k)] = s / diag;
        }
        Vector xk = x0;
        for (int k = 0; k < it; ++k)
            axpy(y[static_cast<std::size_t>(k)], V[static_cast<std::size_t>(k)], xk);

        r = residual_of(A, xk, b);
        berr = scaled_backward_error(norm_a, r, xk, b);
        res.x = std::move(xk);
        res.iterations = it;
        res.berr_history.push_back(berr);
        if (observer) observer(IterationInfo{it, est_resid, berr, res.x});

        if (berr < cfg.berr_target) {
            res.converged = true;
            fill_capture();
            res.t_refine = seconds_since(t0);
            return res;
        }
        if (happy) {
            fill_capture();
            res.t_refine = seconds_since(t0);
            return res;
        }
    }

    fill_capture();
    res.t_refine = seconds_since(t0);
    throw NotConverged(std::move(res));
}

} // namespace mxp
