// SPDX-License-Identifier: Apache-2.0
#include "mxp/lu.hpp"

#include "mxp/detail.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mxp {
namespace {

// Quantize a rectangular region of A to fmt, modeling reduced-precision
// storage of the panel and block row.
void quantize_region(DenseMatrix& A, index_t r0, index_t r1, index_t c0, index_t c1,
                     Format fmt)
{
    if (fmt == Format::binary64 || r0 >= r1 || c0 >= c1) return;
    detail::with_quantizer(fmt, [&](auto q) {
        for (index_t j = c0; j < c1; ++j) {
            double* col = A.col(j);
            for (index_t i = r0; i < r1; ++i) col[i] = q(col[i]);
        }
    });
}

void record_pivot(PivotStats& stats, index_t col, double magnitude)
{
    stats.per_col_pivots[static_cast<std::size_t>(col)] = magnitude;
    if (magnitude > stats.max_pivot) {
        stats.max_pivot = magnitude;
        stats.max_pivot_col = col;
    }
}

// Unblocked left-looking panel factorization without pivoting on columns
// [k0, k0+bs) of A, rows k0..n-1, all results quantized via q. Update order
// per element: ascending panel column k, one fused multiply-add each.
template <class Q>
void panel_nopivot(DenseMatrix& A, index_t k0, index_t bs, double pivot_floor,
                   PivotStats& stats, Q q)
{
    const index_t n = A.rows;
    for (index_t c = k0; c < k0 + bs; ++c) {
        double* ac = A.col(c);
        for (index_t k = k0; k < c; ++k) {
            const double ukc = ac[k];
            const double* lk = A.col(k);
            for (index_t i = k + 1; i < n; ++i)
                ac[i] = q(std::fma(-lk[i], ukc, ac[i]));
        }
        const double piv = ac[c];
        const double apiv = std::fabs(piv);
        record_pivot(stats, c, apiv);
        if (apiv < pivot_floor) throw SingularPivot(c, apiv);
        for (index_t i = c + 1; i < n; ++i) ac[i] = q(ac[i] / piv);
    }
}

void check_square(const DenseMatrix& A, const char* op)
{
    if (A.rows != A.cols)
        throw DimensionMismatch(std::string(op) + ": matrix is " +
                                std::to_string(A.rows) + "x" + std::to_string(A.cols));
}

} // namespace

PivotStats lu_nopivot_mixed_inplace(DenseMatrix& A, const FactorConfig& cfg)
{
    check_square(A, "lu_nopivot_mixed");
    if (cfg.pivoting != Pivoting::none)
        throw std::invalid_argument("lu_nopivot_mixed: cfg.pivoting must be none");
    if (cfg.block_size < 1)
        throw std::invalid_argument("lu_nopivot_mixed: block_size must be >= 1");

    const index_t n = A.rows;
    PivotStats stats;
    stats.per_col_pivots.assign(static_cast<std::size_t>(n), 0.0);

    for (index_t k0 = 0; k0 < n; k0 += cfg.block_size) {
        const index_t b = std::min(cfg.block_size, n - k0);
        const index_t rest = n - k0 - b;
        quantize_region(A, k0, n, k0, k0 + b, cfg.panel_fmt);
        quantize_region(A, k0, k0 + b, k0 + b, n, cfg.panel_fmt);
        detail::with_quantizer(cfg.panel_fmt, [&](auto q) {
            panel_nopivot(A, k0, b, cfg.pivot_floor, stats, q);
        });
        if (rest > 0) {
            trsm_ld(Side::Left, UpLo::Lower, Diag::Unit, b, rest,
                    &A(k0, k0), n, &A(k0, k0 + b), n, cfg.panel_fmt);
            gemm_mixed_ld(rest, rest, b,
                          &A(k0 + b, k0), n, &A(k0, k0 + b), n, &A(k0 + b, k0 + b), n,
                          -1.0, 1.0, cfg.low_fmt, cfg.accum_fmt, Format::binary64);
        }
    }
    return stats;
}

std::pair<LUFactors, PivotStats> lu_nopivot_mixed(const DenseMatrix& A,
                                                  const FactorConfig& cfg)
{
    DenseMatrix packed = A;
    PivotStats stats = lu_nopivot_mixed_inplace(packed, cfg);
    LUFactors f{std::move(packed), {}, cfg.panel_fmt, cfg.low_fmt, cfg.accum_fmt,
                cfg.block_size};
    return {std::move(f), std::move(stats)};
}

std::pair<LUFactors, PivotStats> lu_partial_fp64(const DenseMatrix& A)
{
    check_square(A, "lu_partial_fp64");
    const index_t n = A.rows;
    const index_t nb = 128;

    DenseMatrix packed = A;
    std::vector<index_t> perm(static_cast<std::size_t>(n));
    PivotStats stats;
    stats.per_col_pivots.assign(static_cast<std::size_t>(n), 0.0);

    auto swap_rows = [&](index_t r1, index_t r2, index_t c0, index_t c1) {
        for (index_t j = c0; j < c1; ++j)
            std::swap(packed(r1, j), packed(r2, j));
    };

    for (index_t k0 = 0; k0 < n; k0 += nb) {
        const index_t b = std::min(nb, n - k0);
        const index_t rest = n - k0 - b;
        // Right-looking panel with row interchanges confined to the panel
        // columns; interchanges are replayed outside the panel afterwards.
        for (index_t c = k0; c < k0 + b; ++c) {
            double* ac = packed.col(c);
            index_t p = c;
            double amax = std::fabs(ac[c]);
            for (index_t i = c + 1; i < n; ++i) {
                const double av = std::fabs(ac[i]);
                if (av > amax) {
                    amax = av;
                    p = i;
                }
            }
            if (amax == 0.0) throw SingularPivot(c, 0.0);
            record_pivot(stats, c, amax);
            perm[static_cast<std::size_t>(c)] = p;
            if (p != c) swap_rows(c, p, k0, k0 + b);
            const double piv = ac[c];
            for (index_t i = c + 1; i < n; ++i) ac[i] /= piv;
            for (index_t j = c + 1; j < k0 + b; ++j) {
                double* aj = packed.col(j);
                const double ucj = aj[c];
                for (index_t i = c + 1; i < n; ++i)
                    aj[i] = std::fma(-ac[i], ucj, aj[i]);
            }
        }
        for (index_t c = k0; c < k0 + b; ++c) {
            const index_t p = perm[static_cast<std::size_t>(c)];
            if (p != c) {
                swap_rows(c, p, 0, k0);
                swap_rows(c, p, k0 + b, n);
            }
        }
        if (rest > 0) {
            trsm_ld(Side::Left, UpLo::Lower, Diag::Unit, b, rest,
                    &packed(k0, k0), n, &packed(k0, k0 + b), n, Format::binary64);
            gemm_mixed_ld(rest, rest, b,
                          &packed(k0 + b, k0), n, &packed(k0, k0 + b), n,
                          &packed(k0 + b, k0 + b), n,
                          -1.0, 1.0, Format::binary64, Format::binary64,
                          Format::binary64);
        }
    }

    LUFactors f{std::move(packed), std::move(perm), Format::binary64,
                Format::binary64, Format::binary64, nb};
    return {std::move(f), std::move(stats)};
}

Vector lu_solve(const LUFactors& f, const Vector& b, Format solve_fmt)
{
    const index_t n = f.n();
    if (b.len() != n)
        throw DimensionMismatch("lu_solve: factor order " + std::to_string(n) +
                                ", rhs length " + std::to_string(b.len()));
    Vector x = b;
    if (f.pivoted())
        for (index_t k = 0; k < n; ++k) {
            const index_t p = f.perm[static_cast<std::size_t>(k)];
            if (p != k) std::swap(x[k], x[p]);
        }
    const DenseMatrix& P = f.packed;
    detail::with_quantizer(solve_fmt, [&](auto q) {
        // Forward substitution with unit-lower L, column-oriented: element i
        // receives its fused multiply-add updates in ascending k.
        for (index_t k = 0; k < n; ++k) {
            const double xk = x[k];
            const double* col = P.col(k);
            for (index_t i = k + 1; i < n; ++i)
                x[i] = q(std::fma(-col[i], xk, x[i]));
        }
        // Back substitution with U, column-oriented: element i receives its
        // updates in descending k.
        for (index_t k = n - 1; k >= 0; --k) {
            const double* col = P.col(k);
            x[k] = q(x[k] / col[k]);
            const double xk = x[k];
            for (index_t i = 0; i < k; ++i)
                x[i] = q(std::fma(-col[i], xk, x[i]));
        }
    });
    return x;
}

double reconstruct_error(const LUFactors& f, const DenseMatrix& A)
{
    check_square(A, "reconstruct_error");
    const index_t n = f.n();
    if (A.rows != n)
        throw DimensionMismatch("reconstruct_error: factor order " +
                                std::to_string(n) + ", matrix order " +
                                std::to_string(A.rows));
    DenseMatrix L(n, n), U(n, n);
    for (index_t j = 0; j < n; ++j) {
        for (index_t i = 0; i < j; ++i) U(i, j) = f.packed(i, j);
        U(j, j) = f.packed(j, j);
        L(j, j) = 1.0;
        for (index_t i = j + 1; i < n; ++i) L(i, j) = f.packed(i, j);
    }
    DenseMatrix R(n, n);
    gemm_mixed(R, L, U, 1.0, 0.0, Format::binary64, Format::binary64);
    // Undo the interchanges (reverse order) so R approximates A directly.
    if (f.pivoted())
        for (index_t k = n - 1; k >= 0; --k) {
            const index_t p = f.perm[static_cast<std::size_t>(k)];
            if (p != k)
                for (index_t j = 0; j < n; ++j)
                    std::swap(R(k, j), R(p, j));
        }
    std::vector<double> rowsum(static_cast<std::size_t>(n), 0.0);
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < n; ++i)
            rowsum[static_cast<std::size_t>(i)] += std::fabs(R(i, j) - A(i, j));
    double num = 0.0;
    for (double s : rowsum) num = std::max(num, s);
    return num / mat_norm_inf(A);
}

std::pair<std::uint64_t, std::uint64_t> flop_count(index_t n)
{
    if (n <= 0) return {0, 0};
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    // (4n^3 - 3n^2 - n)/6 == n(n-1)(4n+1)/6, always an exact integer.
    const std::uint64_t factor_ops = un * (un - 1) * (4 * un + 1) / 6;
    const std::uint64_t solve_ops = 2 * un * un;
    return {factor_ops, solve_ops};
}

} // namespace mxp
