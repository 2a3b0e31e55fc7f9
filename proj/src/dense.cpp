// SPDX-License-Identifier: Apache-2.0
#include "mxp/dense.hpp"

#include "mxp/detail.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace mxp {
namespace {

// ---------------------------------------------------------------------------
// binary64 fast path: packed panels + register-tile microkernel. The k loop
// runs in ascending order per output element with one fused multiply-add per
// step, grouped into kGemmKBlock partial sums, so results are bit-identical
// to the scalar reference evaluation of the same formula.
// ---------------------------------------------------------------------------

constexpr index_t kMR = 8;
constexpr index_t kNR = 8;
constexpr index_t kMC = 256; // rows per packed A block; A block stays in L2

// Pack an mc x kc block of column-major A into row-interleaved MR panels:
// dst[(i0/MR) * kc * MR + k * MR + i] = A(i0 + i, k), zero-padded past mc.
void pack_a(const double* A, index_t lda, index_t mc, index_t kc, double* dst)
{
    for (index_t i0 = 0; i0 < mc; i0 += kMR) {
        const index_t mr = std::min(kMR, mc - i0);
        for (index_t k = 0; k < kc; ++k) {
            const double* src = A + i0 + k * lda;
            index_t i = 0;
            for (; i < mr; ++i) dst[i] = src[i];
            for (; i < kMR; ++i) dst[i] = 0.0;
            dst += kMR;
        }
    }
}

// Pack a kc x nc block of column-major B into column-interleaved NR panels:
// dst[(j0/NR) * kc * NR + k * NR + j] = B(k, j0 + j), zero-padded past nc.
void pack_b(const double* B, index_t ldb, index_t kc, index_t nc, double* dst)
{
    for (index_t j0 = 0; j0 < nc; j0 += kNR) {
        const index_t nr = std::min(kNR, nc - j0);
        for (index_t k = 0; k < kc; ++k) {
            const double* src = B + k + j0 * ldb;
            index_t j = 0;
            for (; j < nr; ++j) dst[j] = src[j * ldb];
            for (; j < kNR; ++j) dst[j] = 0.0;
            dst += kNR;
        }
    }
}

// acc_out[j * kMR + i] = sum over k of ap[k][i] * bp[k][j], one fused
// multiply-add per k step.
#if defined(__AVX512F__)

void micro_kernel(index_t kc, const double* ap, const double* bp, double* acc_out)
{
    __m512d acc0 = _mm512_setzero_pd();
    __m512d acc1 = _mm512_setzero_pd();
    __m512d acc2 = _mm512_setzero_pd();
    __m512d acc3 = _mm512_setzero_pd();
    __m512d acc4 = _mm512_setzero_pd();
    __m512d acc5 = _mm512_setzero_pd();
    __m512d acc6 = _mm512_setzero_pd();
    __m512d acc7 = _mm512_setzero_pd();
    for (index_t k = 0; k < kc; ++k) {
        const __m512d a = _mm512_loadu_pd(ap + k * kMR);
        const double* b = bp + k * kNR;
        acc0 = _mm512_fmadd_pd(a, _mm512_set1_pd(b[0]), acc0);
        acc1 = _mm512_fmadd_pd(a, _mm512_set1_pd(b[1]), acc1);
        acc2 = _mm512_fmadd_pd(a, _mm512_set1_pd(b[2]), acc2);
        acc3 = _mm512_fmadd_pd(a, _mm512_set1_pd(b[3]), acc3);
        acc4 = _mm512_fmadd_pd(a, _mm512_set1_pd(b[4]), acc4);
        acc5 = _mm512_fmadd_pd(a, _mm512_set1_pd(b[5]), acc5);
        acc6 = _mm512_fmadd_pd(a, _mm512_set1_pd(b[6]), acc6);
        acc7 = _mm512_fmadd_pd(a, _mm512_set1_pd(b[7]), acc7);
    }
    _mm512_storeu_pd(acc_out + 0 * kMR, acc0);
    _mm512_storeu_pd(acc_out + 1 * kMR, acc1);
    _mm512_storeu_pd(acc_out + 2 * kMR, acc2);
    _mm512_storeu_pd(acc_out + 3 * kMR, acc3);
    _mm512_storeu_pd(acc_out + 4 * kMR, acc4);
    _mm512_storeu_pd(acc_out + 5 * kMR, acc5);
    _mm512_storeu_pd(acc_out + 6 * kMR, acc6);
    _mm512_storeu_pd(acc_out + 7 * kMR, acc7);
}

#else

// Portable kernel; std::fma rounds identically to the vector FMA above.
void micro_kernel(index_t kc, const double* ap, const double* bp, double* acc_out)
{
    double acc[kMR * kNR] = {};
    for (index_t k = 0; k < kc; ++k) {
        const double* a = ap + k * kMR;
        const double* b = bp + k * kNR;
        for (index_t j = 0; j < kNR; ++j)
            for (index_t i = 0; i < kMR; ++i)
                acc[j * kMR + i] = std::fma(a[i], b[j], acc[j * kMR + i]);
    }
    std::memcpy(acc_out, acc, sizeof(acc));
}

#endif

// C(i, j) = round((alpha * acc) + (beta * C(i, j)), cf); the two products are
// evaluated separately in binary64 and combined with a single add.
void combine_tile(double* C, index_t ldc, index_t mr, index_t nr,
                  const double* acc, double alpha, double beta, Format cf)
{
    for (index_t j = 0; j < nr; ++j)
        for (index_t i = 0; i < mr; ++i) {
            double& c = C[i + j * ldc];
            c = round_to(alpha * acc[j * kMR + i] + beta * c, cf);
        }
}

void accumulate_tile(double* T, index_t ldt, index_t mr, index_t nr, const double* acc)
{
    for (index_t j = 0; j < nr; ++j)
        for (index_t i = 0; i < mr; ++i)
            T[i + j * ldt] += acc[j * kMR + i];
}

void gemm_fp64(index_t m, index_t n, index_t k,
               const double* A, index_t lda,
               const double* B, index_t ldb,
               double* C, index_t ldc,
               double alpha, double beta, Format cf)
{
    const index_t jtiles = (n + kNR - 1) / kNR;

    if (k <= kGemmKBlock) {
        // Single summation block: tile sums live entirely in registers.
        std::vector<double> bpack(static_cast<std::size_t>(jtiles) * k * kNR);
#pragma omp parallel for schedule(static)
        for (index_t jt = 0; jt < jtiles; ++jt)
            pack_b(B + jt * kNR * ldb, ldb, k, std::min(kNR, n - jt * kNR),
                   bpack.data() + jt * k * kNR);

        std::vector<double> apack(static_cast<std::size_t>(kMC) * k);
        for (index_t i0 = 0; i0 < m; i0 += kMC) {
            const index_t mc = std::min(kMC, m - i0);
            pack_a(A + i0, lda, mc, k, apack.data());
#pragma omp parallel for schedule(static)
            for (index_t jt = 0; jt < jtiles; ++jt) {
                const index_t j0 = jt * kNR;
                const index_t nr = std::min(kNR, n - j0);
                const double* bp = bpack.data() + jt * k * kNR;
                for (index_t it = 0; it < mc; it += kMR) {
                    const index_t mr = std::min(kMR, mc - it);
                    double acc[kMR * kNR];
                    micro_kernel(k, apack.data() + (it / kMR) * k * kMR, bp, acc);
                    combine_tile(C + (i0 + it) + j0 * ldc, ldc, mr, nr, acc,
                                 alpha, beta, cf);
                }
            }
        }
        return;
    }

    // General case: accumulate kGemmKBlock partial sums into a binary64
    // temporary, then combine once.
    std::vector<double> total(static_cast<std::size_t>(m) * n, 0.0);
    std::vector<double> bpack(static_cast<std::size_t>(jtiles) * kGemmKBlock * kNR);
    std::vector<double> apack(static_cast<std::size_t>(kMC) * kGemmKBlock);
    for (index_t k0 = 0; k0 < k; k0 += kGemmKBlock) {
        const index_t kc = std::min(kGemmKBlock, k - k0);
#pragma omp parallel for schedule(static)
        for (index_t jt = 0; jt < jtiles; ++jt)
            pack_b(B + k0 + jt * kNR * ldb, ldb, kc, std::min(kNR, n - jt * kNR),
                   bpack.data() + jt * kc * kNR);
        for (index_t i0 = 0; i0 < m; i0 += kMC) {
            const index_t mc = std::min(kMC, m - i0);
            pack_a(A + i0 + k0 * lda, lda, mc, kc, apack.data());
#pragma omp parallel for schedule(static)
            for (index_t jt = 0; jt < jtiles; ++jt) {
                const index_t j0 = jt * kNR;
                const index_t nr = std::min(kNR, n - j0);
                const double* bp = bpack.data() + jt * kc * kNR;
                for (index_t it = 0; it < mc; it += kMR) {
                    const index_t mr = std::min(kMR, mc - it);
                    double acc[kMR * kNR];
                    micro_kernel(kc, apack.data() + (it / kMR) * kc * kMR, bp, acc);
                    accumulate_tile(total.data() + (i0 + it) + j0 * m, m, mr, nr, acc);
                }
            }
        }
    }
#pragma omp parallel for schedule(static)
    for (index_t j = 0; j < n; ++j) {
        const double* t = total.data() + j * m;
        double* c = C + j * ldc;
        for (index_t i = 0; i < m; ++i)
            c[i] = round_to(alpha * t[i] + beta * c[i], cf);
    }
}

// ---------------------------------------------------------------------------
// Emulated path: operands pre-quantized to operand_fmt, every fused
// multiply-add result quantized to accum_fmt.
// ---------------------------------------------------------------------------

template <class Q>
void quantize_pack(const double* X, index_t ld, index_t rows, index_t cols,
                   double* dst, Q q)
{
#pragma omp parallel for schedule(static)
    for (index_t j = 0; j < cols; ++j) {
        const double* src = X + j * ld;
        double* d = dst + j * rows;
        for (index_t i = 0; i < rows; ++i) d[i] = q(src[i]);
    }
}

template <class Q>
void gemm_emulated(index_t m, index_t n, index_t k,
                   const double* Aq, const double* Bq,
                   double* C, index_t ldc,
                   double alpha, double beta, Format cf, Q qacc)
{
#pragma omp parallel
    {
        std::vector<double> total(static_cast<std::size_t>(m));
        std::vector<double> s(static_cast<std::size_t>(m));
#pragma omp for schedule(static)
        for (index_t j = 0; j < n; ++j) {
            std::fill(total.begin(), total.end(), 0.0);
            for (index_t k0 = 0; k0 < k; k0 += kGemmKBlock) {
                const index_t kend = std::min(k0 + kGemmKBlock, k);
                std::fill(s.begin(), s.end(), 0.0);
                for (index_t kk = k0; kk < kend; ++kk) {
                    const double b = Bq[kk + j * k];
                    const double* a = Aq + kk * m;
                    for (index_t i = 0; i < m; ++i)
                        s[i] = qacc(std::fma(a[i], b, s[i]));
                }
                for (index_t i = 0; i < m; ++i)
                    total[i] = qacc(total[i] + s[i]);
            }
            double* c = C + j * ldc;
            for (index_t i = 0; i < m; ++i)
                c[i] = round_to(alpha * total[i] + beta * c[i], cf);
        }
    }
}

} // namespace

void gemm_mixed_ld(index_t m, index_t n, index_t k,
                   const double* A, index_t lda,
                   const double* B, index_t ldb,
                   double* C, index_t ldc,
                   double alpha, double beta,
                   Format operand_fmt, Format accum_fmt, Format c_fmt)
{
    if (m <= 0 || n <= 0) return;
    if (k <= 0) {
        for (index_t j = 0; j < n; ++j) {
            double* c = C + j * ldc;
            for (index_t i = 0; i < m; ++i)
                c[i] = round_to(alpha * 0.0 + beta * c[i], c_fmt);
        }
        return;
    }
    if (operand_fmt == Format::binary64 && accum_fmt == Format::binary64) {
        gemm_fp64(m, n, k, A, lda, B, ldb, C, ldc, alpha, beta, c_fmt);
        return;
    }
    std::vector<double> aq(static_cast<std::size_t>(m) * k);
    std::vector<double> bq(static_cast<std::size_t>(k) * n);
    detail::with_quantizer(operand_fmt, [&](auto q) {
        quantize_pack(A, lda, m, k, aq.data(), q);
        quantize_pack(B, ldb, k, n, bq.data(), q);
    });
    detail::with_quantizer(accum_fmt, [&](auto q) {
        gemm_emulated(m, n, k, aq.data(), bq.data(), C, ldc, alpha, beta, c_fmt, q);
    });
}

void gemm_mixed(DenseMatrix& C, const DenseMatrix& A, const DenseMatrix& B,
                double alpha, double beta, Format operand_fmt, Format accum_fmt)
{
    if (A.rows != C.rows || B.cols != C.cols || A.cols != B.rows)
        throw DimensionMismatch("gemm_mixed: A is " + std::to_string(A.rows) + "x" +
                                std::to_string(A.cols) + ", B is " +
                                std::to_string(B.rows) + "x" + std::to_string(B.cols) +
                                ", C is " + std::to_string(C.rows) + "x" +
                                std::to_string(C.cols));
    gemm_mixed_ld(C.rows, C.cols, A.cols, A.values.data(), A.rows,
                  B.values.data(), B.rows, C.values.data(), C.rows,
                  alpha, beta, operand_fmt, accum_fmt, C.fmt);
}

// ---------------------------------------------------------------------------
// Triangular solves
// ---------------------------------------------------------------------------

namespace {

void check_diag_nonzero(const double* T, index_t ldt, index_t n)
{
    for (index_t i = 0; i < n; ++i)
        if (T[i + i * ldt] == 0.0)
            throw SingularDiagonal("trsm: zero diagonal at index " + std::to_string(i));
}

// Left solve, columns of B processed in tiles of kNR so the inner update
// vectorizes across right-hand sides. Per column the operation sequence is
// plain forward/back substitution with ascending k, each result quantized.
template <class Q>
void trsm_left(UpLo uplo, Diag diag, index_t m, index_t n,
               const double* T, index_t ldt, double* B, index_t ldb, Q q)
{
    const bool lower = uplo == UpLo::Lower;
    const bool unit = diag == Diag::Unit;
#pragma omp parallel
    {
        std::vector<double> tile(static_cast<std::size_t>(m) * kNR);
#pragma omp for schedule(static)
        for (index_t j0 = 0; j0 < n; j0 += kNR) {
            const index_t w = std::min(kNR, n - j0);
            for (index_t k = 0; k < m; ++k) {
                double* t = tile.data() + k * kNR;
                index_t j = 0;
                for (; j < w; ++j) t[j] = B[k + (j0 + j) * ldb];
                for (; j < kNR; ++j) t[j] = 0.0;
            }
            for (index_t step = 0; step < m; ++step) {
                const index_t i = lower ? step : m - 1 - step;
                double* ti = tile.data() + i * kNR;
                const index_t kbeg = lower ? 0 : i + 1;
                const index_t kend = lower ? i : m;
                for (index_t k = kbeg; k < kend; ++k) {
                    const double tik = -T[i + k * ldt];
                    const double* tk = tile.data() + k * kNR;
                    for (index_t j = 0; j < kNR; ++j)
                        ti[j] = q(std::fma(tik, tk[j], ti[j]));
                }
                if (!unit) {
                    const double d = T[i + i * ldt];
                    for (index_t j = 0; j < kNR; ++j) ti[j] = q(ti[j] / d);
                }
            }
            for (index_t k = 0; k < m; ++k)
                for (index_t j = 0; j < w; ++j)
                    B[k + (j0 + j) * ldb] = tile[k * kNR + j];
        }
    }
}

// Right solve X * T = B; rows of B are independent.
template <class Q>
void trsm_right(UpLo uplo, Diag diag, index_t m, index_t n,
                const double* T, index_t ldt, double* B, index_t ldb, Q q)
{
    const bool lower = uplo == UpLo::Lower;
    const bool unit = diag == Diag::Unit;
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < m; ++i) {
        for (index_t step = 0; step < n; ++step) {
            // Lower T couples column j to later columns, so solve backwards.
            const index_t j = lower ? n - 1 - step : step;
            double s = B[i + j * ldb];
            const index_t kbeg = lower ? j + 1 : 0;
            const index_t kend = lower ? n : j;
            for (index_t k = kbeg; k < kend; ++k)
                s = q(std::fma(-T[k + j * ldt], B[i + k * ldb], s));
            if (!unit) s = q(s / T[j + j * ldt]);
            B[i + j * ldb] = s;
        }
    }
}

} // namespace

void trsm_ld(Side side, UpLo uplo, Diag diag,
             index_t m, index_t n, const double* T, index_t ldt,
             double* B, index_t ldb, Format fmt)
{
    if (m <= 0 || n <= 0) return;
    if (diag == Diag::NonUnit)
        check_diag_nonzero(T, ldt, side == Side::Left ? m : n);
    detail::with_quantizer(fmt, [&](auto q) {
        if (side == Side::Left)
            trsm_left(uplo, diag, m, n, T, ldt, B, ldb, q);
        else
            trsm_right(uplo, diag, m, n, T, ldt, B, ldb, q);
    });
}

void trsm(Side side, UpLo uplo, Diag diag, const DenseMatrix& T, DenseMatrix& B,
          Format fmt)
{
    const index_t need = side == Side::Left ? B.rows : B.cols;
    if (T.rows != T.cols || T.rows != need)
        throw DimensionMismatch("trsm: T is " + std::to_string(T.rows) + "x" +
                                std::to_string(T.cols) + ", B is " +
                                std::to_string(B.rows) + "x" + std::to_string(B.cols));
    trsm_ld(side, uplo, diag, B.rows, B.cols, T.values.data(), T.rows,
            B.values.data(), B.rows, fmt);
}

// ---------------------------------------------------------------------------
// Matrix-vector products and norms
// ---------------------------------------------------------------------------

Vector matvec(const DenseMatrix& A, const Vector& x)
{
    if (x.len() != A.cols)
        throw DimensionMismatch("matvec: A has " + std::to_string(A.cols) +
                                " columns, x has length " + std::to_string(x.len()));
    const index_t m = A.rows;
    const index_t n = A.cols;
    Vector y(m);
    constexpr index_t chunk = 512;
#pragma omp parallel for schedule(static)
    for (index_t i0 = 0; i0 < m; i0 += chunk) {
        const index_t iend = std::min(i0 + chunk, m);
        double* yp = y.data();
        for (index_t j = 0; j < n; ++j) {
            const double xj = x[j];
            const double* a = A.col(j);
            for (index_t i = i0; i < iend; ++i)
                yp[i] = std::fma(a[i], xj, yp[i]);
        }
    }
    return y;
}

double vec_norm(const Vector& x, NormKind which)
{
    const index_t n = x.len();
    switch (which) {
        case NormKind::one: {
            double s = 0.0;
            for (index_t i = 0; i < n; ++i) s += std::fabs(x[i]);
            return s;
        }
        case NormKind::two: {
            // One-pass scaled sum of squares (no overflow for finite input).
            double scale = 0.0;
            double ssq = 1.0;
            for (index_t i = 0; i < n; ++i) {
                const double ax = std::fabs(x[i]);
                if (ax == 0.0) continue;
                if (scale < ax) {
                    const double r = scale / ax;
                    ssq = 1.0 + ssq * r * r;
                    scale = ax;
                } else {
                    const double r = ax / scale;
                    ssq += r * r;
                }
            }
            return scale * std::sqrt(ssq);
        }
        case NormKind::inf: {
            double s = 0.0;
            for (index_t i = 0; i < n; ++i) s = std::max(s, std::fabs(x[i]));
            return s;
        }
    }
    return 0.0;
}

double mat_norm_inf(const DenseMatrix& A)
{
    const index_t m = A.rows;
    const index_t n = A.cols;
    std::vector<double> rowsum(static_cast<std::size_t>(m), 0.0);
    constexpr index_t chunk = 512;
#pragma omp parallel for schedule(static)
    for (index_t i0 = 0; i0 < m; i0 += chunk) {
        const index_t iend = std::min(i0 + chunk, m);
        for (index_t j = 0; j < n; ++j) {
            const double* a = A.col(j);
            for (index_t i = i0; i < iend; ++i)
                rowsum[i] += std::fabs(a[i]);
        }
    }
    double nrm = 0.0;
    for (index_t i = 0; i < m; ++i) nrm = std::max(nrm, rowsum[i]);
    return nrm;
}

double dot(const Vector& x, const Vector& y)
{
    if (x.len() != y.len())
        throw DimensionMismatch("dot: lengths " + std::to_string(x.len()) + " and " +
                                std::to_string(y.len()));
    double s = 0.0;
    for (index_t i = 0; i < x.len(); ++i) s = std::fma(x[i], y[i], s);
    return s;
}

void axpy(double alpha, const Vector& x, Vector& y)
{
    if (x.len() != y.len())
        throw DimensionMismatch("axpy: lengths " + std::to_string(x.len()) + " and " +
                                std::to_string(y.len()));
    for (index_t i = 0; i < x.len(); ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

bool is_representable(const DenseMatrix& m)
{
    for (double v : m.values)
        if (round_to(v, m.fmt) != v) return false;
    return true;
}

} // namespace mxp
