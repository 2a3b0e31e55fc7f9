// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mxp/errors.hpp"
#include "mxp/precision.hpp"

namespace mxp {

using index_t = std::int64_t;

/// Column-major dense matrix. Values are always stored in binary64; fmt
/// asserts that every stored value satisfies round_to(v, fmt) == v.
struct DenseMatrix {
    index_t rows = 0;
    index_t cols = 0;
    Format fmt = Format::binary64;
    std::vector<double> values; // length rows * cols, column-major

    DenseMatrix() = default;
    DenseMatrix(index_t r, index_t c, Format f = Format::binary64)
        : rows(r), cols(c), fmt(f), values(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(index_t i, index_t j) { return values[i + j * rows]; }
    double operator()(index_t i, index_t j) const { return values[i + j * rows]; }

    double* col(index_t j) { return values.data() + j * rows; }
    const double* col(index_t j) const { return values.data() + j * rows; }

    static DenseMatrix identity(index_t n) {
        DenseMatrix m(n, n);
        for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

struct Vector {
    std::vector<double> values;

    Vector() = default;
    explicit Vector(index_t n) : values(static_cast<std::size_t>(n), 0.0) {}
    explicit Vector(std::vector<double> v) : values(std::move(v)) {}

    index_t len() const { return static_cast<index_t>(values.size()); }
    double& operator[](index_t i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](index_t i) const { return values[static_cast<std::size_t>(i)]; }

    double* data() { return values.data(); }
    const double* data() const { return values.data(); }
};

/// True iff every stored value is representable in the matrix's format tag.
bool is_representable(const DenseMatrix& m);

enum class Side { Left, Right };
enum class UpLo { Lower, Upper };
enum class Diag { Unit, NonUnit };
enum class NormKind { one, two, inf };

/// Fixed summation-block length of gemm_mixed. Every output element is the
/// block-partial sum
///     total = fold over 256-element k-blocks of round(total + s_block)
///     s_block = fold over the block of round(fma(aq, bq, s))
/// so any cache-blocked schedule that honors this grouping is bit-identical.
inline constexpr index_t kGemmKBlock = 256;

/// C <- alpha * A * B + beta * C with emulated precision control.
///
/// A and B elements are first quantized to operand_fmt. Each fused
/// multiply-add result is quantized to accum_fmt; partial sums follow the
/// kGemmKBlock grouping above. The final combination is evaluated as
/// (alpha * total) + (beta * c_old) in binary64 and stored quantized to
/// C.fmt. Deterministic for fixed inputs at any thread count.
void gemm_mixed(DenseMatrix& C, const DenseMatrix& A, const DenseMatrix& B,
                double alpha, double beta, Format operand_fmt, Format accum_fmt);

/// Strided-core variant used by the factorization internals; matrices are
/// column-major with leading dimensions lda/ldb/ldc.
void gemm_mixed_ld(index_t m, index_t n, index_t k,
                   const double* A, index_t lda,
                   const double* B, index_t ldb,
                   double* C, index_t ldc,
                   double alpha, double beta,
                   Format operand_fmt, Format accum_fmt, Format c_fmt);

/// Triangular solve T*X = B (Side::Left) or X*T = B (Side::Right),
/// overwriting B with X. Every arithmetic result is quantized to fmt
/// (updates as quantized fused multiply-adds, divisions quantized).
void trsm(Side side, UpLo uplo, Diag diag, const DenseMatrix& T, DenseMatrix& B,
          Format fmt);

void trsm_ld(Side side, UpLo uplo, Diag diag,
             index_t m, index_t n, const double* T, index_t ldt,
             double* B, index_t ldb, Format fmt);

/// y = A * x in binary64. Per element the k-sum runs over ascending column
/// index as a fused multiply-add chain.
Vector matvec(const DenseMatrix& A, const Vector& x);

/// l1 / l2 / l-inf norm in binary64; the 2-norm uses a one-pass scaled
/// sum of squares so no intermediate overflows.
double vec_norm(const Vector& x, NormKind which);

/// Max absolute row sum, accumulated over ascending column index.
double mat_norm_inf(const DenseMatrix& A);

// Small fp64 vector helpers shared by the Krylov code. Deterministic
// sequential evaluation order.
double dot(const Vector& x, const Vector& y);
void axpy(double alpha, const Vector& x, Vector& y); // y += alpha * x

} // namespace mxp
