// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mxp/dense.hpp"

namespace mxp {

enum class Pivoting { none, partial };

struct FactorConfig {
    Pivoting pivoting = Pivoting::none;
    Format panel_fmt = Format::binary32;
    Format low_fmt = Format::binary16;
    Format accum_fmt = Format::binary32;
    index_t block_size = 128;
    double pivot_floor = 0x1p-40;
};

/// Packed LU factors: unit-lower L strictly below the diagonal, U on and
/// above it. perm is empty without pivoting; with partial pivoting perm[k]
/// is the row swapped with row k at elimination step k (swap sequence form,
/// so applying swaps in ascending k to a vector computes P*v).
struct LUFactors {
    DenseMatrix packed;
    std::vector<index_t> perm;
    Format panel_fmt = Format::binary64;
    Format low_fmt = Format::binary64;
    Format accum_fmt = Format::binary64;
    index_t block_size = 0;

    index_t n() const { return packed.rows; }
    bool pivoted() const { return !perm.empty(); }
};

/// Largest pivot magnitude used (or selected) over all elimination steps,
/// where it occurred, and the full per-column record.
struct PivotStats {
    double max_pivot = 0.0;
    index_t max_pivot_col = 0;
    std::vector<double> per_col_pivots;
};

/// Blocked right-looking LU without pivoting. Per block step: unblocked
/// left-looking panel factorization in panel_fmt (the incoming panel and
/// block row are first quantized to panel_fmt, modeling reduced-precision
/// panel storage), triangular block-row solve in panel_fmt, then the Schur
/// update via gemm_mixed with low_fmt operands and accum_fmt accumulation.
/// Throws SingularPivot when any |U_ii| falls below cfg.pivot_floor.
std::pair<LUFactors, PivotStats> lu_nopivot_mixed(const DenseMatrix& A,
                                                  const FactorConfig& cfg);

/// In-place core of lu_nopivot_mixed: factors `packed` directly (it must
/// hold the input matrix on entry). Lets callers with a single large buffer
/// avoid the defensive copy.
PivotStats lu_nopivot_mixed_inplace(DenseMatrix& packed, const FactorConfig& cfg);

/// Blocked right-looking LU with row partial pivoting, entirely in binary64.
/// PivotStats records the selected |pivot| per column at elimination time.
/// Throws SingularPivot when an entire remaining column is zero.
std::pair<LUFactors, PivotStats> lu_partial_fp64(const DenseMatrix& A);

/// x = U^-1 (L^-1 (P b)); forward and back substitution with every
/// arithmetic result quantized to solve_fmt. 2n^2 + O(n) operations.
Vector lu_solve(const LUFactors& f, const Vector& b, Format solve_fmt);

/// ||P*L*U - A||_inf / ||A||_inf in binary64 (test oracle).
double reconstruct_error(const LUFactors& f, const DenseMatrix& A);

/// Canonical operation counts: factorization (4n^3 - 3n^2 - n)/6, i.e.
/// 2/3 n^3 - 1/2 n^2 + O(n) evaluated exactly in integers, and the 2n^2
/// substitution count.
std::pair<std::uint64_t, std::uint64_t> flop_count(index_t n);

} // namespace mxp
