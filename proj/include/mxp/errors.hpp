// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mxp {

/// Base class for all solver errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

/// A zero diagonal entry was hit in a non-unit triangular solve.
struct SingularDiagonal : Error {
    using Error::Error;
};

/// Elimination hit a pivot below the configured floor (or a zero column
/// with partial pivoting). The matrix is unsuitable for the requested mode.
struct SingularPivot : Error {
    SingularPivot(std::int64_t column, double magnitude)
        : Error("singular pivot at column " + std::to_string(column) +
                " (|pivot| = " + std::to_string(magnitude) + ")"),
          column(column), magnitude(magnitude) {}

    std::int64_t column;
    double magnitude;
};

/// ||A||*||x|| + ||b|| vanished; the backward error is undefined.
struct DegenerateSystem : Error {
    using Error::Error;
};

struct ZeroRow : Error {
    explicit ZeroRow(std::int64_t row)
        : Error("row " + std::to_string(row) + " is identically zero"), row(row) {}
    std::int64_t row;
};

struct ZeroColumn : Error {
    explicit ZeroColumn(std::int64_t col)
        : Error("column " + std::to_string(col) + " is identically zero"), col(col) {}
    std::int64_t col;
};

/// Non-finite quantities appeared inside the Krylov iteration.
struct NumericalBreakdown : Error {
    using Error::Error;
};

struct AllocationFailure : Error {
    using Error::Error;
};

} // namespace mxp
