// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "mxp/dense.hpp"
#include "mxp/rng.hpp"

namespace mxp {

enum class Distribution { uniform, gaussian };
enum class DiagScaling { none, sqrt_n, linear_n, ddd };

/// Largest supported matrix order; keeps n*n inside 32-bit index arithmetic.
inline constexpr index_t kMaxOrder = 46340;

/// Full description of a reproducible benchmark input. Identical specs
/// always regenerate bitwise-identical systems.
struct GenSpec {
    index_t n = 0;
    std::uint64_t seed = 0;
    Distribution distribution = Distribution::uniform;
    DiagScaling diag_scaling = DiagScaling::none;
    double theta = 0.95; // departure factor, meaningful only for ddd
};

struct GeneratedSystem {
    DenseMatrix A;
    Vector b;
    GenSpec spec;
};

/// Throws std::invalid_argument unless 1 <= n <= kMaxOrder and, for the ddd
/// scheme, 0 < theta <= 1.
void validate_spec(const GenSpec& spec);

/// Element (i, j) of the matrix described by spec, computable independently
/// of every other element.
///
/// Off-diagonal entries are raw draws from the configured distribution on
/// the matrix stream. Diagonal entries apply the scaling scheme to the raw
/// draw u at (i, i), with sign(0) == +1:
///   none:     u
///   sqrt_n:   u + sign(u) * sqrt(n)
///   linear_n: u + sign(u) * n          (debug-only inputs)
///   ddd:      sign(u) * theta * S_i, S_i = sum_{j != i} |a_ij|
/// The ddd row sum S_i accumulates over ascending j with plain adds, so the
/// value is reproducible bit-for-bit.
double generate_element(const GenSpec& spec, index_t i, index_t j);

/// n x n matrix of generate_element values (column-parallel fill).
DenseMatrix generate_matrix(const GenSpec& spec);

/// Right-hand side: n uniform draws in [-1, 1) from the dedicated stream,
/// independent of distribution and diagonal scheme.
Vector generate_rhs(const GenSpec& spec);

GeneratedSystem generate_system(const GenSpec& spec);

// CLI/CSV token helpers ("uniform"/"gauss", "none"/"sqrtn"/"n"/"ddd").
const char* distribution_name(Distribution d);
const char* diag_scaling_name(DiagScaling s);
Distribution parse_distribution(const std::string& name);
DiagScaling parse_diag_scaling(const std::string& name);

} // namespace mxp
