// SPDX-License-Identifier: Apache-2.0
#include "mxp/matgen.hpp"

#include <cmath>
#include <new>
#include <stdexcept>
#include <string>

namespace mxp {
namespace {

double raw_draw(const GenSpec& spec, index_t i, index_t j)
{
    const StreamKey key{spec.seed, kMatrixStream,
                        static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)};
    return spec.distribution == Distribution::uniform ? uniform_element(key)
                                                      : gaussian_element(key);
}

double sign_of(double u) { return u < 0.0 ? -1.0 : 1.0; }

// Off-diagonal absolute row sum from pure draws, ascending j, plain adds.
double offdiag_row_sum(const GenSpec& spec, index_t i)
{
    double s = 0.0;
    for (index_t j = 0; j < spec.n; ++j) {
        if (j == i) continue;
        s += std::fabs(raw_draw(spec, i, j));
    }
    return s;
}

} // namespace

void validate_spec(const GenSpec& spec)
{
    if (spec.n < 1 || spec.n > kMaxOrder)
        throw std::invalid_argument("matrix order " + std::to_string(spec.n) +
                                    " outside [1, " + std::to_string(kMaxOrder) + "]");
    if (spec.diag_scaling == DiagScaling::ddd &&
        !(spec.theta > 0.0 && spec.theta <= 1.0))
        throw std::invalid_argument("ddd theta " + std::to_string(spec.theta) +
                                    " outside (0, 1]");
}

double generate_element(const GenSpec& spec, index_t i, index_t j)
{
    if (i < 0 || i >= spec.n || j < 0 || j >= spec.n)
        throw IndexOutOfRange("generate_element: (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") outside order " +
                              std::to_string(spec.n));
    const double u = raw_draw(spec, i, j);
    if (i != j) return u;
    switch (spec.diag_scaling) {
        case DiagScaling::none:
            return u;
        case DiagScaling::sqrt_n:
            return u + sign_of(u) * std::sqrt(static_cast<double>(spec.n));
        case DiagScaling::linear_n:
            return u + sign_of(u) * static_cast<double>(spec.n);
        case DiagScaling::ddd:
            return sign_of(u) * spec.theta * offdiag_row_sum(spec, i);
    }
    return u;
}

DenseMatrix generate_matrix(const GenSpec& spec)
{
    validate_spec(spec);
    const index_t n = spec.n;
    DenseMatrix A;
    try {
        A = DenseMatrix(n, n);
    } catch (const std::bad_alloc&) {
        throw AllocationFailure("generate_matrix: cannot allocate order " +
                                std::to_string(n));
    }
#pragma omp parallel for schedule(static)
    for (index_t j = 0; j < n; ++j) {
        double* col = A.col(j);
        for (index_t i = 0; i < n; ++i)
            col[i] = generate_element(spec, i, j);
    }
    return A;
}

Vector generate_rhs(const GenSpec& spec)
{
    validate_spec(spec);
    Vector b(spec.n);
    for (index_t i = 0; i < spec.n; ++i)
        b[i] = uniform_element({spec.seed, kRhsStream,
                                static_cast<std::uint64_t>(i), 0});
    return b;
}

GeneratedSystem generate_system(const GenSpec& spec)
{
    return {generate_matrix(spec), generate_rhs(spec), spec};
}

const char* distribution_name(Distribution d)
{
    return d == Distribution::uniform ? "uniform" : "gauss";
}

const char* diag_scaling_name(DiagScaling s)
{
    switch (s) {
        case DiagScaling::none: return "none";
        case DiagScaling::sqrt_n: return "sqrtn";
        case DiagScaling::linear_n: return "n";
        case DiagScaling::ddd: return "ddd";
    }
    return "none";
}

Distribution parse_distribution(const std::string& name)
{
    if (name == "uniform") return Distribution::uniform;
    if (name == "gauss") return Distribution::gaussian;
    throw std::invalid_argument("unknown distribution '" + name + "'");
}

DiagScaling parse_diag_scaling(const std::string& name)
{
    if (name == "none") return DiagScaling::none;
    if (name == "sqrtn") return DiagScaling::sqrt_n;
    if (name == "n") return DiagScaling::linear_n;
    if (name == "ddd") return DiagScaling::ddd;
    throw std::invalid_argument("unknown scaling scheme '" + name + "'");
}

} // namespace mxp
