#include <doctest.h>

#include <mxp/dense.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <random>
#include <vector>

using mxp::DenseMatrix;
using mxp::Format;
using mxp::index_t;
using mxp::Vector;

namespace {

// Scalar reference for gemm_mixed: a plain triple loop evaluating the
// documented per-element formula (operands quantized, one quantized fused
// multiply-add per k step, kGemmKBlock partial-sum grouping, final
// alpha/beta combine).  The library's packed/tiled kernels must reproduce
// this bit for bit.
DenseMatrix ref_gemm(const DenseMatrix& A, const DenseMatrix& B, DenseMatrix C,
                     double alpha, double beta, Format of, Format af) {
    const index_t m = C.rows, n = C.cols, K = A.cols;
    for (index_t j = 0; j < n; ++j) {
        for (index_t i = 0; i < m; ++i) {
            double total = 0.0;
            for (index_t k0 = 0; k0 < K; k0 += mxp::kGemmKBlock) {
                const index_t kend = std::min(k0 + mxp::kGemmKBlock, K);
                double s = 0.0;
                for (index_t kk = k0; kk < kend; ++kk) {
                    const double aq = mxp::round_to(A(i, kk), of);
                    const double bq = mxp::round_to(B(kk, j), of);
                    s = mxp::round_to(std::fma(aq, bq, s), af);
                }
                total = mxp::round_to(total + s, af);
            }
            C(i, j) = mxp::round_to(alpha * total + beta * C(i, j), C.fmt);
        }
    }
    return C;
}

DenseMatrix random_matrix(index_t m, index_t n, std::uint32_t seed,
                          Format fmt = Format::binary64) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseMatrix A(m, n, fmt);
    for (double& v : A.values) v = dist(gen);
    return A;
}

Vector random_vector(index_t n, std::uint32_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector x(n);
    for (index_t i = 0; i < n; ++i) x[i] = dist(gen);
    return x;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return false;
        if (a[i] == 0.0 && std::signbit(a[i]) != std::signbit(b[i])) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("gemm summation block length is pinned") {
    CHECK(mxp::kGemmKBlock == 256);
}

TEST_CASE("gemm_mixed matches the scalar reference bit for bit") {
    struct Shape {
        index_t m, n, k;
    };
    // Sizes straddle the 8x8 register tile, the 256-row A block, and the
    // 256-long summation block.
    const Shape shapes[] = {{1, 1, 1},   {1, 1, 3},    {3, 2, 5},   {8, 8, 8},
                            {9, 7, 17},  {16, 16, 16}, {17, 9, 33}, {33, 31, 64},
                            {40, 24, 256}, {24, 40, 257}, {16, 8, 300}, {8, 16, 513}};
    struct Combo {
        Format of, af, cf;
    };
    const Combo combos[] = {
        {Format::binary64, Format::binary64, Format::binary64},
        {Format::binary32, Format::binary32, Format::binary32},
        {Format::binary16, Format::binary32, Format::binary64},
        {Format::binary16, Format::binary16, Format::binary16},
        {Format::bfloat16, Format::binary32, Format::binary64},
    };
    std::uint32_t seed = 1;
    for (const Shape& s : shapes) {
        for (const Combo& c : combos) {
            const DenseMatrix A = random_matrix(s.m, s.k, seed++);
            const DenseMatrix B = random_matrix(s.k, s.n, seed++);
            DenseMatrix C = random_matrix(s.m, s.n, seed++, c.cf);
            for (double& v : C.values) v = mxp::round_to(v, c.cf);

            const DenseMatrix want = ref_gemm(A, B, C, -1.0, 1.0, c.of, c.af);
            DenseMatrix got = C;
            mxp::gemm_mixed(got, A, B, -1.0, 1.0, c.of, c.af);
            CAPTURE(s.m);
            CAPTURE(s.n);
            CAPTURE(s.k);
            CHECK(bitwise_equal(got.values, want.values));

            const DenseMatrix want2 = ref_gemm(A, B, C, 2.5, -0.5, c.of, c.af);
            DenseMatrix got2 = C;
            mxp::gemm_mixed(got2, A, B, 2.5, -0.5, c.of, c.af);
            CHECK(bitwise_equal(got2.values, want2.values));
        }
    }
}

TEST_CASE("gemm_mixed partial-sum grouping is observable") {
    // With K past one summation block, an unblocked fused multiply-add chain
    // would round differently under a binary32 accumulator; guard against the
    // reference (and the library) silently degenerating to it.
    const index_t m = 4, n = 4, K = 300;
    const DenseMatrix A = random_matrix(m, K, 901);
    const DenseMatrix B = random_matrix(K, n, 902);
    DenseMatrix C(m, n, Format::binary64);

    DenseMatrix blocked = C;
    mxp::gemm_mixed(blocked, A, B, 1.0, 0.0, Format::binary32, Format::binary32);

    DenseMatrix unblocked = C;
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (index_t k = 0; k < K; ++k) {
                const double aq = mxp::round_to(A(i, k), Format::binary32);
                const double bq = mxp::round_to(B(k, j), Format::binary32);
                s = mxp::round_to(std::fma(aq, bq, s), Format::binary32);
            }
            unblocked(i, j) = s;
        }
    CHECK_FALSE(bitwise_equal(blocked.values, unblocked.values));
}

TEST_CASE("gemm_mixed half-precision hand fixture") {
    // 1x1 result, three k steps, everything traceable on paper.
    DenseMatrix A(1, 3), B(3, 1), C(1, 1, Format::binary16);
    A(0, 0) = 0.1;
    A(0, 1) = 0.2;
    A(0, 2) = 0.3;
    B(0, 0) = B(1, 0) = B(2, 0) = 1.0;
    mxp::gemm_mixed(C, A, B, 1.0, 0.0, Format::binary16, Format::binary16);

    const Format h = Format::binary16;
    double s = mxp::round_to(std::fma(mxp::round_to(0.1, h), 1.0, 0.0), h);
    s = mxp::round_to(std::fma(mxp::round_to(0.2, h), 1.0, s), h);
    s = mxp::round_to(std::fma(mxp::round_to(0.3, h), 1.0, s), h);
    CHECK(C(0, 0) == mxp::round_to(s, h));
    CHECK(C(0, 0) == doctest::Approx(0.6).epsilon(2e-3));
}

TEST_CASE("gemm_mixed with k = 0 only applies the alpha/beta combine") {
    DenseMatrix A(4, 0), B(0, 3);
    DenseMatrix C = random_matrix(4, 3, 77);
    DenseMatrix want = C;
    for (double& v : want.values) v = 0.0 * 0.0 + (-0.5) * v;
    DenseMatrix got = C;
    mxp::gemm_mixed(got, A, B, 0.0, -0.5, Format::binary64, Format::binary64);
    CHECK(bitwise_equal(got.values, want.values));
}

TEST_CASE("gemm_mixed emulated error stays within the model bound") {
    // fp16 operands with an fp32 accumulator: per element the error against
    // the exact product is at most K*(2 u16 + (K + 2) u32) times the scale of
    // the summands, up to a small safety factor.
    const index_t m = 24, n = 16, K = 64;
    const DenseMatrix A = random_matrix(m, K, 321);
    const DenseMatrix B = random_matrix(K, n, 322);
    DenseMatrix C(m, n, Format::binary64);
    mxp::gemm_mixed(C, A, B, 1.0, 0.0, Format::binary16, Format::binary32);

    const double u16 = mxp::unit_roundoff(Format::binary16);
    const double u32 = mxp::unit_roundoff(Format::binary32);
    const double bound =
        4.0 * static_cast<double>(K) * (2.0 * u16 + (K + 2.0) * u32);
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < m; ++i) {
            double exact = 0.0;
            for (index_t k = 0; k < K; ++k) exact += A(i, k) * B(k, j);
            CHECK(std::fabs(C(i, j) - exact) <= bound);
        }
}

TEST_CASE("gemm_mixed rejects mismatched shapes") {
    DenseMatrix A(3, 4), B(5, 2), C(3, 2);
    CHECK_THROWS_AS(mxp::gemm_mixed(C, A, B, 1.0, 0.0, Format::binary64,
                                    Format::binary64),
                    mxp::DimensionMismatch);
    DenseMatrix B2(4, 2), C2(2, 2);
    CHECK_THROWS_AS(mxp::gemm_mixed(C2, A, B2, 1.0, 0.0, Format::binary64,
                                    Format::binary64),
                    mxp::DimensionMismatch);
}

TEST_CASE("trsm solves small hand fixtures") {
    SUBCASE("unit lower 2x2") {
        DenseMatrix L(2, 2);
        L(0, 0) = 1.0;
        L(1, 0) = 0.5;
        L(1, 1) = 1.0;
        DenseMatrix B(2, 1);
        B(0, 0) = 2.0;
        B(1, 0) = 3.0;
        mxp::trsm(mxp::Side::Left, mxp::UpLo::Lower, mxp::Diag::Unit, L, B,
                  Format::binary64);
        CHECK(B(0, 0) == 2.0);
        CHECK(B(1, 0) == 2.0);
    }
    SUBCASE("identity is a no-op for representable data") {
        const DenseMatrix T = DenseMatrix::identity(6);
        DenseMatrix B = random_matrix(6, 6, 5);
        const DenseMatrix orig = B;
        mxp::trsm(mxp::Side::Left, mxp::UpLo::Lower, mxp::Diag::Unit, T, B,
                  Format::binary64);
        CHECK(bitwise_equal(B.values, orig.values));
        mxp::trsm(mxp::Side::Right, mxp::UpLo::Upper, mxp::Diag::NonUnit, T, B,
                  Format::binary64);
        CHECK(bitwise_equal(B.values, orig.values));
    }
    SUBCASE("non-unit upper 2x2") {
        DenseMatrix U(2, 2);
        U(0, 0) = 2.0;
        U(0, 1) = 1.0;
        U(1, 1) = 4.0;
        DenseMatrix B(2, 1);
        B(0, 0) = 5.0;
        B(1, 0) = 8.0;
        mxp::trsm(mxp::Side::Left, mxp::UpLo::Upper, mxp::Diag::NonUnit, U, B,
                  Format::binary64);
        // x2 = 8/4 = 2, x1 = (5 - 1*2)/2 = 1.5
        CHECK(B(1, 0) == 2.0);
        CHECK(B(0, 0) == 1.5);
    }
}

TEST_CASE("trsm matches a scalar substitution reference bit for bit") {
    const index_t m = 64, nrhs = 13;
    DenseMatrix T = random_matrix(m, m, 41);
    for (index_t i = 0; i < m; ++i) T(i, i) = 2.0 + std::fabs(T(i, i));

    const Format fmts[] = {Format::binary64, Format::binary32};
    for (Format f : fmts) {
        for (int lower = 0; lower < 2; ++lower) {
            for (int unit = 0; unit < 2; ++unit) {
                const DenseMatrix B0 = random_matrix(m, nrhs, 42 + lower + 2 * unit);

                DenseMatrix got = B0;
                mxp::trsm(mxp::Side::Left, lower ? mxp::UpLo::Lower : mxp::UpLo::Upper,
                          unit ? mxp::Diag::Unit : mxp::Diag::NonUnit, T, got, f);

                // Reference: per column, rows finalized in substitution order;
                // the update over already-solved rows k runs in ascending k,
                // one quantized fused multiply-add per step.
                DenseMatrix want = B0;
                auto q = [f](double v) { return mxp::round_to(v, f); };
                for (index_t j = 0; j < nrhs; ++j) {
                    for (index_t step = 0; step < m; ++step) {
                        const index_t i = lower ? step : m - 1 - step;
                        const index_t kb = lower ? 0 : i + 1;
                        const index_t ke = lower ? i : m;
                        double v = want(i, j);
                        for (index_t k = kb; k < ke; ++k)
                            v = q(std::fma(-T(i, k), want(k, j), v));
                        if (!unit) v = q(v / T(i, i));
                        want(i, j) = v;
                    }
                }
                CAPTURE(lower);
                CAPTURE(unit);
                CHECK(bitwise_equal(got.values, want.values));
            }
        }
    }
}

TEST_CASE("trsm right side solves X * T = B") {
    const index_t mrows = 9, n = 12;
    DenseMatrix T = random_matrix(n, n, 83);
    for (index_t i = 0; i < n; ++i) T(i, i) = 2.0 + std::fabs(T(i, i));
    const DenseMatrix B0 = random_matrix(mrows, n, 84);

    for (int lower = 0; lower < 2; ++lower) {
        DenseMatrix X = B0;
        mxp::trsm(mxp::Side::Right, lower ? mxp::UpLo::Lower : mxp::UpLo::Upper,
                  mxp::Diag::NonUnit, T, X, Format::binary64);
        // Residual check: X * T == B up to roundoff.
        DenseMatrix R = B0;
        DenseMatrix Tt(n, n);
        for (index_t j = 0; j < n; ++j)
            for (index_t i = 0; i < n; ++i) {
                const bool keep = lower ? i >= j : i <= j;
                Tt(i, j) = keep ? T(i, j) : 0.0;
            }
        mxp::gemm_mixed(R, X, Tt, 1.0, -1.0, Format::binary64, Format::binary64);
        for (double v : R.values) CHECK(std::fabs(v) < 1e-10);
    }
}

TEST_CASE("trsm rejects zero diagonals and bad shapes") {
    DenseMatrix T = DenseMatrix::identity(3);
    T(1, 1) = 0.0;
    DenseMatrix B(3, 2);
    CHECK_THROWS_AS(mxp::trsm(mxp::Side::Left, mxp::UpLo::Lower,
                              mxp::Diag::NonUnit, T, B, Format::binary64),
                    mxp::SingularDiagonal);
    // Unit diagonal never reads the stored diagonal, so no throw.
    CHECK_NOTHROW(mxp::trsm(mxp::Side::Left, mxp::UpLo::Lower, mxp::Diag::Unit,
                            T, B, Format::binary64));
    DenseMatrix B4(4, 2);
    CHECK_THROWS_AS(mxp::trsm(mxp::Side::Left, mxp::UpLo::Lower, mxp::Diag::Unit,
                              T, B4, Format::binary64),
                    mxp::DimensionMismatch);
}

TEST_CASE("matvec fixtures and reference order") {
    DenseMatrix A(2, 2);
    A(0, 0) = 1.0;
    A(0, 1) = 2.0;
    A(1, 0) = 3.0;
    A(1, 1) = 4.0;
    Vector x(2);
    x[0] = 1.0;
    x[1] = 1.0;
    const Vector y = mxp::matvec(A, x);
    CHECK(y[0] == 3.0);
    CHECK(y[1] == 7.0);

    // Reference: ascending-j fused multiply-add chain per row.
    const index_t m = 700, n = 41;  // m crosses the internal row chunking
    const DenseMatrix R = random_matrix(m, n, 10);
    const Vector v = random_vector(n, 11);
    const Vector got = mxp::matvec(R, v);
    for (index_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (index_t j = 0; j < n; ++j) acc = std::fma(R(i, j), v[j], acc);
        CHECK(got[i] == acc);
    }

    Vector bad(3);
    CHECK_THROWS_AS((void)mxp::matvec(A, bad), mxp::DimensionMismatch);
}

TEST_CASE("vec_norm fixtures") {
    Vector x(2);
    x[0] = 3.0;
    x[1] = -4.0;
    CHECK(mxp::vec_norm(x, mxp::NormKind::one) == 7.0);
    CHECK(mxp::vec_norm(x, mxp::NormKind::two) == 5.0);
    CHECK(mxp::vec_norm(x, mxp::NormKind::inf) == 4.0);

    Vector z(4);
    CHECK(mxp::vec_norm(z, mxp::NormKind::one) == 0.0);
    CHECK(mxp::vec_norm(z, mxp::NormKind::two) == 0.0);
    CHECK(mxp::vec_norm(z, mxp::NormKind::inf) == 0.0);

    Vector e(5);
    e[3] = 1.0;
    CHECK(mxp::vec_norm(e, mxp::NormKind::two) == 1.0);

    // Scaled two-norm must not overflow for large entries.
    Vector big(2);
    big[0] = 1e300;
    big[1] = 1e300;
    CHECK(std::isfinite(mxp::vec_norm(big, mxp::NormKind::two)));
    CHECK(mxp::vec_norm(big, mxp::NormKind::two) ==
          doctest::Approx(std::sqrt(2.0) * 1e300));
}

TEST_CASE("vec_norm chain inequalities") {
    for (std::uint32_t s = 0; s < 20; ++s) {
        const index_t n = 1 + (s * 37) % 500;
        const Vector x = random_vector(n, 1000 + s);
        const double n1 = mxp::vec_norm(x, mxp::NormKind::one);
        const double n2 = mxp::vec_norm(x, mxp::NormKind::two);
        const double ni = mxp::vec_norm(x, mxp::NormKind::inf);
        const double tol = 1.0 + 1e-12;
        CHECK(ni <= n2 * tol);
        CHECK(n2 <= n1 * tol);
        CHECK(n1 <= std::sqrt(static_cast<double>(n)) * n2 * tol);
        CHECK(n2 <= std::sqrt(static_cast<double>(n)) * ni * tol);
    }
}

TEST_CASE("mat_norm_inf is the max ascending-order row sum") {
    DenseMatrix A(2, 2);
    A(0, 0) = 1.0;
    A(0, 1) = -2.0;
    A(1, 0) = 3.0;
    A(1, 1) = 4.0;
    CHECK(mxp::mat_norm_inf(A) == 7.0);

    const index_t m = 600, n = 35;
    const DenseMatrix R = random_matrix(m, n, 55);
    double want = 0.0;
    for (index_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (index_t j = 0; j < n; ++j) s += std::fabs(R(i, j));
        want = std::max(want, s);
    }
    CHECK(mxp::mat_norm_inf(R) == want);
}

TEST_CASE("dot and axpy reference order") {
    const index_t n = 257;
    const Vector x = random_vector(n, 70);
    const Vector y = random_vector(n, 71);
    double want = 0.0;
    for (index_t i = 0; i < n; ++i) want = std::fma(x[i], y[i], want);
    CHECK(mxp::dot(x, y) == want);

    Vector z = y;
    mxp::axpy(0.75, x, z);
    for (index_t i = 0; i < n; ++i) CHECK(z[i] == std::fma(0.75, x[i], y[i]));

    Vector bad(3);
    CHECK_THROWS_AS((void)mxp::dot(x, bad), mxp::DimensionMismatch);
    CHECK_THROWS_AS(mxp::axpy(1.0, x, bad), mxp::DimensionMismatch);
}

TEST_CASE("is_representable checks the format tag") {
    DenseMatrix A(2, 2, Format::binary16);
    A(0, 0) = 0.5;
    A(1, 1) = 0.25;
    CHECK(mxp::is_representable(A));
    A(0, 1) = 0.1;  // not a half-precision value
    CHECK_FALSE(mxp::is_representable(A));
    A.fmt = Format::binary64;
    CHECK(mxp::is_representable(A));
}

#ifdef _OPENMP
TEST_CASE("results are identical at any thread count") {
    const index_t m = 300, n = 100, K = 300;
    const DenseMatrix A = random_matrix(m, K, 500);
    const DenseMatrix B = random_matrix(K, n, 501);
    const DenseMatrix C0 = random_matrix(m, n, 502);
    const Vector x = random_vector(n, 503);

    const int saved = omp_get_max_threads();
    std::vector<std::vector<double>> gemm_runs, matvec_runs;
    std::vector<double> norm_runs;
    for (int threads : {1, 2, 4}) {
        omp_set_num_threads(threads);
        DenseMatrix C = C0;
        mxp::gemm_mixed(C, A, B, -1.0, 1.0, Format::binary16, Format::binary32);
        gemm_runs.push_back(C.values);
        DenseMatrix Cd = C0;
        mxp::gemm_mixed(Cd, A, B, -1.0, 1.0, Format::binary64, Format::binary64);
        gemm_runs.push_back(Cd.values);
        const DenseMatrix M = random_matrix(m, n, 504);
        matvec_runs.push_back(mxp::matvec(M, x).values);
        norm_runs.push_back(mxp::mat_norm_inf(M));
    }
    omp_set_num_threads(saved);
    for (std::size_t r = 2; r < gemm_runs.size(); r += 2) {
        CHECK(bitwise_equal(gemm_runs[r], gemm_runs[0]));
        CHECK(bitwise_equal(gemm_runs[r + 1], gemm_runs[1]));
    }
    for (std::size_t r = 1; r < matvec_runs.size(); ++r) {
        CHECK(bitwise_equal(matvec_runs[r], matvec_runs[0]));
        CHECK(norm_runs[r] == norm_runs[0]);
    }
}
#endif
