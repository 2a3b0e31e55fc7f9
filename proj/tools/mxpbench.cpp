// SPDX-License-Identifier: Apache-2.0
//
// mxpbench — mixed-precision dense solver benchmark and experiment driver.
//
// Subcommands:
//   bench        one full pipeline run (generate, factor, refine, validate)
//   pivot-sweep  largest-pivot statistics of fp64 partial-pivot LU
//   norm-sweep   residual norms of direct fp64 solves with/without pivoting
//
// Exit codes: 0 all runs valid, 2 at least one invalid run, 3 factorization
// breakdown, 4 usage error.
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "mxp/harness.hpp"

namespace {

constexpr int kExitAllValid = 0;
constexpr int kExitInvalidRun = 2;
constexpr int kExitBreakdown = 3;
constexpr int kExitUsage = 4;

struct Options {
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    int seeds = 20;
    std::vector<std::int64_t> sizes;
    std::string dist = "uniform";
    std::string scale = "none";
    double theta = 0.95;
    std::string low = "fp16";
    std::string panel = "fp32";
    std::string accum = "fp32";
    std::int64_t nb = 128;
    int max_it = 50;
    double berr_target = 1.0;
    bool use_equilibration = false;
    std::string pivot = "partial";
    std::string out;
    int threads = 0;
};

void apply_threads(int threads)
{
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

mxp::GenSpec make_spec(const Options& opt)
{
    mxp::GenSpec spec;
    spec.n = opt.n;
    spec.seed = opt.seed;
    spec.distribution = mxp::parse_distribution(opt.dist);
    spec.diag_scaling = mxp::parse_diag_scaling(opt.scale);
    spec.theta = opt.theta;
    mxp::validate_spec(spec);
    return spec;
}

mxp::FactorConfig make_factor_config(const Options& opt)
{
    mxp::FactorConfig cfg;
    cfg.pivoting = mxp::Pivoting::none;
    cfg.low_fmt = mxp::parse_format(opt.low);
    cfg.panel_fmt = mxp::parse_format(opt.panel);
    cfg.accum_fmt = mxp::parse_format(opt.accum);
    cfg.block_size = opt.nb;
    if (cfg.block_size < 1)
        throw std::invalid_argument("--nb must be >= 1");
    return cfg;
}

mxp::RefineConfig make_refine_config(const Options& opt)
{
    mxp::RefineConfig cfg;
    cfg.max_iters = opt.max_it;
    cfg.berr_target = opt.berr_target;
    if (cfg.max_iters < 1 || cfg.max_iters > 50)
        throw std::invalid_argument("--max-it must be in [1, 50]");
    if (!(cfg.berr_target > 0.0 && cfg.berr_target < 16.0))
        throw std::invalid_argument("--berr-target must be in (0, 16)");
    return cfg;
}

std::vector<mxp::index_t> make_sizes(const Options& opt)
{
    if (opt.sizes.empty())
        throw std::invalid_argument("--sizes requires at least one entry");
    std::vector<mxp::index_t> sizes;
    for (std::int64_t n : opt.sizes) {
        if (n < 1 || n > mxp::kMaxOrder)
            throw std::invalid_argument("size " + std::to_string(n) + " outside [1, " +
                                        std::to_string(mxp::kMaxOrder) + "]");
        sizes.push_back(n);
    }
    return sizes;
}

template <class Rows, class Writer>
void emit(const Options& opt, const Rows& rows, Writer write_to_stream,
          void (*write_to_path)(const std::string&, const Rows&))
{
    if (opt.out.empty())
        write_to_stream(std::cout, rows);
    else
        write_to_path(opt.out, rows);
}

int run_bench(const Options& opt)
{
    const mxp::GenSpec spec = make_spec(opt);
    const mxp::FactorConfig fcfg = make_factor_config(opt);
    const mxp::RefineConfig rcfg = make_refine_config(opt);

    const mxp::BenchReport rep =
        mxp::run_benchmark(spec, fcfg, rcfg, opt.use_equilibration);
    std::vector<mxp::BenchReport> reports{rep};
    emit(opt, reports,
         static_cast<void (*)(std::ostream&, const std::vector<mxp::BenchReport>&)>(
             mxp::write_bench_csv),
         static_cast<void (*)(const std::string&, const std::vector<mxp::BenchReport>&)>(
             mxp::write_bench_csv));

    if (std::isnan(rep.berr)) return kExitBreakdown;
    return rep.valid ? kExitAllValid : kExitInvalidRun;
}

int run_pivot_sweep(const Options& opt)
{
    const auto sizes = make_sizes(opt);
    if (opt.seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
    const auto rows = mxp::experiment_pivot_sweep(sizes, opt.seeds);
    emit(opt, rows,
         static_cast<void (*)(std::ostream&, const std::vector<mxp::ExperimentRow>&)>(
             mxp::write_pivot_csv),
         static_cast<void (*)(const std::string&, const std::vector<mxp::ExperimentRow>&)>(
             mxp::write_pivot_csv));
    return kExitAllValid;
}

int run_norm_sweep(const Options& opt)
{
    const auto sizes = make_sizes(opt);
    if (opt.seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
    const mxp::Pivoting pivoting = mxp::parse_pivoting(opt.pivot);
    const auto rows = mxp::experiment_norm_sweep(sizes, opt.seeds, pivoting);
    emit(opt, rows,
         static_cast<void (*)(std::ostream&, const std::vector<mxp::ExperimentRow>&)>(
             mxp::write_norm_csv),
         static_cast<void (*)(const std::string&, const std::vector<mxp::ExperimentRow>&)>(
             mxp::write_norm_csv));
    for (const auto& row : rows)
        if (row.status != "ok") return kExitBreakdown;
    return kExitAllValid;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mixed-precision dense solver benchmark"};
    app.require_subcommand(1);
    Options opt;

    CLI::App* bench = app.add_subcommand("bench", "Run the full solver pipeline once");
    bench->add_option("--n", opt.n, "Matrix order")->required();
    bench->add_option("--seed", opt.seed, "Generator seed (default 0)");
    bench->add_option("--dist", opt.dist, "Distribution: uniform|gauss")
        ->check(CLI::IsMember({"uniform", "gauss"}));
    bench->add_option("--scale", opt.scale, "Diagonal scheme: none|sqrtn|n|ddd")
        ->check(CLI::IsMember({"none", "sqrtn", "n", "ddd"}));
    bench->add_option("--theta", opt.theta, "ddd departure factor in (0, 1]");
    bench->add_option("--low", opt.low, "Schur operand format: fp16|bf16|fp32")
        ->check(CLI::IsMember({"fp16", "bf16", "fp32"}));
    bench->add_option("--panel", opt.panel, "Panel/triangular format: fp32|fp64")
        ->check(CLI::IsMember({"fp32", "fp64"}));
    bench->add_option("--accum", opt.accum, "Schur accumulation format: fp32|fp64")
        ->check(CLI::IsMember({"fp32", "fp64"}));
    bench->add_option("--nb", opt.nb, "Factorization block size (default 128)");
    bench->add_option("--max-it", opt.max_it, "GMRES iteration cap, at most 50");
    bench->add_option("--berr-target", opt.berr_target,
                      "Refinement stopping backward error (default 1.0)");
    bench->add_flag("--equilibrate", opt.use_equilibration,
                    "Two-sided power-of-two scaling before factorization");

    CLI::App* psweep = app.add_subcommand("pivot-sweep",
                                          "Largest-pivot statistics, fp64 partial pivoting");
    psweep->add_option("--sizes", opt.sizes, "Comma-separated matrix orders")
        ->required()
        ->delimiter(',');
    psweep->add_option("--seeds", opt.seeds, "Seeds per size (default 20)");

    CLI::App* nsweep = app.add_subcommand("norm-sweep",
                                          "Residual norms of direct fp64 solves");
    nsweep->add_option("--sizes", opt.sizes, "Comma-separated matrix orders")
        ->required()
        ->delimiter(',');
    nsweep->add_option("--seeds", opt.seeds, "Seeds per size (default 20)");
    nsweep->add_option("--pivot", opt.pivot, "Pivoting mode: none|partial")
        ->check(CLI::IsMember({"none", "partial"}));

    for (CLI::App* sub : {bench, psweep, nsweep}) {
        sub->add_option("--out", opt.out, "Output CSV path (default: stdout)");
        sub->add_option("--threads", opt.threads, "Worker thread count");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        apply_threads(opt.threads);
        if (bench->parsed()) return run_bench(opt);
        if (psweep->parsed()) return run_pivot_sweep(opt);
        return run_norm_sweep(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const mxp::SingularPivot& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBreakdown;
    } catch (const mxp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBreakdown;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
