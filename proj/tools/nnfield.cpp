// Command-line surface for the nearest-neighbor-field engine.
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nnfield/pipeline.hpp"

namespace {

void add_common_flags(CLI::App* cmd, nnf::RunConfig& cfg) {
    cmd->add_option("--seed", cfg.rng_seed, "RNG seed");
    cmd->add_option("--threads", cfg.threads,
                    "thread cap (0 = runtime default); never changes results");
    cmd->add_option("--patch-size", cfg.descriptor.patch_size,
                    "descriptor patch size (odd)");
    cmd->add_flag("!--no-mean-subtract", cfg.descriptor.mean_subtract,
                  "keep the patch mean in descriptors");
    cmd->add_option("--iters", cfg.pyramid.iters_per_level,
                    "matcher rounds per pyramid level, coarsest first")
        ->delimiter(',');
    cmd->add_flag("--timings", cfg.timings, "include wall times in JSON output");
}

void add_domain_flag(CLI::App* cmd, nnf::RunConfig& cfg) {
    cmd->add_option_function<std::string>(
           "--match-domain",
           [&cfg](const std::string& v) {
               cfg.match_domain = (v == "native") ? nnf::MatchDomain::native
                                                  : nnf::MatchDomain::degraded;
           },
           "descriptor domain for matching: degraded (default) or native")
        ->check(CLI::IsMember({"degraded", "native"}));
}

void add_pair_flags(CLI::App* cmd, nnf::RunConfig& cfg) {
    cmd->add_option("--lr", cfg.lr_path, "low-resolution input image (PGM/PPM)")
        ->required();
    cmd->add_option("--ref", cfg.ref_path, "reference image (PGM/PPM)")->required();
    cmd->add_option("--out", cfg.out_path, "output path or prefix")->required();
    cmd->add_option("--scale", cfg.upscale, "LR upsampling factor");
    cmd->add_option("--k", cfg.k, "reference pyramid decay factor");
    cmd->add_option("--n", cfg.n, "reference pyramid depth");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nearest-neighbor-field matching and texture transfer"};
    app.set_config("--config", "", "TOML config file; flags override it");
    app.require_subcommand(1);

    nnf::RunConfig cfg;

    CLI::App* match = app.add_subcommand(
        "match", "match LR against the reference pyramid, write NNF files");
    add_pair_flags(match, cfg);
    add_common_flags(match, cfg);
    add_domain_flag(match, cfg);
    match->add_flag("--dump-levels", cfg.dump_levels,
                    "also write per-level NNF files");

    CLI::App* transfer = app.add_subcommand(
        "transfer", "reconstruct the upsampled image from reference pixels");
    add_pair_flags(transfer, cfg);
    add_common_flags(transfer, cfg);
    add_domain_flag(transfer, cfg);
    std::string kernel = "delta";
    transfer->add_option("--kernel", kernel, "tap weights: delta or uniform")
        ->check(CLI::IsMember({"delta", "uniform"}));
    transfer->add_option("--weights", cfg.weights_path,
                         "WGT1 file with aggregation tap weights");

    CLI::App* convergence = app.add_subcommand(
        "convergence", "oracle-MSE traces for single-scale and coarse-to-fine");
    add_pair_flags(convergence, cfg);
    add_common_flags(convergence, cfg);
    add_domain_flag(convergence, cfg);

    CLI::App* bench = app.add_subcommand(
        "bench", "predicted vs measured evaluation counts per matcher");
    add_common_flags(bench, cfg);
    bench->add_option("--sizes", cfg.bench_sizes, "square input sizes")->delimiter(',');
    bench->add_option("--measure-enum-max", cfg.measure_enum_max,
                      "largest size at which enumerated matching actually runs");

    CLI::App* oracle = app.add_subcommand(
        "oracle", "enumerated ground-truth NNF at full scale");
    add_pair_flags(oracle, cfg);
    add_common_flags(oracle, cfg);
    add_domain_flag(oracle, cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*match) {
            const nnf::MatchReport r = nnf::cmd_match(cfg);
            std::cout << "wrote " << r.nnf_paths.size() << " NNF file(s) and "
                      << r.summary_path << " in " << r.wall_time_s << " s\n";
            for (const nnf::ScaleMatch& sm : r.scales) {
                std::cout << "  scale " << sm.scale_index << " (" << sm.ref_height
                          << "x" << sm.ref_width
                          << "): mean relevance = " << sm.mean_relevance
                          << ", evals = " << sm.cfe.total_evals() << "\n";
            }
        } else if (*transfer) {
            cfg.transfer_kernel = (kernel == "uniform") ? nnf::TransferKernel::uniform
                                                        : nnf::TransferKernel::delta;
            const nnf::TransferReport r = nnf::cmd_transfer(cfg);
            std::cout << "wrote " << r.out_path << " (" << r.output.width << "x"
                      << r.output.height << ") in " << r.wall_time_s << " s\n";
        } else if (*convergence) {
            const nnf::ConvergenceReport r = nnf::cmd_convergence(cfg);
            std::cout << "wrote " << r.single_csv << " (" << r.single_trace.size()
                      << " rows) and " << r.cfe_csv << " (" << r.cfe_trace.size()
                      << " rows)\n";
        } else if (*bench) {
            nnf::cmd_bench(cfg, std::cout);
        } else if (*oracle) {
            const nnf::OracleReport r = nnf::cmd_oracle(cfg);
            std::cout << "wrote " << r.nnf_path << ", evaluations = " << r.evals
                      << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
