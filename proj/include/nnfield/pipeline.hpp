// End-to-end pipeline behind the CLI subcommands: load images, upsample,
// build the reference pyramid, match per scale, aggregate, and report.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nnfield/aggregate.hpp"
#include "nnfield/image.hpp"
#include "nnfield/oracle.hpp"
#include "nnfield/pyramid.hpp"

namespace nnf {

enum class TransferKernel { delta, uniform };

/// Domain the matcher's descriptors are computed in. "degraded" passes
/// every reference level through the same downsample/8-bit/upsample cycle
/// the LR input went through, so both sides of the match live in one
/// domain (the role the paper's jointly pretrained extractors play);
/// "native" matches against the reference levels as-is. Transfer always
/// gathers native (sharp) reference pixels.
enum class MatchDomain { degraded, native };

struct RunConfig {
    std::string lr_path;
    std::string ref_path;
    std::string out_path; // file for transfer, prefix for match/convergence/oracle

    int upscale = 4;   // LR upsampling factor
    double k = 0.8;    // reference pyramid decay
    int n = 5;         // reference pyramid depth
    MatchDomain match_domain = MatchDomain::degraded;

    PyramidConfig pyramid;
    MatchConfig match; // single-resolution runs (convergence, bench)
    DescriptorConfig descriptor;

    std::uint64_t rng_seed = 0;
    int threads = 0;          // 0 = runtime default
    bool dump_levels = false; // extra per-level NNF dumps from cmd_match
    bool timings = false;     // include wall times in JSON summaries

    TransferKernel transfer_kernel = TransferKernel::delta;
    std::string weights_path; // optional WGT1 tap weights for aggregation

    std::vector<int> bench_sizes = {64, 128, 250};
    int measure_enum_max = 128; // largest size to actually run enumerated
};

struct ScaleMatch {
    int scale_index = 0;
    int ref_height = 0;
    int ref_width = 0;
    double mean_relevance = 0.0;
    CfeResult cfe;
};

struct MatchReport {
    std::vector<ScaleMatch> scales;
    std::vector<std::string> nnf_paths;
    std::string summary_path;
    double wall_time_s = 0.0;
};

/// match: upsample LR, build the Ref pyramid, extract descriptors, run the
/// coarse-to-fine matcher per scale. Writes <out>_s<i>.nnf per scale and
/// <out>_summary.json.
MatchReport cmd_match(const RunConfig& cfg);

/// Builds the output image from per-scale matches by aggregating raw
/// reference pixels and fusing across scales. Shared by cmd_transfer and
/// the tests that plant their own fields.
Image transfer_from_matches(const std::vector<Image>& ref_pyramid,
                            const std::vector<Nnf>& matches,
                            const AggregationConfig& agg_cfg);

struct TransferReport {
    Image output;
    std::string out_path;
    double wall_time_s = 0.0;
};

/// transfer: match in memory, then reconstruct at LR-upsampled resolution
/// from reference pixels. Writes a PGM/PPM to out_path.
TransferReport cmd_transfer(const RunConfig& cfg);

struct ConvergenceReport {
    std::vector<TracePoint> single_trace;
    std::vector<TracePoint> cfe_trace;
    std::string single_csv;
    std::string cfe_csv;
};

/// convergence: evaluation-count vs oracle-MSE traces for the single-scale
/// and coarse-to-fine schedules on the pair. Writes <out>_single.csv and
/// <out>_cfe.csv ("evals,mse" per row).
ConvergenceReport cmd_convergence(const RunConfig& cfg);

struct BenchRow {
    int size = 0;
    std::string method;
    std::uint64_t predicted = 0;
    bool measured_valid = false;
    std::uint64_t measured = 0;
    double seconds = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
};

/// bench: predicted vs instrumented evaluation counts for the enumerated,
/// single-scale, and coarse-to-fine matchers on synthetic inputs, plus the
/// enumerated/coarse-to-fine count ratio per size. Prints a table.
BenchReport cmd_bench(const RunConfig& cfg, std::ostream& os);

struct OracleReport {
    Nnf nnf;
    std::uint64_t evals = 0;
    std::string nnf_path;
};

/// oracle: enumerated ground-truth matching at full scale. Writes
/// <out>.nnf.
OracleReport cmd_oracle(const RunConfig& cfg);

/// Deterministic synthetic feature map used by bench (values in [-1, 1]).
FeatureMap synthetic_features(int channels, int height, int width,
                              std::uint64_t seed);

} // namespace nnf
