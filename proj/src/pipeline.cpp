#include "nnfield/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "nnfield/parallel.hpp"
#include "nnfield/reference.hpp"
#include "nnfield/resample.hpp"

namespace nnf {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct MatchInputs {
    Image lr_up;
    std::vector<Image> ref_pyramid;
    FeatureMap k_map;
    std::vector<FeatureMap> q_maps;
};

Image quantize_8bit(const Image& img) {
    Image out = img;
    for (float& v : out.data) {
        v = static_cast<float>(
            std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f) / 255.0);
    }
    return out;
}

// The acquisition cycle an LR input goes through: bicubic reduction by
// `upscale`, 8-bit storage, bicubic upsampling back.
Image degrade_like_lr(const Image& img, int upscale) {
    if (upscale == 1) {
        return quantize_8bit(img);
    }
    const int dh = std::max(
        1, static_cast<int>(std::llround(static_cast<double>(img.height) / upscale)));
    const int dw = std::max(
        1, static_cast<int>(std::llround(static_cast<double>(img.width) / upscale)));
    return bicubic_resize(quantize_8bit(bicubic_resize(img, dh, dw)),
                          img.height, img.width);
}

MatchInputs prepare_inputs(const RunConfig& cfg) {
    if (cfg.upscale < 1) {
        throw std::invalid_argument("upscale must be >= 1");
    }
    const Image lr = load_pnm(cfg.lr_path);
    const Image ref = load_pnm(cfg.ref_path);
    if (lr.channels != ref.channels) {
        throw std::invalid_argument("LR and Ref images must have the same channel count");
    }
    MatchInputs in;
    in.lr_up = bicubic_resize(lr, lr.height * cfg.upscale, lr.width * cfg.upscale);
    in.ref_pyramid = make_ref_pyramid(ref, cfg.k, cfg.n, cfg.descriptor.patch_size);
    in.k_map = extract_descriptors(in.lr_up, cfg.descriptor);
    in.q_maps.reserve(in.ref_pyramid.size());
    for (const Image& level : in.ref_pyramid) {
        const Image q_src = (cfg.match_domain == MatchDomain::degraded)
                                ? degrade_like_lr(level, cfg.upscale)
                                : level;
        in.q_maps.push_back(extract_descriptors(q_src, cfg.descriptor));
    }
    return in;
}

double mean_relevance(const RelevanceMap& rel) {
    double acc = 0.0;
    for (double v : rel.values) acc += v;
    return acc / static_cast<double>(rel.values.size());
}

std::vector<ScaleMatch> match_all_scales(const RunConfig& cfg,
                                         const MatchInputs& in,
                                         std::vector<Nnf>* nnfs,
                                         std::vector<std::vector<Nnf>>* level_dumps) {
    std::vector<ScaleMatch> scales;
    for (std::size_t i = 0; i < in.q_maps.size(); ++i) {
        PyramidConfig pc = cfg.pyramid;
        pc.rng_seed = cfg.rng_seed + i;

        CfeIterationHook hook;
        std::vector<Nnf> dumps;
        if (level_dumps) {
            dumps.resize(cfg.pyramid.scales.size());
            hook = [&dumps](int level, const Nnf& state, std::uint64_t) {
                dumps[level] = state;
            };
        }
        CfeResult r = run_cfe(in.k_map, in.q_maps[i], pc, cfg.match, hook);

        ScaleMatch sm;
        sm.scale_index = static_cast<int>(i);
        sm.ref_height = in.ref_pyramid[i].height;
        sm.ref_width = in.ref_pyramid[i].width;
        sm.mean_relevance = mean_relevance(r.nnf.rel);
        sm.cfe = std::move(r);
        scales.push_back(std::move(sm));
        if (nnfs) nnfs->push_back(scales.back().cfe.nnf);
        if (level_dumps) level_dumps->push_back(std::move(dumps));
    }
    return scales;
}

AggregationConfig transfer_agg_config(const RunConfig& cfg) {
    AggregationConfig agg;
    if (!cfg.weights_path.empty()) {
        const ConvWeights w = load_weights(cfg.weights_path);
        if (w.kh * w.kw != kTapCount || w.in_channels != 1) {
            throw std::invalid_argument(
                "aggregation tap weights must be a <channels-or-1> x 1 x 3 x 3 bank");
        }
        agg.kernel_weights = w.weights;
    } else if (cfg.transfer_kernel == TransferKernel::delta) {
        agg.kernel_weights = delta_kernel();
    }
    return agg;
}

} // namespace

FeatureMap synthetic_features(int channels, int height, int width,
                              std::uint64_t seed) {
    FeatureMap fm(channels, height, width);
    std::uint64_t ctr = 0;
    for (double& v : fm.data) {
        const Coord c = detail::random_coord(seed, ctr++, 1 << 16, 1);
        v = static_cast<double>(c.row) / 32767.5 - 1.0;
    }
    return fm;
}

MatchReport cmd_match(const RunConfig& cfg) {
    set_max_threads(cfg.threads);
    const auto start = Clock::now();
    const MatchInputs in = prepare_inputs(cfg);

    std::vector<std::vector<Nnf>> level_dumps;
    MatchReport report;
    report.scales = match_all_scales(cfg, in, nullptr,
                                     cfg.dump_levels ? &level_dumps : nullptr);

    for (const ScaleMatch& sm : report.scales) {
        const std::string path =
            cfg.out_path + "_s" + std::to_string(sm.scale_index) + ".nnf";
        save_nnf(sm.cfe.nnf, path);
        report.nnf_paths.push_back(path);
    }
    if (cfg.dump_levels) {
        for (std::size_t i = 0; i < level_dumps.size(); ++i) {
            for (std::size_t l = 0; l < level_dumps[i].size(); ++l) {
                const std::string path = cfg.out_path + "_s" + std::to_string(i) +
                                         "_l" + std::to_string(l) + ".nnf";
                save_nnf(level_dumps[i][l], path);
                report.nnf_paths.push_back(path);
            }
        }
    }
    report.wall_time_s = elapsed_s(start);

    nlohmann::ordered_json j;
    j["lr"] = cfg.lr_path;
    j["ref"] = cfg.ref_path;
    j["upscale"] = cfg.upscale;
    j["k"] = cfg.k;
    j["n"] = cfg.n;
    j["rng_seed"] = cfg.rng_seed;
    j["scales"] = nlohmann::ordered_json::array();
    for (const ScaleMatch& sm : report.scales) {
        nlohmann::ordered_json js;
        js["scale_index"] = sm.scale_index;
        js["ref_height"] = sm.ref_height;
        js["ref_width"] = sm.ref_width;
        js["mean_relevance"] = sm.mean_relevance;
        js["relevance_evals"] = sm.cfe.total_evals();
        js["evals_per_level"] = sm.cfe.evals_per_level;
        j["scales"].push_back(std::move(js));
    }
    if (cfg.timings) {
        j["wall_time_s"] = report.wall_time_s;
    }
    report.summary_path = cfg.out_path + "_summary.json";
    std::ofstream os(report.summary_path);
    if (!os) {
        throw std::runtime_error("cannot open " + report.summary_path + " for writing");
    }
    os << j.dump(2) << "\n";
    return report;
}

Image transfer_from_matches(const std::vector<Image>& ref_pyramid,
                            const std::vector<Nnf>& matches,
                            const AggregationConfig& agg_cfg) {
    if (ref_pyramid.empty() || ref_pyramid.size() != matches.size()) {
        throw std::invalid_argument("transfer: pyramid/match count mismatch");
    }
    std::vector<FeatureMap> ys;
    std::vector<RelevanceMap> ss;
    ys.reserve(matches.size());
    ss.reserve(matches.size());
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const Image& level = ref_pyramid[i];
        FeatureMap v(level.channels, level.height, level.width);
        for (std::size_t p = 0; p < v.data.size(); ++p) {
            v.data[p] = level.data[p];
        }
        ys.push_back(standard_aggregate(v, matches[i].pos, agg_cfg));
        ss.push_back(matches[i].rel);
    }
    auto [fused, weights] = fuse_multiscale(ys, ss);
    (void)weights;
    Image out(fused.channels == 1 ? 1 : 3, fused.height, fused.width);
    for (std::size_t p = 0; p < out.data.size(); ++p) {
        out.data[p] = static_cast<float>(fused.data[p]);
    }
    return out;
}

TransferReport cmd_transfer(const RunConfig& cfg) {
    set_max_threads(cfg.threads);
    const auto start = Clock::now();
    const MatchInputs in = prepare_inputs(cfg);

    std::vector<Nnf> nnfs;
    match_all_scales(cfg, in, &nnfs, nullptr);

    TransferReport report;
    report.output = transfer_from_matches(in.ref_pyramid, nnfs,
                                          transfer_agg_config(cfg));
    report.out_path = cfg.out_path;
    save_pnm(report.output, cfg.out_path);
    report.wall_time_s = elapsed_s(start);
    return report;
}

namespace {

void write_trace_csv(const std::vector<TracePoint>& trace, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "evals,mse\n";
    for (const TracePoint& p : trace) {
        os << p.evals << "," << std::setprecision(17) << p.mse << "\n";
    }
}

} // namespace

ConvergenceReport cmd_convergence(const RunConfig& cfg) {
    set_max_threads(cfg.threads);
    const MatchInputs in = prepare_inputs(cfg);
    const FeatureMap& q0 = in.q_maps.front();

    TraceSchedule single;
    single.coarse_to_fine = false;
    single.match = cfg.match;
    single.match.rng_seed = cfg.rng_seed;

    TraceSchedule cfe;
    cfe.coarse_to_fine = true;
    cfe.pyramid = cfg.pyramid;
    cfe.pyramid.rng_seed = cfg.rng_seed;
    cfe.match = cfg.match;

    ConvergenceReport report;
    report.single_trace = convergence_trace(in.k_map, q0, single);
    report.cfe_trace = convergence_trace(in.k_map, q0, cfe);
    report.single_csv = cfg.out_path + "_single.csv";
    report.cfe_csv = cfg.out_path + "_cfe.csv";
    write_trace_csv(report.single_trace, report.single_csv);
    write_trace_csv(report.cfe_trace, report.cfe_csv);
    return report;
}

BenchReport cmd_bench(const RunConfig& cfg, std::ostream& os) {
    set_max_threads(cfg.threads);
    BenchReport report;

    os << std::left << std::setw(6) << "size" << std::setw(14) << "method"
       << std::right << std::setw(16) << "predicted" << std::setw(16)
       << "measured" << std::setw(9) << "match" << std::setw(12) << "seconds"
       << "\n";

    for (int size : cfg.bench_sizes) {
        const FeatureMap k = synthetic_features(9, size, size, cfg.rng_seed ^ 0x9E37u);
        const FeatureMap q = synthetic_features(9, size, size, cfg.rng_seed ^ 0x79B9u);

        auto emit = [&](BenchRow row) {
            os << std::left << std::setw(6) << row.size << std::setw(14)
               << row.method << std::right << std::setw(16) << row.predicted;
            if (row.measured_valid) {
                os << std::setw(16) << row.measured << std::setw(9)
                   << (row.measured == row.predicted ? "yes" : "NO");
            } else {
                os << std::setw(16) << "-" << std::setw(9) << "-";
            }
            os << std::setw(12) << std::fixed << std::setprecision(3)
               << row.seconds << std::defaultfloat << "\n";
            report.rows.push_back(std::move(row));
        };

        {
            BenchRow row;
            row.size = size;
            row.method = "enumerated";
            row.predicted = cost_model_enumerated(size, size, size, size);
            if (size <= cfg.measure_enum_max) {
                const auto t0 = Clock::now();
                std::uint64_t evals = 0;
                brute_force_nnf(k, q, &evals);
                row.seconds = elapsed_s(t0);
                row.measured = evals;
                row.measured_valid = true;
            }
            emit(std::move(row));
        }
        {
            BenchRow row;
            row.size = size;
            row.method = "single";
            MatchConfig mc = cfg.match;
            mc.rng_seed = cfg.rng_seed;
            row.predicted = cost_model_single(size, size, mc);
            const auto t0 = Clock::now();
            std::uint64_t evals = 0;
            run_embedded_patchmatch(k, q, mc, nullptr, &evals);
            row.seconds = elapsed_s(t0);
            row.measured = evals;
            row.measured_valid = true;
            emit(std::move(row));
        }
        std::uint64_t cfe_count = 0;
        {
            BenchRow row;
            row.size = size;
            row.method = "cfe";
            PyramidConfig pc = cfg.pyramid;
            pc.rng_seed = cfg.rng_seed;
            row.predicted = cost_model_cfe(size, size, size, size, pc);
            const auto t0 = Clock::now();
            const CfeResult r = run_cfe(k, q, pc, cfg.match);
            row.seconds = elapsed_s(t0);
            row.measured = r.total_evals();
            row.measured_valid = true;
            cfe_count = row.predicted;
            emit(std::move(row));
        }
        const double ratio =
            static_cast<double>(cost_model_enumerated(size, size, size, size)) /
            static_cast<double>(cfe_count);
        os << "  enumerated/cfe count ratio at " << size << "x" << size << ": "
           << std::fixed << std::setprecision(1) << ratio << std::defaultfloat
           << "\n";
    }
    return report;
}

OracleReport cmd_oracle(const RunConfig& cfg) {
    set_max_threads(cfg.threads);
    const MatchInputs in = prepare_inputs(cfg);

    OracleReport report;
    report.nnf = brute_force_nnf(in.k_map, in.q_maps.front(), &report.evals);
    report.nnf_path = cfg.out_path + ".nnf";
    save_nnf(report.nnf, report.nnf_path);
    return report;
}

} // namespace nnf
