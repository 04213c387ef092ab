#include "qmed/cli.hpp"

#include "qmed/blb.hpp"
#include "qmed/data.hpp"
#include "qmed/errors.hpp"
#include "qmed/oracle.hpp"
#include "qmed/pipeline.hpp"
#include "qmed/serialize.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace qmed {

namespace {

namespace fs = std::filesystem;

struct PipelineOpts {
    std::string input;
    std::string out = ".";
    std::string from_fit; // decompose/bootstrap: reuse a fit artifact
    ColumnSchema schema;
    RunConfig config;
};

struct BlbOpts {
    BlbConfig config;
};

void add_data_flags(CLI::App* cmd, PipelineOpts* opts, bool allow_from) {
    if (allow_from) {
        auto* source = cmd->add_option_group("source", "Where the data comes from");
        source->add_option("-i,--input", opts->input, "Input CSV file");
        source->add_option(
            "--from", opts->from_fit,
            "Directory holding a fit artifact; reuses its input and settings");
        source->require_option(1); // exactly one of --input / --from
    } else {
        cmd->add_option("-i,--input", opts->input, "Input CSV file")->required();
    }
    cmd->add_option("-o,--out", opts->out, "Output directory")
        ->capture_default_str();
    cmd->add_option("--outcome", opts->schema.outcome, "Outcome column name")
        ->capture_default_str();
    cmd->add_option("--exposure", opts->schema.exposure, "Exposure column name")
        ->capture_default_str();
    cmd->add_option("--mediator", opts->schema.mediator, "Mediator column name")
        ->capture_default_str();
    cmd->add_option("--covariates", opts->schema.covariates,
                    "Covariate column names, comma separated")
        ->delimiter(',');
}

void add_pipeline_flags(CLI::App* cmd, PipelineOpts* opts) {
    cmd->add_option("-K,--bins", opts->config.bins, "Number of quantile bins")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))
        ->capture_default_str();
    cmd->add_option("--x-for-nie", opts->config.x_for_nie,
                    "Exposure level held fixed in the indirect effect")
        ->check(CLI::Range(0, 1))
        ->capture_default_str();
    cmd->add_option("--bin-mode", opts->config.bin_mode,
                    "Bin assignment: residual (nearest midpoint) or cdf")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, BinAssignMode>{
                {"residual", BinAssignMode::residual},
                {"cdf", BinAssignMode::cdf}},
            CLI::ignore_case));
    cmd->add_option("--interp", opts->config.interp,
                    "Rate-curve interpolation: linear or spline")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, InterpMode>{{"linear", InterpMode::linear},
                                              {"spline", InterpMode::spline}},
            CLI::ignore_case));
    cmd->add_flag("--no-rearrange",
                  [opts](std::int64_t) { opts->config.rearrange = false; },
                  "Serve raw quantile curves without monotone rearrangement");
    cmd->add_flag("--pool-inverse", opts->config.pool_inverse,
                  "Pool the density factor by averaging 1/s instead of s");
    cmd->add_option("--delta", opts->config.sensitivity_delta,
                    "Central-difference bandwidth for r (0: Bofinger)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--eps", opts->config.sparsity_eps,
                    "Sparsity bandwidth (0: Bofinger)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--force-linear", opts->config.force_linear_model,
                  "Use the regression backend even without covariates");
    cmd->add_option("--interactions", opts->config.exposure_interactions,
                    "Covariate indices with exposure interactions, comma separated")
        ->delimiter(',');
    cmd->add_option("--rate-scale", opts->config.rate_scale,
                    "Display multiplier for rates (e.g. 100000)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-undefined-frac", opts->config.max_undefined_frac,
                    "Largest tolerated fraction of undefined bins when averaging")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
}

void add_blb_flags(CLI::App* cmd, BlbOpts* opts) {
    cmd->add_option("--blb-subsets", opts->config.subsets, "Number of subsets")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--blb-b", opts->config.subset_size,
                    "Subset size b (0: ceil(n^0.7))");
    cmd->add_option("--blb-reps", opts->config.replicates,
                    "Weighted refits per subset")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))
        ->capture_default_str();
    cmd->add_option("--alpha", opts->config.alpha, "Band level (two sided)")
        ->check(CLI::Range(1e-6, 0.999999))
        ->capture_default_str();
    cmd->add_option("--seed", opts->config.seed, "Resampling seed")
        ->capture_default_str();
}

std::string write_artifact(const std::string& out_dir, const std::string& name,
                           const std::string& content,
                           std::vector<std::string>* outputs) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw EngineError("cannot write " + path.string(), 1);
    outputs->push_back(name);
    return path.string();
}

std::string hash_string(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Recover input location, column schema, and settings from a fit manifest.
void load_fit_artifact(const std::string& dir, PipelineOpts* opts) {
    const fs::path path = fs::path(dir) / "manifest.json";
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SchemaError("fit artifact incomplete: " + path.string() +
                          " not found");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("input") || !j.contains("config"))
        throw SchemaError("fit artifact incomplete: manifest lacks input/config");
    const auto& input = j["input"];
    opts->input = input.value("path", std::string{});
    if (opts->input.empty())
        throw SchemaError("fit artifact incomplete: manifest records no input path");
    const auto& cols = input["columns"];
    opts->schema.outcome = cols.value("outcome", "y");
    opts->schema.exposure = cols.value("exposure", "x");
    opts->schema.mediator = cols.value("mediator", "m");
    opts->schema.covariates =
        cols.value("covariates", std::vector<std::string>{});
    const auto& c = j["config"];
    opts->config.bins = c.value("bins", std::size_t{50});
    opts->config.x_for_nie = c.value("x_for_nie", 1);
    opts->config.bin_mode = c.value("bin_mode", std::string{"residual"}) == "cdf"
                                ? BinAssignMode::cdf
                                : BinAssignMode::residual;
    opts->config.interp = c.value("interp", std::string{"linear"}) == "spline"
                              ? InterpMode::spline
                              : InterpMode::linear;
    opts->config.rearrange = c.value("rearrange", true);
    opts->config.pool_inverse = c.value("pool_inverse", false);
    opts->config.sensitivity_delta = c.value("sensitivity_delta", 0.0);
    opts->config.sparsity_eps = c.value("sparsity_eps", 0.0);
    opts->config.force_linear_model = c.value("force_linear_model", false);
    opts->config.exposure_interactions =
        c.value("exposure_interactions", std::vector<std::size_t>{});
    opts->config.rate_scale = c.value("rate_scale", 1.0);
    opts->config.max_undefined_frac = c.value("max_undefined_frac", 0.5);
    // Reusing the artifact requires the same data it was fit on.
    const std::string recorded = input.value("content_hash", std::string{});
    MicrodataTable probe = ingest_csv_file(opts->input, opts->schema);
    if (hash_string(probe.content_hash()) != recorded)
        throw ValidationError("input data changed since fit: content hash mismatch");
}

MicrodataTable load_table(PipelineOpts* opts, IngestReport* report) {
    if (!opts->from_fit.empty()) load_fit_artifact(opts->from_fit, opts);
    if (opts->input.empty())
        throw ArgumentError("no input: pass --input or --from");
    return ingest_csv_file(opts->input, opts->schema, report);
}

std::string components_csv(const EffectCurve& c) {
    std::string out = "u,nie,nde,ace,q,inv_s,r,product\n";
    auto cell = [](double v) { return std::isfinite(v) ? format_number(v) : std::string{}; };
    for (std::size_t k = 0; k < c.u.size(); ++k) {
        out += format_number(c.u[k]);
        for (const std::vector<double>* col :
             {&c.nie, &c.nde, &c.ace, &c.q, &c.inv_s, &c.r, &c.product}) {
            out += ',';
            out += cell((*col)[k]);
        }
        out += '\n';
    }
    return out;
}

void warn_flags(const PipelineResult& result) {
    if (result.sparse_bins_warning)
        std::cerr << "warning: fewer distinct mediator values than bins in an "
                     "exposure arm; some bins cannot be populated\n";
    if (result.ranks_clamped > 0)
        std::cerr << "warning: " << result.ranks_clamped
                  << " mediator values fell outside the fitted curve range\n";
}

std::vector<std::string> write_rate_files(const PipelineResult& result,
                                          const std::string& out_dir,
                                          std::vector<std::string>* outputs) {
    // The four curves (0,0), (1,1), (x,1), (x,0) may overlap when
    // x_for_nie = 1 or 0; write each distinct (x, x*) pair once.
    std::vector<std::string> written;
    std::map<std::pair<int, int>, bool> seen;
    for (const RateCurve& curve : result.rates) {
        const auto key = std::make_pair(curve.x, curve.x_star);
        if (seen[key]) continue;
        seen[key] = true;
        const std::string name = "rate_x" + std::to_string(curve.x) + "_star" +
                                 std::to_string(curve.x_star) + ".csv";
        write_artifact(out_dir, name, rate_curve_csv(curve), outputs);
        written.push_back(name);
    }
    return written;
}

ManifestInfo base_manifest(const std::string& command, const PipelineOpts& opts,
                           const MicrodataTable& table, const IngestReport& report,
                           const PipelineResult& result) {
    ManifestInfo info;
    info.command = command;
    info.input_path = opts.input;
    info.data_hash = table.content_hash();
    info.ingest = report;
    info.schema = opts.schema;
    info.config = opts.config;
    info.rearranged = result.rearranged;
    info.sparse_bins_warning = result.sparse_bins_warning;
    info.ranks_clamped = result.ranks_clamped;
    return info;
}

int cmd_simulate(std::size_t n, double p_exposed, std::uint64_t seed,
                 const std::vector<double>& params, double sigma_exponent,
                 std::size_t grid_bins, const std::string& out_dir) {
    const OracleModel model(params[0], params[1], params[2], 0.0, params[3],
                            params[4], 0.0, sigma_exponent);
    SimulationReport report;
    const MicrodataTable table = model.simulate(n, p_exposed, seed, &report);
    if (report.clamp_warning)
        std::cerr << "warning: " << 100.0 * report.clamp_fraction
                  << "% of simulated risks exceeded 1 and were clamped\n";

    std::vector<std::string> outputs;
    ColumnSchema schema;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const fs::path data_path = fs::path(out_dir) / "data.csv";
    write_csv_file(data_path.string(), table, schema);
    outputs.push_back("data.csv");
    const BinGrid grid = BinGrid::uniform(grid_bins);
    write_artifact(out_dir, "truth.json",
                   simulation_to_json(model, n, p_exposed, seed, report,
                                      grid.midpoints),
                   &outputs);

    ManifestInfo info;
    info.command = "simulate";
    info.config.bins = grid_bins;
    info.outputs = outputs;
    write_artifact(out_dir, "manifest.json", manifest_to_json(info), &outputs);
    std::cout << "wrote " << (fs::path(out_dir) / "data.csv").string() << " ("
              << table.size() << " rows)\n";
    return 0;
}

int cmd_fit(PipelineOpts opts) {
    IngestReport report;
    const MicrodataTable table = load_table(&opts, &report);
    const std::vector<double> unit; // empty means unit weights
    const PipelineResult result = run_pipeline(table, unit, opts.config);
    warn_flags(result);

    std::vector<std::string> outputs;
    write_rate_files(result, opts.out, &outputs);
    ManifestInfo info = base_manifest("fit", opts, table, report, result);
    info.outputs = outputs;
    write_artifact(opts.out, "manifest.json", manifest_to_json(info), &outputs);
    std::cout << "fit: " << table.size() << " rows, " << result.profiles.size()
              << " covariate profile(s), " << result.grid.K << " bins\n";
    return 0;
}

int cmd_decompose(PipelineOpts opts, const BlbOpts* blb) {
    IngestReport report;
    const MicrodataTable table = load_table(&opts, &report);
    const std::vector<double> unit;
    const PipelineResult result = run_pipeline(table, unit, opts.config);
    warn_flags(result);

    ConfidenceBand band;
    if (blb) {
        band = blb_confidence(table.size(),
                              pipeline_statistic(table, opts.config), blb->config);
        if (band.clamped)
            std::cerr << "warning: confidence band clamped at the point estimate\n";
    }

    std::vector<std::string> outputs;
    write_artifact(opts.out, "effects.json",
                   effects_to_json(result, blb ? &band : nullptr,
                                   blb ? blb->config.alpha : 0.0),
                   &outputs);
    write_artifact(opts.out, "components.csv", components_csv(result.marginal),
                   &outputs);
    write_rate_files(result, opts.out, &outputs);

    ManifestInfo info = base_manifest(blb ? "bootstrap" : "decompose", opts,
                                      table, report, result);
    if (blb) {
        info.has_blb = true;
        info.blb = blb->config;
        info.blb.subset_size = band.subset_size;
        info.band_clamped = band.clamped;
        info.replicates_dropped = band.replicates_dropped;
    }
    info.outputs = outputs;
    write_artifact(opts.out, "manifest.json", manifest_to_json(info), &outputs);

    std::cout << "overall nie " << result.overall.nie << ", nde "
              << result.overall.nde << ", ace " << result.overall.ace << "\n";
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"u-specific mediation effects on quantile-rank-ordered rates"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a config file");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Draw a synthetic dataset with known effects");
    std::size_t sim_n = 0;
    double sim_p = 0.5;
    std::uint64_t sim_seed = 1;
    std::vector<double> sim_params = {-5.0, 0.2, 0.3, 0.0, -0.5};
    double sim_e = 2.0;
    std::size_t sim_bins = 50;
    std::string sim_out = ".";
    sim->add_option("--n", sim_n, "Rows to draw")->required()
        ->check(CLI::PositiveNumber);
    sim->add_option("--p-exposed", sim_p, "Exposure probability")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9))->capture_default_str();
    sim->add_option("--seed", sim_seed, "Simulation seed")->capture_default_str();
    sim->add_option("--alpha0", sim_params[0], "Risk intercept")->capture_default_str();
    sim->add_option("--alpha1", sim_params[1], "Risk exposure coefficient")->capture_default_str();
    sim->add_option("--alpha2", sim_params[2], "Risk mediator coefficient")->capture_default_str();
    sim->add_option("--beta0", sim_params[3], "Mediator intercept")->capture_default_str();
    sim->add_option("--beta1", sim_params[4], "Mediator exposure shift")->capture_default_str();
    sim->add_option("--sigma-exponent", sim_e,
                    "Mediator sd under exposure is (1+x)^(e/2)")->capture_default_str();
    sim->add_option("-K,--bins", sim_bins, "Grid size for the truth curves")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))->capture_default_str();
    sim->add_option("-o,--out", sim_out, "Output directory")->capture_default_str();

    // fit / decompose / bootstrap
    PipelineOpts fit_opts, dec_opts, boot_opts;
    BlbOpts blb_opts;
    auto* fit = app.add_subcommand("fit", "Fit the mediator model and rate curves");
    add_data_flags(fit, &fit_opts, false);
    add_pipeline_flags(fit, &fit_opts);
    auto* dec = app.add_subcommand("decompose", "Estimate effect curves and the decomposition");
    add_data_flags(dec, &dec_opts, true);
    add_pipeline_flags(dec, &dec_opts);
    auto* boot = app.add_subcommand("bootstrap", "Decompose with bag-of-little-bootstraps bands");
    add_data_flags(boot, &boot_opts, true);
    add_pipeline_flags(boot, &boot_opts);
    add_blb_flags(boot, &blb_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_n, sim_p, sim_seed, sim_params, sim_e,
                                sim_bins, sim_out);
        if (fit->parsed()) return cmd_fit(fit_opts);
        if (dec->parsed()) return cmd_decompose(dec_opts, nullptr);
        if (boot->parsed()) return cmd_decompose(boot_opts, &blb_opts);
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace qmed
