// Output artifacts: effect-curve JSON, per-bin rate CSVs, simulation
// sidecars, and the run manifest.  All writers are deterministic for a
// given input (no timestamps, fixed key order, shortest round-trip
// number formatting), so reruns produce byte-identical files.
#pragma once

#include "qmed/blb.hpp"
#include "qmed/data.hpp"
#include "qmed/oracle.hpp"
#include "qmed/pipeline.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qmed {

// Effect curves with the decomposition and, when `band` is present,
// per-field confidence intervals laid out as in flatten_effects.
std::string effects_to_json(const PipelineResult& result,
                            const ConfidenceBand* band = nullptr,
                            double alpha = 0.05);

// One rate curve as CSV: u_mid, x, x_star, n_at_risk, events, rate.  The
// rate column is multiplied by the curve's display scale; empty bins have
// an empty rate field.
std::string rate_curve_csv(const RateCurve& curve);

// True-parameter sidecar for a simulated dataset: the generating model,
// clamp diagnostics, and closed-form curves on the bin-midpoint grid.
std::string simulation_to_json(const OracleModel& model, std::size_t n,
                               double p_exposed, std::uint64_t seed,
                               const SimulationReport& report,
                               const std::vector<double>& u_grid);

struct ManifestInfo {
    std::string command;
    std::string input_path;      // empty for simulate
    std::uint64_t data_hash = 0; // content hash of the ingested table
    IngestReport ingest;
    ColumnSchema schema;
    RunConfig config;
    bool has_blb = false;
    BlbConfig blb;
    std::vector<std::string> outputs; // artifact filenames, relative to out dir
    // run diagnostics
    bool rearranged = false;
    bool sparse_bins_warning = false;
    std::size_t ranks_clamped = 0;
    bool band_clamped = false;
    std::size_t replicates_dropped = 0;
};

std::string manifest_to_json(const ManifestInfo& info);

// Shortest round-trip decimal form (what the CSV writers use).
std::string format_number(double v);

} // namespace qmed
