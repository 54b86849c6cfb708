#pragma once
// Parameter sweeps: parallel disorder averaging with reproducible seeding,
// per-cell persistence with resume, and CSV/JSON result files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "brmdd/ensemble.hpp"
#include "brmdd/fitting.hpp"
#include "brmdd/observables.hpp"
#include "brmdd/theory.hpp"

namespace brmdd {

struct CellSpec {
    EnsembleParams params;
    /// Returns the (q, β) parameterization converted to (v, b); the band is
    /// rounded to an integer, beta is recomputed from it and q is preserved
    /// exactly via v = q Δ / √β.
    static CellSpec from_dimensionless(double q, double beta, int half_size, double delta,
                                       int realizations, std::uint64_t master_seed);
};

struct SweepOptions {
    int lsd_bins = 0;  ///< 0 = counts-aware automatic choice (see LsdFitOptions)
    double window_gammas = 5.0;
    double spacing_window_fraction = 0.5;
    double guard_ratio = 0.1;   ///< require predicted xi_e <= guard_ratio * N
    int workers = 0;            ///< 0 = hardware concurrency
    bool emit_lsd = false;      ///< write per-cell lsd_<key>.csv
    bool emit_spacing = false;  ///< write per-cell spacing_<key>.csv
    bool check_contracts = true;  ///< sampled eigensolver checks per cell
};

enum class CellStatus { ok, rejected, failed };

const char* to_string(CellStatus s);

struct CellResult {
    // inputs
    int half_size = 0, band = 0;
    double coupling_rms = 0.0, level_spacing = 1.0;
    double beta = 0.0, delta_c = 0.0, q = 0.0;
    // outputs
    std::optional<double> gamma;  // absent when the width fit was rejected
    std::optional<double> xi_e;
    double xi_ipr = 0.0;
    double evec_ipr = 0.0;
    double ks_poisson = 0.0;
    double ks_wigner_dyson = 0.0;
    Regime regime = Regime::perturbative;
    int n_realizations = 0;
    std::uint64_t master_seed = 0;
    std::string version;
    CellStatus status = CellStatus::ok;
    std::string message;    // diagnostic for rejected/failed cells
    std::string cell_key;   // stable hash of the inputs
    double wall_seconds = 0.0;  // not part of the deterministic record

    // side products, filled for status == ok
    std::optional<LsdWidthEstimate> lsd;
    SpacingSample pooled_spacings;
};

/// Stable identifier of a cell: hash of all inputs that influence results.
std::string cell_key(const EnsembleParams& p, const SweepOptions& opt);

/// Runs one cell: builds and diagonalizes every realization (in parallel),
/// accumulates observables in realization-index order, fits the LSD width and
/// classifies the regime. The finite-size guard (predicted xi_e <= N/10 by
/// default) is enforced up front; violating cells come back `rejected`.
/// Eigensolver failures mark the cell `failed` instead of throwing.
CellResult run_cell(const EnsembleParams& p, const SweepOptions& opt = {});

struct SweepSpec {
    std::vector<EnsembleParams> cells;
    std::uint64_t master_seed = 0;  // default for cells without explicit seed
    std::filesystem::path output_dir;
    SweepOptions options;
};

/// Parses the JSON sweep-spec format (see README). Throws Error on malformed
/// input.
SweepSpec load_sweep_spec(const std::filesystem::path& file);
SweepSpec parse_sweep_spec(const std::string& json_text);

struct SweepSummary {
    std::vector<CellResult> cells;  // in spec order
    int n_ok = 0, n_rejected = 0, n_failed = 0, n_resumed = 0;

    /// 0 = all ok, 2 = some cells failed/rejected.
    int exit_code() const { return (n_failed + n_rejected) ? 2 : 0; }
};

/// Runs all cells of a sweep. Completed cells are flushed to
/// <output_dir>/cells/<key>.csv as they finish and skipped on re-run; the
/// final results.csv and manifest.json are rebuilt in spec order, so resumed
/// and uninterrupted runs produce identical tables.
SweepSummary run_sweep(const SweepSpec& spec);

// ---- persistence -----------------------------------------------------------

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

std::string result_csv_header();
std::string result_csv_row(const CellResult& r);
CellResult parse_result_csv_row(const std::string& header, const std::string& row);

void write_results_csv(const std::filesystem::path& file, const std::vector<CellResult>& rows);
std::vector<CellResult> read_results_csv(const std::filesystem::path& file);

void write_lsd_csv(const std::filesystem::path& file, const LsdEstimate& h, const LorentzianFit& f);
void write_spacing_csv(const std::filesystem::path& file, const SpacingSample& s, int n_bins = 32,
                       double s_max = 4.0);

}  // namespace brmdd
