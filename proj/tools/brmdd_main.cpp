// Command-line front end: single-cell LSD and spacing studies, parameter
// sweeps with resume, scaling-law fits and regime classification.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brmdd/sweep.hpp"
#include "brmdd/version.hpp"

namespace fs = std::filesystem;
using namespace brmdd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;
constexpr int kExitIo = 3;

struct CellArgs {
    int K = 200;
    double beta = 1.0;
    int band = 0;  // 0: derive from beta
    double q = -1.0, v_over_dc = -1.0, v = -1.0;
    double delta = 1.0;
    int realizations = 100;
    std::uint64_t seed = 0;
    int workers = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--K", K, "half-size K (N = 2K+1)")->check(CLI::PositiveNumber);
        cmd->add_option("--beta", beta, "relative band width b/K");
        cmd->add_option("--b", band, "band half-width (overrides --beta)");
        auto* oq = cmd->add_option("--q", q, "control parameter v/(Delta_c sqrt(beta))");
        auto* ox = cmd->add_option("--v-over-dc", v_over_dc, "coupling ratio v/Delta_c");
        auto* ov = cmd->add_option("--v", v, "rms coupling v (energy units)");
        oq->excludes(ox)->excludes(ov);
        ox->excludes(ov);
        cmd->add_option("--delta", delta, "mean diagonal spacing")->check(CLI::PositiveNumber);
        cmd->add_option("--realizations", realizations, "disorder realizations")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "master seed");
        cmd->add_option("--workers", workers, "worker threads (0 = hardware)");
    }

    EnsembleParams resolve() const {
        EnsembleParams p;
        p.half_size = K;
        p.band = band > 0 ? band : std::max(1, static_cast<int>(std::lround(beta * K)));
        const double beta_actual = static_cast<double>(p.band) / K;
        p.level_spacing = delta;
        if (q >= 0.0)
            p.coupling_rms = q * delta / std::sqrt(beta_actual);
        else if (v_over_dc >= 0.0)
            p.coupling_rms = v_over_dc * delta / beta_actual;
        else if (v >= 0.0)
            p.coupling_rms = v;
        else
            throw CLI::ValidationError("one of --q, --v-over-dc, --v is required");
        p.master_seed = seed;
        p.n_realizations = realizations;
        if (p.validate())
            std::cerr << "warning: beta = " << beta_actual << " > 1 is outside the usual range\n";
        return p;
    }
};

int run_lsd(const CellArgs& args, const std::string& out, int bins) {
    const EnsembleParams p = args.resolve();
    SweepOptions opt;
    opt.workers = args.workers;
    opt.lsd_bins = bins;
    const CellResult r = run_cell(p, opt);
    if (r.status != CellStatus::ok || !r.lsd) {
        std::cerr << "error: " << (r.message.empty() ? "cell failed" : r.message) << "\n";
        return kExitPartial;
    }
    write_lsd_csv(out, r.lsd->histogram, r.lsd->fit);
    std::cout << "gamma=" << format_double(r.lsd->fit.gamma)
              << " xi_e=" << format_double(r.lsd->fit.xi_e)
              << " residual_rms=" << format_double(r.lsd->fit.residual_rms)
              << " bins_used=" << r.lsd->fit.n_bins_used
              << " iterations=" << r.lsd->fit.iterations << " q=" << format_double(r.q)
              << " beta=" << format_double(r.beta) << " regime=" << to_string(r.regime) << "\n";
    std::cout << "wrote " << out << "\n";
    return kExitOk;
}

int run_spacing(const CellArgs& args, const std::string& out, double window_fraction, int bins,
                double s_max) {
    EnsembleParams p = args.resolve();
    SweepOptions opt;
    opt.workers = args.workers;
    opt.spacing_window_fraction = window_fraction;
    const CellResult r = run_cell(p, opt);
    if (r.status != CellStatus::ok) {
        std::cerr << "error: " << r.message << "\n";
        return kExitPartial;
    }
    write_spacing_csv(out, r.pooled_spacings, bins, s_max);
    std::cout << "ks_poisson=" << format_double(r.ks_poisson)
              << " ks_wigner_dyson=" << format_double(r.ks_wigner_dyson)
              << " n_spacings=" << r.pooled_spacings.spacings.size()
              << " xi_ipr=" << format_double(r.xi_ipr) << " regime=" << to_string(r.regime)
              << "\n";
    std::cout << "wrote " << out << "\n";
    return kExitOk;
}

int run_sweep_cmd(const std::string& spec_file, const std::string& output_dir, int workers,
                  bool emit_lsd, bool emit_spacing) {
    SweepSpec spec = load_sweep_spec(spec_file);
    if (!output_dir.empty()) spec.output_dir = output_dir;
    if (spec.output_dir.empty()) {
        std::cerr << "error: no output_dir in spec or on the command line\n";
        return kExitUsage;
    }
    if (workers > 0) spec.options.workers = workers;
    if (emit_lsd) spec.options.emit_lsd = true;
    if (emit_spacing) spec.options.emit_spacing = true;
    const SweepSummary s = run_sweep(spec);
    std::cout << "cells: " << s.cells.size() << " ok: " << s.n_ok << " rejected: " << s.n_rejected
              << " failed: " << s.n_failed << " resumed: " << s.n_resumed << "\n";
    std::cout << "results: " << (spec.output_dir / "results.csv").string() << "\n";
    return s.exit_code();
}

std::vector<CellResult> load_ok_rows(const std::string& path) {
    fs::path p = path;
    if (fs::is_directory(p)) p /= "results.csv";
    auto rows = read_results_csv(p);
    std::erase_if(rows, [](const CellResult& r) { return r.status != CellStatus::ok; });
    return rows;
}

void print_lawfit(const LawFit& f) {
    for (std::size_t i = 0; i < f.names.size(); ++i)
        std::cout << f.names[i] << " = " << format_double(f.values[i]) << " +- "
                  << format_double(f.std_errors[i]) << "\n";
    std::cout << "n_points = " << f.n_points << "  rss = " << format_double(f.rss);
    if (!f.restriction.empty()) std::cout << "  restriction: " << f.restriction;
    std::cout << "\n";
}

int run_fit(const std::string& law, const std::string& results) {
    const auto rows = load_ok_rows(results);
    if (law == "xi_e") {
        std::vector<LawPoint> pts;
        for (const auto& r : rows)
            if (r.xi_e) pts.push_back({r.q, *r.xi_e});
        print_lawfit(fit_xi_e_law(pts));
    } else if (law == "ipr_ergodic") {
        std::vector<LawPoint> pts;
        for (const auto& r : rows) pts.push_back({r.q, r.xi_ipr});
        print_lawfit(fit_ergodic_ipr_law(pts));
    } else if (law == "exponential") {
        std::vector<ExpPoint> pts;
        for (const auto& r : rows)
            if (r.xi_e) pts.push_back({r.q * std::sqrt(r.beta), r.xi_ipr, *r.xi_e});
        print_lawfit(fit_exponential_rate(pts));
    } else {
        std::cerr << "error: unknown law '" << law << "' (xi_e | ipr_ergodic | exponential)\n";
        return kExitUsage;
    }
    return kExitOk;
}

int run_borders(const std::vector<double>& qs, const std::vector<double>& betas,
                const std::string& curves_out, bool verbose) {
    if (qs.size() != betas.size()) {
        std::cerr << "error: --q and --beta must be given the same number of times\n";
        return kExitUsage;
    }
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const auto d = classify_regime(qs[i], betas[i]);
        if (verbose)
            std::cout << "q=" << format_double(qs[i]) << " beta=" << format_double(betas[i])
                      << " x=" << format_double(d.x)
                      << " loc_border=" << format_double(d.localization_border)
                      << " erg_border=" << format_double(d.ergodicity_border) << " -> "
                      << to_string(d.label) << "\n";
        else
            std::cout << to_string(d.label) << "\n";
    }
    if (!curves_out.empty()) {
        std::ofstream os(curves_out);
        if (!os) {
            std::cerr << "error: cannot write " << curves_out << "\n";
            return kExitIo;
        }
        const LawConstants c;
        os << "q,beta_localization,beta_ergodicity\n";
        for (int i = 0; i <= 240; ++i) {
            const double q = 0.05 * std::pow(10.0, 3.0 * i / 240.0);
            const double xl = 1.0 / c.C0;
            const double bl = std::min(2.0, (xl / q) * (xl / q));
            os << format_double(q) << ',' << format_double(bl) << ',';
            const double tpq2 = 2.0 * std::numbers::pi * q * q;
            if (tpq2 > 1.0) {
                const double xe = std::log(tpq2) / c.C;
                os << format_double(std::min(2.0, (xe / q) * (xe / q)));
            }
            os << '\n';
        }
        std::cout << "wrote " << curves_out << "\n";
    }
    return kExitOk;
}

int run_report(const std::string& results) {
    const auto rows = load_ok_rows(results);
    const LawConstants ref;
    std::cout << "cells with status ok: " << rows.size() << "\n";
    int n_pert = 0, n_ne = 0, n_e = 0;
    for (const auto& r : rows) {
        if (r.regime == Regime::perturbative) ++n_pert;
        if (r.regime == Regime::localized_nonergodic) ++n_ne;
        if (r.regime == Regime::localized_ergodic) ++n_e;
    }
    std::cout << "regimes: perturbative " << n_pert << ", localized_nonergodic " << n_ne
              << ", localized_ergodic " << n_e << "\n";

    auto relative = [](double a, double b) { return 100.0 * (a / b - 1.0); };
    try {
        std::vector<LawPoint> pts;
        for (const auto& r : rows)
            if (r.xi_e) pts.push_back({r.q, *r.xi_e});
        const auto f = fit_xi_e_law(pts);
        std::printf("xi_e law:        L1 = %-8.4g (ref %.4g, %+.1f%%)  L2 = %-8.4g (ref %.4g, %+.1f%%)\n",
                    f.values[0], ref.L1, relative(f.values[0], ref.L1), f.values[1], ref.L2,
                    relative(f.values[1], ref.L2));
    } catch (const Error& e) {
        std::cout << "xi_e law:        skipped (" << e.what() << ")\n";
    }
    try {
        bool all_full_band = true;
        std::vector<LawPoint> pts;
        for (const auto& r : rows) {
            if (r.beta < 1.0) all_full_band = false;
            pts.push_back({r.q, r.xi_ipr});
        }
        if (!all_full_band) throw FitError("ergodic IPR law expects beta = 1 cells");
        const auto f = fit_ergodic_ipr_law(pts);
        std::printf("ergodic IPR law: D1 = %-8.4g (ref %.4g, %+.1f%%)  D2 = %-8.4g (ref %.4g, %+.1f%%)\n",
                    f.values[0], ref.D1, relative(f.values[0], ref.D1), f.values[1], ref.D2,
                    relative(f.values[1], ref.D2));
    } catch (const Error& e) {
        std::cout << "ergodic IPR law: skipped (" << e.what() << ")\n";
    }
    try {
        std::vector<ExpPoint> pts;
        for (const auto& r : rows)
            if (r.xi_e) pts.push_back({r.q * std::sqrt(r.beta), r.xi_ipr, *r.xi_e});
        const auto f = fit_exponential_rate(pts);
        std::printf("exponential IPR: C  = %-8.4g (ref %.4g, %+.1f%%)  [%d points pass %s]\n",
                    f.values[0], ref.C, relative(f.values[0], ref.C), f.n_points,
                    f.restriction.c_str());
    } catch (const Error& e) {
        std::cout << "exponential IPR: skipped (" << e.what() << ")\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"band random matrices with disordered diagonal: spectral statistics lab"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    auto* lsd = app.add_subcommand("lsd", "one cell: binned LSD with Breit-Wigner overlay");
    CellArgs lsd_args;
    lsd_args.add_to(lsd);
    std::string lsd_out = "lsd.csv";
    int lsd_bins = 0;
    lsd->add_option("--out", lsd_out, "output CSV (E, rho_w, rho_bw_fit)");
    lsd->add_option("--bins", lsd_bins, "histogram bins (0 = counts-aware automatic)");

    auto* spacing = app.add_subcommand("spacing", "one cell: P(S) histogram with references");
    CellArgs sp_args;
    sp_args.add_to(spacing);
    std::string sp_out = "spacing.csv";
    double sp_fraction = 0.5, sp_smax = 4.0;
    int sp_bins = 32;
    spacing->add_option("--out", sp_out, "output CSV (S, p_emp, p_poisson, p_wigner_dyson)");
    spacing->add_option("--window-fraction", sp_fraction, "central index fraction used");
    spacing->add_option("--hist-bins", sp_bins, "histogram bins");
    spacing->add_option("--smax", sp_smax, "histogram upper edge");

    auto* sweep = app.add_subcommand("sweep", "run a JSON sweep spec with per-cell resume");
    std::string sweep_spec, sweep_out;
    int sweep_workers = 0;
    bool sweep_lsd = false, sweep_spacing = false;
    sweep->add_option("spec", sweep_spec, "sweep spec JSON file")->required();
    sweep->add_option("--output-dir", sweep_out, "override the spec's output_dir");
    sweep->add_option("--workers", sweep_workers, "worker threads (0 = hardware)");
    sweep->add_flag("--emit-lsd", sweep_lsd, "write per-cell lsd_<key>.csv");
    sweep->add_flag("--emit-spacing", sweep_spacing, "write per-cell spacing_<key>.csv");

    auto* fit = app.add_subcommand("fit", "fit a scaling law to a results table");
    std::string fit_law, fit_results;
    fit->add_option("--law", fit_law, "xi_e | ipr_ergodic | exponential")->required();
    fit->add_option("results", fit_results, "results.csv or sweep directory")->required();

    auto* borders = app.add_subcommand("borders", "classify (q, beta) points; emit border curves");
    std::vector<double> bq, bb;
    std::string curves;
    bool bverbose = false;
    borders->add_option("--q", bq, "q value (repeatable)");
    borders->add_option("--beta", bb, "beta value (repeatable)");
    borders->add_option("--curves", curves, "write localization/ergodicity border curves CSV");
    borders->add_flag("-v,--verbose", bverbose, "print borders along with the label");

    auto* report =
        app.add_subcommand("report", "summarize a results table against reference constants");
    std::string report_results;
    report->add_option("results", report_results, "results.csv or sweep directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (lsd->parsed()) return run_lsd(lsd_args, lsd_out, lsd_bins);
        if (spacing->parsed()) return run_spacing(sp_args, sp_out, sp_fraction, sp_bins, sp_smax);
        if (sweep->parsed())
            return run_sweep_cmd(sweep_spec, sweep_out, sweep_workers, sweep_lsd, sweep_spacing);
        if (fit->parsed()) return run_fit(fit_law, fit_results);
        if (borders->parsed()) return run_borders(bq, bb, curves, bverbose);
        if (report->parsed()) return run_report(report_results);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return kExitPartial;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartial;
    }
    return kExitUsage;
}
