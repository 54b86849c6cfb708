#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brmdd/sweep.hpp"
#include "brmdd/version.hpp"

using namespace brmdd;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("brmdd_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

EnsembleParams small_cell(double q, std::uint64_t seed, int realizations = 12, int K = 40) {
    return CellSpec::from_dimensionless(q, 1.0, K, 1.0, realizations, seed).params;
}

std::string spec_json(const fs::path& out, int n_cells) {
    std::ostringstream os;
    os << "{\"master_seed\": 9, \"output_dir\": \"" << out.string()
       << "\", \"realizations\": 10, \"options\": {\"workers\": 2}, \"cells\": [";
    const char* cells[] = {"{\"q\": 0.4, \"beta\": 1.0, \"K\": 30}",
                           "{\"v\": 0.2, \"b\": 10, \"K\": 30}",
                           "{\"q\": 0.7, \"beta\": 0.5, \"K\": 30, \"realizations\": 8}"};
    for (int i = 0; i < n_cells; ++i) os << (i ? ", " : "") << cells[i];
    os << "]}";
    return os.str();
}

}  // namespace

TEST_CASE("dimensionless cell construction preserves q") {
    const auto c = CellSpec::from_dimensionless(2.5, 0.25, 400, 1.0, 10, 7);
    CHECK(c.params.band == 100);
    const auto d = derived_params(c.params);
    CHECK(d.beta == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d.q == doctest::Approx(2.5).epsilon(1e-12));

    // band rounds to an integer >= 1 and beta is recomputed from it
    const auto tiny = CellSpec::from_dimensionless(1.0, 0.001, 100, 1.0, 10, 7);
    CHECK(tiny.params.band == 1);
    CHECK(derived_params(tiny.params).q == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cell keys are stable and input-sensitive") {
    const SweepOptions opt;
    const auto p = small_cell(0.5, 3);
    CHECK(cell_key(p, opt) == cell_key(p, opt));
    auto p2 = p;
    p2.master_seed += 1;
    CHECK(cell_key(p2, opt) != cell_key(p, opt));
    auto p3 = p;
    p3.coupling_rms = std::nextafter(p3.coupling_rms, 1.0);
    CHECK(cell_key(p3, opt) != cell_key(p, opt));
    SweepOptions opt2;
    opt2.lsd_bins = 81;
    CHECK(cell_key(p, opt2) != cell_key(p, opt));
}

TEST_CASE("format_double round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 49.96506}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("run_cell on a zero-coupling cell") {
    EnsembleParams p = small_cell(0.0, 5);
    p.coupling_rms = 0.0;
    const auto r = run_cell(p);
    CHECK(r.status == CellStatus::ok);
    CHECK_FALSE(r.gamma.has_value());
    CHECK(r.xi_ipr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.message.find("width fit rejected") != std::string::npos);
    CHECK(r.regime == Regime::perturbative);
}

TEST_CASE("run_cell enforces the finite-size guard") {
    const auto p = small_cell(5.0, 5, 4, 30);  // xi_e ~ 160 >> N/10 = 6.1
    const auto r = run_cell(p);
    CHECK(r.status == CellStatus::rejected);
    CHECK(r.message.find("finite-size guard") != std::string::npos);
    CHECK_FALSE(r.gamma.has_value());
}

TEST_CASE("run_cell is bit-deterministic across worker counts") {
    const auto p = small_cell(0.45, 21, 16, 40);
    SweepOptions one;
    one.workers = 1;
    SweepOptions eight;
    eight.workers = 8;
    const auto a = run_cell(p, one);
    const auto b = run_cell(p, eight);
    CHECK(a.status == CellStatus::ok);
    CHECK(result_csv_row(a) == result_csv_row(b));
    CHECK(a.pooled_spacings.spacings == b.pooled_spacings.spacings);
    REQUIRE(a.lsd.has_value());
    REQUIRE(b.lsd.has_value());
    CHECK(a.lsd->histogram.weighted_sums == b.lsd->histogram.weighted_sums);
    CHECK(a.lsd->histogram.raw_counts == b.lsd->histogram.raw_counts);
    CHECK(a.lsd->fit.gamma == b.lsd->fit.gamma);
}

TEST_CASE("regime label in the record matches its own classification") {
    const auto r = run_cell(small_cell(0.45, 21, 10, 40));
    CHECK(r.status == CellStatus::ok);
    CHECK(r.regime == classify_regime(r.q, r.beta).label);
}

TEST_CASE("result rows round-trip through csv") {
    const auto r = run_cell(small_cell(0.45, 33, 10, 40));
    const std::string row = result_csv_row(r);
    const auto parsed = parse_result_csv_row(result_csv_header(), row);
    CHECK(result_csv_row(parsed) == row);

    // a rejected cell (empty gamma fields) round-trips too
    const auto rej = run_cell(small_cell(5.0, 5, 4, 30));
    const std::string row2 = result_csv_row(rej);
    CHECK(result_csv_row(parse_result_csv_row(result_csv_header(), row2)) == row2);
}

TEST_CASE("sweep spec parsing") {
    const auto spec = parse_sweep_spec(spec_json("/tmp/out", 3));
    CHECK(spec.master_seed == 9);
    CHECK(spec.options.workers == 2);
    REQUIRE(spec.cells.size() == 3);
    CHECK(spec.cells[0].n_realizations == 10);  // top-level default
    CHECK(spec.cells[2].n_realizations == 8);   // per-cell override
    CHECK(spec.cells[0].master_seed == 9);
    CHECK(spec.cells[1].band == 10);

    CHECK_THROWS_AS(parse_sweep_spec("not json"), Error);
    CHECK_THROWS_AS(parse_sweep_spec("{\"master_seed\": 1}"), Error);
    CHECK_THROWS_AS(parse_sweep_spec("{\"cells\": [{\"q\": 1.0}]}"), Error);
}

TEST_CASE("empty sweep succeeds with an empty table") {
    const auto dir = fresh_dir("empty");
    SweepSpec spec;
    spec.output_dir = dir;
    const auto summary = run_sweep(spec);
    CHECK(summary.exit_code() == 0);
    CHECK(slurp(dir / "results.csv") == result_csv_header() + "\n");
    CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("sweep resume computes only missing cells and matches a fresh run") {
    const auto dir_partial = fresh_dir("resume_partial");
    const auto dir_fresh = fresh_dir("resume_fresh");

    auto two = parse_sweep_spec(spec_json(dir_partial, 2));
    run_sweep(two);
    const auto partial_rows = read_results_csv(dir_partial / "results.csv");
    REQUIRE(partial_rows.size() == 2);

    // completed cell files must not be touched by the resumed run
    std::vector<fs::file_time_type> stamps;
    for (const auto& e : fs::directory_iterator(dir_partial / "cells"))
        stamps.push_back(fs::last_write_time(e.path()));

    auto three = parse_sweep_spec(spec_json(dir_partial, 3));
    const auto resumed = run_sweep(three);
    CHECK(resumed.n_resumed == 2);
    CHECK(resumed.n_ok == 3);

    auto fresh = parse_sweep_spec(spec_json(dir_fresh, 3));
    run_sweep(fresh);
    CHECK(slurp(dir_partial / "results.csv") == slurp(dir_fresh / "results.csv"));

    std::vector<fs::file_time_type> stamps_after;
    for (const auto& e : fs::directory_iterator(dir_partial / "cells"))
        if (std::find(stamps.begin(), stamps.end(), fs::last_write_time(e.path())) != stamps.end())
            stamps_after.push_back(fs::last_write_time(e.path()));
    CHECK(stamps_after.size() == 2);  // the two original files are unmodified
}

TEST_CASE("sweep output is byte-identical across runs and worker counts") {
    const auto dir_a = fresh_dir("det_a");
    const auto dir_b = fresh_dir("det_b");
    auto spec_a = parse_sweep_spec(spec_json(dir_a, 3));
    auto spec_b = parse_sweep_spec(spec_json(dir_b, 3));
    spec_a.options.workers = 1;
    spec_b.options.workers = 8;
    spec_a.options.emit_lsd = spec_b.options.emit_lsd = true;
    spec_a.options.emit_spacing = spec_b.options.emit_spacing = true;
    run_sweep(spec_a);
    run_sweep(spec_b);
    CHECK(slurp(dir_a / "results.csv") == slurp(dir_b / "results.csv"));
    int compared = 0;
    for (const auto& e : fs::directory_iterator(dir_a)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        if (name.rfind("lsd_", 0) == 0 || name.rfind("spacing_", 0) == 0) {
            CHECK(slurp(e.path()) == slurp(dir_b / name));
            ++compared;
        }
    }
    CHECK(compared >= 2);
}

TEST_CASE("lsd csv flags empty bins rather than writing zeros") {
    LsdEstimate h;
    h.window_half_width = 1.0;
    h.rho_e = 1.0;
    h.n_realizations_used = 1;
    const int nb = 8;
    h.bin_edges.resize(nb + 1);
    for (int b = 0; b <= nb; ++b) h.bin_edges[b] = -1.0 + 0.25 * b;
    h.weighted_sums.assign(nb, 0.5);
    h.raw_counts.assign(nb, 1.0);
    h.weighted_sums[3] = 0.0;
    h.raw_counts[3] = 0.0;  // never saw an eigenvalue

    LorentzianFit f;
    f.gamma = 0.4;
    f.amplitude = 1.0;
    const auto file = fs::temp_directory_path() / "brmdd_test_lsd.csv";
    write_lsd_csv(file, h, f);
    std::ifstream is(file);
    std::string line;
    std::getline(is, line);  // header
    int empties = 0, rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        const auto first = line.find(',');
        if (line[first + 1] == ',') ++empties;  // rho_w field left blank
        CHECK(line.find(",0,") == std::string::npos);
    }
    CHECK(rows == nb);
    CHECK(empties == 1);
    fs::remove(file);
}

TEST_CASE("sweep records guard rejections and reports partial failure") {
    const auto dir = fresh_dir("guard");
    SweepSpec spec;
    spec.output_dir = dir;
    spec.master_seed = 4;
    spec.cells.push_back(small_cell(0.3, 4, 6, 30));
    spec.cells.push_back(small_cell(5.0, 4, 6, 30));  // guard violation
    const auto summary = run_sweep(spec);
    CHECK(summary.n_ok == 1);
    CHECK(summary.n_rejected == 1);
    CHECK(summary.exit_code() == 2);
    const auto rows = read_results_csv(dir / "results.csv");
    CHECK(rows[1].status == CellStatus::rejected);
    CHECK(rows[1].version == kVersion);
}
