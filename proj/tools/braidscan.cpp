// braidscan: sweeps, minimisation, oracle comparison, the surface-response
// figure and the identity suites from the command line.
//
// Exit codes: 0 success, 1 an identity check failed, 2 invalid input,
// 3 numerical non-convergence.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "braid/config.hpp"
#include "braid/errors.hpp"
#include "braid/oracle.hpp"
#include "braid/scan.hpp"

namespace {

using namespace braid;

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
}

int cmd_sweep(const std::string& path, const std::string& out_dir, int threads) {
    RunConfig cfg = load_config(path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (threads >= 0) cfg.threads = threads;
    const RunRecord rec = run_sweep(cfg);
    const std::string dir = write_run(rec, cfg);
    std::cout << "run directory: " << dir << "\n"
              << "points: " << rec.points.size() << "  approx_level: " << to_string(cfg.approx_level) << "\n";
    std::size_t best = 0;
    for (std::size_t i = 1; i < rec.points.size(); ++i)
        if (rec.points[i].energy.total() < rec.points[best].energy.total()) best = i;
    std::cout << "lowest total: " << format_number(rec.points[best].energy.total()) << " at " << to_string(rec.param)
              << " = " << format_number(rec.points[best].value) << "\n";
    for (const SweepPoint& p : rec.points)
        if (p.energy.incomplete_omega_terms) {
            std::cout << "note: omega_A3 terms present; the small-angle energy is not a complete first-order expansion in them\n";
            break;
        }
    return 0;
}

int cmd_minimize(const std::string& path, const std::string& free, const std::string& trace_path) {
    const RunConfig cfg = load_config(path);
    std::vector<ScanParam> params;
    std::stringstream ss(free);
    for (std::string tok; std::getline(ss, tok, ',');) {
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (!tok.empty()) params.push_back(parse_scan_param(tok));
    }
    const MinimizeResult r = minimize(cfg, params);
    for (std::size_t i = 0; i < params.size(); ++i) std::cout << to_string(params[i]) << " = " << format_number(r.argmin[i]) << "\n";
    std::cout << "total = " << format_number(r.value) << "\n"
              << "iterations = " << r.iterations << "  evaluations = " << r.evaluations << "\n"
              << "converged = " << (r.converged ? "yes" : "no") << "\n"
              << "flat = " << (r.flat ? "yes" : "no") << "  spread = " << format_number(r.spread) << "\n";
    if (!trace_path.empty()) {
        std::string csv = "iteration";
        for (ScanParam p : params) csv += "," + to_string(p);
        csv += ",total\n";
        for (std::size_t i = 0; i < r.trace.size(); ++i) {
            csv += std::to_string(i);
            for (double x : r.trace[i].x) csv += "," + format_number(x);
            csv += "," + format_number(r.trace[i].value) + "\n";
        }
        write_file(trace_path, csv);
    }
    return 0;
}

int cmd_oracle(const std::string& path, const std::string& out_path) {
    const RunConfig cfg = load_config(path);
    cfg.validate();
    const std::vector<double> values = cfg.sweep.values(cfg.template_value(cfg.sweep.param));
    std::string csv = "index,param,value,mode_sum,brute_force,relative_deviation,local_chord,local_deviation\n";
    double worst = 0.0, worst_local = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto [st, ph] = cfg.point(std::make_pair(cfg.sweep.param, values[i]));
        const OracleReport rep = compare_with_oracle(st, ph, cfg.truncation, cfg.oracle);
        csv += std::to_string(i) + "," + to_string(cfg.sweep.param) + "," + format_number(values[i]) + "," +
               format_number(rep.mode_sum) + "," + format_number(rep.brute_force) + "," +
               format_number(rep.relative_deviation) + "," + format_number(rep.local_chord) + "," +
               format_number(rep.local_deviation) + "\n";
        worst = std::max(worst, std::abs(rep.relative_deviation));
        worst_local = std::max(worst_local, std::abs(rep.local_deviation));
    }
    if (out_path.empty())
        std::cout << csv;
    else
        write_file(out_path, csv);
    std::cerr << "points: " << values.size() << "\n"
              << "max relative deviation (exact geometry): " << format_number(worst) << "\n"
              << "max relative deviation (straight chord): " << format_number(worst_local) << "\n";
    return 0;
}

int cmd_fig1(double a_kappa, const std::string& out, double range, int points) {
    const Fig1Data d = fig1_curves(a_kappa, range, points);
    std::filesystem::create_directories(out);
    const std::filesystem::path dir(out);
    write_file(dir / "fig1.csv", fig1_csv(d));
    std::string dat;
    for (int l = 0; l < 4; ++l) {
        if (l) dat += "\n\n";
        dat += "# l = " + std::to_string(l) + ", a kappa_D = " + format_number(a_kappa) + "\n";
        for (std::size_t i = 0; i < d.a_kz.size(); ++i)
            dat += format_number(d.a_kz[i]) + " " + format_number(d.curves[l][i]) + "\n";
    }
    write_file(dir / "fig1.dat", dat);
    std::cout << "wrote " << (dir / "fig1.csv").string() << " and " << (dir / "fig1.dat").string() << "\n";
    return 0;
}

int cmd_identities(unsigned seed) {
    bool ok = true;
    std::printf("%-24s %6s %14s %10s  %s\n", "suite", "draws", "max residual", "tolerance", "result");
    for (const IdentityResult& r : run_identity_suite(seed)) {
        std::printf("%-24s %6d %14.3e %10.1e  %s\n", r.name.c_str(), r.draws, r.max_residual, r.tolerance,
                    r.pass() ? "PASS" : "FAIL");
        ok = ok && r.pass();
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Electrostatic energy of two braided helical rods"};
    app.require_subcommand(1);

    std::string config, out_dir, free_params = "eta", trace, oracle_out, fig_out = "fig1";
    int threads = -1, points = 401;
    double a_kappa = 2.0, range = 10.0;
    unsigned seed = 20240611u;

    auto* sweep = app.add_subcommand("sweep", "evaluate the energy along the configured sweep and write a run directory");
    sweep->add_option("config", config, "config file")->required();
    sweep->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sweep->add_option("--threads", threads, "worker threads, 0 = all cores");

    auto* mini = app.add_subcommand("minimize", "minimise the total energy over free parameters");
    mini->add_option("config", config, "config file")->required();
    mini->add_option("--free", free_params, "comma-separated subset of eta,R,xi_phase");
    mini->add_option("--trace", trace, "write the iteration trace as CSV");

    auto* orc = app.add_subcommand("oracle", "compare the no-core mode sum with point-pair summation");
    orc->add_option("config", config, "config file")->required();
    orc->add_option("--out", oracle_out, "CSV file (default: stdout)");

    auto* fig = app.add_subcommand("fig1", "self-dressing factor curves for orders 0..3");
    fig->add_option("--a-kappa", a_kappa, "a kappa_D");
    fig->add_option("--out", fig_out, "output directory");
    fig->add_option("--range", range, "a k_z runs over [-range, range]");
    fig->add_option("--points", points, "samples per curve");

    auto* ids = app.add_subcommand("identities", "run the special-function identity suites");
    ids->add_option("--seed", seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sweep) return cmd_sweep(config, out_dir, threads);
        if (*mini) return cmd_minimize(config, free_params, trace);
        if (*orc) return cmd_oracle(config, oracle_out);
        if (*fig) return cmd_fig1(a_kappa, fig_out, range, points);
        if (*ids) return cmd_identities(seed);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
