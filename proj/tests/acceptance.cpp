// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Usage: acceptance <path to braidscan>

#include <array>
#include <boost/math/special_functions/bessel.hpp>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "braid/charge_model.hpp"
#include "braid/energy_dielectric.hpp"
#include "braid/energy_nocore.hpp"
#include "braid/geometry.hpp"
#include "braid/oracle.hpp"
#include "braid/scan.hpp"

using namespace braid;
namespace fs = std::filesystem;
namespace bm = boost::math;

namespace {

constexpr double pi = std::numbers::pi;
int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, const char* what, bool ok, const std::string& details) {
    std::printf("%s criterion %2d: %s\n%s", ok ? "PASS" : "FAIL", id, what, details.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

__attribute__((format(printf, 1, 2))) std::string line(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return std::string("    ") + buf + "\n";
}

void guarded(int id, const char* what, const std::function<bool(std::string&)>& body) {
    std::string details;
    bool ok = false;
    try {
        ok = body(details);
    } catch (const std::exception& e) {
        details += line("exception: %s", e.what());
    }
    report(id, what, ok, details);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_command(const std::string& cmd, std::string& out) {
    out.clear();
    FILE* p = popen((cmd + " 2>&1").c_str(), "r");
    if (!p) return -1;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
    const int rc = pclose(p);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

BraidState straight_braid(double R, double a, double eta, double w3 = 0.0, double rate = 1.0) {
    BraidState s = BraidState::make(R, a, eta, w3);
    s.dxi1_ds = s.dxi2_ds = rate;
    return s;
}

Truncation matched(int c) {
    Truncation t;
    t.n_cap = t.m_cap = t.j_cap = t.l_cap = t.np_cap = c;
    return t;
}

const IdentityResult* find(const std::vector<IdentityResult>& v, const std::string& name) {
    for (const auto& r : v)
        if (r.name == name) return &r;
    return nullptr;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <braidscan>\n");
        return 2;
    }
    const std::string exe = argv[1];
    const fs::path work = fs::temp_directory_path() / "braid_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    guarded(1, "line-charge limit of the no-core mode sum", [&](std::string& d) {
        const auto t0 = std::chrono::steady_clock::now();
        const double e = mean_density_nocore(straight_braid(3.0, 0.0, 0.0), {}, {});
        const double dt = seconds_since(t0);
        const double ref = 2.0 * bm::cyl_bessel_k(0, 3.0);
        const double rel = std::abs(e - ref) / ref;
        d += line("mode sum %.15g, 2 K0(3) = %.15g, relative error %.2e, %.3f s", e, ref, rel, dt);
        return rel < 1e-8 && dt < 1.0;
    });

    guarded(2, "no-core mode sum against point-pair summation", [&](std::string& d) {
        const auto t0 = std::chrono::steady_clock::now();
        const OracleSampling samp{60.0, 0.02};
        bool ok = true;
        d += line("%6s %5s %5s %14s %14s %10s %14s %10s", "kR", "ka", "eta", "mode sum", "exact pairs", "deviation",
                  "chord pairs", "deviation");
        for (double R : {2.5, 3.0, 4.0})
            for (double a : {0.5, 1.0})
                for (double deg : {10.0, 20.0, 30.0}) {
                    const OracleReport r = compare_with_oracle(straight_braid(R, a, deg * pi / 180.0), {}, {}, samp);
                    const bool pass = r.relative_deviation < 0.01;
                    ok = ok && pass;
                    d += line("%6.2f %5.2f %5.0f %14.8g %14.8g %10.2e %14.8g %10.2e%s", R, a, deg, r.mode_sum, r.brute_force,
                              r.relative_deviation, r.local_chord, r.local_deviation, pass ? "" : "  <-- above 1%");
                }
        const double dt = seconds_since(t0);
        d += line("total %.1f s (limit 300 s)", dt);
        return ok && dt < 300.0;
    });

    const auto t_ids = std::chrono::steady_clock::now();
    const std::vector<IdentityResult> ids = run_identity_suite();
    const double dt_ids = seconds_since(t_ids);
    auto suite = [&](std::string& d, const std::string& name, int min_draws) {
        const IdentityResult* r = find(ids, name);
        if (!r) {
            d += line("suite %s missing", name.c_str());
            return false;
        }
        d += line("%s: %d draws, max residual %.2e, tolerance %.0e", name.c_str(), r->draws, r->max_residual, r->tolerance);
        return r->pass() && r->draws >= min_draws;
    };

    guarded(3, "addition-formula suite", [&](std::string& d) {
        const bool ok = suite(d, "addition_formula", 100);
        d += line("all suites %.3f s", dt_ids);
        return ok && dt_ids < 10.0;
    });

    guarded(4, "Wronskian and recurrence suite", [&](std::string& d) {
        return suite(d, "wronskian_recurrence", 1000) && dt_ids < 5.0;
    });

    guarded(5, "K'-elimination identity and the two image-tilt sum forms", [&](std::string& d) {
        const bool a = suite(d, "k_prime_elimination", 100);
        const bool b = suite(d, "image_tilt_sum_forms", 36);
        return a && b && dt_ids < 10.0;
    });

    guarded(6, "frame reconstruction drift", [&](std::string& d) {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> R(2.5, 4.0), eta(0.1, 0.6), w3(-0.05, 0.05);
        bool ok = true;
        for (int i = 0; i < 5; ++i) {
            const BraidState st = BraidState::make(R(rng), 1.0, eta(rng), w3(rng));
            const BraidFrequencies w = rod_frequencies(st);
            const FrameSet f0 = frame_set(EulerAngles::make(0, 0, 0), tilts_from_state(st.eta, st.omegaA[2], st.R));
            IntegrationOptions opt;
            opt.R = st.R;
            opt.drift_tolerance = 1.0;  // report rather than throw
            const FrameTrajectory tr = integrate_frames(f0, [&](double) { return w; }, 10.0, 1e-3, opt);
            const double rel = tr.max_separation_drift / st.R;
            ok = ok && rel < 1e-6;
            d += line("R %.3f eta %.3f w_A3 %+.4f: drift / R = %.2e", st.R, st.eta, st.omegaA[2], rel);
        }
        const double dt = seconds_since(t0);
        d += line("%.2f s", dt);
        return ok && dt < 10.0;
    });

    guarded(7, "approximation ladder", [&](std::string& d) {
        const auto t0 = std::chrono::steady_clock::now();
        const ChargeModel ch = ChargeModel::single_helix();
        const Truncation tr = matched(8);
        const BraidState st = straight_braid(3.0, 1.0, 0.3);
        const EnergyBreakdown full = energy_breakdown(st, ch, {}, tr, ApproxLevel::Full);
        const EnergyBreakdown diag = energy_breakdown(st, ch, {}, tr, ApproxLevel::Diagonal);
        const double rel = std::abs(diag.total() - full.total()) / std::abs(full.total());
        d += line("equal phase rates, eta 0.3: full %.15g, diagonal %.15g, relative %.2e", full.total(), diag.total(), rel);
        std::vector<double> x, y;
        for (double eta : {0.05, 0.1, 0.2}) {
            const double g = energy_breakdown(straight_braid(3.0, 1.0, eta), ch, {}, tr, ApproxLevel::Diagonal).total();
            const double s = energy_breakdown(straight_braid(3.0, 1.0, eta), ch, {}, tr, ApproxLevel::SmallAngle).total();
            const double diff = std::abs(s - g) / std::abs(g);
            d += line("eta %.2f: |small angle - diagonal| / |diagonal| = %.3e", eta, diff);
            x.push_back(std::log(std::sin(eta)));
            y.push_back(std::log(diff));
        }
        const double mx = (x[0] + x[1] + x[2]) / 3.0, my = (y[0] + y[1] + y[2]) / 3.0;
        double sxy = 0.0, sxx = 0.0;
        for (int i = 0; i < 3; ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
        const double slope = sxy / sxx;
        const double dt = seconds_since(t0);
        d += line("fitted exponent in sin(eta): %.4f; %.1f s", slope, dt);
        return rel < 1e-10 && slope >= 1.8 && slope <= 2.2 && dt < 120.0;
    });

    guarded(8, "transparent cores collapse onto the no-core energy", [&](std::string& d) {
        const ChargeModel ch = ChargeModel::dna({0.7, 0.3, 0.3, 0.4 * pi});
        const Truncation tr = matched(4);
        DielectricOptions opt;
        opt.core = CoreModel::Transparent;
        bool ok = true;
        // the diagonal level drops cross modes unless the rods are symmetric, so it is checked on a symmetric braid
        for (auto [lvl, w3] : {std::pair{ApproxLevel::Full, 0.03}, std::pair{ApproxLevel::Diagonal, 0.0}}) {
            BraidState st = straight_braid(3.0, 1.0, 0.3, w3);
            st.xi1 = 0.5;
            const EnergyBreakdown e = energy_breakdown(st, ch, {}, tr, lvl, opt);
            const double nocore = mean_density_nocore(st, {}, tr, &ch);
            const double rel = std::abs(e.direct() - nocore) / std::abs(nocore);
            bool zero = true;
            for (int k = 0; k < 4; ++k) zero = zero && e.e_img1_parts[k] == 0.0 && e.e_img2_parts[k] == 0.0;
            d += line("%s, w_A3 %.2f: direct %.15g, no-core %.15g, relative %.2e, images %s", to_string(lvl).c_str(), w3, e.direct(), nocore,
                      rel, zero ? "exactly zero" : "nonzero");
            ok = ok && rel < 1e-10 && zero;
        }
        return ok;
    });

    guarded(9, "self-dressing factor curves", [&](std::string& d) {
        std::string out;
        const fs::path dir = work / "fig1";
        const int rc = run_command(exe + " fig1 --a-kappa 2 --range 50 --points 1001 --out " + dir.string(), out);
        if (rc != 0) {
            d += line("fig1 exited with %d: %s", rc, out.c_str());
            return false;
        }
        std::istringstream csv(slurp(dir / "fig1.csv"));
        std::string row;
        std::getline(csv, row);
        std::vector<std::array<double, 5>> rows;
        while (std::getline(csv, row)) {
            std::array<double, 5> v{};
            std::istringstream rs(row);
            std::string cell;
            for (double& c : v) {
                std::getline(rs, cell, ',');
                c = std::stod(cell);
            }
            rows.push_back(v);
        }
        if (rows.size() != 1001) {
            d += line("expected 1001 rows, got %zu", rows.size());
            return false;
        }
        const double closed = 1.0 / (2.0 * bm::cyl_bessel_i(0, 2.0) * bm::cyl_bessel_k(1, 2.0));
        const double at0 = rows[500][1];
        const bool centre = rows[500][0] == 0.0 && std::abs(at0 - closed) < 1e-6;
        d += line("order 0 at k_z = 0: %.13f, closed form %.13f, difference %.1e", at0, closed, std::abs(at0 - closed));
        d += line("quoted approximate value 1.56812 differs from the closed form by %.1e", std::abs(closed - 1.56812));
        bool tails = true;
        for (int l = 0; l < 4; ++l)
            for (std::size_t i : {std::size_t{0}, rows.size() - 1}) {
                const double gap = std::abs(rows[i][l + 1] - 2.0);
                tails = tails && gap < 1e-3;
                d += line("order %d at a k_z = %+.0f: %.10f, |value - 2| = %.4e%s", l, rows[i][0], rows[i][l + 1], gap,
                          gap < 1e-3 ? "" : "  <-- above 1e-3");
            }
        d += line("the gap to 2 falls like 1/(a |k_z|): 0.02 at a |k_z| = 50, below 1e-3 only beyond 1000");
        return centre && tails;
    });

    guarded(10, "DNA charge spectrum", [&](std::string& d) {
        bool ok = true;
        for (const DnaParams p : {DnaParams{0.7, 0.3, 0.3, 0.4 * pi}, DnaParams{0.85, 0.1, 0.6, 0.35 * pi},
                                  DnaParams{0.5, 0.0, 1.0, 0.45 * pi}}) {
            const ChargeModel closed = ChargeModel::dna(p, 8);
            const ChargeModel quad = coefficients_from_radial(dna_distribution(p), 8);
            double worst = 0.0;
            for (int n = -8; n <= 8; ++n) worst = std::max(worst, std::abs(closed.zeta(n) - quad.zeta(n)));
            const bool z0 = closed.zeta(0) == p.theta - 1.0;
            d += line("theta %.2f f1 %.2f f2 %.2f: zeta_0 %s theta - 1, max |closed - quadrature| %.2e", p.theta, p.f1, p.f2,
                      z0 ? "==" : "!=", worst);
            ok = ok && z0 && worst < 1e-10;
        }
        return ok;
    });

    guarded(11, "sweeps are reproducible byte for byte", [&](std::string& d) {
        const fs::path cfg = work / "sweep.cfg";
        std::ofstream(cfg) << "physical.kappa_D = 1\ngeometry.R = 3\ngeometry.a = 1\n"
                              "charge.model = dna\ncharge.theta = 0.7\ncharge.f1 = 0.3\ncharge.f2 = 0.3\ncharge.phi_s = 1.2\n"
                              "sweep.param = eta\nsweep.min = 0\nsweep.max = 0.4\nsweep.count = 6\n"
                              "truncation.n_cap = 4\ntruncation.m_cap = 3\ntruncation.j_cap = 3\n";
        std::vector<std::string> csv;
        for (const char* threads : {"0", "1"}) {
            std::string out;
            const int rc = run_command(exe + " sweep " + cfg.string() + " --threads " + threads + " --out " + (work / "runs").string(), out);
            const auto at = out.find("run directory: ");
            if (rc != 0 || at == std::string::npos) {
                d += line("sweep exited with %d: %s", rc, out.c_str());
                return false;
            }
            const std::string dir = out.substr(at + 15, out.find('\n', at) - at - 15);
            csv.push_back(slurp(fs::path(dir) / "sweep.csv"));
            d += line("run %s: %zu bytes", dir.c_str(), csv.back().size());
        }
        return !csv[0].empty() && csv[0] == csv[1];
    });

    fs::remove_all(work);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
