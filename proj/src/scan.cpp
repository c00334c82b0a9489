#include "braid/scan.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <random>
#include <thread>

#include "braid/errors.hpp"
#include "braid/special_functions.hpp"
#include "braid/surface_response.hpp"

namespace braid {

std::string format_number(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

EnergyBreakdown evaluate_point(const RunConfig& cfg, std::optional<std::pair<ScanParam, double>> ov) {
    const auto [st, ph] = cfg.point(ov);
    return energy_breakdown(st, cfg.charge.build(), ph, cfg.truncation, cfg.approx_level, cfg.dielectric);
}

namespace {

[[noreturn]] void rethrow_annotated(std::exception_ptr e, const std::string& prefix) {
    try {
        std::rethrow_exception(e);
    } catch (const ValidationError& x) {
        throw ValidationError(prefix + x.what());
    } catch (const NonConvergence& x) {
        throw NonConvergence(prefix + x.what());
    } catch (const DomainError& x) {
        throw DomainError(prefix + x.what());
    } catch (const std::exception& x) {
        throw std::runtime_error(prefix + x.what());
    }
}

std::string utc_timestamp(bool compact) {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, compact ? "%Y%m%dT%H%M%SZ" : "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

unsigned worker_count(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

RunRecord run_sweep(const RunConfig& cfg) {
    cfg.validate();
    RunRecord rec;
    rec.config_hash = cfg.hash();
    rec.timestamp = utc_timestamp(false);
    rec.param = cfg.sweep.param;
    const std::vector<double> values = cfg.sweep.values(cfg.template_value(cfg.sweep.param));
    rec.points.resize(values.size());

    const unsigned nt = std::min<unsigned>(worker_count(cfg.threads), static_cast<unsigned>(values.size()));
    std::vector<std::exception_ptr> errors(values.size());
    auto work = [&](std::size_t i) {
        try {
            rec.points[i].value = values[i];
            rec.points[i].energy = evaluate_point(cfg, std::make_pair(cfg.sweep.param, values[i]));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (nt <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i) work(i);
    } else {
        // points handed out in order; each writes only its own slot
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < values.size(); i = next++) work(i);
            });
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < values.size(); ++i)
        if (errors[i])
            rethrow_annotated(errors[i], "sweep point " + std::to_string(i) + " (" + to_string(cfg.sweep.param) +
                                             " = " + format_number(values[i]) + "): ");
    return rec;
}

std::string sweep_csv(const RunRecord& rec) {
    std::string out =
        "index,param,value,e_dir_0,e_dir_1,e_dir_2,e_img1_0,e_img1_1,e_img1_2,e_img1_3,e_img2_0,e_img2_1,e_img2_2,"
        "e_img2_3,total,imag_residual,validity_ratio,incomplete_omega_terms\n";
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
        const SweepPoint& p = rec.points[i];
        const EnergyBreakdown& e = p.energy;
        out += std::to_string(i) + "," + to_string(rec.param) + "," + format_number(p.value);
        for (double v : {e.e_dir_0, e.e_dir_1, e.e_dir_2}) out += "," + format_number(v);
        for (double v : e.e_img1_parts) out += "," + format_number(v);
        for (double v : e.e_img2_parts) out += "," + format_number(v);
        out += "," + format_number(e.total()) + "," + format_number(e.imag_residual) + "," +
               format_number(e.validity_ratio) + "," + (e.incomplete_omega_terms ? "1" : "0") + "\n";
    }
    return out;
}

std::string sweep_plot_data(const RunRecord& rec) {
    struct Column {
        const char* name;
        double (*get)(const EnergyBreakdown&);
    };
    static const Column cols[] = {
        {"e_dir_0", [](const EnergyBreakdown& e) { return e.e_dir_0; }},
        {"e_dir_1", [](const EnergyBreakdown& e) { return e.e_dir_1; }},
        {"e_dir_2", [](const EnergyBreakdown& e) { return e.e_dir_2; }},
        {"e_img1", [](const EnergyBreakdown& e) { return e.e_img1_parts[0] + e.e_img1_parts[1] + e.e_img1_parts[2] + e.e_img1_parts[3]; }},
        {"e_img2", [](const EnergyBreakdown& e) { return e.e_img2_parts[0] + e.e_img2_parts[1] + e.e_img2_parts[2] + e.e_img2_parts[3]; }},
        {"total", [](const EnergyBreakdown& e) { return e.total(); }},
    };
    std::string out;
    bool first = true;
    for (const Column& c : cols) {
        if (!first) out += "\n\n";
        first = false;
        out += std::string("# ") + c.name + " vs " + to_string(rec.param) + "\n";
        for (const SweepPoint& p : rec.points) out += format_number(p.value) + " " + format_number(c.get(p.energy)) + "\n";
    }
    return out;
}

std::string sweep_metadata(const RunRecord& rec, const RunConfig& cfg) {
    double imag = 0.0, validity = 0.0;
    bool incomplete = false;
    for (const SweepPoint& p : rec.points) {
        imag = std::max(imag, p.energy.imag_residual);
        validity = std::max(validity, p.energy.validity_ratio);
        incomplete = incomplete || p.energy.incomplete_omega_terms;
    }
    std::string out;
    out += "config_hash: " + rec.config_hash + "\n";
    out += "timestamp: " + rec.timestamp + "\n";
    out += "approx_level: " + to_string(cfg.approx_level) + "\n";
    out += "sweep_param: " + to_string(rec.param) + "\n";
    out += "points: " + std::to_string(rec.points.size()) + "\n";
    out += "max_imag_residual: " + format_number(imag) + "\n";
    out += "max_validity_ratio: " + format_number(validity) + "\n";
    out += std::string("omega_A3_terms: ") + (incomplete ? "present, not a complete first-order expansion" : "absent") + "\n";
    return out;
}

std::string write_run(const RunRecord& rec, const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path base = fs::path(cfg.output_dir);
    fs::create_directories(base);
    const std::string stem = "run-" + rec.config_hash.substr(0, 12) + "-" + utc_timestamp(true);
    fs::path dir = base / stem;
    for (int k = 2; fs::exists(dir); ++k) dir = base / (stem + "-" + std::to_string(k));
    fs::create_directories(dir);
    auto put = [&](const char* name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        f << text;
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    };
    put("config.txt", cfg.source.empty() ? cfg.canonical() : cfg.source);
    put("sweep.csv", sweep_csv(rec));
    put("sweep.dat", sweep_plot_data(rec));
    put("metadata.txt", sweep_metadata(rec, cfg));
    return dir.string();
}

// ---- minimisation -------------------------------------------------------------

Bounds default_bounds(const RunConfig& cfg, ScanParam p) {
    if (auto it = cfg.minimize.bounds.find(p); it != cfg.minimize.bounds.end()) return it->second;
    switch (p) {
        case ScanParam::Eta: return {0.0, 1.0};
        case ScanParam::R: {
            const double lo = std::max(2.05 * cfg.geometry.a, 1.05 / cfg.physical.kappa_D);
            return {lo, std::max(6.0 / cfg.physical.kappa_D, 2.0 * lo)};
        }
        case ScanParam::XiPhase: return {0.0, 2.0 * std::numbers::pi};
        default: break;
    }
    throw ValidationError("minimisation over " + to_string(p) + " is not supported (free parameters: eta, R, xi_phase)");
}

MinimizeResult minimize_box(const std::function<double(const std::vector<double>&)>& f, const std::vector<Bounds>& box,
                            int max_iter, double tol) {
    const std::size_t d = box.size();
    if (d < 1 || d > 3) throw ValidationError("minimisation needs one to three free parameters");
    if (max_iter < 1 || !(tol > 0.0)) throw ValidationError("minimisation needs max_iter >= 1 and tol > 0");
    MinimizeResult r;
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    auto to_x = [&](const std::vector<double>& u) {
        std::vector<double> x(d);
        for (std::size_t i = 0; i < d; ++i) x[i] = box[i].lo + std::clamp(u[i], 0.0, 1.0) * (box[i].hi - box[i].lo);
        return x;
    };
    auto eval = [&](const std::vector<double>& u) {
        const double v = f(to_x(u));
        ++r.evaluations;
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        return v;
    };
    std::vector<double> best_u(d, 0.5);
    double best = eval(best_u);
    r.trace.push_back({to_x(best_u), best});

    if (d == 1) {
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = 0.0, b = 1.0;
        double c = b - g * (b - a), e = a + g * (b - a);
        double fc = eval({c}), fe = eval({e});
        while (r.iterations < max_iter) {
            if (b - a < tol) {
                r.converged = true;
                break;
            }
            ++r.iterations;
            if (fc < fe) {
                b = e;
                e = c;
                fe = fc;
                c = b - g * (b - a);
                fc = eval({c});
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + g * (b - a);
                fe = eval({e});
            }
            const double u = fc < fe ? c : e, v = std::min(fc, fe);
            if (v < best) {
                best = v;
                best_u = {u};
            }
            r.trace.push_back({to_x(best_u), best});
        }
        if (!r.converged && b - a < tol) r.converged = true;
    } else {
        std::vector<std::vector<double>> s(d + 1, best_u);
        std::vector<double> fs(d + 1);
        fs[0] = best;
        for (std::size_t i = 0; i < d; ++i) {
            s[i + 1][i] += 0.25;
            fs[i + 1] = eval(s[i + 1]);
        }
        auto clamp = [](std::vector<double> u) {
            for (double& x : u) x = std::clamp(x, 0.0, 1.0);
            return u;
        };
        auto diameter = [&] {
            double m = 0.0;
            for (std::size_t i = 0; i <= d; ++i)
                for (std::size_t j = i + 1; j <= d; ++j) {
                    double q = 0.0;
                    for (std::size_t k = 0; k < d; ++k) q += (s[i][k] - s[j][k]) * (s[i][k] - s[j][k]);
                    m = std::max(m, std::sqrt(q));
                }
            return m;
        };
        while (r.iterations < max_iter) {
            std::vector<std::size_t> order(d + 1);
            for (std::size_t i = 0; i <= d; ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return fs[x] < fs[y]; });
            std::vector<std::vector<double>> s2;
            std::vector<double> f2;
            for (std::size_t i : order) {
                s2.push_back(s[i]);
                f2.push_back(fs[i]);
            }
            s = s2;
            fs = f2;
            if (diameter() < tol) {
                r.converged = true;
                break;
            }
            ++r.iterations;
            std::vector<double> cen(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t k = 0; k < d; ++k) cen[k] += s[i][k] / static_cast<double>(d);
            auto along = [&](double t) {
                std::vector<double> u(d);
                for (std::size_t k = 0; k < d; ++k) u[k] = cen[k] + t * (s[d][k] - cen[k]);
                return clamp(u);
            };
            const auto xr = along(-1.0);
            const double fr = eval(xr);
            if (fr < fs[0]) {
                const auto xe = along(-2.0);
                const double fe = eval(xe);
                if (fe < fr) {
                    s[d] = xe;
                    fs[d] = fe;
                } else {
                    s[d] = xr;
                    fs[d] = fr;
                }
            } else if (fr < fs[d - 1]) {
                s[d] = xr;
                fs[d] = fr;
            } else {
                const bool outside = fr < fs[d];
                const auto xc = along(outside ? -0.5 : 0.5);
                const double fc = eval(xc);
                if (fc < (outside ? fr : fs[d])) {
                    s[d] = xc;
                    fs[d] = fc;
                } else {
                    for (std::size_t i = 1; i <= d; ++i) {
                        for (std::size_t k = 0; k < d; ++k) s[i][k] = s[0][k] + 0.5 * (s[i][k] - s[0][k]);
                        fs[i] = eval(s[i]);
                    }
                }
            }
            for (std::size_t i = 0; i <= d; ++i)
                if (fs[i] < best) {
                    best = fs[i];
                    best_u = s[i];
                }
            r.trace.push_back({to_x(best_u), best});
        }
    }
    r.argmin = to_x(best_u);
    r.value = best;
    r.spread = vmax - vmin;
    r.flat = r.spread <= 1e-9 * std::max(std::abs(vmin), std::abs(vmax)) + 1e-15;
    return r;
}

MinimizeResult minimize(const RunConfig& cfg, const std::vector<ScanParam>& free_params) {
    cfg.validate();
    std::vector<Bounds> box;
    for (ScanParam p : free_params) {
        if (p != ScanParam::Eta && p != ScanParam::R && p != ScanParam::XiPhase)
            throw ValidationError("minimisation over " + to_string(p) + " is not supported (free parameters: eta, R, xi_phase)");
        box.push_back(default_bounds(cfg, p));
    }
    for (std::size_t i = 0; i < free_params.size(); ++i)
        for (std::size_t j = i + 1; j < free_params.size(); ++j)
            if (free_params[i] == free_params[j]) throw ValidationError("free parameter listed twice");
    auto f = [&](const std::vector<double>& x) {
        RunConfig c = cfg;
        for (std::size_t i = 0; i < x.size(); ++i) {
            switch (free_params[i]) {
                case ScanParam::Eta: c.geometry.eta = x[i]; break;
                case ScanParam::R: c.geometry.R = x[i]; break;
                case ScanParam::XiPhase: c.geometry.xi1 = c.geometry.xi2 + x[i]; break;
                default: break;
            }
        }
        return evaluate_point(c).total();
    };
    MinimizeResult r = minimize_box(f, box, cfg.minimize.max_iter, cfg.minimize.tol);
    r.params = free_params;
    return r;
}

// ---- figure and identity reports ------------------------------------------------

Fig1Data fig1_curves(double a_kappa, double range, int points) {
    if (!(a_kappa > 0.0) || !(range > 0.0) || points < 2) throw ValidationError("fig1 needs a_kappa > 0, range > 0, points >= 2");
    Fig1Data d;
    d.a_kappa = a_kappa;
    d.curves.assign(4, {});
    for (int i = 0; i < points; ++i) {
        const double x = -range + 2.0 * range * i / (points - 1);
        d.a_kz.push_back(x);
        for (int l = 0; l < 4; ++l) d.curves[l].push_back(zeta_surf0(l, x, 1.0, a_kappa));
    }
    return d;
}

std::string fig1_csv(const Fig1Data& d) {
    std::string out = "a_kz,l0,l1,l2,l3\n";
    for (std::size_t i = 0; i < d.a_kz.size(); ++i) {
        out += format_number(d.a_kz[i]);
        for (int l = 0; l < 4; ++l) out += "," + format_number(d.curves[l][i]);
        out += "\n";
    }
    return out;
}

std::vector<IdentityResult> run_identity_suite(unsigned seed) {
    std::mt19937_64 rng(seed);
    auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto N = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::vector<IdentityResult> out;
    const double two_pi = 2.0 * std::numbers::pi;

    IdentityResult add{"addition_formula", 0, 0.0, 1e-10};
    for (int i = 0; i < 100; ++i) {
        const double aK = U(0.05, 4.0), eta = U(0.0, 1.5), xi = U(0.0, two_pi);
        const int m = N(-4, 4);
        add.max_residual = std::max({add.max_residual, sf::graf_addition_residual(aK, eta, xi, m, 40),
                                     sf::graf_addition_residual_rod1(aK, eta, xi, m, 40)});
        ++add.draws;
    }
    out.push_back(add);

    IdentityResult ja{"jacobi_anger", 0, 0.0, 1e-10};
    for (int i = 0; i < 100; ++i) {
        ja.max_residual = std::max(ja.max_residual, sf::jacobi_anger_residual(U(-5.0, 5.0), U(0.0, two_pi), 40));
        ++ja.draws;
    }
    out.push_back(ja);

    IdentityResult wr{"wronskian_recurrence", 0, 0.0, 1e-10};
    for (int i = 0; i < 1000; ++i) {
        const int n = N(0, 30);
        const double x = std::exp(U(std::log(0.05), std::log(40.0)));
        wr.max_residual = std::max({wr.max_residual, sf::wronskian_recurrence_residual(n, x), sf::cross_wronskian_residual(n, x)});
        ++wr.draws;
    }
    out.push_back(wr);

    IdentityResult kp{"k_prime_elimination", 0, 0.0, 1e-10};
    for (int i = 0; i < 100; ++i) {
        const double a = U(0.2, 1.5);
        kp.max_residual = std::max(kp.max_residual, identity_10_13_check(N(-4, 4), N(-4, 4), a, U(2.0 * a + 0.1, 6.0), U(0.3, 2.0)));
        ++kp.draws;
    }
    out.push_back(kp);

    IdentityResult om{"image_tilt_sum_forms", 0, 0.0, 1e-9};
    Truncation tr;
    for (int n = 0; n <= 3; ++n)
        for (double x : {3.0, 5.0, 8.0})
            for (double y : {1.0, 2.0, 4.0}) {
                ++om.draws;
                try {
                    om.max_residual = std::max(om.max_residual, omega_tilde_table(n, x, y, tr).residual);
                } catch (const NonConvergence&) {
                    om.max_residual = std::numeric_limits<double>::infinity();
                }
            }
    out.push_back(om);
    return out;
}

}  // namespace braid
