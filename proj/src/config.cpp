#include "braid/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "braid/errors.hpp"

namespace braid {

std::string to_string(ScanParam p) {
    switch (p) {
        case ScanParam::Eta: return "eta";
        case ScanParam::R: return "R";
        case ScanParam::KappaD: return "kappa_D";
        case ScanParam::OmegaA3: return "omega_A3";
        case ScanParam::XiPhase: return "xi_phase";
    }
    return "eta";
}

ScanParam parse_scan_param(const std::string& s) {
    for (ScanParam p : {ScanParam::Eta, ScanParam::R, ScanParam::KappaD, ScanParam::OmegaA3, ScanParam::XiPhase})
        if (s == to_string(p)) return p;
    throw ValidationError("unknown scan parameter '" + s + "' (expected eta, R, kappa_D, omega_A3 or xi_phase)");
}

ChargeModel ChargeSpec::build() const {
    switch (kind) {
        case ChargeModel::Kind::SingleHelix: return ChargeModel::single_helix(n_max);
        case ChargeModel::Kind::Dna: return ChargeModel::dna(dna, n_max);
        case ChargeModel::Kind::Table: return ChargeModel::from_table(table);
    }
    return ChargeModel::single_helix(n_max);
}

std::vector<double> SweepAxis::values(double template_value) const {
    if (!given) return {template_value};
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[i] = count == 1 ? min : min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
}

namespace {

std::string fmt17(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& where) {
    double x = 0.0;
    const char* end = v.data() + v.size();
    auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(x))
        throw ValidationError(where + ": expected a finite number, got '" + v + "'");
    return x;
}

int parse_int(const std::string& v, const std::string& where) {
    int x = 0;
    const char* end = v.data() + v.size();
    auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc() || r.ptr != end) throw ValidationError(where + ": expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

const char* kind_name(ChargeModel::Kind k) {
    switch (k) {
        case ChargeModel::Kind::SingleHelix: return "single_helix";
        case ChargeModel::Kind::Dna: return "dna";
        case ChargeModel::Kind::Table: return "table";
    }
    return "single_helix";
}

}  // namespace

Bounds parse_bounds(const std::string& value) {
    const auto comma = value.find(',');
    if (comma == std::string::npos) throw ValidationError("bounds must be written 'lo, hi', got '" + value + "'");
    Bounds b;
    b.lo = parse_double(trim(value.substr(0, comma)), "lower bound");
    b.hi = parse_double(trim(value.substr(comma + 1)), "upper bound");
    if (!(b.hi > b.lo)) throw ValidationError("bounds need lo < hi");
    return b;
}

double RunConfig::template_value(ScanParam p) const {
    switch (p) {
        case ScanParam::Eta: return geometry.eta;
        case ScanParam::R: return geometry.R;
        case ScanParam::KappaD: return physical.kappa_D;
        case ScanParam::OmegaA3: return geometry.omega_A3;
        case ScanParam::XiPhase: return geometry.xi1 - geometry.xi2;
    }
    return 0.0;
}

std::pair<BraidState, PhysicalParams> RunConfig::point(std::optional<std::pair<ScanParam, double>> ov) const {
    GeometrySpec g = geometry;
    PhysicalParams ph = physical;
    if (ov) {
        const double v = ov->second;
        switch (ov->first) {
            case ScanParam::Eta: g.eta = v; break;
            case ScanParam::R: g.R = v; break;
            case ScanParam::KappaD: ph.kappa_D = v; break;
            case ScanParam::OmegaA3: g.omega_A3 = v; break;
            case ScanParam::XiPhase: g.xi1 = g.xi2 + v; break;
        }
    }
    if (!(g.R > 2.0 * g.a)) throw ValidationError("non-penetrating rods require R > 2a");
    BraidState st = BraidState::make(g.R, g.a, g.eta, g.omega_A3, g.omega_A2);
    st.xi1 = g.xi1;
    st.xi2 = g.xi2;
    st.dxi1_ds = g.dxi1_ds.value_or(ph.omega_xi);
    st.dxi2_ds = g.dxi2_ds.value_or(ph.omega_xi);
    return {st, ph};
}

void RunConfig::validate() const {
    physical.validate();
    truncation.validate();
    if (!(geometry.a > 0.0)) throw ValidationError("geometry.a must be positive");
    if (charge.kind == ChargeModel::Kind::Dna) charge.dna.validate();
    if (charge.kind == ChargeModel::Kind::Table && charge.table.empty())
        throw ValidationError("charge.model = table needs at least one charge.zeta.<n> entry");
    if (sweep.given && sweep.count < 1) throw ValidationError("sweep.count must be at least 1");
    if (sweep.given && sweep.count > 1 && !(sweep.max > sweep.min))
        throw ValidationError("sweep.max must exceed sweep.min");
    if (threads < 0) throw ValidationError("output.threads must be non-negative");
    if (!(oracle.length > 0.0) || !(oracle.ds > 0.0)) throw ValidationError("oracle sampling must be positive");

    auto check = [&](std::optional<std::pair<ScanParam, double>> ov) {
        const auto [st, ph] = point(ov);
        st.validate();
        ph.validate();
        if (dielectric.core == CoreModel::Dielectric) {
            if (!(ph.kappa_D * st.R > 1.0)) throw ValidationError("image expansion needs kappa_D R > 1");
        }
    };
    if (sweep.given)
        for (double v : sweep.values(template_value(sweep.param))) check(std::make_pair(sweep.param, v));
    else
        check(std::nullopt);
    for (const auto& [p, b] : minimize.bounds) {
        check(std::make_pair(p, b.lo));
        check(std::make_pair(p, b.hi));
    }
}

std::string RunConfig::canonical() const {
    std::map<std::string, std::string> kv;
    kv["physical.kappa_D"] = fmt17(physical.kappa_D);
    kv["physical.prefactor"] = fmt17(physical.prefactor);
    kv["physical.omega_xi"] = fmt17(physical.omega_xi);
    kv["geometry.R"] = fmt17(geometry.R);
    kv["geometry.a"] = fmt17(geometry.a);
    kv["geometry.eta"] = fmt17(geometry.eta);
    kv["geometry.omega_A3"] = fmt17(geometry.omega_A3);
    kv["geometry.omega_A2"] = fmt17(geometry.omega_A2);
    kv["geometry.xi1"] = fmt17(geometry.xi1);
    kv["geometry.xi2"] = fmt17(geometry.xi2);
    kv["geometry.dxi1_ds"] = geometry.dxi1_ds ? fmt17(*geometry.dxi1_ds) : "default";
    kv["geometry.dxi2_ds"] = geometry.dxi2_ds ? fmt17(*geometry.dxi2_ds) : "default";
    kv["charge.model"] = kind_name(charge.kind);
    kv["charge.n_max"] = std::to_string(charge.n_max);
    if (charge.kind == ChargeModel::Kind::Dna) {
        kv["charge.theta"] = fmt17(charge.dna.theta);
        kv["charge.f1"] = fmt17(charge.dna.f1);
        kv["charge.f2"] = fmt17(charge.dna.f2);
        kv["charge.phi_s"] = fmt17(charge.dna.phi_s);
    }
    for (const auto& [n, z] : charge.table) kv["charge.zeta." + std::to_string(n)] = fmt17(z);
    if (sweep.given) {
        kv["sweep.param"] = to_string(sweep.param);
        kv["sweep.min"] = fmt17(sweep.min);
        kv["sweep.max"] = fmt17(sweep.max);
        kv["sweep.count"] = std::to_string(sweep.count);
    }
    kv["model.approx_level"] = to_string(approx_level);
    kv["model.core"] = dielectric.core == CoreModel::Dielectric ? "dielectric" : "transparent";
    kv["model.averaging"] = dielectric.averaging == Averaging::Braid ? "braid" : "local";
    kv["truncation.n_cap"] = std::to_string(truncation.n_cap);
    kv["truncation.m_cap"] = std::to_string(truncation.m_cap);
    kv["truncation.j_cap"] = std::to_string(truncation.j_cap);
    kv["truncation.l_cap"] = std::to_string(truncation.l_cap);
    kv["truncation.np_cap"] = std::to_string(truncation.np_cap);
    kv["truncation.series_tol"] = fmt17(truncation.series_tol);
    for (const auto& [p, b] : minimize.bounds) kv["minimize." + to_string(p)] = fmt17(b.lo) + ", " + fmt17(b.hi);
    kv["minimize.max_iter"] = std::to_string(minimize.max_iter);
    kv["minimize.tol"] = fmt17(minimize.tol);
    kv["oracle.length"] = fmt17(oracle.length);
    kv["oracle.ds"] = fmt17(oracle.ds);
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::string RunConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    cfg.source = text;
    std::set<std::string> seen;
    bool have_min = false, have_max = false, have_param = false;

    using Setter = std::function<void(const std::string&, const std::string&)>;
    auto num = [](double& target) -> Setter {
        return [&target](const std::string& v, const std::string& w) { target = parse_double(v, w); };
    };
    auto integer = [](int& target) -> Setter {
        return [&target](const std::string& v, const std::string& w) { target = parse_int(v, w); };
    };
    std::map<std::string, Setter> setters = {
        {"physical.kappa_D", num(cfg.physical.kappa_D)},
        {"physical.prefactor", num(cfg.physical.prefactor)},
        {"physical.omega_xi", num(cfg.physical.omega_xi)},
        {"geometry.R", num(cfg.geometry.R)},
        {"geometry.a", num(cfg.geometry.a)},
        {"geometry.eta", num(cfg.geometry.eta)},
        {"geometry.omega_A3", num(cfg.geometry.omega_A3)},
        {"geometry.omega_A2", num(cfg.geometry.omega_A2)},
        {"geometry.xi1", num(cfg.geometry.xi1)},
        {"geometry.xi2", num(cfg.geometry.xi2)},
        {"geometry.dxi1_ds", [&](const std::string& v, const std::string& w) { cfg.geometry.dxi1_ds = parse_double(v, w); }},
        {"geometry.dxi2_ds", [&](const std::string& v, const std::string& w) { cfg.geometry.dxi2_ds = parse_double(v, w); }},
        {"charge.model",
         [&](const std::string& v, const std::string& w) {
             if (v == "single_helix") cfg.charge.kind = ChargeModel::Kind::SingleHelix;
             else if (v == "dna") cfg.charge.kind = ChargeModel::Kind::Dna;
             else if (v == "table") cfg.charge.kind = ChargeModel::Kind::Table;
             else throw ValidationError(w + ": expected single_helix, dna or table, got '" + v + "'");
         }},
        {"charge.theta", num(cfg.charge.dna.theta)},
        {"charge.f1", num(cfg.charge.dna.f1)},
        {"charge.f2", num(cfg.charge.dna.f2)},
        {"charge.phi_s", num(cfg.charge.dna.phi_s)},
        {"charge.n_max", integer(cfg.charge.n_max)},
        {"sweep.param",
         [&](const std::string& v, const std::string&) {
             cfg.sweep.param = parse_scan_param(v);
             have_param = true;
         }},
        {"sweep.min",
         [&](const std::string& v, const std::string& w) {
             cfg.sweep.min = parse_double(v, w);
             have_min = true;
         }},
        {"sweep.max",
         [&](const std::string& v, const std::string& w) {
             cfg.sweep.max = parse_double(v, w);
             have_max = true;
         }},
        {"sweep.count", integer(cfg.sweep.count)},
        {"model.approx_level", [&](const std::string& v, const std::string&) { cfg.approx_level = parse_approx_level(v); }},
        {"model.core",
         [&](const std::string& v, const std::string& w) {
             if (v == "dielectric") cfg.dielectric.core = CoreModel::Dielectric;
             else if (v == "transparent") cfg.dielectric.core = CoreModel::Transparent;
             else throw ValidationError(w + ": expected dielectric or transparent, got '" + v + "'");
         }},
        {"model.averaging",
         [&](const std::string& v, const std::string& w) {
             if (v == "braid") cfg.dielectric.averaging = Averaging::Braid;
             else if (v == "local") cfg.dielectric.averaging = Averaging::Local;
             else throw ValidationError(w + ": expected braid or local, got '" + v + "'");
         }},
        {"truncation.n_cap", integer(cfg.truncation.n_cap)},
        {"truncation.m_cap", integer(cfg.truncation.m_cap)},
        {"truncation.j_cap", integer(cfg.truncation.j_cap)},
        {"truncation.l_cap", integer(cfg.truncation.l_cap)},
        {"truncation.np_cap", integer(cfg.truncation.np_cap)},
        {"truncation.series_tol", num(cfg.truncation.series_tol)},
        {"minimize.max_iter", integer(cfg.minimize.max_iter)},
        {"minimize.tol", num(cfg.minimize.tol)},
        {"oracle.length", num(cfg.oracle.length)},
        {"oracle.ds", num(cfg.oracle.ds)},
        {"output.dir", [&](const std::string& v, const std::string&) { cfg.output_dir = v; }},
        {"output.threads", integer(cfg.threads)},
    };
    for (ScanParam p : {ScanParam::Eta, ScanParam::R, ScanParam::XiPhase})
        setters["minimize." + to_string(p)] = [&cfg, p](const std::string& v, const std::string& w) {
            try {
                cfg.minimize.bounds[p] = parse_bounds(v);
            } catch (const ValidationError& e) {
                throw ValidationError(w + ": " + e.what());
            }
        };

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        // trailing comment: a '#' after whitespace
        for (std::size_t i = 1; i < t.size(); ++i)
            if (t[i] == '#' && (t[i - 1] == ' ' || t[i - 1] == '\t')) {
                t = trim(t.substr(0, i));
                break;
            }
        const std::string where = origin + ":" + std::to_string(lineno);
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty()) throw ValidationError(where + ": empty key or value");
        if (!seen.insert(key).second) throw ValidationError(where + ": duplicate key '" + key + "'");
        const std::string w = where + " (" + key + ")";
        if (key.rfind("charge.zeta.", 0) == 0) {
            const int n = parse_int(key.substr(12), w);
            cfg.charge.table[n] = parse_double(value, w);
            continue;
        }
        auto it = setters.find(key);
        if (it == setters.end()) {
            if (key.size() > 4 && key.compare(key.size() - 4, 4, "_deg") == 0)
                throw ValidationError(where + ": unknown key '" + key + "' (angles are given in radians)");
            throw ValidationError(where + ": unknown key '" + key + "'");
        }
        it->second(value, w);
    }
    if (have_param || have_min || have_max) {
        if (!(have_param && have_min && have_max))
            throw ValidationError(origin + ": a sweep needs sweep.param, sweep.min and sweep.max");
        cfg.sweep.given = true;
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace braid
