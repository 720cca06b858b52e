#include "bec/cli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "bec/canonical.hpp"
#include "bec/experiments.hpp"
#include "bec/grand_canonical.hpp"
#include "bec/io.hpp"

namespace bec::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<Command, const char*>> kCommands{
    {Command::Sweep, "sweep"},   {Command::SolveMu, "solve-mu"},   {Command::Genfun, "genfun"},
    {Command::Condense, "condense"}, {Command::KacCheck, "kac-check"}, {Command::Equiv, "equiv"},
    {Command::Scaling, "scaling"},   {Command::Positivity, "positivity"}};

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
            throw ConfigError(where + "." + it.key() + ": unknown field");
}

std::vector<double> number_list(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = obj.at(key);
    const std::string name = where + "." + key;
    if (!v.is_array() || v.empty()) throw ConfigError(name + ": expected a non-empty list of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(name + ": expected a non-empty list of numbers");
        const double d = x.get<double>();
        if (!std::isfinite(d)) throw ConfigError(name + ": values must be finite");
        out.push_back(d);
    }
    return out;
}

void require_positive(const std::vector<double>& v, const std::string& name) {
    for (double x : v)
        if (!(x > 0)) throw ConfigError(name + ": values must be > 0");
}

std::string fmt(double x) { return std::isfinite(x) ? fmt17(x) : (std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf")); }

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

GrandSpec spec_for(const ModelParams& p, double beta, double mu) {
    GrandSpec s;
    s.beta = beta;
    s.mu = mu;
    s.volume = p.volume();
    s.validate();
    return s;
}

bool limit_defined_at_mu(const ModelParams& p, double mu) { return mu < 0.0 || (mu == 0.0 && p.d > 2); }

}  // namespace

std::string to_string(Command c) {
    for (auto [cmd, name] : kCommands)
        if (cmd == c) return name;
    return "?";
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(doc, "config", {"schema", "command", "model", "grid", "tf", "output", "options"});
    RunConfig c;
    c.raw = doc;
    if (!doc.contains("schema") || doc.at("schema") != "v1") throw ConfigError("schema: must be \"v1\"");
    if (!doc.contains("command") || !doc.at("command").is_string()) throw ConfigError("command: missing");
    const auto name = doc.at("command").get<std::string>();
    auto it = std::find_if(kCommands.begin(), kCommands.end(), [&](auto& p) { return name == p.second; });
    if (it == kCommands.end()) throw ConfigError("command: unknown command '" + name + "'");
    c.command = it->first;

    if (!doc.contains("model")) throw ConfigError("model: missing");
    try {
        c.model = doc.at("model").get<ModelParams>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    if (!doc.contains("grid") || !doc.at("grid").is_object()) throw ConfigError("grid: missing or not an object");
    const auto& g = doc.at("grid");
    reject_unknown(g, "grid", {"beta", "mu", "rho", "L"});
    if (!g.contains("beta")) throw ConfigError("grid.beta: missing");
    c.grid.beta = number_list(g, "beta", "grid");
    require_positive(c.grid.beta, "grid.beta");
    const bool has_mu = g.contains("mu"), has_rho = g.contains("rho");
    if (has_mu == has_rho) throw ConfigError("grid: exactly one of grid.mu and grid.rho must be given");
    if (has_mu) c.grid.mu = number_list(g, "mu", "grid");
    if (has_rho) {
        c.grid.rho = number_list(g, "rho", "grid");
        require_positive(c.grid.rho, "grid.rho");
    }
    if (g.contains("L")) {
        c.grid.L = number_list(g, "L", "grid");
        require_positive(c.grid.L, "grid.L");
    } else {
        c.grid.L = {c.model.L};
    }

    if (doc.contains("tf")) {
        try {
            c.tf = test_function_from_json(doc.at("tf"), c.model.d);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("tf: ") + e.what());
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        if (!o.is_object()) throw ConfigError("output: expected an object");
        reject_unknown(o, "output", {"format"});
        if (o.contains("format")) {
            if (!o.at("format").is_string()) throw ConfigError("output.format: expected \"csv\" or \"json\"");
            c.format = o.at("format").get<std::string>();
            if (c.format != "csv" && c.format != "json")
                throw ConfigError("output.format: expected \"csv\" or \"json\"");
        }
    }

    const json opts = doc.value("options", json::object());
    if (!opts.is_object()) throw ConfigError("options: expected an object");
    switch (c.command) {
        case Command::Condense:
            reject_unknown(opts, "options", {"deltas"});
            if (opts.contains("deltas")) c.deltas = number_list(opts, "deltas", "options");
            require_positive(c.deltas, "options.deltas");
            if (!std::is_sorted(c.deltas.begin(), c.deltas.end()))
                throw ConfigError("options.deltas: must be increasing");
            break;
        case Command::KacCheck:
            reject_unknown(opts, "options", {"family", "quad_tol"});
            if (opts.contains("family")) {
                const auto f = opts.at("family");
                if (f == "pbg")
                    c.family = tdlimit::KacFamily::PBG;
                else if (f == "interacting")
                    c.family = tdlimit::KacFamily::Interacting;
                else
                    throw ConfigError("options.family: expected \"pbg\" or \"interacting\"");
            }
            if (opts.contains("quad_tol")) {
                if (!opts.at("quad_tol").is_number() || !(opts.at("quad_tol").get<double>() > 0))
                    throw ConfigError("options.quad_tol: expected a number > 0");
                c.quad_tol = opts.at("quad_tol").get<double>();
            }
            break;
        case Command::Positivity:
            reject_unknown(opts, "options", {"sets", "seed"});
            if (opts.contains("sets")) {
                if (!opts.at("sets").is_number_integer() || opts.at("sets").get<int>() < 1)
                    throw ConfigError("options.sets: expected an integer >= 1");
                c.sets = opts.at("sets").get<int>();
            }
            if (opts.contains("seed")) {
                const auto& sd = opts.at("seed");
                if (!sd.is_number_integer() || (!sd.is_number_unsigned() && sd.get<std::int64_t>() < 0))
                    throw ConfigError("options.seed: expected an integer >= 0");
                c.seed = opts.at("seed").get<std::uint64_t>();
            }
            break;
        default:
            reject_unknown(opts, "options", {});
    }

    // per-command grid and tf requirements
    const bool needs_tf = c.command == Command::Genfun || c.command == Command::KacCheck ||
                          c.command == Command::Equiv;
    if (needs_tf && !c.tf) throw ConfigError("tf: required for command " + name);
    if (c.command == Command::Positivity && c.tf) throw ConfigError("tf: not used by positivity (sets are random)");
    const bool needs_rho = c.command == Command::SolveMu || c.command == Command::KacCheck ||
                           c.command == Command::Equiv || c.command == Command::Scaling;
    if (needs_rho && !c.grid.by_rho()) throw ConfigError("grid.rho: required for command " + name);
    const bool limit_only = c.command == Command::KacCheck || c.command == Command::Positivity;
    if (limit_only && g.contains("L")) throw ConfigError("grid.L: not used by command " + name);
    if (c.command == Command::Scaling) {
        if (c.grid.beta.size() != 1 || c.grid.rho.size() != 1)
            throw ConfigError("grid: scaling takes exactly one beta and one rho");
        if (c.grid.L.size() < 4) throw ConfigError("grid.L: scaling needs at least 4 ladder values");
    }
    if (c.command == Command::Equiv) {
        for (double L : c.grid.L)
            for (double r : c.grid.rho) {
                ModelParams p = c.model;
                p.L = L;
                if (std::floor(p.volume() * r) < 1)
                    throw ConfigError("grid.rho: floor(V rho) must be >= 1 for every L");
            }
    }
    for (double L : c.grid.L) {
        ModelParams p = c.model;
        p.L = L;
        try {
            p.validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("grid.L: ") + e.what());
        }
    }
    return c;
}

namespace {

struct Point {
    double beta = 0.0;
    double L = 0.0;
    double control = 0.0;
};

std::vector<Point> grid_points(const RunConfig& c, bool use_L = true) {
    std::vector<Point> pts;
    for (double b : c.grid.beta)
        for (double L : use_L ? c.grid.L : std::vector<double>{c.model.L})
            for (double x : c.grid.control()) pts.push_back({b, L, x});
    return pts;
}

ModelParams model_at(const RunConfig& c, double L) {
    ModelParams p = c.model;
    p.L = L;
    return p;
}

std::string base_name(const RunConfig& c) { return to_string(c.command) + "_" + io::config_hash(c.raw); }

json document(const RunConfig& c, json results) {
    return json{{"schema", "v1"}, {"command", to_string(c.command)}, {"config", c.raw}, {"results", std::move(results)}};
}

class Table {
public:
    explicit Table(std::string header) { out_ << header << '\n'; }
    template <typename... T>
    void row(const T&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    static std::string cell(double x) { return fmt(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(std::int64_t x) { return std::to_string(x); }
    static std::string cell(std::size_t x) { return std::to_string(x); }
    static std::string cell(bool x) { return x ? "1" : "0"; }
    static std::string cell(const std::string& x) { return x; }
    static std::string cell(const char* x) { return x; }
    std::ostringstream out_;
};

std::vector<Artifact> pack(const RunConfig& c, const Table& table, json results) {
    if (c.format == "csv") return {{base_name(c) + ".csv", table.str()}};
    return {{base_name(c) + ".json", document(c, std::move(results)).dump(2) + "\n"}};
}

std::string tag(std::size_t i, std::size_t n, const Point& p, const RunConfig& c, bool with_L = true) {
    std::ostringstream o;
    o << to_string(c.command) << " [" << (i + 1) << "/" << n << "] beta=" << fmt(p.beta);
    if (with_L) o << " L=" << fmt(p.L);
    o << (c.grid.by_rho() ? " rho=" : " mu=") << fmt(p.control);
    return o.str();
}

std::vector<Artifact> run_sweep(const RunConfig& c, std::ostream& log) {
    Table t(density_csv_header());
    json res = json::array();
    const auto pts = grid_points(c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& pt = pts[i];
        const auto p = model_at(c, pt.L);
        auto spec = spec_for(p, pt.beta, c.grid.by_rho() ? 0.0 : pt.control);
        if (c.grid.by_rho()) spec.mu = solve_mu(p, spec, pt.control);
        const auto b = total_density(p, spec);
        t.row(density_csv_row(p, pt.beta, b));
        res.push_back({{"beta", pt.beta}, {"L", pt.L}, {"density", b}});
        log << tag(i, pts.size(), pt, c) << ": rho=" << fmt(b.rho_total) << " mu=" << fmt(b.mu) << "\n";
    }
    return pack(c, t, res);
}

std::vector<Artifact> run_solve_mu(const RunConfig& c, std::ostream& log) {
    Table t("d,L,beta,rho,mu");
    json res = json::array();
    const auto pts = grid_points(c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& pt = pts[i];
        const auto p = model_at(c, pt.L);
        const double mu = solve_mu(p, spec_for(p, pt.beta, 0.0), pt.control);
        t.row(p.d, pt.L, pt.beta, pt.control, mu);
        res.push_back({{"d", p.d}, {"L", pt.L}, {"beta", pt.beta}, {"rho", pt.control}, {"mu", mu}});
        log << tag(i, pts.size(), pt, c) << ": mu=" << fmt(mu) << "\n";
    }
    return pack(c, t, res);
}

std::vector<Artifact> run_genfun(const RunConfig& c, std::ostream& log) {
    Table t("d,L,beta,mu,rho,E_finite,E_limit,gap");
    json res = json::array();
    const auto pts = grid_points(c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& pt = pts[i];
        const auto p = model_at(c, pt.L);
        auto spec = spec_for(p, pt.beta, c.grid.by_rho() ? 0.0 : pt.control);
        if (c.grid.by_rho()) spec.mu = solve_mu(p, spec, pt.control);
        const double rho = c.grid.by_rho() ? pt.control : total_density(p, spec).rho_total;
        const auto g = genfun_finite(p, spec, *c.tf);
        double lim = kNaN;
        if (c.grid.by_rho())
            lim = tdlimit::genfun_limit_rho(pt.beta, pt.control, p, *c.tf);
        else if (limit_defined_at_mu(p, pt.control))
            lim = tdlimit::genfun_limit_mu(pt.beta, pt.control, p, *c.tf);
        const double gap = std::abs(g.value - lim);
        t.row(p.d, pt.L, pt.beta, spec.mu, rho, g.value, lim, gap);
        res.push_back({{"d", p.d}, {"L", pt.L}, {"beta", pt.beta}, {"mu", spec.mu}, {"rho", rho},
                       {"finite", g}, {"E_limit", num(lim)}, {"gap", num(gap)}});
        log << tag(i, pts.size(), pt, c) << ": E=" << fmt(g.value) << " limit=" << fmt(lim) << "\n";
    }
    return pack(c, t, res);
}

std::vector<Artifact> run_condense(const RunConfig& c, std::ostream& log) {
    Table t("d,L,beta,mu,classification,max_mode_fraction,rho_zero_mode,rho_Dminus,macroscopic_modes,delta,shell_density");
    json res = json::array();
    const auto pts = grid_points(c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& pt = pts[i];
        const auto p = model_at(c, pt.L);
        auto spec = spec_for(p, pt.beta, c.grid.by_rho() ? 0.0 : pt.control);
        if (c.grid.by_rho()) spec.mu = solve_mu(p, spec, pt.control);
        const auto r = condensate_scan(p, spec, c.deltas);
        for (const auto& [delta, dens] : r.shell_densities)
            t.row(p.d, pt.L, pt.beta, spec.mu, to_string(r.classification), r.max_mode_fraction, r.rho_zero_mode,
                  r.density.rho_Dminus, r.macroscopic_modes, delta, dens);
        res.push_back({{"d", p.d}, {"L", pt.L}, {"beta", pt.beta}, {"mu", spec.mu}, {"scan", r}});
        log << tag(i, pts.size(), pt, c) << ": " << to_string(r.classification)
            << " max_mode_fraction=" << fmt(r.max_mode_fraction) << "\n";
    }
    return pack(c, t, res);
}

std::vector<Artifact> run_kac(const RunConfig& c, std::ostream& log) {
    Table t("d,beta,rho,family,mixture,direct,residual");
    json res = json::array();
    const auto pts = grid_points(c, false);
    const std::string fam = c.family == tdlimit::KacFamily::PBG ? "pbg" : "interacting";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& pt = pts[i];
        const auto k = tdlimit::kac_mixture_check(pt.beta, pt.control, c.model, *c.tf, c.quad_tol, c.family);
        t.row(c.model.d, pt.beta, pt.control, fam, k.mixture, k.direct, k.residual);
        res.push_back({{"d", c.model.d}, {"beta", pt.beta}, {"rho", pt.control}, {"family", fam},
                       {"mixture", k.mixture}, {"direct", k.direct}, {"residual", k.residual}});
        log << tag(i, pts.size(), pt, c, false) << ": residual=" << fmt(k.residual) << "\n";
    }
    return pack(c, t, res);
}

std::vector<Artifact> run_equiv(const RunConfig& c, std::ostream& log) {
    Table t("d,L,beta,rho,N,mu,E_can,E_gc,gap,E_hypothesis,hypothesis_gap");
    json res = json::array();
    const auto pts = grid_points(c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& pt = pts[i];
        const auto g = equivalence_gap(c.model, pt.beta, pt.control, *c.tf, pt.L);
        t.row(c.model.d, pt.L, pt.beta, g.rho, g.N, g.mu, g.E_can, g.E_gc, g.gap, g.E_hypothesis, g.hypothesis_gap);
        res.push_back({{"d", c.model.d}, {"beta", pt.beta}, {"requested_rho", pt.control}, {"gap", g}});
        log << tag(i, pts.size(), pt, c) << ": N=" << g.N << " gap=" << fmt(g.gap) << "\n";
    }
    return pack(c, t, res);
}

std::vector<Artifact> run_scaling(const RunConfig& c, std::ostream& log) {
    const double beta = c.grid.beta.front(), rho = c.grid.rho.front();
    const auto f = experiments::mu_scaling_study(c.model, beta, rho, c.grid.L);
    for (std::size_t i = 0; i < f.points.size(); ++i)
        log << "scaling [" << (i + 1) << "/" << f.points.size() << "] L=" << fmt(f.points[i].L)
            << ": mu=" << fmt(f.points[i].mu) << (f.points[i].excluded ? " (excluded)" : "") << "\n";
    for (const auto& w : f.warnings) log << "scaling warning: " << w << "\n";
    log << "scaling fit: slope=" << fmt(f.slope) << " B=" << fmt(f.prefactor) << " r2=" << fmt(f.r_squared) << "\n";
    // study output: the fit document and the ladder table
    return {{base_name(c) + ".json", document(c, json(f)).dump(2) + "\n"}, {base_name(c) + ".csv", experiments::to_csv(f)}};
}

std::vector<Artifact> run_positivity(const RunConfig& c, std::ostream& log) {
    const std::string ctl = c.grid.by_rho() ? "rho" : "mu";
    Table t("beta," + ctl + ",set,n,min_eigenvalue");
    json res = json::array();
    const auto pts = grid_points(c, false);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& pt = pts[i];
        if (!c.grid.by_rho() && !limit_defined_at_mu(c.model, pt.control))
            throw ConfigError("grid.mu: the limit functional needs mu < 0 (or mu = 0 with d > 2)");
        const experiments::Functional E = [&](const TestFunction& h) {
            return c.grid.by_rho() ? tdlimit::genfun_limit_rho(pt.beta, pt.control, c.model, h)
                                   : tdlimit::genfun_limit_mu(pt.beta, pt.control, c.model, h);
        };
        std::mt19937_64 rng(c.seed);
        std::uniform_int_distribution<int> size(3, 8);
        double worst = std::numeric_limits<double>::infinity();
        json sets = json::array();
        for (int k = 0; k < c.sets; ++k) {
            const auto set = experiments::random_tf_set(rng, c.model.d, size(rng));
            const auto r = experiments::positivity_check(E, set);
            worst = std::min(worst, r.min_eigenvalue);
            t.row(pt.beta, pt.control, k, r.n, r.min_eigenvalue);
            sets.push_back(r);
        }
        res.push_back({{"beta", pt.beta}, {ctl, pt.control}, {"seed", c.seed}, {"sets", sets}, {"worst", worst}});
        log << tag(i, pts.size(), pt, c, false) << ": min eigenvalue=" << fmt(worst) << "\n";
    }
    return pack(c, t, res);
}

}  // namespace

std::vector<Artifact> run(const RunConfig& c, std::ostream& log) {
    switch (c.command) {
        case Command::Sweep: return run_sweep(c, log);
        case Command::SolveMu: return run_solve_mu(c, log);
        case Command::Genfun: return run_genfun(c, log);
        case Command::Condense: return run_condense(c, log);
        case Command::KacCheck: return run_kac(c, log);
        case Command::Equiv: return run_equiv(c, log);
        case Command::Scaling: return run_scaling(c, log);
        case Command::Positivity: return run_positivity(c, log);
    }
    return {};
}

std::string columns_help() {
    return "CSV columns (one header row; reals printed with 17 significant digits):\n"
           "  sweep       d,L,beta,mu,rho_total,rho_zero,rho_Dminus,rho_Dplus,max_mode_fraction\n"
           "  solve-mu    d,L,beta,rho,mu\n"
           "  genfun      d,L,beta,mu,rho,E_finite,E_limit,gap\n"
           "  condense    d,L,beta,mu,classification,max_mode_fraction,rho_zero_mode,rho_Dminus,\n"
           "              macroscopic_modes,delta,shell_density   (one row per delta)\n"
           "  kac-check   d,beta,rho,family,mixture,direct,residual\n"
           "  equiv       d,L,beta,rho,N,mu,E_can,E_gc,gap,E_hypothesis,hypothesis_gap\n"
           "  scaling     L,V,mu,excluded   (the fit goes to the .json file)\n"
           "  positivity  beta,mu|rho,set,n,min_eigenvalue\n"
           "Rows follow the grid order beta, then L, then mu or rho.\n"
           "Files are named <command>_<16-hex FNV-1a hash of the config>.csv|.json.\n"
           "Exit status: 0 success, 2 invalid config or input outside a domain, 3 numeric failure,\n"
           "             1 output could not be written.\n";
}

}  // namespace bec::cli
