#pragma once

// Run configuration: INI text with [section] key = value pairs, validated as a
// whole so that every problem is reported at once.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fenecongest/coupled.hpp"

namespace fenecongest {

enum class InitialPreset { Uniform, Perturbed, Compression };

struct InitialConfig {
    InitialPreset preset = InitialPreset::Uniform;
    double rho0 = 0.8;       ///< background density
    double rho_amp = 0.0;    ///< perturbed: cosine amplitude; compression: bump height
    double u_amp = 0.0;
    double psi_amp = 0.0;    ///< x-modulation of psi_hat, |psi_amp| < 1
    double psi_q_amp = 0.0;  ///< q-modulation 1 + a (|q_i|^2 / b_i - 1/2), |a| < 2
    double center = 0.5;
    double width = 0.25;     ///< compression bump half width
};

struct RunConfig {
    Grid1D grid;
    int K = 1;
    int d = 1;
    std::vector<double> b{4.0};
    int nq = 32;
    std::optional<Eigen::MatrixXd> rouse;
    KineticParams kinetic;
    FluidParams fluid;
    double rho_star = 1.0;      ///< congestion threshold level
    double rho_star_amp = 0.0;  ///< rho*(x) = rho_star + amp cos(2 pi x / length)
    StressParams stress;
    InitialConfig initial;
    double T = 0.1;
    Splitting splitting = Splitting::Lie;
    long max_steps = 1000000;
    std::string output_dir = "out";
    long snapshot_every = 0;  ///< 0: initial and final snapshots only
    bool write_psi = false;
    int threads = 1;
    double energy_c = 50.0;  ///< per-step slack C dt^2
    double congestion_delta = 0.01;
    std::vector<double> gammas{5.0, 10.0, 20.0, 40.0, 80.0};
    std::vector<double> p_norms{1.0, 2.0, 4.0};
    bool sweep_parallel = false;

    double gamma() const { return fluid.pressure_law.gamma; }
    std::vector<double> spring_b() const {
        return b.size() == 1 ? std::vector<double>(static_cast<std::size_t>(std::max(K, 1)), b[0]) : b;
    }
};

namespace detail {

inline std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto z = s.find_last_not_of(" \t\r\n");
    return s.substr(a, z - a + 1);
}

inline std::optional<double> parse_double(const std::string& text) {
    const std::string t = trim(text);
    if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
}

inline std::optional<long> parse_long(const std::string& text) {
    const std::string t = trim(text);
    long v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
}

inline std::optional<std::vector<double>> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto v = parse_double(item);
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

inline std::optional<bool> parse_bool(const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    return std::nullopt;
}

// Reads typed values out of a property tree and records every problem.
class Reader {
public:
    explicit Reader(const boost::property_tree::ptree& tree) : tree_(tree) {}

    template <class T, class Parse>
    void read(const std::string& path, T& target, Parse parse, const char* expected) {
        known_.insert(path);
        const auto node = tree_.get_optional<std::string>(boost::property_tree::ptree::path_type(path, '.'));
        if (!node) return;
        const auto v = parse(*node);
        if (!v) {
            errors_.push_back(path + ": expected " + expected + ", got '" + trim(*node) + "'");
            return;
        }
        target = static_cast<T>(*v);
    }
    void number(const std::string& path, double& t) { read(path, t, parse_double, "a number"); }
    void integer(const std::string& path, int& t) { read(path, t, parse_long, "an integer"); }
    void integer(const std::string& path, long& t) { read(path, t, parse_long, "an integer"); }
    void flag(const std::string& path, bool& t) { read(path, t, parse_bool, "true or false"); }
    void list(const std::string& path, std::vector<double>& t) { read(path, t, parse_list, "a comma-separated list"); }
    void text(const std::string& path, std::string& t) {
        read(path, t, [](const std::string& s) { return std::optional<std::string>(trim(s)); }, "text");
    }
    template <class E>
    void choice(const std::string& path, E& target, const std::map<std::string, E>& options) {
        std::string names;
        for (const auto& [k, v] : options) names += (names.empty() ? "" : "|") + k;
        read(path, target,
             [&](const std::string& s) -> std::optional<E> {
                 const auto it = options.find(trim(s));
                 if (it == options.end()) return std::nullopt;
                 return it->second;
             },
             names.c_str());
    }
    void mark_known(const std::string& path) { known_.insert(path); }
    bool present(const std::string& path) const {
        return static_cast<bool>(tree_.get_child_optional(boost::property_tree::ptree::path_type(path, '.')));
    }

    std::vector<std::string> finish() {
        for (const auto& [section, child] : tree_) {
            if (child.empty()) {
                if (!known_.count(section)) errors_.push_back(section + ": unknown key");
                continue;
            }
            for (const auto& [key, value] : child) {
                const std::string path = section + "." + key;
                if (!known_.count(path)) errors_.push_back(path + ": unknown key");
            }
        }
        return errors_;
    }

private:
    const boost::property_tree::ptree& tree_;
    std::set<std::string> known_;
    std::vector<std::string> errors_;
};

}  // namespace detail

inline std::vector<double> initial_density(const RunConfig& c) {
    const Grid1D& g = c.grid;
    std::vector<double> rho(static_cast<std::size_t>(std::max(g.nx, 0)));
    const InitialConfig& ic = c.initial;
    for (int j = 0; j < g.nx; ++j) {
        const double x = g.cell_center(j);
        switch (ic.preset) {
            case InitialPreset::Uniform: rho[j] = ic.rho0; break;
            case InitialPreset::Perturbed:
                rho[j] = ic.rho0 + ic.rho_amp * std::cos(2 * std::numbers::pi * x / g.length);
                break;
            case InitialPreset::Compression: {
                const double s = std::abs(x - ic.center);
                const double bump = s < ic.width ? std::pow(std::cos(std::numbers::pi * s / (2 * ic.width)), 2) : 0.0;
                rho[j] = ic.rho0 + ic.rho_amp * bump;
                break;
            }
        }
    }
    return rho;
}

inline std::vector<double> initial_velocity(const RunConfig& c) {
    const Grid1D& g = c.grid;
    std::vector<double> u(static_cast<std::size_t>(std::max(g.nx, 0)), 0.0);
    const InitialConfig& ic = c.initial;
    for (int j = 0; j < g.nx; ++j) {
        const double x = g.face(j);
        if (ic.preset == InitialPreset::Perturbed) u[j] = ic.u_amp * std::sin(2 * std::numbers::pi * x / g.length);
        if (ic.preset == InitialPreset::Compression)
            u[j] = -ic.u_amp * std::sin(2 * std::numbers::pi * (x - ic.center) / g.length);
    }
    if (!g.periodic() && !u.empty()) u.back() = 0.0;
    return u;
}

inline std::vector<double> congestion_threshold(const RunConfig& c) {
    std::vector<double> t(static_cast<std::size_t>(std::max(c.grid.nx, 0)));
    for (int j = 0; j < c.grid.nx; ++j)
        t[j] = c.rho_star + c.rho_star_amp * std::cos(2 * std::numbers::pi * c.grid.cell_center(j) / c.grid.length);
    return t;
}

/// Semantic checks; returns every violation found.
inline std::vector<std::string> validate(const RunConfig& c) {
    std::vector<std::string> v;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) v.push_back(msg);
    };
    need(c.grid.nx >= 4, "grid.nx: at least 4 cells required");
    need(c.grid.length > 0.0 && std::isfinite(c.grid.length), "grid.length: must be positive and finite");
    need(c.K >= 1 && c.K <= 2, "springs.K: 1 or 2 springs supported");
    need(c.d == 1, "springs.d: the kinetic solver supports configuration dimension 1 only");
    need(c.b.size() == 1 || static_cast<int>(c.b.size()) == c.K, "springs.b: give one value or K values");
    for (double bi : c.b)
        need(bi > 2.0, "springs.b: FENE extensibility requires b_i > 2 (got " + std::to_string(bi) + ")");
    need(c.nq >= 4, "springs.nq: quadrature needs at least 4 nodes per spring");
    if (c.rouse) {
        if (c.rouse->rows() != c.K || c.rouse->cols() != c.K) {
            v.push_back("springs.rouse: expected K*K entries");
        } else {
            try {
                validate_rouse(*c.rouse);
            } catch (const Error& e) {
                v.push_back(std::string("springs.rouse: ") + e.what());
            }
        }
    }
    need(c.kinetic.epsilon > 0.0, "kinetic.epsilon: must be > 0");
    need(c.kinetic.lambda > 0.0, "kinetic.lambda: must be > 0");
    need(c.kinetic.cutoff_L > 1.0, "kinetic.cutoff_L: must be > 1");
    const auto& law = c.fluid.pressure_law;
    need(law.gamma > 1.5, "fluid.gamma: must be > 3/2");
    need(c.fluid.mu_s > 0.0, "fluid.mu_s: must be > 0");
    need(c.fluid.mu_b >= 0.0, "fluid.mu_b: must be >= 0");
    need(c.fluid.cfl > 0.0 && c.fluid.cfl <= 0.5, "time.cfl: must lie in (0, 0.5]");
    need(c.fluid.vacuum_floor >= 0.0, "fluid.vacuum_floor: must be >= 0");
    if (law.kind == PressureKind::General) {
        need(law.general_a >= 0.0, "fluid.general_a: must be >= 0");
        need(law.general_exponent > 1.0, "fluid.general_exponent: must be > 1");
    }
    if (law.kind == PressureKind::Congestion && c.grid.nx >= 1)
        for (double t : congestion_threshold(c))
            if (!(t > 0.0)) {
                v.push_back("fluid.rho_star: congestion threshold must be > 0 everywhere");
                break;
            }
    need(c.fluid.force.radius > 0.0, "force.radius: must be > 0");
    need(c.stress.k > 0.0, "stress.k: must be > 0");
    need(c.stress.xi > 0.0, "stress.xi: must be > 0");
    if (c.stress.c_eta) need(std::isfinite(*c.stress.c_eta), "stress.c_eta: must be finite");
    need(std::abs(c.initial.psi_amp) < 1.0, "initial.psi_amp: |psi_amp| < 1 keeps psi_0 >= 0");
    need(std::abs(c.initial.psi_q_amp) < 2.0, "initial.psi_q_amp: |psi_q_amp| < 2 keeps psi_0 >= 0");
    need(c.initial.width > 0.0, "initial.width: must be > 0");
    if (c.grid.nx >= 4 && c.grid.length > 0.0) {
        const auto rho = initial_density(c);
        double mean = 0.0, lo = rho[0];
        for (double r : rho) {
            mean += r;
            lo = std::min(lo, r);
        }
        mean /= rho.size();
        need(lo >= 0.0, "initial: density must be >= 0");
        need(mean > 0.0 && mean < 1.0,
             "initial: mean initial density must lie strictly in (0, 1), got " + std::to_string(mean));
    }
    need(c.T >= 0.0 && std::isfinite(c.T), "time.T: must be finite and >= 0");
    need(c.max_steps >= 1, "time.max_steps: must be >= 1");
    need(c.snapshot_every >= 0, "output.snapshot_every: must be >= 0");
    need(c.threads >= 1, "output.threads: must be >= 1");
    need(c.energy_c >= 0.0, "diagnostics.energy_c: must be >= 0");
    need(c.congestion_delta > 0.0 && c.congestion_delta < 1.0, "diagnostics.congestion_delta: must lie in (0, 1)");
    need(!c.gammas.empty(), "sweep.gammas: at least one value required");
    for (std::size_t i = 0; i < c.gammas.size(); ++i) {
        need(c.gammas[i] > 1.5, "sweep.gammas: every gamma must be > 3/2");
        if (i > 0) need(c.gammas[i] > c.gammas[i - 1], "sweep.gammas: must be strictly ascending");
    }
    for (double p : c.p_norms) need(p >= 1.0, "sweep.p_norms: every p must be >= 1");
    return v;
}

inline RunConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ValidationError({"line " + std::to_string(e.line()) + ": " + e.message()});
    }
    RunConfig c;
    detail::Reader r(tree);
    r.integer("grid.nx", c.grid.nx);
    r.number("grid.length", c.grid.length);
    r.choice("grid.boundary", c.grid.boundary,
             std::map<std::string, Boundary>{{"periodic", Boundary::Periodic}, {"walls", Boundary::Walls},
                                             {"no-slip", Boundary::Walls}});
    r.integer("springs.K", c.K);
    r.integer("springs.d", c.d);
    r.list("springs.b", c.b);
    r.integer("springs.nq", c.nq);
    std::vector<double> rouse;
    r.list("springs.rouse", rouse);
    if (!rouse.empty()) {
        const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(rouse.size()))));
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(n, 1), std::max<Eigen::Index>(n, 1));
        if (n * n == static_cast<Eigen::Index>(rouse.size()))
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rouse[i * n + j];
        else
            A = Eigen::MatrixXd::Zero(0, 0);
        c.rouse = A;
    }
    r.number("kinetic.epsilon", c.kinetic.epsilon);
    r.number("kinetic.lambda", c.kinetic.lambda);
    r.number("kinetic.cutoff_L", c.kinetic.cutoff_L);
    r.flag("kinetic.implicit_x_diffusion", c.kinetic.implicit_x_diffusion);
    auto& law = c.fluid.pressure_law;
    r.number("fluid.mu_s", c.fluid.mu_s);
    r.number("fluid.mu_b", c.fluid.mu_b);
    r.number("fluid.gamma", law.gamma);
    r.choice("fluid.pressure_law", law.kind,
             std::map<std::string, PressureKind>{{"power", PressureKind::Power},
                                                 {"congestion", PressureKind::Congestion},
                                                 {"general", PressureKind::General}});
    r.number("fluid.general_a", law.general_a);
    r.number("fluid.general_exponent", law.general_exponent);
    r.number("fluid.rho_star", c.rho_star);
    r.number("fluid.rho_star_amp", c.rho_star_amp);
    r.flag("fluid.well_balanced", c.fluid.well_balanced);
    r.number("fluid.vacuum_floor", c.fluid.vacuum_floor);
    r.number("stress.k", c.stress.k);
    r.number("stress.xi", c.stress.xi);
    double c_eta = 0.0;
    r.number("stress.c_eta", c_eta);
    if (r.present("stress.c_eta")) c.stress.c_eta = c_eta;
    r.choice("stress.kramers", c.stress.kramers,
             std::map<std::string, KramersRule>{{"cell", KramersRule::Cell}, {"gauss", KramersRule::Gauss}});
    auto& f = c.fluid.force;
    r.choice("force.kind", f.kind,
             std::map<std::string, ForceKind>{{"none", ForceKind::None},
                                              {"constant", ForceKind::Constant},
                                              {"sinusoidal", ForceKind::Sinusoidal},
                                              {"inward", ForceKind::Inward}});
    r.number("force.amplitude", f.amplitude);
    r.number("force.wavenumber", f.wavenumber);
    r.number("force.center", f.center);
    r.number("force.radius", f.radius);
    auto& ic = c.initial;
    r.choice("initial.preset", ic.preset,
             std::map<std::string, InitialPreset>{{"uniform", InitialPreset::Uniform},
                                                  {"perturbed", InitialPreset::Perturbed},
                                                  {"compression", InitialPreset::Compression}});
    r.number("initial.rho0", ic.rho0);
    r.number("initial.rho_amp", ic.rho_amp);
    r.number("initial.u_amp", ic.u_amp);
    r.number("initial.psi_amp", ic.psi_amp);
    r.number("initial.psi_q_amp", ic.psi_q_amp);
    r.number("initial.center", ic.center);
    r.number("initial.width", ic.width);
    r.number("time.T", c.T);
    r.number("time.cfl", c.fluid.cfl);
    r.choice("time.splitting", c.splitting,
             std::map<std::string, Splitting>{{"lie", Splitting::Lie}, {"strang", Splitting::Strang}});
    r.integer("time.max_steps", c.max_steps);
    r.text("output.dir", c.output_dir);
    r.integer("output.snapshot_every", c.snapshot_every);
    r.flag("output.write_psi", c.write_psi);
    r.integer("output.threads", c.threads);
    r.number("diagnostics.energy_c", c.energy_c);
    r.number("diagnostics.congestion_delta", c.congestion_delta);
    r.list("sweep.gammas", c.gammas);
    r.list("sweep.p_norms", c.p_norms);
    r.flag("sweep.parallel", c.sweep_parallel);

    f.length = c.grid.length;
    if (law.kind == PressureKind::Congestion && c.grid.nx >= 1) law.threshold = congestion_threshold(c);
    auto errors = r.finish();
    for (auto& e : validate(c)) errors.push_back(std::move(e));
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline RunConfig with_gamma(RunConfig c, double gamma) {
    c.fluid.pressure_law.gamma = gamma;
    return c;
}

inline CoupledSolver build_solver(const RunConfig& c) {
    const auto errors = validate(c);
    if (!errors.empty()) throw ValidationError(errors);
    RunConfig cc = c;
    cc.fluid.force.length = c.grid.length;
    if (cc.fluid.pressure_law.kind == PressureKind::Congestion) cc.fluid.pressure_law.threshold = congestion_threshold(c);
    KineticSolver ks(c.grid, make_spring_model(c.spring_b(), c.nq, c.d, c.rouse), c.kinetic);
    return CoupledSolver(std::move(ks), cc.fluid, c.stress, c.splitting, c.threads);
}

/// Initial state with eta_0 = int psi_0 dq.
inline SystemState initial_state(const RunConfig& c, const CoupledSolver& solver) {
    const auto& cg = solver.kinetic().config();
    const auto& model = solver.model();
    auto psi = solver.kinetic().uniform(1.0);
    const InitialConfig& ic = c.initial;
    if (ic.preset == InitialPreset::Perturbed) {
        std::vector<double> qfac(cg.size(), 1.0);
        for (std::size_t m = 0; m < cg.size(); ++m)
            for (int i = 0; i < model.K; ++i) {
                const double q = model.quadrature[i].nodes[cg.node_index(m, i)];
                qfac[m] *= 1.0 + ic.psi_q_amp * (q * q / model.b[i] - 0.5);
            }
        for (int j = 0; j < c.grid.nx; ++j) {
            const double xf = 1.0 + ic.psi_amp * std::cos(2 * std::numbers::pi * c.grid.cell_center(j) / c.grid.length);
            for (std::size_t m = 0; m < cg.size(); ++m) psi(j, m) = xf * qfac[m];
        }
    }
    return solver.initial_state(initial_density(c), initial_velocity(c), std::move(psi));
}

}  // namespace fenecongest
