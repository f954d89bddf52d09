#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hilfer/core_types.hpp"
#include "hilfer/error.hpp"
#include "hilfer/fracops.hpp"
#include "hilfer/rhs_catalog.hpp"
#include "hilfer/solver.hpp"

namespace hilfer {

struct RhsConfig {
    std::string kind = "constant";  // constant | linear | power | logistic | expression
    double c = 0.0;
    double a = 0.0;
    double b = 0.0;
    double sigma = 1.0;
    double offset = 0.0;
    double scale = 1.0;
    std::string expr;

    bool operator==(const RhsConfig&) const = default;

    Rhs build() const {
        if (kind == "constant") return constant_rhs(c);
        if (kind == "linear") return linear_rhs(a, b);
        if (kind == "power") return power_rhs(sigma);
        if (kind == "logistic") return logistic_rhs(offset, scale);
        if (kind == "expression") return expression_rhs(expr);
        throw Error(ErrorCode::ConfigError, "unknown rhs kind '" + kind + "'");
    }
};

struct SweepAxis {
    std::string param;  // alpha | beta | lambda | d | lipschitz
    double start = 0.0;
    double stop = 0.0;
    std::size_t steps = 2;

    bool operator==(const SweepAxis&) const = default;

    double value(std::size_t k) const {
        if (k + 1 == steps) return stop;
        return start + (stop - start) * static_cast<double>(k) / static_cast<double>(steps - 1);
    }
};

/// Everything one run needs; parsed from and emitted to the key = value format.
struct RunConfig {
    // [problem]
    double alpha = 0.5;
    double beta = 0.0;
    double lambda = 0.0;
    double d = 0.0;
    std::optional<double> lipschitz;
    std::optional<double> lower_bound;
    std::optional<double> upper_bound;
    // [rhs]
    RhsConfig rhs;
    // [mesh]
    std::size_t mesh_n = 256;
    std::optional<double> mesh_r;
    Scheme scheme = Scheme::ProductTrapezoidal;
    // [picard]
    double tol = 1e-10;
    std::size_t max_iter = 200;
    PicardSettings::InitialGuess initial_guess = PicardSettings::InitialGuess::LambdaProfile;
    // [verify]
    double t_cut = 0.05;
    // [certify]
    bool estimate_lipschitz = false;
    double y_max = 10.0;
    std::size_t t_grid = 32;
    std::size_t y_grid = 65;
    // [sweep]
    std::vector<SweepAxis> axes;
    std::size_t workers = 1;
    bool sweep_residuals = true;
    // [output]
    std::string output_dir = ".";

    bool operator==(const RunConfig&) const = default;

    HilferProblem problem() const {
        HilferProblem p;
        p.alpha = alpha;
        p.beta = beta;
        p.lambda = lambda;
        p.d = d;
        p.rhs = rhs.build();
        p.lipschitz = lipschitz;
        p.lower_bound = lower_bound;
        p.upper_bound = upper_bound;
        p.validate();
        return p;
    }

    double grading() const { return mesh_r ? *mesh_r : GradedMesh::default_grading(composite_order(alpha, beta)); }

    QuadratureRule rule() const { return {scheme, GradedMesh::make(mesh_n, grading())}; }

    PicardSettings picard() const {
        PicardSettings s;
        s.tol = tol;
        s.max_iter = max_iter;
        s.initial_guess = initial_guess;
        return s;
    }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] inline void fail(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": " + what);
}

inline double to_double(const std::string& v, std::size_t line) {
    const char* begin = v.c_str();
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (end == begin || trim(end).size() != 0 || !std::isfinite(x)) fail(line, "expected a number, got '" + v + "'");
    return x;
}

inline std::size_t to_size(const std::string& v, std::size_t line) {
    const double x = to_double(v, line);
    if (x < 0.0 || x != std::floor(x) || x > 1e12) fail(line, "expected a nonnegative integer, got '" + v + "'");
    return static_cast<std::size_t>(x);
}

inline bool to_bool(const std::string& v, std::size_t line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(line, "expected true/false, got '" + v + "'");
}

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace config_detail

inline std::string to_string(Scheme s) { return s == Scheme::ProductTrapezoidal ? "trapezoidal" : "rectangle"; }

inline std::string to_string(PicardSettings::InitialGuess g) {
    switch (g) {
        case PicardSettings::InitialGuess::LambdaProfile: return "lambda-profile";
        case PicardSettings::InitialGuess::BracketMidpoint: return "bracket-midpoint";
        case PicardSettings::InitialGuess::UserSupplied: return "user";
    }
    return "lambda-profile";
}

/**
 * Parse the sectioned key = value format. '#' starts a comment. Unknown
 * sections, unknown keys and repeated keys are rejected with the line number.
 */
inline RunConfig parse_config(std::istream& in) {
    using namespace config_detail;
    RunConfig cfg;
    std::string section;
    std::map<std::string, std::size_t> seen;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') fail(line, "malformed section header");
            section = trim(text.substr(1, text.size() - 2));
            static const char* known[] = {"problem", "rhs", "mesh", "picard", "verify", "certify", "sweep", "output"};
            bool ok = false;
            for (const char* k : known) ok = ok || section == k;
            if (!ok) fail(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string val = trim(text.substr(eq + 1));
        if (section.empty()) fail(line, "key '" + key + "' outside any section");
        if (val.empty()) fail(line, "empty value for '" + key + "'");
        const std::string full = section + "." + key;
        if (key.rfind("axis", 0) != 0) {
            if (auto it = seen.find(full); it != seen.end()) {
                fail(line, "duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
            }
            seen[full] = line;
        }

        auto unknown = [&] { fail(line, "unknown key '" + key + "' in [" + section + "]"); };
        if (section == "problem") {
            if (key == "alpha") cfg.alpha = to_double(val, line);
            else if (key == "beta") cfg.beta = to_double(val, line);
            else if (key == "lambda") cfg.lambda = to_double(val, line);
            else if (key == "d") cfg.d = to_double(val, line);
            else if (key == "lipschitz") cfg.lipschitz = to_double(val, line);
            else if (key == "lower_bound") cfg.lower_bound = to_double(val, line);
            else if (key == "upper_bound") cfg.upper_bound = to_double(val, line);
            else unknown();
        } else if (section == "rhs") {
            if (key == "kind") {
                if (val != "constant" && val != "linear" && val != "power" && val != "logistic" && val != "expression") {
                    fail(line, "unknown rhs kind '" + val + "'");
                }
                cfg.rhs.kind = val;
            } else if (key == "c") cfg.rhs.c = to_double(val, line);
            else if (key == "a") cfg.rhs.a = to_double(val, line);
            else if (key == "b") cfg.rhs.b = to_double(val, line);
            else if (key == "sigma") cfg.rhs.sigma = to_double(val, line);
            else if (key == "offset") cfg.rhs.offset = to_double(val, line);
            else if (key == "scale") cfg.rhs.scale = to_double(val, line);
            else if (key == "expr") {
                try {
                    Expression probe(val);
                } catch (const Error& e) {
                    fail(line, e.message());
                }
                cfg.rhs.expr = val;
            } else unknown();
        } else if (section == "mesh") {
            if (key == "n") cfg.mesh_n = to_size(val, line);
            else if (key == "r") cfg.mesh_r = to_double(val, line);
            else if (key == "scheme") {
                if (val == "trapezoidal") cfg.scheme = Scheme::ProductTrapezoidal;
                else if (val == "rectangle") cfg.scheme = Scheme::ProductRectangle;
                else fail(line, "scheme must be trapezoidal or rectangle");
            } else unknown();
        } else if (section == "picard") {
            if (key == "tol") cfg.tol = to_double(val, line);
            else if (key == "max_iter") cfg.max_iter = to_size(val, line);
            else if (key == "initial_guess") {
                if (val == "lambda-profile") cfg.initial_guess = PicardSettings::InitialGuess::LambdaProfile;
                else if (val == "bracket-midpoint") cfg.initial_guess = PicardSettings::InitialGuess::BracketMidpoint;
                else fail(line, "initial_guess must be lambda-profile or bracket-midpoint");
            } else unknown();
        } else if (section == "verify") {
            if (key == "t_cut") cfg.t_cut = to_double(val, line);
            else unknown();
        } else if (section == "certify") {
            if (key == "estimate_lipschitz") cfg.estimate_lipschitz = to_bool(val, line);
            else if (key == "y_max") cfg.y_max = to_double(val, line);
            else if (key == "t_grid") cfg.t_grid = to_size(val, line);
            else if (key == "y_grid") cfg.y_grid = to_size(val, line);
            else unknown();
        } else if (section == "sweep") {
            if (key == "axis") {
                std::istringstream ss(val);
                SweepAxis ax;
                std::string start, stop, steps, extra;
                if (!(ss >> ax.param >> start >> stop >> steps) || (ss >> extra)) {
                    fail(line, "axis needs: <param> <start> <stop> <steps>");
                }
                if (ax.param != "alpha" && ax.param != "beta" && ax.param != "lambda" && ax.param != "d" &&
                    ax.param != "lipschitz") {
                    fail(line, "axis parameter must be one of alpha, beta, lambda, d, lipschitz");
                }
                ax.start = to_double(start, line);
                ax.stop = to_double(stop, line);
                ax.steps = to_size(steps, line);
                if (ax.steps < 2) fail(line, "axis needs at least 2 steps");
                if (cfg.axes.size() == 2) fail(line, "at most two sweep axes");
                cfg.axes.push_back(ax);
            } else if (key == "workers") cfg.workers = to_size(val, line);
            else if (key == "residuals") cfg.sweep_residuals = to_bool(val, line);
            else unknown();
        } else if (section == "output") {
            if (key == "dir") cfg.output_dir = val;
            else unknown();
        }
    }
    if (cfg.rhs.kind == "expression" && cfg.rhs.expr.empty()) {
        fail(line, "rhs kind expression needs an expr key");
    }
    if (cfg.mesh_n < 4) fail(line, "mesh n must be >= 4");
    if (cfg.workers < 1) fail(line, "workers must be >= 1");
    return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path + "'");
    return parse_config(in);
}

/// Inverse of parse_config; numbers carry 17 significant digits so the round trip is exact.
inline std::string emit_config(const RunConfig& cfg) {
    using config_detail::fmt;
    std::ostringstream o;
    o << "[problem]\n";
    o << "alpha = " << fmt(cfg.alpha) << "\n";
    o << "beta = " << fmt(cfg.beta) << "\n";
    o << "lambda = " << fmt(cfg.lambda) << "\n";
    o << "d = " << fmt(cfg.d) << "\n";
    if (cfg.lipschitz) o << "lipschitz = " << fmt(*cfg.lipschitz) << "\n";
    if (cfg.lower_bound) o << "lower_bound = " << fmt(*cfg.lower_bound) << "\n";
    if (cfg.upper_bound) o << "upper_bound = " << fmt(*cfg.upper_bound) << "\n";
    o << "\n[rhs]\nkind = " << cfg.rhs.kind << "\n";
    o << "c = " << fmt(cfg.rhs.c) << "\na = " << fmt(cfg.rhs.a) << "\nb = " << fmt(cfg.rhs.b) << "\n";
    o << "sigma = " << fmt(cfg.rhs.sigma) << "\noffset = " << fmt(cfg.rhs.offset) << "\n";
    o << "scale = " << fmt(cfg.rhs.scale) << "\n";
    if (!cfg.rhs.expr.empty()) o << "expr = " << cfg.rhs.expr << "\n";
    o << "\n[mesh]\nn = " << cfg.mesh_n << "\n";
    if (cfg.mesh_r) o << "r = " << fmt(*cfg.mesh_r) << "\n";
    o << "scheme = " << to_string(cfg.scheme) << "\n";
    o << "\n[picard]\ntol = " << fmt(cfg.tol) << "\nmax_iter = " << cfg.max_iter << "\n";
    o << "initial_guess = " << to_string(cfg.initial_guess) << "\n";
    o << "\n[verify]\nt_cut = " << fmt(cfg.t_cut) << "\n";
    o << "\n[certify]\nestimate_lipschitz = " << (cfg.estimate_lipschitz ? "true" : "false") << "\n";
    o << "y_max = " << fmt(cfg.y_max) << "\nt_grid = " << cfg.t_grid << "\ny_grid = " << cfg.y_grid << "\n";
    o << "\n[sweep]\n";
    for (const auto& ax : cfg.axes) {
        o << "axis = " << ax.param << " " << fmt(ax.start) << " " << fmt(ax.stop) << " " << ax.steps << "\n";
    }
    o << "workers = " << cfg.workers << "\nresiduals = " << (cfg.sweep_residuals ? "true" : "false") << "\n";
    o << "\n[output]\ndir = " << cfg.output_dir << "\n";
    return o.str();
}

}  // namespace hilfer
