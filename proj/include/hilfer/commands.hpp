#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "hilfer/analysis.hpp"
#include "hilfer/config.hpp"
#include "hilfer/csv.hpp"
#include "hilfer/solver.hpp"
#include "hilfer/verify.hpp"

namespace hilfer {

/// Process exit statuses; one per outcome category.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitNotConverged = 2,
    kExitSingular = 3,
    kExitFailure = 4,  // evaluation failure of f, or a failed certificate
};

inline int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidArgument:
        case ErrorCode::MissingBounds:
        case ErrorCode::InvalidInterval:
        case ErrorCode::MeshMismatch:
        case ErrorCode::InsufficientNodes:
            return kExitConfig;
        case ErrorCode::SingularProblem:
            return kExitSingular;
        default:
            return kExitFailure;
    }
}

inline ReportOptions report_options(const RunConfig& cfg) {
    ReportOptions o;
    o.t_grid = cfg.t_grid;
    o.y_grid = cfg.y_grid;
    o.y_max = cfg.y_max;
    o.estimate_lipschitz = cfg.estimate_lipschitz;
    return o;
}

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    return dir / name;
}

inline std::string holds_cell(const Certificate& c) {
    if (!c.evaluable) return "not evaluable";
    return c.holds ? "true" : "false";
}

inline void write_certificates(const std::filesystem::path& path, const std::vector<Certificate>& certs) {
    csv::Table t{{"name", "value", "threshold", "holds"}, {}};
    for (const auto& c : certs) {
        t.rows.push_back({c.name, csv::number(c.value), csv::number(c.threshold), holds_cell(c)});
    }
    csv::write(path.string(), t);
}

inline void write_solution(const std::filesystem::path& path, const WeightedGridFunction& w) {
    csv::Table t{{"t", "w", "y"}, {}};
    const std::vector<double> y = detail::plain_values(w);
    for (std::size_t j = 0; j < w.size(); ++j) {
        t.rows.push_back({csv::number(w.mesh()[j]), csv::number(w[j]), csv::number(y[j])});
    }
    csv::write(path.string(), t);
}

inline void print_certificates(std::ostream& out, const std::vector<Certificate>& certs) {
    for (const auto& c : certs) {
        out << "  " << c.name << ": " << holds_cell(c);
        if (c.evaluable) out << " (value " << csv::number(c.value) << ", threshold " << csv::number(c.threshold) << ")";
        out << "\n    " << c.detail << "\n";
        for (const auto& a : c.annotations) out << "    " << a.key << " = " << csv::number(a.value) << "\n";
    }
}

/// solve: Picard iteration, solution.csv and report.txt.
inline int cmd_solve(const RunConfig& cfg, std::ostream& log) {
    try {
        const HilferProblem problem = cfg.problem();
        const DerivedConstants consts = derive_constants(problem);
        const std::vector<Certificate> certs = hypothesis_report(problem, report_options(cfg));
        const QuadratureRule rule = cfg.rule();
        const DeltaOperator op(problem, consts, rule);
        const SolveResult result = solve_picard(op, cfg.picard());
        const ResidualReport res = residual_check(problem, consts, result.solution, rule, cfg.t_cut);
        const double defect = op.boundary_defect(result.solution);

        write_solution(output_path(cfg, "solution.csv"), result.solution);
        std::ofstream rep(output_path(cfg, "report.txt"));
        rep << "problem: alpha = " << csv::number(problem.alpha) << ", beta = " << csv::number(problem.beta)
            << ", lambda = " << csv::number(problem.lambda) << ", d = " << csv::number(problem.d) << "\n";
        rep << "rhs: " << describe(problem.rhs.spec) << "\n";
        rep << "mesh: n = " << rule.mesh->n() << ", r = " << csv::number(rule.mesh->r()) << ", scheme = "
            << to_string(rule.scheme) << "\n\n";
        rep << "constants:\n  gamma = " << csv::number(consts.gamma) << "\n  mu = " << csv::number(consts.mu)
            << "\n  Lambda = " << csv::number(consts.capital_lambda) << "\n\n";
        rep << "certificates:\n";
        print_certificates(rep, certs);
        rep << "\npicard:\n  converged = " << (result.converged ? "true" : "false")
            << "\n  iterations = " << result.iterations << "\n  final difference = "
            << csv::number(result.history.empty() ? 0.0 : result.history.back()) << "\n";
        if (auto q = result.observed_ratio()) rep << "  observed ratio = " << csv::number(*q) << "\n";
        rep << "\nresiduals:\n  interior (t >= " << csv::number(res.t_cut) << ", " << res.node_count
            << " nodes) = " << csv::number(res.interior_residual) << "\n  boundary (independent quadrature) = "
            << csv::number(res.boundary_residual) << "\n  boundary (closed-form integral) = " << csv::number(defect)
            << "\n";

        log << "gamma = " << csv::number(consts.gamma) << ", mu = " << csv::number(consts.mu) << ", iterations = "
            << result.iterations << (result.converged ? ", converged" : ", NOT converged") << "\n";
        if (!check_mu(consts).holds) {
            log << "error: mu <= 0; positivity hypotheses do not hold\n";
            return kExitSingular;
        }
        if (!result.converged) {
            log << "error: Picard iteration did not reach tol = " << csv::number(cfg.tol) << " in " << cfg.max_iter
                << " iterations\n";
            return kExitNotConverged;
        }
        return kExitOk;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

/// certify: hypothesis_report to certificates.csv.
inline int cmd_certify(const RunConfig& cfg, std::ostream& log) {
    try {
        const HilferProblem problem = cfg.problem();
        const std::vector<Certificate> certs = hypothesis_report(problem, report_options(cfg));
        write_certificates(output_path(cfg, "certificates.csv"), certs);
        print_certificates(log, certs);
        for (const auto& c : certs) {
            if (c.name == "mu" && !c.holds) return kExitSingular;
        }
        for (const auto& c : certs) {
            if (c.evaluable && !c.holds) return kExitFailure;
        }
        return kExitOk;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

/// verify: residuals of a stored solution.csv against the config's problem.
inline int cmd_verify(const RunConfig& cfg, const std::string& solution_path, std::ostream& log) {
    try {
        const csv::Table table = csv::read(solution_path);
        if (table.header != std::vector<std::string>{"t", "w", "y"}) {
            throw Error(ErrorCode::ConfigError, solution_path + ": header must be t,w,y");
        }
        if (table.rows.size() < 5) throw Error(ErrorCode::ConfigError, solution_path + ": too few rows");
        const HilferProblem problem = cfg.problem();
        const DerivedConstants consts = derive_constants(problem);
        const auto mesh = GradedMesh::make(table.rows.size() - 1, cfg.grading());
        std::vector<double> w(table.rows.size());
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double t = config_detail::to_double(table.rows[j][0], j + 2);
            if (std::abs(t - (*mesh)[j]) > 1e-12 * std::max(1.0, std::abs(t))) {
                throw Error(ErrorCode::ConfigError, solution_path + " line " + std::to_string(j + 2) +
                                                        ": node does not match the configured mesh");
            }
            w[j] = config_detail::to_double(table.rows[j][1], j + 2);
        }
        const WeightedGridFunction sol(mesh, consts.gamma, std::move(w));
        const QuadratureRule rule{cfg.scheme, mesh};
        const ResidualReport res = residual_check(problem, consts, sol, rule, cfg.t_cut);
        const double defect = DeltaOperator(problem, consts, rule).boundary_defect(sol);

        csv::Table out{{"metric", "value"}, {}};
        out.rows.push_back({"interior_residual", csv::number(res.interior_residual)});
        out.rows.push_back({"boundary_residual", csv::number(res.boundary_residual)});
        out.rows.push_back({"boundary_defect_closed_form", csv::number(defect)});
        out.rows.push_back({"t_cut", csv::number(res.t_cut)});
        out.rows.push_back({"node_count", std::to_string(res.node_count)});
        out.rows.push_back({"min_w", csv::number(*std::min_element(sol.values().begin(), sol.values().end()))});
        csv::write(output_path(cfg, "verify.csv").string(), out);
        for (const auto& r : out.rows) log << r[0] << " = " << r[1] << "\n";
        return kExitOk;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

/**
 * Quadrature tables keyed on (alpha, gamma, n, r, scheme). Concurrent
 * requests for the same key wait on a single construction.
 */
class TableCache {
public:
    DeltaTables get(const MeshPtr& mesh, double alpha, double gamma, Scheme scheme) {
        const Key key{alpha, gamma, mesh->n(), mesh->r(), static_cast<int>(scheme)};
        std::promise<DeltaTables> promise;
        std::shared_future<DeltaTables> fut;
        bool build = false;
        {
            std::lock_guard lock(mutex_);
            auto it = entries_.find(key);
            if (it == entries_.end()) {
                fut = promise.get_future().share();
                entries_.emplace(key, fut);
                build = true;
            } else {
                fut = it->second;
            }
        }
        if (build) {
            try {
                promise.set_value(DeltaTables::build(mesh, alpha, gamma, scheme));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return fut.get();
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    using Key = std::tuple<double, double, std::size_t, double, int>;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_future<DeltaTables>> entries_;
};

inline void set_parameter(RunConfig& cfg, const std::string& param, double v) {
    if (param == "alpha") cfg.alpha = v;
    else if (param == "beta") cfg.beta = v;
    else if (param == "lambda") cfg.lambda = v;
    else if (param == "d") cfg.d = v;
    else if (param == "lipschitz") cfg.lipschitz = v;
    else throw Error(ErrorCode::ConfigError, "unknown sweep parameter '" + param + "'");
}

inline std::vector<std::string> sweep_header(const RunConfig& cfg) {
    std::vector<std::string> h;
    for (const auto& ax : cfg.axes) h.push_back(ax.param);
    for (const char* c : {"gamma", "mu", "contraction_value", "contraction_holds", "status", "converged",
                          "iterations", "interior_residual", "boundary_residual", "boundary_defect", "min_w"}) {
        h.emplace_back(c);
    }
    return h;
}

/// One sweep cell; failures become a status string, never an exception.
inline std::vector<std::string> sweep_cell(RunConfig cfg, const std::vector<double>& values, TableCache& cache) {
    std::vector<std::string> row;
    for (std::size_t k = 0; k < values.size(); ++k) {
        set_parameter(cfg, cfg.axes[k].param, values[k]);
        row.push_back(csv::number(values[k]));
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double gamma = nan, mu = nan, cval = nan, interior = nan, boundary = nan, defect = nan, min_w = nan;
    std::string chold = "not evaluable", status = "ok", converged = "false";
    std::size_t iterations = 0;
    try {
        const HilferProblem problem = cfg.problem();
        const DerivedConstants consts = compute_constants(problem);
        gamma = consts.gamma;
        mu = consts.mu;
        if (!(std::abs(mu) >= kMuThreshold)) throw Error(ErrorCode::SingularProblem, "mu = 0");
        if (mu > 0.0) {
            if (auto lip = resolve_lipschitz(problem, report_options(cfg))) {
                const Certificate c = contraction_certificate(consts, problem.alpha, problem.lambda, lip->value);
                cval = c.value;
                chold = c.holds ? "true" : "false";
            }
        }
        const auto mesh = GradedMesh::make(cfg.mesh_n, cfg.grading());
        const DeltaOperator op(problem, consts, cache.get(mesh, problem.alpha, consts.gamma, cfg.scheme));
        const SolveResult r = solve_picard(op, cfg.picard());
        converged = r.converged ? "true" : "false";
        iterations = r.iterations;
        if (!r.converged) status = "not_converged";
        else if (!(mu > 0.0)) status = "mu_nonpositive";
        min_w = *std::min_element(r.solution.values().begin(), r.solution.values().end());
        defect = op.boundary_defect(r.solution);
        if (cfg.sweep_residuals) {
            const ResidualReport res =
                residual_check(problem, consts, r.solution, QuadratureRule{cfg.scheme, mesh}, cfg.t_cut);
            interior = res.interior_residual;
            boundary = res.boundary_residual;
        }
    } catch (const Error& e) {
        status = e.code() == ErrorCode::SingularProblem ? "singular" : "error:" + std::string(to_string(e.code()));
    } catch (const std::exception&) {
        status = "error:exception";
    }
    for (double v : {gamma, mu, cval}) row.push_back(csv::number(v));
    row.push_back(chold);
    row.push_back(status);
    row.push_back(converged);
    row.push_back(std::to_string(iterations));
    for (double v : {interior, boundary, defect, min_w}) row.push_back(csv::number(v));
    return row;
}

/// sweep: grid over up to two axes, outer axis major, rows in grid order.
inline csv::Table run_sweep(const RunConfig& cfg, TableCache& cache) {
    if (cfg.axes.empty()) throw Error(ErrorCode::ConfigError, "sweep needs at least one axis");
    std::vector<std::vector<double>> cells;
    const SweepAxis& outer = cfg.axes[0];
    for (std::size_t i = 0; i < outer.steps; ++i) {
        if (cfg.axes.size() == 1) {
            cells.push_back({outer.value(i)});
            continue;
        }
        for (std::size_t j = 0; j < cfg.axes[1].steps; ++j) cells.push_back({outer.value(i), cfg.axes[1].value(j)});
    }

    csv::Table table{sweep_header(cfg), std::vector<std::vector<std::string>>(cells.size())};
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < cells.size(); k = next++) table.rows[k] = sweep_cell(cfg, cells[k], cache);
    };
    const std::size_t nthreads = std::max<std::size_t>(1, std::min(cfg.workers, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < nthreads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return table;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
    try {
        TableCache cache;
        const csv::Table table = run_sweep(cfg, cache);
        csv::write(output_path(cfg, "sweep.csv").string(), table);
        log << table.rows.size() << " cells, " << cache.size() << " quadrature table(s)\n";
        return kExitOk;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace hilfer
