#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hilfer/commands.hpp"

namespace {

struct Overrides {
    std::optional<std::size_t> mesh_n;
    std::optional<double> mesh_r;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter;
    std::optional<std::size_t> workers;
    std::optional<std::string> output_dir;

    void apply(hilfer::RunConfig& cfg) const {
        if (mesh_n) cfg.mesh_n = *mesh_n;
        if (mesh_r) cfg.mesh_r = *mesh_r;
        if (tol) cfg.tol = *tol;
        if (max_iter) cfg.max_iter = *max_iter;
        if (workers) cfg.workers = *workers;
        if (output_dir) cfg.output_dir = *output_dir;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hilfer fractional boundary-value problem solver"};
    app.require_subcommand(1);

    Overrides ov;
    app.add_option("--mesh-n", ov.mesh_n, "number of mesh intervals")->check(CLI::Range(4, 1 << 20));
    app.add_option("--mesh-r", ov.mesh_r, "mesh grading exponent (>= 1)")->check(CLI::Range(1.0, 100.0));
    app.add_option("--tol", ov.tol, "Picard stopping tolerance")->check(CLI::PositiveNumber);
    app.add_option("--max-iter", ov.max_iter, "Picard iteration cap")->check(CLI::Range(1, 1000000));
    app.add_option("--workers", ov.workers, "concurrent sweep cells")->check(CLI::Range(1, 1024));
    app.add_option("--output-dir", ov.output_dir, "directory for output files");
    // Global options may follow the subcommand as well as precede it.
    app.fallthrough();

    std::string config_path;
    std::string solution_path;
    auto* solve = app.add_subcommand("solve", "solve the problem; writes solution.csv and report.txt");
    auto* certify = app.add_subcommand("certify", "check hypotheses; writes certificates.csv");
    auto* sweep = app.add_subcommand("sweep", "parameter sweep; writes sweep.csv");
    auto* verify = app.add_subcommand("verify", "residuals of a stored solution; writes verify.csv");
    for (auto* sub : {solve, certify, sweep, verify}) {
        sub->add_option("config", config_path, "problem configuration file")->required();
    }
    verify->add_option("solution", solution_path, "solution.csv produced by solve")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : hilfer::kExitConfig;
    }

    hilfer::RunConfig cfg;
    try {
        cfg = hilfer::load_config(config_path);
        ov.apply(cfg);
    } catch (const hilfer::Error& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return hilfer::kExitConfig;
    }

    if (*solve) return hilfer::cmd_solve(cfg, std::cerr);
    if (*certify) return hilfer::cmd_certify(cfg, std::cerr);
    if (*sweep) return hilfer::cmd_sweep(cfg, std::cerr);
    return hilfer::cmd_verify(cfg, solution_path, std::cerr);
}
