// Experiment harness: runs COMET / FISTA / AMGS on synthetic or LIBSVM
// problems and writes plot-ready CSV traces.

#include "comet/comet.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

void print_summary(const comet::ExperimentSummary& s, const comet::ExperimentConfig& cfg) {
    std::printf("%-10s %-14s %8s %10s %14s %14s %8s %8s\n", "solver", "status", "iters", "to_target", "final_gap",
                "final_dist", "prox", "grad");
    for (const auto& o : s.solvers) {
        const std::string target = o.iters_to_target ? std::to_string(*o.iters_to_target) : "-";
        std::printf("%-10s %-14s %8zu %10s %14.6e %14.6e %8zu %8zu\n", o.label.c_str(), o.status.c_str(),
                    o.iterations, target.c_str(), o.final_gap.value_or(std::nan("")),
                    o.final_dist.value_or(std::nan("")), o.prox_calls, o.grad_calls);
        if (o.bounds) {
            for (const auto& c : o.bounds->checks) {
                std::printf("    %-12s %s", c.name.c_str(), comet::to_string(c.status).c_str());
                if (c.first_violation) {
                    std::printf(" (first violation k=%zu, %zu total)", *c.first_violation, c.violations);
                }
                std::printf("\n");
            }
        }
    }
    for (const auto& [k, v] : s.meta) {
        if (k.ends_with(".error") || k == "reference") {
            std::printf("%s: %s\n", k.c_str(), v.c_str());
        }
    }
    if (!cfg.out_dir.empty()) {
        std::printf("traces written to %s\n", cfg.out_dir.c_str());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"COMET benchmark harness"};
    app.set_config("--config", "", "Key-value config file (CLI flags override it)");

    comet::ExperimentConfig cfg;
    std::vector<std::string> solvers;
    std::string loss = "quadratic";
    std::optional<double> L0;
    std::optional<double> mu;
    std::optional<long long> n_override;
    std::optional<long long> subset_rows;
    std::optional<long long> subset_cols;
    long long m = cfg.m;

    app.add_option("--problem", cfg.problem, "synthetic | libsvm")->capture_default_str();
    app.add_option("--data", cfg.data_path, "LIBSVM file (problem=libsvm)");
    app.add_option("--loss", loss, "quadratic | logistic")->capture_default_str();
    app.add_option("--n", n_override, "Column count for LIBSVM data (>= largest index)");
    app.add_option("--subset-rows", subset_rows, "Keep only the first N rows of the LIBSVM data");
    app.add_option("--subset-cols", subset_cols, "Keep only the first N columns of the LIBSVM data");
    app.add_option("--m", m, "Synthetic problem size")->capture_default_str();
    app.add_option("--xi", cfg.xi, "Synthetic conditioning exponent")->capture_default_str();
    app.add_option("--lambda", cfg.lambda, "Squared-l2 weight")->capture_default_str();
    app.add_option("--tau", cfg.tau, "l1 weight")->capture_default_str();
    app.add_option("--solver", solvers, "comet | comet1 | comet2 | comet3 | fista | amgs (repeatable)");
    app.add_option("--L0", L0, "Initial Lipschitz estimate (absolute)");
    app.add_option("--L0-mult", cfg.L0_mult, "Initial Lipschitz estimate as a multiple of L_hat")->capture_default_str();
    app.add_option("--gamma0-variant", cfg.gamma0_variant, "COMET gamma0 variant for --solver comet")
        ->check(CLI::IsMember({1, 2, 3}))
        ->capture_default_str();
    app.add_option("--mu", mu, "Strong convexity passed to the solvers (default: problem mu_hat)");
    app.add_option("--eta-u", cfg.eta_u, "Backtracking increase factor")->capture_default_str();
    app.add_option("--eta-d", cfg.eta_d, "Backtracking decrease factor")->capture_default_str();
    app.add_option("--tol", cfg.tol, "Stopping tolerance on ||y - T_L(y)|| / (1 + ||x||)")->capture_default_str();
    app.add_option("--max-iters", cfg.max_iters, "Iteration cap per solver")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Seed for data generation and x0")->capture_default_str();
    app.add_option("--target-dist", cfg.target_dist, "Distance to x* counted as converged")->capture_default_str();
    app.add_option("--out", cfg.out_dir, "Output directory for CSV traces");
    app.add_flag("--timing", cfg.timing, "Record wall-clock times (traces are then not reproducible)");
    app.add_flag("--verify", cfg.verify, "Check COMET traces against the convergence bounds");

    CLI11_PARSE(app, argc, argv);

    cfg.m = static_cast<comet::Index>(m);
    cfg.L0 = L0;
    cfg.mu = mu;
    if (n_override) {
        cfg.n_override = static_cast<comet::Index>(*n_override);
    }
    if (subset_rows) {
        cfg.subset_rows = static_cast<comet::Index>(*subset_rows);
    }
    if (subset_cols) {
        cfg.subset_cols = static_cast<comet::Index>(*subset_cols);
    }
    if (loss == "quadratic") {
        cfg.loss = comet::Loss::quadratic;
    } else if (loss == "logistic") {
        cfg.loss = comet::Loss::logistic;
    } else {
        std::cerr << "error: unknown loss '" << loss << "'\n";
        return 2;
    }
    for (const auto& s : solvers) {
        cfg.solvers.push_back({s, {}, {}, {}, {}});
    }

    try {
        const auto summary = comet::run_experiment(cfg);
        print_summary(summary, cfg);
        return summary.ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
