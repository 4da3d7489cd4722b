#pragma once

#include "comet/dataset.hpp"
#include "comet/estseq.hpp"
#include "comet/problem.hpp"
#include "comet/reference.hpp"
#include "comet/solvers.hpp"
#include "comet/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace comet {

/// One solver column of an experiment. Unset fields inherit the experiment defaults.
struct SolverSpec {
    std::string name;  // comet, comet1, comet2, comet3, fista, amgs
    std::optional<double> L0;
    std::optional<double> L0_mult;
    std::optional<double> mu;
    std::optional<int> gamma0_variant;
};

struct ExperimentConfig {
    std::string problem = "synthetic";  // synthetic | libsvm
    Index m = 500;
    int xi = 3;
    std::string data_path;
    Loss loss = Loss::quadratic;
    std::optional<Index> n_override;
    std::optional<Index> subset_rows;
    std::optional<Index> subset_cols;

    double lambda = 1e-3;
    double tau = 1e-3;
    std::vector<SolverSpec> solvers;

    std::optional<double> L0;
    double L0_mult = 1.0;
    std::optional<double> mu;
    int gamma0_variant = 1;
    double eta_u = 2.0;
    double eta_d = 0.9;
    double tol = 1e-12;
    std::size_t max_iters = 5000;
    std::uint64_t seed = 1;
    double target_dist = 1e-6;
    double reference_tol = 1e-12;
    bool timing = false;
    bool verify = false;
    std::string out_dir;

    void validate() const {
        if (solvers.empty()) {
            throw InvalidInput("experiment needs at least one solver");
        }
        if (!(lambda >= 0.0) || !(tau >= 0.0)) {
            throw InvalidInput("lambda and tau must be nonnegative");
        }
        if (problem != "synthetic" && problem != "libsvm") {
            throw InvalidInput("problem must be 'synthetic' or 'libsvm', got '" + problem + "'");
        }
        if (problem == "libsvm" && data_path.empty()) {
            throw InvalidInput("libsvm problems need a data path");
        }
        if (!(target_dist > 0.0)) {
            throw InvalidInput("target distance must be positive");
        }
        for (const auto& s : solvers) {
            static const std::vector<std::string> known{"comet", "comet1", "comet2", "comet3", "fista", "amgs"};
            if (std::find(known.begin(), known.end(), s.name) == known.end()) {
                throw InvalidInput("unknown solver '" + s.name + "'");
            }
        }
    }
};

// ---------------------------------------------------------------- CSV output

namespace detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt17(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

} // namespace detail

inline constexpr const char* kCsvHeader = "k,objective,gap,dist,L_k,lambda_k,alpha_k,prox_calls,grad_calls,elapsed_s";

inline void write_csv(std::ostream& out, const SolveResult& result) {
    out << kCsvHeader << '\n';
    for (const auto& r : result.records) {
        out << r.k << ',' << detail::fmt17(r.objective) << ',' << detail::fmt17(r.gap) << ','
            << detail::fmt17(r.dist) << ',' << detail::fmt17(r.L) << ',' << detail::fmt17(r.lambda) << ','
            << detail::fmt17(r.alpha) << ',' << r.prox_calls << ',' << r.grad_calls << ','
            << detail::fmt17(r.elapsed) << '\n';
    }
}

inline void emit_csv(const SolveResult& result, const std::filesystem::path& path) {
    if (result.records.empty()) {
        throw InvalidInput("emit_csv: result has no records");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    write_csv(out, result);
    out.flush();
    if (!out) {
        throw Error("write to '" + path.string() + "' failed");
    }
}

/// First k whose dist column is <= target, if any.
inline std::optional<std::size_t> iterations_to(const SolveResult& r, double target) {
    for (const auto& rec : r.records) {
        if (rec.dist && *rec.dist <= target) {
            return rec.k;
        }
    }
    return std::nullopt;
}

// ------------------------------------------------------------ bound checks

enum class CheckStatus { pass, fail, not_applicable };

inline std::string to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::pass:
        return "pass";
    case CheckStatus::fail:
        return "fail";
    case CheckStatus::not_applicable:
        return "n/a";
    }
    return "?";
}

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::not_applicable;
    std::optional<std::size_t> first_violation;
    std::size_t violations = 0;
    std::string note;
};

struct BoundsReport {
    std::vector<CheckResult> checks;

    bool all_pass() const {
        return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == CheckStatus::fail; });
    }
    const CheckResult* find(const std::string& name) const {
        for (const auto& c : checks) {
            if (c.name == name) {
                return &c;
            }
        }
        return nullptr;
    }
};

/// What verify_bounds needs to know about the run beyond its trace.
struct BoundsContext {
    double L0 = 0.0;
    double gamma0 = 0.0;
    double mu = 0.0;        // mu handed to the solver
    double eta_u = 2.0;
    double eta_d = 0.9;
    double L_true = 0.0;    // exact L_fhat
    bool exact_constants = false;
    Vector x_star;
    double F_star = 0.0;
    double F_x0 = 0.0;
    double dist0_sq = 0.0;

    static BoundsContext from(const CompositeProblem& p, const SolverConfig& cfg, const Vector& x_star) {
        BoundsContext b;
        b.L0 = cfg.L0;
        b.gamma0 = cfg.gamma0;
        b.mu = cfg.mu;
        b.eta_u = cfg.eta_u;
        b.eta_d = cfg.eta_d;
        b.L_true = p.L_hat;
        b.exact_constants = p.smooth.diagonal_quadratic().has_value();
        b.x_star = x_star;
        b.F_star = eval_F(p, x_star);
        b.F_x0 = eval_F(p, cfg.x0);
        b.dist0_sq = (cfg.x0 - x_star).squaredNorm();
        return b;
    }
};

namespace detail {

inline void note_violation(CheckResult& c, std::size_t k) {
    if (!c.first_violation) {
        c.first_violation = k;
    }
    ++c.violations;
    c.status = CheckStatus::fail;
}

} // namespace detail

/// Per-iteration checks of a COMET trace against the convergence guarantees:
///   gap_bound     F(x_k) - F* <= lambda_k [F(x0) - F* + (gamma0/2)||x0 - x*||^2]
///   lambda_bound  lambda_k below both the tight and the loose bound of its gamma0 regime
///   L_cap         L_k <= max(eta_d L0, eta_u L_fhat) for k >= 1
///   phi_star      phi*_k >= F(x_k)
/// Traces of other methods report every check as not applicable.
inline BoundsReport verify_bounds(const SolveResult& result, const BoundsContext& ctx) {
    BoundsReport rep;
    CheckResult gapb{"gap_bound"};
    CheckResult lamb{"lambda_bound"};
    CheckResult lcap{"L_cap"};
    CheckResult phis{"phi_star"};

    if (result.method != Method::comet) {
        for (auto* c : {&gapb, &lamb, &lcap, &phis}) {
            c->note = "only defined for COMET traces";
            rep.checks.push_back(*c);
        }
        return rep;
    }

    gapb.status = CheckStatus::pass;
    phis.status = CheckStatus::pass;
    const double initial = ctx.F_x0 - ctx.F_star + 0.5 * ctx.gamma0 * ctx.dist0_sq;
    const double gap_slack = 1e-12 * (1.0 + std::abs(ctx.F_star));
    const bool degenerate = ctx.gamma0 == 0.0 && ctx.mu == 0.0;
    if (ctx.exact_constants && !degenerate) {
        lamb.status = CheckStatus::pass;
        lcap.status = CheckStatus::pass;
    } else {
        lamb.note = lcap.note = ctx.exact_constants ? "gamma0 = mu = 0" : "L_fhat not known exactly";
    }
    const double L_max = std::max(ctx.eta_d * ctx.L0, ctx.eta_u * ctx.L_true);

    for (const auto& r : result.records) {
        const double gap = r.objective - ctx.F_star;
        if (r.lambda && gap > *r.lambda * initial + gap_slack) {
            detail::note_violation(gapb, r.k);
        }
        if (r.phi_star && *r.phi_star < r.objective - 1e-8 * (1.0 + std::abs(r.objective))) {
            detail::note_violation(phis, r.k);
        }
        if (lamb.status != CheckStatus::not_applicable && r.lambda) {
            const auto b = lambda_bound(r.k, ctx.gamma0, ctx.mu, r.L, L_max, ctx.L0);
            const double lam = *r.lambda * (1.0 - 1e-12);
            if (lam > b.tight || lam > b.loose) {
                detail::note_violation(lamb, r.k);
            }
        }
        if (lcap.status != CheckStatus::not_applicable && r.k >= 1 && r.L > L_max * (1.0 + 1e-12)) {
            detail::note_violation(lcap, r.k);
        }
    }
    lamb.note = lamb.status == CheckStatus::not_applicable ? lamb.note
                                                            : (ctx.gamma0 < ctx.mu ? "regime gamma0 < mu"
                                                                                   : "regime gamma0 >= mu");
    rep.checks = {gapb, lamb, lcap, phis};
    return rep;
}

inline void write_report(std::ostream& out, const BoundsReport& rep) {
    for (const auto& c : rep.checks) {
        out << c.name << ": " << to_string(c.status);
        if (c.first_violation) {
            out << " (first violation at k=" << *c.first_violation << ", " << c.violations << " total)";
        }
        if (!c.note.empty()) {
            out << " [" << c.note << "]";
        }
        out << '\n';
    }
}

// -------------------------------------------------------------- experiments

struct SolverOutcome {
    std::string label;
    std::string status;  // termination or error text
    bool ok = false;
    std::size_t iterations = 0;
    std::optional<std::size_t> iters_to_target;
    std::optional<double> final_gap;
    std::optional<double> final_dist;
    std::size_t prox_calls = 0;
    std::size_t grad_calls = 0;
    std::optional<double> wall_s;
    std::optional<BoundsReport> bounds;
    SolveResult result;
    SolverConfig config;
};

struct ExperimentSummary {
    std::vector<SolverOutcome> solvers;
    std::map<std::string, std::string> meta;
    bool ok = true;
};

namespace detail {

inline std::string solver_label(const SolverSpec& s, int variant) {
    if (s.name == "fista" || s.name == "amgs") {
        return s.name;
    }
    return "comet-v" + std::to_string(variant);
}

inline int solver_variant(const SolverSpec& s, const ExperimentConfig& cfg) {
    if (s.name == "comet1") {
        return 1;
    }
    if (s.name == "comet2") {
        return 2;
    }
    if (s.name == "comet3") {
        return 3;
    }
    return s.gamma0_variant.value_or(cfg.gamma0_variant);
}

inline void write_summary(std::ostream& out, const ExperimentSummary& s, bool timing) {
    out << "solver,status,iterations,iters_to_target,final_gap,final_dist,prox_calls,grad_calls,wall_s\n";
    for (const auto& o : s.solvers) {
        out << o.label << ',' << o.status << ',' << o.iterations << ','
            << (o.iters_to_target ? std::to_string(*o.iters_to_target) : std::string()) << ','
            << fmt17(o.final_gap) << ',' << fmt17(o.final_dist) << ',' << o.prox_calls << ',' << o.grad_calls
            << ',' << (timing ? fmt17(o.wall_s) : std::string()) << '\n';
    }
}

} // namespace detail

/// Builds the problem, computes x*, runs every configured solver from one
/// shared random x0, and (when out_dir is set) writes <label>.csv per
/// solver, summary.csv, metadata.txt and, with `verify`, <label>.bounds.txt.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentSummary summary;
    auto& meta = summary.meta;

    std::filesystem::path out_dir;
    if (!cfg.out_dir.empty()) {
        out_dir = cfg.out_dir;
        std::filesystem::create_directories(out_dir);
        std::ofstream probe(out_dir / "metadata.txt");
        if (!probe) {
            throw InvalidInput("output directory '" + cfg.out_dir + "' is not writable");
        }
    }

    Dataset data;
    if (cfg.problem == "synthetic") {
        data = gen_diagonal_quadratic(cfg.m, cfg.xi, cfg.seed);
    } else {
        data = parse_libsvm_file(cfg.data_path, cfg.n_override);
        if (cfg.subset_rows || cfg.subset_cols) {
            data = take_subset(data, cfg.subset_rows.value_or(data.rows()), cfg.subset_cols.value_or(data.cols()));
        }
    }
    for (const auto& [k, v] : data.meta) {
        meta["data." + k] = v;
    }
    meta["data.rows"] = std::to_string(data.rows());
    meta["data.cols"] = std::to_string(data.cols());

    const bool quadratic = cfg.problem == "synthetic" || cfg.loss == Loss::quadratic;
    const SmoothOracle f = quadratic ? quadratic_oracle(data, cfg.lambda) : logistic_oracle(data, cfg.lambda);
    const CompositeProblem p = make_problem(f, Regularizer::l1(cfg.tau));
    meta["loss"] = quadratic ? "quadratic" : "logistic";
    meta["lambda"] = detail::fmt17(cfg.lambda);
    meta["tau"] = detail::fmt17(cfg.tau);
    meta["L_hat"] = detail::fmt17(p.L_hat);
    meta["mu_hat"] = detail::fmt17(p.mu_hat);
    meta["L_exact"] = p.smooth.diagonal_quadratic() ? "yes" : "no (power iteration x1.01)";
    meta["seed"] = std::to_string(cfg.seed);

    std::optional<Vector> x_star;
    try {
        x_star = reference_solution(p, cfg.reference_tol);
        meta["reference"] = p.smooth.diagonal_quadratic() ? "closed form" : "COMET + FISTA cross-check";
        meta["F_star"] = detail::fmt17(eval_F(p, *x_star));
    } catch (const Error& e) {
        meta["reference"] = std::string("unavailable: ") + e.what();
        summary.ok = false;
    }

    // Separate stream from the data generator so x0 does not alias the targets.
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    const Vector x0 = rng.uniform_vector(p.dim(), 0.0, 1.0);

    std::map<std::string, int> seen;
    for (const auto& spec : cfg.solvers) {
        SolverOutcome out;
        const int variant = detail::solver_variant(spec, cfg);
        out.label = detail::solver_label(spec, variant);
        if (const int n = seen[out.label]++; n > 0) {
            out.label += "-" + std::to_string(n + 1);
        }

        SolverConfig sc;
        sc.x0 = x0;
        const double mult = spec.L0_mult.value_or(cfg.L0_mult);
        sc.L0 = spec.L0 ? *spec.L0 : (spec.L0_mult ? mult * p.L_hat : cfg.L0.value_or(mult * p.L_hat));
        sc.mu = spec.mu.value_or(cfg.mu.value_or(p.mu_hat));
        sc.eta_u = cfg.eta_u;
        sc.eta_d = cfg.eta_d;
        sc.tol = cfg.tol;
        sc.max_iters = cfg.max_iters;
        sc.ref_solution = x_star;
        sc.timing = cfg.timing;

        try {
            if (spec.name == "fista") {
                sc.method = Method::fista;
            } else if (spec.name == "amgs") {
                sc.method = Method::amgs;
            } else {
                sc.method = Method::comet;
                bool substituted = false;
                sc.gamma0 = variant_gamma0(variant, sc.L0, sc.mu, &substituted);
                if (substituted) {
                    meta[out.label + ".gamma0_substitution"] =
                        "variant 1 with mu = 0: gamma0 = 1e-3 * L0 = " + detail::fmt17(sc.gamma0);
                }
            }
            meta[out.label + ".L0"] = detail::fmt17(sc.L0);
            meta[out.label + ".mu"] = detail::fmt17(sc.mu);
            if (sc.method == Method::comet) {
                meta[out.label + ".gamma0"] = detail::fmt17(sc.gamma0);
            }

            const auto t0 = std::chrono::steady_clock::now();
            out.result = solve(p, sc);
            out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.config = sc;
            out.ok = out.result.termination != Termination::error;
            out.status = out.ok ? to_string(out.result.termination) : "error";
            if (!out.ok) {
                meta[out.label + ".error"] = out.result.message;
            }
            const auto& last = out.result.records.back();
            out.iterations = last.k;
            out.final_gap = last.gap;
            out.final_dist = last.dist;
            out.prox_calls = last.prox_calls;
            out.grad_calls = last.grad_calls;
            out.iters_to_target = iterations_to(out.result, cfg.target_dist);

            if (!out_dir.empty()) {
                emit_csv(out.result, out_dir / (out.label + ".csv"));
            }
            if (cfg.verify && x_star) {
                out.bounds = verify_bounds(out.result, BoundsContext::from(p, sc, *x_star));
                if (!out_dir.empty()) {
                    std::ofstream rep(out_dir / (out.label + ".bounds.txt"));
                    write_report(rep, *out.bounds);
                }
            }
        } catch (const Error& e) {
            out.ok = false;
            out.status = "error";
            meta[out.label + ".error"] = e.what();
        }
        summary.ok = summary.ok && out.ok;
        summary.solvers.push_back(std::move(out));
    }

    if (!out_dir.empty()) {
        std::ofstream s(out_dir / "summary.csv", std::ios::binary);
        detail::write_summary(s, summary, cfg.timing);
        std::ofstream m(out_dir / "metadata.txt", std::ios::binary);
        for (const auto& [k, v] : meta) {
            m << k << " = " << v << '\n';
        }
    }
    return summary;
}

} // namespace comet
