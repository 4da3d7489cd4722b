#pragma once

#include "comet/estseq.hpp"
#include "comet/mapping.hpp"
#include "comet/problem.hpp"
#include "comet/types.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace comet {

enum class Method { comet, fista, amgs };

inline std::string to_string(Method m) {
    switch (m) {
    case Method::comet:
        return "comet";
    case Method::fista:
        return "fista";
    case Method::amgs:
        return "amgs";
    }
    return "unknown";
}

struct SolverConfig {
    Method method = Method::comet;
    Vector x0;
    double L0 = 1.0;
    double gamma0 = 0.0;  // COMET only
    double mu = 0.0;      // strong convexity handed to the solver; may differ from the problem's
    double eta_u = 2.0;
    double eta_d = 0.9;
    double tol = 1e-10;
    std::size_t max_iters = 10000;
    /// Minimizer used to fill the gap/dist trace columns.
    std::optional<Vector> ref_solution;
    /// F(x*); computed from ref_solution when absent.
    std::optional<double> ref_objective;
    /// Record wall-clock time per iteration (off keeps traces reproducible).
    bool timing = false;
    /// Upper limit on backtracking passes within one outer iteration.
    std::size_t max_backtracks = 200;

    void validate(Index n) const {
        require_dim(x0, n, "SolverConfig.x0");
        if (!(L0 > 0.0)) {
            throw InvalidInput("L0 must be positive");
        }
        if (!(eta_u > 1.0)) {
            throw InvalidInput("eta_u must be > 1");
        }
        if (!(eta_d > 0.0 && eta_d < 1.0)) {
            throw InvalidInput("eta_d must lie in (0, 1)");
        }
        if (!(mu >= 0.0)) {
            throw InvalidInput("mu must be nonnegative");
        }
        if (!(tol > 0.0)) {
            throw InvalidInput("tol must be positive");
        }
        if (max_iters == 0) {
            throw InvalidInput("max_iters must be positive");
        }
        if (method == Method::comet) {
            if (!(gamma0 >= 0.0) || gamma0 > 3.0 * L0 + mu) {
                throw InvalidInput("gamma0 must lie in [0, 3 L0 + mu]");
            }
            if (gamma0 == 0.0 && mu == 0.0) {
                throw DegenerateConfiguration("gamma0 = 0 together with mu = 0 makes alpha identically 0");
            }
        }
        if (ref_solution) {
            require_dim(*ref_solution, n, "SolverConfig.ref_solution");
        }
    }
};

struct IterationRecord {
    std::size_t k = 0;
    double objective = 0.0;
    std::optional<double> gap;
    std::optional<double> dist;
    double L = 0.0;
    std::optional<double> lambda;
    std::optional<double> alpha;
    std::optional<double> gamma;
    std::optional<double> phi_star;
    std::size_t prox_calls = 0;
    std::size_t grad_calls = 0;
    /// Mapping passes (trial constants) spent on this iteration.
    std::size_t passes = 0;
    /// ||r_L(y)|| / L of the accepted mapping.
    std::optional<double> step_norm;
    std::optional<double> elapsed;
};

enum class Termination { tolerance_met, max_iters, error };

inline std::string to_string(Termination t) {
    switch (t) {
    case Termination::tolerance_met:
        return "tolerance-met";
    case Termination::max_iters:
        return "max-iters";
    case Termination::error:
        return "error";
    }
    return "unknown";
}

struct SolveResult {
    Method method = Method::comet;
    Vector x_final;
    std::vector<IterationRecord> records;
    Termination termination = Termination::max_iters;
    std::string message;
};

namespace detail {

class Tracker {
public:
    Tracker(const CompositeProblem& p, const SolverConfig& cfg) : cfg_(cfg), start_(Clock::now()) {
        if (cfg.ref_solution) {
            F_star_ = cfg.ref_objective ? *cfg.ref_objective : eval_F(p, *cfg.ref_solution);
        }
    }

    IterationRecord record(std::size_t k, const Vector& x, double F_x) const {
        IterationRecord rec;
        rec.k = k;
        rec.objective = F_x;
        if (cfg_.ref_solution) {
            rec.gap = F_x - *F_star_;
            rec.dist = (x - *cfg_.ref_solution).norm();
        }
        rec.prox_calls = prox_calls;
        rec.grad_calls = grad_calls;
        if (cfg_.timing) {
            rec.elapsed = std::chrono::duration<double>(Clock::now() - start_).count();
        }
        return rec;
    }

    std::size_t prox_calls = 0;
    std::size_t grad_calls = 0;

private:
    using Clock = std::chrono::steady_clock;
    const SolverConfig& cfg_;
    Clock::time_point start_;
    std::optional<double> F_star_;
};

inline bool finite(const Vector& x) { return x.allFinite(); }

/// Smallest admissible trial constant: the shifted prox needs tau * shift / L < 1.
inline double admissible_L(const CompositeProblem& p, double L, double eta_u) {
    const double floor = p.tau() * p.reg.shift;
    while (floor > 0.0 && !(L > floor)) {
        L *= eta_u;
    }
    return L;
}

inline bool converged(const MappingResult& m, const Vector& x, double tol) {
    return (m.y - m.T).norm() <= tol * (1.0 + x.norm());
}

inline SolveResult fail(SolveResult res, Method method, const Vector& x, std::string why) {
    res.method = method;
    res.x_final = x;
    res.termination = Termination::error;
    res.message = std::move(why);
    return res;
}

} // namespace detail

/// Accelerated composite estimating-sequence method with two-sided backtracking.
///
/// Each outer iteration starts from the trial constant eta_d * L_k; every
/// inner pass recomputes alpha, gamma, y, the mapping and v for that trial
/// and is accepted once F(T) <= m_L(y; T), otherwise the trial grows by
/// eta_u. One gradient and one prox evaluation per pass.
inline SolveResult comet_solve(const CompositeProblem& p, const SolverConfig& cfg) {
    SolverConfig c = cfg;
    c.method = Method::comet;
    c.validate(p.dim());

    detail::Tracker track(p, c);
    SolveResult res;
    res.method = Method::comet;

    Vector x = c.x0;
    const double F0 = eval_F(p, x);
    if (!std::isfinite(F0)) {
        return detail::fail(std::move(res), Method::comet, x, "non-finite objective at x0");
    }
    ScanningState st = ScanningState::initial(x, F0, c.gamma0, c.L0);
    {
        auto rec = track.record(0, x, F0);
        rec.L = c.L0;
        rec.lambda = st.lambda;
        rec.gamma = st.gamma;
        rec.phi_star = st.phi_star;
        res.records.push_back(std::move(rec));
    }

    const double mu = c.mu;
    for (std::size_t k = 0; k < c.max_iters; ++k) {
        double L = detail::admissible_L(p, c.eta_d * st.L_accepted, c.eta_u);
        double alpha = 0.0;
        double gamma_next = 0.0;
        Vector y;
        Vector v_next;
        MappingResult m;
        std::size_t passes = 0;
        bool accepted = false;
        while (passes < c.max_backtracks) {
            ++passes;
            alpha = alpha_update(st.gamma, mu, L);
            gamma_next = gamma_update(st.gamma, mu, alpha);
            y = y_update(x, st.v, st.gamma, gamma_next, alpha);
            Vector g;
            const double fy = p.smooth.value_and_gradient(y, g);
            ++track.grad_calls;
            m = gradient_map(p, y, fy, g, L);
            ++track.prox_calls;
            if (!std::isfinite(m.objective_at_T) || !detail::finite(m.T)) {
                return detail::fail(std::move(res), Method::comet, x, "non-finite iterate at k=" + std::to_string(k));
            }
            v_next = v_update(st.v, y, m.T, st.gamma, gamma_next, alpha, mu, L);
            if (acceptance_test(p, m)) {
                accepted = true;
                break;
            }
            L *= c.eta_u;
        }
        if (!accepted) {
            return detail::fail(std::move(res), Method::comet, x, "backtracking limit reached at k=" + std::to_string(k));
        }

        const double phi_next = phi_star_update(st, m, alpha, gamma_next, y, mu);
        st.k = k + 1;
        st.phi_star = phi_next;
        st.lambda *= (1.0 - alpha);
        st.alpha_prev = alpha;
        st.gamma = gamma_next;
        st.v = std::move(v_next);
        st.L_accepted = L;
        x = m.T;

        auto rec = track.record(k + 1, x, m.objective_at_T);
        rec.L = L;
        rec.lambda = st.lambda;
        rec.alpha = alpha;
        rec.gamma = st.gamma;
        rec.phi_star = st.phi_star;
        rec.passes = passes;
        rec.step_norm = (m.y - m.T).norm();
        res.records.push_back(std::move(rec));

        if (detail::converged(m, x, c.tol)) {
            res.termination = Termination::tolerance_met;
            break;
        }
    }
    res.x_final = x;
    return res;
}

/// FISTA with backtracking that only ever increases L.
///
/// t_1 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2,
/// y_{k+1} = x_k + ((t_k - 1)/t_{k+1}) (x_k - x_{k-1}).
inline SolveResult fista_solve(const CompositeProblem& p, const SolverConfig& cfg) {
    SolverConfig c = cfg;
    c.method = Method::fista;
    c.validate(p.dim());

    detail::Tracker track(p, c);
    SolveResult res;
    res.method = Method::fista;

    Vector x = c.x0;
    Vector y = x;
    double t = 1.0;
    double L = detail::admissible_L(p, c.L0, c.eta_u);
    const double F0 = eval_F(p, x);
    {
        auto rec = track.record(0, x, F0);
        rec.L = L;
        res.records.push_back(std::move(rec));
    }

    for (std::size_t k = 0; k < c.max_iters; ++k) {
        Vector g;
        const double fy = p.smooth.value_and_gradient(y, g);
        ++track.grad_calls;
        MappingResult m;
        std::size_t passes = 0;
        bool accepted = false;
        while (passes < c.max_backtracks) {
            ++passes;
            m = gradient_map(p, y, fy, g, L);
            ++track.prox_calls;
            if (!std::isfinite(m.objective_at_T) || !detail::finite(m.T)) {
                return detail::fail(std::move(res), Method::fista, x, "non-finite iterate at k=" + std::to_string(k));
            }
            if (acceptance_test(p, m)) {
                accepted = true;
                break;
            }
            L *= c.eta_u;
        }
        if (!accepted) {
            return detail::fail(std::move(res), Method::fista, x, "backtracking limit reached at k=" + std::to_string(k));
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const Vector x_next = m.T;
        y = x_next + ((t - 1.0) / t_next) * (x_next - x);
        x = x_next;
        t = t_next;

        auto rec = track.record(k + 1, x, m.objective_at_T);
        rec.L = L;
        rec.passes = passes;
        rec.step_norm = (m.y - m.T).norm();
        res.records.push_back(std::move(rec));

        if (detail::converged(m, x, c.tol)) {
            res.termination = Termination::tolerance_met;
            break;
        }
    }
    res.x_final = x;
    return res;
}

/// Accelerated multistep gradient scheme (dual averaging with line search).
///
/// psi_k(x) = (1/2)||x - x0||^2
///          + sum_i a_i [fhat(x_i) + grad fhat(x_i)^T (x - x_i) + (mu/2)||x - x_i||^2 + tau ghat(x)]
/// v_k = argmin psi_k is one prox solve; each trial constant L costs another
/// (T_L(y)) plus gradients at y and at T_L(y). The trial is accepted by the
/// cocoercivity test on those two gradients, and the gradient at the accepted
/// point feeds the psi update.
inline SolveResult amgs_solve(const CompositeProblem& p, const SolverConfig& cfg) {
    SolverConfig c = cfg;
    c.method = Method::amgs;
    c.validate(p.dim());

    detail::Tracker track(p, c);
    SolveResult res;
    res.method = Method::amgs;

    const double mu = c.mu;
    Vector x = c.x0;
    double A = 0.0;
    // psi_k(x) = ((1 + mu A)/2)||x||^2 - center_sum^T x + A tau ghat(x) + const
    Vector center_sum = c.x0;
    double L = detail::admissible_L(p, c.L0, c.eta_u);
    const double F0 = eval_F(p, x);
    {
        auto rec = track.record(0, x, F0);
        rec.L = L;
        res.records.push_back(std::move(rec));
    }

    for (std::size_t k = 0; k < c.max_iters; ++k) {
        const double curv = 1.0 + mu * A;
        Vector v = center_sum / curv;
        if (A > 0.0 && !p.reg.is_null()) {
            v = prox(p.reg, v, A * p.tau() / curv);
        }
        ++track.prox_calls;

        L = detail::admissible_L(p, L, c.eta_u);
        MappingResult m;
        Vector gT;
        double a = 0.0;
        std::size_t passes = 0;
        bool accepted = false;
        while (passes < c.max_backtracks) {
            ++passes;
            // a^2 / (A + a) = 2 (1 + mu A) / L
            a = (curv + std::sqrt(curv * curv + 2.0 * L * curv * A)) / L;
            const Vector y = (A * x + a * v) / (A + a);
            Vector g;
            const double fy = p.smooth.value_and_gradient(y, g);
            ++track.grad_calls;
            m = gradient_map(p, y, fy, g, L);
            ++track.prox_calls;
            if (!std::isfinite(m.objective_at_T) || !detail::finite(m.T)) {
                return detail::fail(std::move(res), Method::amgs, x, "non-finite iterate at k=" + std::to_string(k));
            }
            // Accept when phi'(T) = grad(T) - grad(y) + L (y - T) satisfies
            // <phi'(T), y - T> >= ||phi'(T)||^2 / L, i.e. the cocoercivity
            // inequality L <y - T, grad(y) - grad(T)> >= ||grad(y) - grad(T)||^2.
            p.smooth.value_and_gradient(m.T, gT);
            ++track.grad_calls;
            const Vector w = g - gT;
            if (L * (y - m.T).dot(w) >= w.squaredNorm()) {
                accepted = true;
                break;
            }
            L *= c.eta_u;
        }
        if (!accepted) {
            return detail::fail(std::move(res), Method::amgs, x, "backtracking limit reached at k=" + std::to_string(k));
        }

        x = m.T;
        center_sum += a * (mu * x - gT);
        A += a;

        auto rec = track.record(k + 1, x, m.objective_at_T);
        rec.L = L;
        rec.passes = passes;
        rec.step_norm = (m.y - m.T).norm();
        res.records.push_back(std::move(rec));

        if (detail::converged(m, x, c.tol)) {
            res.termination = Termination::tolerance_met;
            break;
        }
        L *= c.eta_d;
    }
    res.x_final = x;
    return res;
}

inline SolveResult solve(const CompositeProblem& p, const SolverConfig& cfg) {
    switch (cfg.method) {
    case Method::comet:
        return comet_solve(p, cfg);
    case Method::fista:
        return fista_solve(p, cfg);
    case Method::amgs:
        return amgs_solve(p, cfg);
    }
    throw InvalidInput("unknown method");
}

/// Fraction of L0 used as gamma_0 when variant 1 meets mu = 0.
inline constexpr double kVariant1GammaFraction = 1e-3;

/// gamma_0 for COMET variant 1 (0), 2 (3 L0 + mu) or 3 (mu).
/// Variant 1 with mu = 0 would stall, so it falls back to 1e-3 * L0;
/// `substituted` reports when that happened.
inline double variant_gamma0(int variant, double L0, double mu, bool* substituted = nullptr) {
    if (substituted) {
        *substituted = false;
    }
    switch (variant) {
    case 1:
        if (mu == 0.0) {
            if (substituted) {
                *substituted = true;
            }
            return kVariant1GammaFraction * L0;
        }
        return 0.0;
    case 2:
        return 3.0 * L0 + mu;
    case 3:
        if (mu == 0.0) {
            throw DegenerateConfiguration("COMET variant 3 needs mu > 0 (gamma0 = mu)");
        }
        return mu;
    default:
        throw InvalidInput("COMET variant must be 1, 2 or 3");
    }
}

/// COMET runs for variants 1, 2 and 3 from the same x0.
inline std::vector<SolveResult> run_variants(const CompositeProblem& p, const SolverConfig& base) {
    std::vector<SolveResult> out;
    for (int variant = 1; variant <= 3; ++variant) {
        SolverConfig c = base;
        c.method = Method::comet;
        c.gamma0 = variant_gamma0(variant, c.L0, c.mu);
        out.push_back(comet_solve(p, c));
    }
    return out;
}

} // namespace comet
