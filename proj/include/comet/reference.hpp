#pragma once

#include "comet/problem.hpp"
#include "comet/solvers.hpp"
#include "comet/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace comet {

/// Coordinate-wise minimizer of 0.5(a x - b)^2 + (lambda/2)x^2 + tau(l1_w|x| + (l2_w/2)x^2):
///   x* = soft(a b, tau l1_w) / (a^2 + lambda + tau l2_w).
inline Vector diagonal_closed_form(const DiagonalQuadratic& d, const Regularizer& g) {
    const double thr = g.tau * g.l1_weight();
    const double extra = d.lambda + g.tau * g.l2_weight();
    Vector x(d.a.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double ab = d.a[i] * d.b[i];
        const double s = std::abs(ab) > thr ? std::copysign(std::abs(ab) - thr, ab) : 0.0;
        const double denom = d.a[i] * d.a[i] + extra;
        if (!(denom > 0.0)) {
            if (s != 0.0 || ab != 0.0) {
                throw InvalidInput("diagonal_closed_form: unbounded coordinate " + std::to_string(i));
            }
            x[i] = 0.0;
            continue;
        }
        x[i] = s / denom;
    }
    return x;
}

/// High-accuracy minimizer of F.
///
/// Diagonal quadratic problems use the closed form. Everything else runs
/// COMET (gamma_0 = mu) with the problem's own constants down to `tol`, then
/// an independent FISTA run from the same start; the two must agree in
/// objective to 10 tol (relative to 1 + |F|).
inline Vector reference_solution(const CompositeProblem& p, double tol = 1e-12, std::size_t max_iters = 200000) {
    if (!(tol > 0.0)) {
        throw InvalidInput("reference_solution: tol must be positive");
    }
    if (const auto& d = p.smooth.diagonal_quadratic()) {
        // The closed form is stated for the unsplit objective, which split leaves unchanged.
        Regularizer base = p.reg;
        base.shift = 0.0;
        base.anchor.resize(0);
        return diagonal_closed_form(*d, base);
    }

    SolverConfig c;
    c.x0 = Vector::Zero(p.dim());
    c.L0 = std::max(p.L_hat, 1e-12);
    c.mu = p.mu_hat;
    c.gamma0 = p.mu_hat > 0.0 ? p.mu_hat : kVariant1GammaFraction * c.L0;
    c.tol = tol;
    c.max_iters = max_iters;

    c.method = Method::comet;
    const SolveResult primary = comet_solve(p, c);
    if (primary.termination == Termination::error) {
        throw ReferenceUnreliable("reference COMET run failed: " + primary.message);
    }
    c.method = Method::fista;
    const SolveResult check = fista_solve(p, c);
    if (check.termination == Termination::error) {
        throw ReferenceUnreliable("reference FISTA run failed: " + check.message);
    }
    const double F1 = eval_F(p, primary.x_final);
    const double F2 = eval_F(p, check.x_final);
    if (std::abs(F1 - F2) > 10.0 * tol * (1.0 + std::abs(F1))) {
        throw ReferenceUnreliable("reference cross-check disagrees: COMET F=" + std::to_string(F1) +
                                  ", FISTA F=" + std::to_string(F2));
    }
    return F2 < F1 ? check.x_final : primary.x_final;
}

} // namespace comet
