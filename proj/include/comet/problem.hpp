#pragma once

#include "comet/dataset.hpp"
#include "comet/prox.hpp"
#include "comet/types.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace comet {

/// Evaluation backend of a smooth function. Implementations are immutable.
class SmoothModel {
public:
    virtual ~SmoothModel() = default;

    virtual double value(const Vector& x) const = 0;
    virtual double value_and_gradient(const Vector& x, Vector& grad) const = 0;

    /// f(x) - f(y) - grad_y^T (x - y). Overridden where a cancellation-free
    /// form exists; near convergence the naive difference is rounding noise.
    virtual double bregman(const Vector& x, const Vector& y, double f_y, const Vector& grad_y) const {
        return value(x) - f_y - grad_y.dot(x - y);
    }

    /// False when bregman() is the plain difference above.
    virtual bool exact_bregman() const { return false; }
};

/// Closed-form description of 0.5||diag(a) x - b||^2 + (lambda/2)||x||^2,
/// kept so that reference solutions can be computed exactly.
struct DiagonalQuadratic {
    Vector a;
    Vector b;
    double lambda = 0.0;
};

/// Smooth part f of the composite objective with its constants L_f and mu_f.
class SmoothOracle {
public:
    SmoothOracle() = default;
    SmoothOracle(Index n, std::shared_ptr<const SmoothModel> model, double L, double mu)
        : n_(n), model_(std::move(model)), L_(L), mu_(mu) {
        if (n_ <= 0) {
            throw InvalidInput("smooth oracle dimension must be positive");
        }
        if (!(L_ >= 0.0) || !(mu_ >= 0.0) || mu_ > L_) {
            throw InvalidInput("smooth oracle constants must satisfy 0 <= mu <= L");
        }
    }

    Index dim() const { return n_; }
    double lipschitz() const { return L_; }
    double strong_convexity() const { return mu_; }

    double value(const Vector& x) const {
        require_dim(x, n_, "smooth value");
        return model_->value(x);
    }

    Vector gradient(const Vector& x) const {
        Vector g;
        value_and_gradient(x, g);
        return g;
    }

    double value_and_gradient(const Vector& x, Vector& grad) const {
        require_dim(x, n_, "smooth gradient");
        return model_->value_and_gradient(x, grad);
    }

    double bregman(const Vector& x, const Vector& y, double f_y, const Vector& grad_y) const {
        require_dim(x, n_, "smooth bregman");
        return model_->bregman(x, y, f_y, grad_y);
    }

    bool exact_bregman() const { return model_->exact_bregman(); }

    const std::optional<DiagonalQuadratic>& diagonal_quadratic() const { return diag_; }
    void set_diagonal_quadratic(DiagonalQuadratic d) { diag_ = std::move(d); }

    const std::shared_ptr<const SmoothModel>& model() const { return model_; }

private:
    Index n_ = 0;
    std::shared_ptr<const SmoothModel> model_;
    double L_ = 0.0;
    double mu_ = 0.0;
    std::optional<DiagonalQuadratic> diag_;
};

namespace detail {

class FunctionModel final : public SmoothModel {
public:
    using ValueFn = std::function<double(const Vector&)>;
    using GradFn = std::function<Vector(const Vector&)>;

    FunctionModel(ValueFn f, GradFn g) : f_(std::move(f)), g_(std::move(g)) {}

    double value(const Vector& x) const override { return f_(x); }
    double value_and_gradient(const Vector& x, Vector& grad) const override {
        grad = g_(x);
        return f_(x);
    }

private:
    ValueFn f_;
    GradFn g_;
};

class QuadraticLossModel final : public SmoothModel {
public:
    QuadraticLossModel(SparseMatrix A, Vector b, double lambda)
        : A_(std::move(A)), b_(std::move(b)), lambda_(lambda) {}

    double value(const Vector& x) const override {
        return 0.5 * (A_ * x - b_).squaredNorm() + 0.5 * lambda_ * x.squaredNorm();
    }

    double value_and_gradient(const Vector& x, Vector& grad) const override {
        const Vector res = A_ * x - b_;
        grad = A_.transpose() * res + lambda_ * x;
        return 0.5 * res.squaredNorm() + 0.5 * lambda_ * x.squaredNorm();
    }

    double bregman(const Vector& x, const Vector& y, double, const Vector&) const override {
        const Vector d = x - y;
        return 0.5 * (A_ * d).squaredNorm() + 0.5 * lambda_ * d.squaredNorm();
    }
    bool exact_bregman() const override { return true; }

private:
    SparseMatrix A_;
    Vector b_;
    double lambda_;
};

/// softplus(z) = log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// 1 / (1 + e^{-z}) without overflow.
inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

class LogisticLossModel final : public SmoothModel {
public:
    LogisticLossModel(SparseMatrix A, Vector b, double lambda)
        : A_(std::move(A)), b_(std::move(b)), lambda_(lambda), inv_m_(1.0 / static_cast<double>(A_.rows())) {}

    // loss_i = softplus(-b_i a_i^T x)
    double value(const Vector& x) const override {
        const Vector z = b_.cwiseProduct(A_ * x);
        double s = 0.0;
        for (Index i = 0; i < z.size(); ++i) {
            s += softplus(-z[i]);
        }
        return inv_m_ * s + 0.5 * lambda_ * x.squaredNorm();
    }

    double value_and_gradient(const Vector& x, Vector& grad) const override {
        const Vector z = b_.cwiseProduct(A_ * x);
        Vector w(z.size());
        double s = 0.0;
        for (Index i = 0; i < z.size(); ++i) {
            s += softplus(-z[i]);
            w[i] = -b_[i] * sigmoid(-z[i]);
        }
        grad = inv_m_ * (A_.transpose() * w) + lambda_ * x;
        return inv_m_ * s + 0.5 * lambda_ * x.squaredNorm();
    }

    // Per-sample Bregman terms, each formed before summation.
    double bregman(const Vector& x, const Vector& y, double, const Vector&) const override {
        const Vector zx = b_.cwiseProduct(A_ * x);
        const Vector zy = b_.cwiseProduct(A_ * y);
        double s = 0.0;
        for (Index i = 0; i < zx.size(); ++i) {
            const double dz = zx[i] - zy[i];
            if (dz == 0.0) {
                continue;
            }
            // d/dz softplus(-z) = -sigmoid(-z)
            s += (softplus(-zx[i]) - softplus(-zy[i])) + sigmoid(-zy[i]) * dz;
        }
        return inv_m_ * s + 0.5 * lambda_ * (x - y).squaredNorm();
    }

private:
    SparseMatrix A_;
    Vector b_;
    double lambda_;
    double inv_m_;
};

/// f(x) + (c/2)||x - x0||^2
class ShiftedModel final : public SmoothModel {
public:
    ShiftedModel(std::shared_ptr<const SmoothModel> base, double c, Vector x0)
        : base_(std::move(base)), c_(c), x0_(std::move(x0)) {}

    double value(const Vector& x) const override { return base_->value(x) + 0.5 * c_ * (x - x0_).squaredNorm(); }

    double value_and_gradient(const Vector& x, Vector& grad) const override {
        const double v = base_->value_and_gradient(x, grad);
        grad += c_ * (x - x0_);
        return v + 0.5 * c_ * (x - x0_).squaredNorm();
    }

    double bregman(const Vector& x, const Vector& y, double f_y, const Vector& grad_y) const override {
        // The base term needs the base value/gradient at y; recover them from the shifted ones.
        const double base_f_y = f_y - 0.5 * c_ * (y - x0_).squaredNorm();
        const Vector base_g_y = grad_y - c_ * (y - x0_);
        return base_->bregman(x, y, base_f_y, base_g_y) + 0.5 * c_ * (x - y).squaredNorm();
    }
    bool exact_bregman() const override { return base_->exact_bregman(); }

private:
    std::shared_ptr<const SmoothModel> base_;
    double c_;
    Vector x0_;
};

} // namespace detail

/// Oracle from plain callables; handy for tests and small examples.
inline SmoothOracle make_smooth_oracle(Index n, std::function<double(const Vector&)> f,
                                       std::function<Vector(const Vector&)> grad, double L, double mu) {
    return SmoothOracle(n, std::make_shared<detail::FunctionModel>(std::move(f), std::move(grad)), L, mu);
}

/// f(x) = (c/2)||x - center||^2.
inline SmoothOracle isotropic_quadratic(const Vector& center, double c) {
    return make_smooth_oracle(
        center.size(), [center, c](const Vector& x) { return 0.5 * c * (x - center).squaredNorm(); },
        [center, c](const Vector& x) -> Vector { return c * (x - center); }, c, c);
}

/// f(x) = 0.5||Ax - b||^2 + (lambda/2)||x||^2.
///
/// mu_f is lambda unless A is diagonal, in which case both constants are exact
/// (min/max of a_ii^2, plus lambda). Otherwise L_f comes from estimate_lipschitz.
inline SmoothOracle quadratic_oracle(const Dataset& data, double lambda) {
    if (data.rows() == 0 || data.cols() == 0) {
        throw InvalidInput("quadratic_oracle: empty dataset");
    }
    if (data.labels.size() != data.rows()) {
        throw InvalidInput("quadratic_oracle: target count does not match row count");
    }
    if (!(lambda >= 0.0)) {
        throw InvalidInput("quadratic_oracle: lambda must be nonnegative");
    }
    auto model = std::make_shared<detail::QuadraticLossModel>(data.A, data.labels, lambda);
    if (data.is_diagonal()) {
        const Vector a = data.diagonal();
        const Vector a2 = a.cwiseAbs2();
        SmoothOracle oracle(data.cols(), model, a2.maxCoeff() + lambda, a2.minCoeff() + lambda);
        oracle.set_diagonal_quadratic({a, data.labels, lambda});
        return oracle;
    }
    return SmoothOracle(data.cols(), model, estimate_lipschitz(data, Loss::quadratic, lambda), lambda);
}

/// f(x) = (1/m) sum_i log(1 + exp(-b_i a_i^T x)) + (lambda/2)||x||^2, labels b_i in {-1, +1}.
inline SmoothOracle logistic_oracle(const Dataset& data, double lambda) {
    if (data.rows() == 0 || data.cols() == 0) {
        throw InvalidInput("logistic_oracle: empty dataset");
    }
    if (data.labels.size() != data.rows()) {
        throw InvalidInput("logistic_oracle: label count does not match row count");
    }
    if (!(lambda >= 0.0)) {
        throw InvalidInput("logistic_oracle: lambda must be nonnegative");
    }
    for (Index i = 0; i < data.labels.size(); ++i) {
        if (data.labels[i] != 1.0 && data.labels[i] != -1.0) {
            throw InvalidInput("logistic_oracle: label " + std::to_string(data.labels[i]) + " at row " +
                               std::to_string(i) + " is not -1 or +1");
        }
    }
    auto model = std::make_shared<detail::LogisticLossModel>(data.A, data.labels, lambda);
    return SmoothOracle(data.cols(), model, estimate_lipschitz(data, Loss::logistic, lambda), lambda);
}

/// F = fhat + tau * ghat with all strong convexity carried by fhat.
struct CompositeProblem {
    SmoothOracle smooth;
    Regularizer reg;
    double L_hat = 0.0;
    double mu_hat = 0.0;

    Index dim() const { return smooth.dim(); }
    double tau() const { return reg.tau; }
};

/// Moves the (tau mu_g / 2)||x - x0||^2 part of tau*g into the smooth term:
///   fhat = f + (tau mu_g/2)||x - x0||^2,  ghat = g - (mu_g/2)||x - x0||^2.
inline CompositeProblem split(const SmoothOracle& f, const Regularizer& g, const Vector& x0) {
    g.validate();
    require_dim(x0, f.dim(), "split anchor");
    if (g.is_shifted()) {
        throw InvalidInput("split: regularizer is already split");
    }
    const double c = g.tau * g.l2_weight();
    CompositeProblem p;
    p.L_hat = f.lipschitz() + c;
    p.mu_hat = f.strong_convexity() + c;
    p.reg = g;
    if (c == 0.0) {
        p.smooth = f;
        return p;
    }
    p.smooth = SmoothOracle(f.dim(), std::make_shared<detail::ShiftedModel>(f.model(), c, x0), p.L_hat, p.mu_hat);
    if (f.diagonal_quadratic()) {
        p.smooth.set_diagonal_quadratic(*f.diagonal_quadratic());
    }
    p.reg.shift = g.l2_weight();
    p.reg.anchor = x0;
    return p;
}

/// Problem with no relocation needed (g has no quadratic part) or relocation anchored at 0.
inline CompositeProblem make_problem(const SmoothOracle& f, const Regularizer& g) {
    return split(f, g, Vector::Zero(f.dim()));
}

/// F(x) = fhat(x) + tau * ghat(x).
inline double eval_F(const CompositeProblem& p, const Vector& x) {
    require_dim(x, p.dim(), "eval_F");
    const double fx = p.smooth.value(x);
    return p.reg.is_null() ? fx : fx + p.reg.tau * p.reg.value(x);
}

} // namespace comet
