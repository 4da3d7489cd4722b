#pragma once

#include "comet/rng.hpp"
#include "comet/types.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace comet {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Sparse design matrix plus labels (classification) or targets (regression).
struct Dataset {
    SparseMatrix A;
    Vector labels;
    /// Free-form provenance notes (generator settings, subsetting, ...).
    std::map<std::string, std::string> meta;

    Index rows() const { return A.rows(); }
    Index cols() const { return A.cols(); }

    /// True when A is square with entries only on the diagonal.
    bool is_diagonal() const {
        if (A.rows() != A.cols()) {
            return false;
        }
        for (Index i = 0; i < A.outerSize(); ++i) {
            for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
                if (it.col() != i) {
                    return false;
                }
            }
        }
        return true;
    }

    /// Diagonal entries (dense); only meaningful when is_diagonal().
    Vector diagonal() const {
        Vector d = Vector::Zero(std::min(A.rows(), A.cols()));
        for (Index i = 0; i < d.size(); ++i) {
            d[i] = A.coeff(i, i);
        }
        return d;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view tok, double& out) {
    // from_chars rejects a leading '+', which LIBSVM labels commonly carry.
    if (!tok.empty() && tok.front() == '+') {
        tok.remove_prefix(1);
    }
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

inline bool parse_index(std::string_view tok, long long& out) {
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

} // namespace detail

/// Parses LIBSVM text: `<label> <idx>:<val> ...`, 1-based strictly increasing
/// indices, `#` starts a comment, blank lines are skipped.
///
/// The column count is the largest index seen unless `n_override` is given,
/// in which case it must be at least that large.
inline Dataset parse_libsvm(std::istream& in, std::optional<Index> n_override = std::nullopt) {
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> labels;
    long long max_index = 0;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) {
            view = view.substr(0, hash);
        }
        view = detail::trim(view);
        if (view.empty()) {
            continue;
        }

        const auto row = static_cast<Index>(labels.size());
        long long prev = 0;
        bool first = true;
        std::size_t pos = 0;
        while (pos < view.size()) {
            const auto end = view.find_first_of(" \t", pos);
            const auto tok = view.substr(pos, end == std::string_view::npos ? end : end - pos);
            pos = end == std::string_view::npos ? view.size() : view.find_first_not_of(" \t", end);
            if (pos == std::string_view::npos) {
                pos = view.size();
            }

            if (first) {
                double label = 0.0;
                if (!detail::parse_double(tok, label) || !std::isfinite(label)) {
                    throw ParseError(lineno, "bad label '" + std::string(tok) + "'");
                }
                labels.push_back(label);
                first = false;
                continue;
            }

            const auto colon = tok.find(':');
            if (colon == std::string_view::npos) {
                throw ParseError(lineno, "expected idx:val, got '" + std::string(tok) + "'");
            }
            long long idx = 0;
            double val = 0.0;
            if (!detail::parse_index(tok.substr(0, colon), idx) || idx < 1) {
                throw ParseError(lineno, "bad feature index in '" + std::string(tok) + "'");
            }
            if (!detail::parse_double(tok.substr(colon + 1), val)) {
                throw ParseError(lineno, "bad feature value in '" + std::string(tok) + "'");
            }
            if (!std::isfinite(val)) {
                throw ParseError(lineno, "non-finite feature value in '" + std::string(tok) + "'");
            }
            if (idx <= prev) {
                throw ParseError(lineno, "feature indices must be strictly increasing");
            }
            prev = idx;
            max_index = std::max(max_index, idx);
            triplets.emplace_back(row, static_cast<Index>(idx - 1), val);
        }
    }

    Index n = static_cast<Index>(max_index);
    if (n_override) {
        if (*n_override < n) {
            throw InvalidInput("column override " + std::to_string(*n_override) +
                               " is smaller than the largest index " + std::to_string(n));
        }
        n = *n_override;
    }

    Dataset data;
    data.A.resize(static_cast<Index>(labels.size()), n);
    data.A.setFromTriplets(triplets.begin(), triplets.end());
    data.A.makeCompressed();
    data.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
    return data;
}

inline Dataset parse_libsvm_file(const std::string& path, std::optional<Index> n_override = std::nullopt) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open LIBSVM file '" + path + "'");
    }
    try {
        auto data = parse_libsvm(in, n_override);
        data.meta["source"] = path;
        return data;
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + e.what());
    }
}

/// Writes LIBSVM text with 17 significant digits so that parsing it back is exact.
inline void write_libsvm(std::ostream& out, const Dataset& data) {
    char buf[64];
    for (Index i = 0; i < data.rows(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", data.labels[i]);
        out << buf;
        for (SparseMatrix::InnerIterator it(data.A, i); it; ++it) {
            std::snprintf(buf, sizeof buf, " %lld:%.17g", static_cast<long long>(it.col() + 1), it.value());
            out << buf;
        }
        out << '\n';
    }
}

/// First `rows` rows and first `cols` columns of `data`.
inline Dataset take_subset(const Dataset& data, Index rows, Index cols) {
    rows = std::min(rows, data.rows());
    cols = std::min(cols, data.cols());
    std::vector<Eigen::Triplet<double>> triplets;
    for (Index i = 0; i < rows; ++i) {
        for (SparseMatrix::InnerIterator it(data.A, i); it; ++it) {
            if (it.col() < cols) {
                triplets.emplace_back(i, it.col(), it.value());
            }
        }
    }
    Dataset out;
    out.A.resize(rows, cols);
    out.A.setFromTriplets(triplets.begin(), triplets.end());
    out.A.makeCompressed();
    out.labels = data.labels.head(rows);
    out.meta = data.meta;
    out.meta["subset"] = "first " + std::to_string(rows) + " rows, first " + std::to_string(cols) + " columns";
    return out;
}

/// Synthetic diagonal least-squares instance.
///
/// a_ii is drawn uniformly from {10^0, 10^-1, ..., 10^-xi} and the targets
/// uniformly from [0, 1]. The targets are stored in `labels`.
inline Dataset gen_diagonal_quadratic(Index m, int xi, std::uint64_t seed) {
    if (m < 1 || xi < 1) {
        throw InvalidInput("gen_diagonal_quadratic needs m >= 1 and xi >= 1");
    }
    Rng rng(seed);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m));
    double amax = 0.0;
    double amin = 1.0;
    for (Index i = 0; i < m; ++i) {
        const auto e = rng.index(static_cast<std::size_t>(xi) + 1);
        const double a = std::pow(10.0, -static_cast<double>(e));
        amax = std::max(amax, a);
        amin = std::min(amin, a);
        triplets.emplace_back(i, i, a);
    }
    Dataset data;
    data.A.resize(m, m);
    data.A.setFromTriplets(triplets.begin(), triplets.end());
    data.A.makeCompressed();
    data.labels = rng.uniform_vector(m, 0.0, 1.0);

    char buf[64];
    data.meta["generator"] = "diagonal-quadratic";
    data.meta["m"] = std::to_string(m);
    data.meta["xi"] = std::to_string(xi);
    data.meta["seed"] = std::to_string(seed);
    std::snprintf(buf, sizeof buf, "%.17g", std::pow(10.0, xi));
    data.meta["kappa_stated"] = buf;
    std::snprintf(buf, sizeof buf, "%.17g", std::pow(10.0, 2 * xi));
    data.meta["kappa_hessian"] = buf;
    std::snprintf(buf, sizeof buf, "%.17g", amax / amin);
    data.meta["diag_ratio"] = buf;
    std::snprintf(buf, sizeof buf, "%.17g", amin * amin);
    data.meta["mu_data"] = buf;
    std::snprintf(buf, sizeof buf, "%.17g", amax * amax);
    data.meta["L_data"] = buf;
    return data;
}

enum class Loss { quadratic, logistic };

/// Largest eigenvalue of A^T A by power iteration from a fixed start vector.
inline double power_iteration_ata(const SparseMatrix& A, double rel_tol = 1e-10, int max_iters = 500) {
    const Index n = A.cols();
    if (n == 0 || A.nonZeros() == 0) {
        return 0.0;
    }
    // Fixed, strictly positive start so the result does not depend on a seed.
    Vector v(n);
    for (Index j = 0; j < n; ++j) {
        v[j] = 1.0 + 0.5 * std::sin(static_cast<double>(j + 1));
    }
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Vector w = A.transpose() * (A * v);
        const double next = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) {
            return 0.0;
        }
        v = w / norm;
        if (it > 0 && std::abs(next - estimate) <= rel_tol * std::abs(next)) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    return estimate;
}

inline constexpr double kLipschitzInflation = 1.01;

/// Data-derived smoothness constant of the quadratic or logistic loss plus (lambda/2)||x||^2.
inline double estimate_lipschitz(const Dataset& data, Loss loss, double lambda) {
    if (data.rows() == 0 || data.cols() == 0) {
        throw InvalidInput("estimate_lipschitz: empty dataset");
    }
    if (lambda < 0.0) {
        throw InvalidInput("estimate_lipschitz: lambda must be nonnegative");
    }
    const double top = power_iteration_ata(data.A);
    if (top <= 0.0) {
        return std::max(lambda, 1e-12);
    }
    const double data_term = loss == Loss::quadratic ? top : top / (4.0 * static_cast<double>(data.rows()));
    return (data_term + lambda) * kLipschitzInflation;
}

} // namespace comet
