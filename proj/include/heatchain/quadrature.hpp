#pragma once

/** @file quadrature.hpp
 *  @brief Gaussian rules: Gauss-Hermite and rules for arbitrary smooth even
 *         weights built by the discretised Stieltjes procedure.
 */

#include "errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace heatchain {

struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;

    std::size_t size() const { return x.size(); }

    template <class F>
    double integrate(F&& f) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            s += w[i] * f(x[i]);
        return s;
    }
};

namespace detail {

/// Nodes and weights from a Jacobi matrix (Golub-Welsch).
inline Rule1D golub_welsch(const std::vector<double>& a, const std::vector<double>& b, double mu0)
{
    const std::size_t m = a.size();
    Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        Jm(i, i) = a[i];
        if (i + 1 < m)
            Jm(i, i + 1) = Jm(i + 1, i) = b[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Jm);
    Rule1D r;
    r.x.resize(m);
    r.w.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        r.x[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.w[i] = mu0 * v * v;
    }
    return r;
}

} // namespace detail

/// m-point Gauss-Hermite rule for the weight e^{-x^2}.
inline Rule1D gauss_hermite(std::size_t m)
{
    require(m >= 1, "rule needs at least one node");
    std::vector<double> a(m, 0.0), b(m > 0 ? m - 1 : 0);
    for (std::size_t k = 1; k < m; ++k)
        b[k - 1] = std::sqrt(0.5 * double(k));
    return detail::golub_welsch(a, b, std::sqrt(M_PI));
}

/// m-point Gauss rule for a positive weight w on [-R, R], obtained from the
/// recurrence coefficients of a fine trapezoid discretisation (Lanczos with
/// full reorthogonalisation). The weight must be negligible at +-R.
inline Rule1D gauss_for_weight(const std::function<double(double)>& weight, double R, std::size_t m,
                               std::size_t fine = 4001)
{
    require(m >= 1 && m < fine / 8, "node count too large for the discretisation");
    require(R > 0.0, "support radius must be > 0");
    const std::size_t n = fine;
    const double h = 2.0 * R / double(n - 1);
    Eigen::VectorXd x(n), sw(n);
    double mu0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x(i) = -R + h * double(i);
        double wi = weight(x(i)) * h;
        require(std::isfinite(wi) && wi >= 0.0, "weight must be finite and non-negative");
        sw(i) = std::sqrt(wi);
        mu0 += wi;
    }
    require(mu0 > 0.0, "weight has zero mass");

    std::vector<Eigen::VectorXd> V;
    std::vector<double> a(m), b(m > 0 ? m - 1 : 0);
    Eigen::VectorXd v = sw / std::sqrt(mu0);
    for (std::size_t k = 0; k < m; ++k) {
        V.push_back(v);
        Eigen::VectorXd u = x.cwiseProduct(v);
        a[k] = v.dot(u);
        for (const auto& prev : V)
            u -= prev.dot(u) * prev;
        for (const auto& prev : V)
            u -= prev.dot(u) * prev;
        if (k + 1 < m) {
            double nb = u.norm();
            require(nb > 0.0, "discretisation exhausted before reaching the requested order");
            b[k] = nb;
            v = u / nb;
        }
    }
    return detail::golub_welsch(a, b, mu0);
}

} // namespace heatchain
