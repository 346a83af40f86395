#pragma once

#include <functional>
#include <vector>

namespace transportlab {

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

// Nodes and weights of the n-point Gauss-Legendre rule, computed by Newton
// iteration on the Legendre recurrence. Results are cached per n.
const GaussLegendreRule& gauss_legendre(int n);

// Integral of f over [a, b] with the n-point Gauss-Legendre rule.
double gauss_legendre_integrate(const std::function<double(double)>& f,
                                double a, double b, int n = 64);

// Adaptive Simpson quadrature to absolute tolerance abs_tol.
double adaptive_simpson(const std::function<double(double)>& f,
                        double a, double b, double abs_tol = 1e-10,
                        int max_depth = 50);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// Lower incomplete gamma function: integral of t^{a-1} e^{-t} over [0, x].
double lower_incomplete_gamma(double a, double x);

}  // namespace transportlab
