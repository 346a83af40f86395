#pragma once

#include "transportlab/model.hpp"

namespace transportlab {

// Restricted mean survival time of a Weibull law with survival
// S(u) = exp(-lambda * u^nu), truncated at tau, via adaptive Simpson
// quadrature (absolute tolerance 1e-10).
double rmst_quadrature(double lambda, double nu, double tau);

// Same quantity through the lower incomplete gamma function:
// lambda^{-1/nu} * gamma_inc(1/nu, lambda * tau^nu) / nu.
double rmst_closed_form(double lambda, double nu, double tau);

// RMST of arm t at covariate value x under a Weibull outcome model.
// Both evaluation routes are computed and must agree within 1e-8.
double rmst(const OutcomeModel& model, Treatment t, double x, double tau);

}  // namespace transportlab
