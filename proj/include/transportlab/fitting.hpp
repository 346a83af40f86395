#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "transportlab/model.hpp"

namespace transportlab {

struct Observation {
    double x;
    Treatment t;
    double y;
};

struct SurvObservation {
    double x;
    Treatment t;
    double time;
    bool event;
};

struct FitResult {
    std::vector<std::string> names;  // beta0, beta1, gamma_B, beta2_B, ...
    Eigen::VectorXd coef;
    Eigen::MatrixXd covariance;
    bool converged = false;
    int iterations = 0;
    double loglik = 0.0;
    double sigma = 0.0;  // residual SD (linear fit only)

    double coefficient(const std::string& name) const;
    double se(const std::string& name) const;
};

// Design matrix [1, x, I(t=B), x*I(t=B), I(t=C), x*I(t=C)], with active-arm
// columns present only for arms that occur in the data.
Eigen::MatrixXd build_design(const std::vector<Observation>& data,
                             std::vector<std::string>* names = nullptr);

// Ordinary least squares with a pivoted QR factorization.
FitResult fit_linear(const std::vector<Observation>& data);

// Bernoulli GLM by iteratively reweighted least squares. For the log link,
// step-halving keeps fitted probabilities inside (0,1); a fit that cannot
// take such a step fails rather than being silently approximated.
FitResult fit_glm(const std::vector<Observation>& data, Link link);

// Weibull proportional-hazards MLE by Newton iteration in
// (coefficients, log nu), with analytic gradient and Hessian and
// observed-information covariance.
FitResult fit_weibull(const std::vector<SurvObservation>& data);

// Likelihood evaluators, exposed so the analytic scores can be checked
// against finite differences.
double bernoulli_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        Link link, const Eigen::VectorXd& beta,
                        Eigen::VectorXd* grad = nullptr);
double weibull_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                      const Eigen::VectorXd& event,
                      const Eigen::VectorXd& theta,
                      Eigen::VectorXd* grad = nullptr,
                      Eigen::MatrixXd* hess = nullptr);

// Rebuilds an outcome model from fitted coefficients (estimated-model mode).
OutcomeModel model_from_fit(const FitResult& fit, Link link);

}  // namespace transportlab
