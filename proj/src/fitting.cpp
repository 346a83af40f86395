#include "transportlab/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace transportlab {

namespace {

// Score convergence tolerance, per observation: near the optimum the
// attainable gradient norm is limited by rounding in a log-likelihood that
// grows linearly with n.
constexpr double kGradTol = 1e-8;

double grad_tol(Eigen::Index n) {
    return kGradTol * std::max<double>(1.0, static_cast<double>(n));
}

std::vector<Treatment> active_arms_present(
    const std::set<Treatment>& arms) {
    std::vector<Treatment> active;
    for (Treatment t : {Treatment::B, Treatment::C})
        if (arms.count(t)) active.push_back(t);
    return active;
}

void check_full_rank(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                     const std::vector<std::string>& names) {
    if (qr.rank() == static_cast<Eigen::Index>(names.size())) return;
    // Pivot order places the dependent columns last.
    std::string culprits;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < perm.size(); ++k) {
        if (!culprits.empty()) culprits += ", ";
        culprits += names[perm[k]];
    }
    throw std::invalid_argument("singular design: collinear columns {" +
                                culprits + "}");
}

}  // namespace

double FitResult::coefficient(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw std::invalid_argument("no fitted coefficient named " + name);
    return coef[it - names.begin()];
}

double FitResult::se(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw std::invalid_argument("no fitted coefficient named " + name);
    auto i = it - names.begin();
    return std::sqrt(covariance(i, i));
}

Eigen::MatrixXd build_design(const std::vector<Observation>& data,
                             std::vector<std::string>* names) {
    std::set<Treatment> arms;
    for (const auto& obs : data) arms.insert(obs.t);
    const auto active = active_arms_present(arms);
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index p = 2 + 2 * static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = data[i].x;
        Eigen::Index j = 2;
        for (Treatment arm : active) {
            const double ind = data[i].t == arm ? 1.0 : 0.0;
            X(i, j++) = ind;
            X(i, j++) = ind * data[i].x;
        }
    }
    if (names) {
        names->assign({"beta0", "beta1"});
        for (Treatment arm : active) {
            names->push_back("gamma_" + to_string(arm));
            names->push_back("beta2_" + to_string(arm));
        }
    }
    return X;
}

FitResult fit_linear(const std::vector<Observation>& data) {
    FitResult fit;
    Eigen::MatrixXd X = build_design(data, &fit.names);
    const Eigen::Index n = X.rows(), p = X.cols();
    if (n < p + 1)
        throw std::invalid_argument("fit_linear: need at least p+1 observations");
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = data[i].y;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    check_full_rank(qr, fit.names);
    fit.coef = qr.solve(y);
    const double rss = (y - X * fit.coef).squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - p);
    fit.sigma = std::sqrt(sigma2);
    fit.covariance = sigma2 * (X.transpose() * X).ldlt().solve(
                                  Eigen::MatrixXd::Identity(p, p));
    fit.loglik = -0.5 * n * (std::log(2.0 * M_PI * sigma2) + rss / (n * sigma2));
    fit.converged = true;
    fit.iterations = 1;
    return fit;
}

double bernoulli_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        Link link, const Eigen::VectorXd& beta,
                        Eigen::VectorXd* grad) {
    if (link != Link::logit && link != Link::log)
        throw std::invalid_argument("bernoulli_loglik: link must be logit or log");
    const Eigen::VectorXd eta = X * beta;
    double ll = 0.0;
    Eigen::VectorXd u(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double mu = link_inverse(link, eta[i]);
        if (mu <= 0.0 || mu >= 1.0)
            throw std::domain_error(
                "bernoulli_loglik: fitted probability outside (0,1)");
        ll += y[i] * std::log(mu) + (1.0 - y[i]) * std::log1p(-mu);
        // d ll_i / d eta_i; dmu/deta is mu(1-mu) for logit, mu for log.
        u[i] = link == Link::logit ? y[i] - mu
                                   : y[i] - (1.0 - y[i]) * mu / (1.0 - mu);
    }
    if (grad) *grad = X.transpose() * u;
    return ll;
}

FitResult fit_glm(const std::vector<Observation>& data, Link link) {
    FitResult fit;
    Eigen::MatrixXd X = build_design(data, &fit.names);
    const Eigen::Index n = X.rows(), p = X.cols();
    Eigen::VectorXd y(n);
    double ybar = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (data[i].y != 0.0 && data[i].y != 1.0)
            throw std::invalid_argument("fit_glm: outcomes must be 0/1");
        y[i] = data[i].y;
        ybar += y[i];
    }
    ybar /= static_cast<double>(n);
    if (ybar == 0.0 || ybar == 1.0)
        throw std::invalid_argument(
            "fit_glm: degenerate outcome (all responses identical)");
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        check_full_rank(qr, fit.names);
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    beta[0] = link_forward(link, ybar);
    Eigen::VectorXd grad;
    double ll = bernoulli_loglik(X, y, link, beta, &grad);

    for (int iter = 1; iter <= 100; ++iter) {
        fit.iterations = iter;
        // Fisher scoring step via weighted least squares.
        const Eigen::VectorXd eta = X * beta;
        Eigen::VectorXd w(n), z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mu = link_inverse(link, eta[i]);
            if (link == Link::logit) {
                w[i] = mu * (1.0 - mu);
                z[i] = eta[i] + (y[i] - mu) / w[i];
            } else {
                w[i] = mu / (1.0 - mu);
                z[i] = eta[i] + (y[i] - mu) / mu;
            }
        }
        const Eigen::MatrixXd XtW = X.transpose() * w.asDiagonal();
        const Eigen::VectorXd proposal = (XtW * X).ldlt().solve(XtW * z);

        // Step-halving: accept only a step with valid probabilities and a
        // non-decreasing likelihood.
        Eigen::VectorXd step = proposal - beta;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            const Eigen::VectorXd candidate = beta + step;
            try {
                const double cand_ll = bernoulli_loglik(X, y, link, candidate, &grad);
                if (cand_ll >= ll - 1e-12) {
                    beta = candidate;
                    ll = cand_ll;
                    accepted = true;
                    break;
                }
            } catch (const std::domain_error&) {
                // candidate left the valid mean range; halve
            }
            step *= 0.5;
        }
        if (!accepted)
            throw std::runtime_error(
                "fit_glm: step-halving failed (fitted probability boundary), "
                "gradient max-norm " +
                std::to_string(grad.cwiseAbs().maxCoeff()));
        if (grad.cwiseAbs().maxCoeff() < grad_tol(n)) {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged)
        throw std::runtime_error(
            "fit_glm: no convergence in 100 iterations (possible separation), "
            "gradient max-norm " +
            std::to_string(grad.cwiseAbs().maxCoeff()));

    // Fisher information at the optimum.
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = link_inverse(link, eta[i]);
        w[i] = link == Link::logit ? mu * (1.0 - mu) : mu / (1.0 - mu);
    }
    fit.coef = beta;
    fit.covariance = (X.transpose() * w.asDiagonal() * X)
                         .ldlt()
                         .solve(Eigen::MatrixXd::Identity(p, p));
    fit.loglik = ll;
    return fit;
}

double weibull_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                      const Eigen::VectorXd& event,
                      const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                      Eigen::MatrixXd* hess) {
    const Eigen::Index n = X.rows(), p = X.cols();
    if (theta.size() != p + 1)
        throw std::invalid_argument("weibull_loglik: theta must have p+1 entries");
    const Eigen::VectorXd beta = theta.head(p);
    const double nu = std::exp(theta[p]);
    const Eigen::VectorXd eta = X * beta;

    double ll = 0.0;
    if (grad) grad->setZero(p + 1);
    if (hess) hess->setZero(p + 1, p + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double logt = std::log(time[i]);
        const double lam_tnu = std::exp(eta[i] + nu * logt);  // lambda * t^nu
        const double d = event[i];
        ll += d * (eta[i] + theta[p] + (nu - 1.0) * logt) - lam_tnu;
        if (grad) {
            const double resid = d - lam_tnu;
            grad->head(p) += resid * X.row(i).transpose();
            (*grad)[p] += d * (1.0 + nu * logt) - nu * lam_tnu * logt;
        }
        if (hess) {
            hess->topLeftCorner(p, p) -=
                lam_tnu * X.row(i).transpose() * X.row(i);
            const double cross = -lam_tnu * nu * logt;
            hess->block(0, p, p, 1) += cross * X.row(i).transpose();
            hess->block(p, 0, 1, p) += cross * X.row(i);
            (*hess)(p, p) += nu * logt * (d - lam_tnu) -
                             nu * nu * lam_tnu * logt * logt;
        }
    }
    return ll;
}

FitResult fit_weibull(const std::vector<SurvObservation>& data) {
    std::set<Treatment> arms;
    std::map<Treatment, int> events_per_arm;
    for (const auto& obs : data) {
        if (obs.time <= 0.0)
            throw std::invalid_argument("fit_weibull: times must be > 0");
        arms.insert(obs.t);
        if (obs.event) ++events_per_arm[obs.t];
    }
    for (Treatment t : arms)
        if (events_per_arm[t] == 0)
            throw std::invalid_argument("fit_weibull: arm " + to_string(t) +
                                        " has no events");

    std::vector<Observation> proxy;
    proxy.reserve(data.size());
    for (const auto& obs : data) proxy.push_back({obs.x, obs.t, 0.0});
    FitResult fit;
    Eigen::MatrixXd X = build_design(proxy, &fit.names);
    fit.names.push_back("log_nu");
    const Eigen::Index n = X.rows(), p = X.cols();
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        std::vector<std::string> design_names(fit.names.begin(),
                                              fit.names.end() - 1);
        check_full_rank(qr, design_names);
    }
    Eigen::VectorXd time(n), event(n);
    double total_time = 0.0, total_events = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        time[i] = data[i].time;
        event[i] = data[i].event ? 1.0 : 0.0;
        total_time += time[i];
        total_events += event[i];
    }

    // Exponential-rate start: intercept = log(events / total time), nu = 1.
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
    theta[0] = std::log(total_events / total_time);
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    double ll = weibull_loglik(X, time, event, theta, &grad, &hess);

    for (int iter = 1; iter <= 200; ++iter) {
        fit.iterations = iter;
        if (grad.cwiseAbs().maxCoeff() < grad_tol(n)) {
            fit.converged = true;
            break;
        }
        Eigen::VectorXd step = (-hess).ldlt().solve(grad);
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            const Eigen::VectorXd candidate = theta + step;
            const double cand_ll =
                weibull_loglik(X, time, event, candidate, nullptr, nullptr);
            if (std::isfinite(cand_ll) && cand_ll >= ll - 1e-12) {
                theta = candidate;
                ll = weibull_loglik(X, time, event, theta, &grad, &hess);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    if (!fit.converged)
        throw std::runtime_error(
            "fit_weibull: no convergence after " +
            std::to_string(fit.iterations) + " iterations, gradient max-norm " +
            std::to_string(grad.cwiseAbs().maxCoeff()) + ", loglik " +
            std::to_string(ll));

    fit.coef = theta;
    fit.covariance =
        (-hess).ldlt().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
    fit.loglik = ll;
    return fit;
}

OutcomeModel model_from_fit(const FitResult& fit, Link link) {
    OutcomeModel model;
    model.link = link;
    model.beta0 = fit.coefficient("beta0");
    model.beta1 = fit.coefficient("beta1");
    for (Treatment t : {Treatment::B, Treatment::C}) {
        const std::string suffix = to_string(t);
        if (std::find(fit.names.begin(), fit.names.end(), "gamma_" + suffix) !=
            fit.names.end()) {
            model.gamma[t] = fit.coefficient("gamma_" + suffix);
            model.beta2[t] = fit.coefficient("beta2_" + suffix);
        }
    }
    if (link == Link::log_hazard_weibull)
        model.shape = std::exp(fit.coefficient("log_nu"));
    if (link == Link::identity && fit.sigma > 0.0) model.sigma = fit.sigma;
    model.validate();
    return model;
}

}  // namespace transportlab
