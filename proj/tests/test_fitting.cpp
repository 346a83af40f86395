#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "transportlab/estimands.hpp"
#include "transportlab/fitting.hpp"
#include "transportlab/rng.hpp"
#include "transportlab/studies.hpp"

using namespace transportlab;

namespace {

std::vector<Observation> simulate_trial(const OutcomeModel& model,
                                        const PopulationSpec& pop,
                                        std::size_t n_per_arm,
                                        std::uint64_t seed) {
    std::vector<Observation> data;
    SplitMix64 rng(seed);
    const auto xs = sample_covariates(pop, 3 * n_per_arm, mix_seed(seed, 1));
    std::size_t k = 0;
    for (Treatment t : {Treatment::A, Treatment::B, Treatment::C})
        for (std::size_t i = 0; i < n_per_arm; ++i, ++k)
            data.push_back({xs[k], t, simulate_outcome(model, t, xs[k], rng)});
    return data;
}

std::vector<SurvObservation> simulate_surv_trial(const OutcomeModel& model,
                                                 const PopulationSpec& pop,
                                                 std::size_t n_per_arm,
                                                 std::uint64_t seed) {
    std::vector<SurvObservation> data;
    SplitMix64 rng(seed);
    const auto xs = sample_covariates(pop, 3 * n_per_arm, mix_seed(seed, 1));
    std::size_t k = 0;
    for (Treatment t : {Treatment::A, Treatment::B, Treatment::C})
        for (std::size_t i = 0; i < n_per_arm; ++i, ++k)
            data.push_back(
                {xs[k], t, simulate_outcome(model, t, xs[k], rng), true});
    return data;
}

void check_recovery(const FitResult& fit, const OutcomeModel& truth,
                    double band) {
    const struct {
        const char* name;
        double value;
    } expected[] = {
        {"beta0", truth.beta0},
        {"beta1", truth.beta1},
        {"gamma_B", truth.gamma_for(Treatment::B)},
        {"beta2_B", truth.beta2_for(Treatment::B)},
        {"gamma_C", truth.gamma_for(Treatment::C)},
        {"beta2_C", truth.beta2_for(Treatment::C)},
    };
    for (const auto& entry : expected) {
        INFO(entry.name);
        CHECK(std::abs(fit.coefficient(entry.name) - entry.value) <
              band * fit.se(entry.name));
    }
}

}  // namespace

TEST_CASE("noise-free linear data is recovered exactly") {
    const OutcomeModel model = study_mean_difference(false);
    const PopulationSpec pop = PopulationSpec::uniform(0.25, 2.0);
    std::vector<Observation> data;
    const auto xs = sample_covariates(pop, 40, 5);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (Treatment t : {Treatment::A, Treatment::B, Treatment::C})
            data.push_back({xs[i], t, linear_predictor(model, t, xs[i])});
    const FitResult fit = fit_linear(data);
    CHECK(fit.converged);
    CHECK(fit.coefficient("beta0") == doctest::Approx(20.0).epsilon(1e-10));
    CHECK(fit.coefficient("beta1") == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(fit.coefficient("gamma_B") == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(fit.coefficient("beta2_B") == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.coefficient("gamma_C") == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(fit.coefficient("beta2_C") == doctest::Approx(-4.0).epsilon(1e-10));
}

TEST_CASE("noisy linear recovery within 3 SE") {
    const OutcomeModel model = study_mean_difference(false);
    const auto data =
        simulate_trial(model, PopulationSpec::uniform(0.25, 2.0), 30000, 17);
    const FitResult fit = fit_linear(data);
    check_recovery(fit, model, 3.5);
    CHECK(fit.sigma == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("logit GLM recovery within 3 SE") {
    const OutcomeModel model = study_log_odds(false);
    const auto data =
        simulate_trial(model, PopulationSpec::uniform(0.25, 2.0), 40000, 23);
    const FitResult fit = fit_glm(data, Link::logit);
    CHECK(fit.converged);
    check_recovery(fit, model, 3.5);
}

TEST_CASE("log-link GLM recovery within 3 SE") {
    const OutcomeModel model = study_log_risk(false);
    const auto data =
        simulate_trial(model, PopulationSpec::uniform(0.25, 2.0), 60000, 29);
    const FitResult fit = fit_glm(data, Link::log);
    CHECK(fit.converged);
    check_recovery(fit, model, 3.5);
}

TEST_CASE("Weibull MLE recovery within 3 SE") {
    const OutcomeModel model = study_weibull(false);
    const auto data = simulate_surv_trial(
        model, PopulationSpec::uniform(0.25, 2.0), 30000, 31);
    const FitResult fit = fit_weibull(data);
    CHECK(fit.converged);
    check_recovery(fit, model, 3.5);
    CHECK(std::abs(fit.coefficient("log_nu") - std::log(1.5)) <
          3.5 * fit.se("log_nu"));
}

TEST_CASE("collinear design is rejected with a useful message") {
    std::vector<Observation> data;
    for (int i = 0; i < 20; ++i)
        data.push_back({1.0, i % 2 ? Treatment::A : Treatment::B, 0.5 * i});
    try {
        fit_linear(data);
        FAIL("expected a rank-deficiency error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("collinear") != std::string::npos);
    }
}

TEST_CASE("degenerate binary outcome is rejected") {
    std::vector<Observation> data;
    const auto xs = sample_covariates(PopulationSpec::uniform(0.0, 2.0), 50, 3);
    for (double x : xs) data.push_back({x, Treatment::A, 1.0});
    CHECK_THROWS_AS(fit_glm(data, Link::logit), std::invalid_argument);
}

TEST_CASE("analytic Bernoulli scores match finite differences") {
    const PopulationSpec pop = PopulationSpec::uniform(0.1, 2.0);
    for (Link link : {Link::logit, Link::log}) {
        const OutcomeModel model =
            link == Link::logit ? study_log_odds(false) : study_log_risk(false);
        const auto data = simulate_trial(model, pop, 300, 41);
        std::vector<std::string> names;
        const Eigen::MatrixXd X = build_design(data, &names);
        Eigen::VectorXd y(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) y[i] = data[i].y;

        SplitMix64 rng(77);
        for (int rep = 0; rep < 10; ++rep) {
            Eigen::VectorXd beta(X.cols());
            for (int j = 0; j < beta.size(); ++j)
                beta[j] = 0.5 * (rng.next_double() - 0.5);
            if (link == Link::log) beta[0] -= 2.0;  // keep risks below 1
            Eigen::VectorXd grad;
            bernoulli_loglik(X, y, link, beta, &grad);
            const double h = 1e-6;
            for (int j = 0; j < beta.size(); ++j) {
                Eigen::VectorXd up = beta, dn = beta;
                up[j] += h;
                dn[j] -= h;
                const double fd = (bernoulli_loglik(X, y, link, up) -
                                   bernoulli_loglik(X, y, link, dn)) /
                                  (2.0 * h);
                CHECK(std::abs(grad[j] - fd) < 1e-6 * (1.0 + std::abs(fd)));
            }
        }
    }
}

TEST_CASE("analytic Weibull scores and Hessian match finite differences") {
    const OutcomeModel model = study_weibull(false);
    const auto surv = simulate_surv_trial(
        model, PopulationSpec::uniform(0.1, 2.0), 200, 53);
    std::vector<Observation> flat;
    for (const auto& obs : surv) flat.push_back({obs.x, obs.t, obs.time});
    std::vector<std::string> names;
    const Eigen::MatrixXd X = build_design(flat, &names);
    Eigen::VectorXd time(surv.size()), event(surv.size());
    for (std::size_t i = 0; i < surv.size(); ++i) {
        time[i] = surv[i].time;
        event[i] = surv[i].event ? 1.0 : 0.0;
    }
    SplitMix64 rng(99);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::VectorXd theta(X.cols() + 1);
        for (int j = 0; j < theta.size(); ++j)
            theta[j] = 0.4 * (rng.next_double() - 0.5);
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
        weibull_loglik(X, time, event, theta, &grad, &hess);
        const double h = 1e-6;
        for (int j = 0; j < theta.size(); ++j) {
            Eigen::VectorXd up = theta, dn = theta;
            up[j] += h;
            dn[j] -= h;
            const double fd = (weibull_loglik(X, time, event, up) -
                               weibull_loglik(X, time, event, dn)) /
                              (2.0 * h);
            CHECK(std::abs(grad[j] - fd) < 1e-6 * (1.0 + std::abs(fd)));
            Eigen::VectorXd gup, gdn;
            weibull_loglik(X, time, event, up, &gup);
            weibull_loglik(X, time, event, dn, &gdn);
            for (int k = 0; k < theta.size(); ++k) {
                const double fd2 = (gup[k] - gdn[k]) / (2.0 * h);
                CHECK(std::abs(hess(j, k) - fd2) <
                      1e-5 * (1.0 + std::abs(fd2)));
            }
        }
    }
}

TEST_CASE("fit is invariant to recentring the covariate") {
    const OutcomeModel model = study_log_odds(false);
    auto data =
        simulate_trial(model, PopulationSpec::uniform(0.25, 2.0), 4000, 61);
    const FitResult fit = fit_glm(data, Link::logit);
    for (auto& obs : data) obs.x += 10.0;
    const FitResult shifted = fit_glm(data, Link::logit);
    // Slopes are unchanged; intercept-type terms absorb the shift.
    CHECK(shifted.coefficient("beta1") ==
          doctest::Approx(fit.coefficient("beta1")).epsilon(1e-6));
    CHECK(shifted.coefficient("beta2_B") ==
          doctest::Approx(fit.coefficient("beta2_B")).epsilon(1e-6));
    CHECK(shifted.coefficient("beta0") ==
          doctest::Approx(fit.coefficient("beta0") -
                          10.0 * fit.coefficient("beta1"))
              .epsilon(1e-6));
}

TEST_CASE("estimation error shrinks like n^{-1/2}") {
    const OutcomeModel model = study_mean_difference(true);
    const PopulationSpec pop = PopulationSpec::uniform(0.25, 2.0);
    const std::size_t sizes[] = {250, 1000, 4000, 16000};
    std::vector<double> log_n, log_err;
    for (std::size_t n : sizes) {
        double sq = 0.0;
        const int reps = 50;
        for (int rep = 0; rep < reps; ++rep) {
            const auto data =
                simulate_trial(model, pop, n, mix_seed(1234, 100 * n + rep));
            const FitResult fit = fit_linear(data);
            const double err = fit.coefficient("gamma_B") - 10.0;
            sq += err * err;
        }
        log_n.push_back(std::log(static_cast<double>(n)));
        log_err.push_back(0.5 * std::log(sq / reps));
    }
    double nbar = 0.0, ebar = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        nbar += log_n[i] / log_n.size();
        ebar += log_err[i] / log_err.size();
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        num += (log_n[i] - nbar) * (log_err[i] - ebar);
        den += (log_n[i] - nbar) * (log_n[i] - nbar);
    }
    const double slope = num / den;
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("model_from_fit round trips the coefficients") {
    const OutcomeModel model = study_log_odds(false);
    const auto data =
        simulate_trial(model, PopulationSpec::uniform(0.25, 2.0), 20000, 71);
    const FitResult fit = fit_glm(data, Link::logit);
    const OutcomeModel rebuilt = model_from_fit(fit, Link::logit);
    CHECK(rebuilt.link == Link::logit);
    CHECK(rebuilt.beta0 == doctest::Approx(fit.coefficient("beta0")));
    CHECK(rebuilt.gamma_for(Treatment::C) ==
          doctest::Approx(fit.coefficient("gamma_C")));
    CHECK(rebuilt.beta2_for(Treatment::B) ==
          doctest::Approx(fit.coefficient("beta2_B")));
}
