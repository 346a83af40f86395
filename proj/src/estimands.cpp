#include "transportlab/estimands.hpp"

#include <cmath>
#include <stdexcept>

namespace transportlab {

namespace {

void check_pair(Treatment t, Treatment s) {
    if (t == s)
        throw std::invalid_argument("estimand requires two distinct arms");
}

}  // namespace

double marginal_transform(MeasureKind kind, double mean) {
    switch (kind) {
        case MeasureKind::mean_difference:
        case MeasureKind::risk_difference:
        case MeasureKind::rmst_difference:
            return mean;
        case MeasureKind::log_odds_ratio:
            return logit(mean);
        case MeasureKind::log_risk_ratio:
        case MeasureKind::log_rmst_ratio:
            if (mean <= 0.0)
                throw std::domain_error("log transform of non-positive mean");
            return std::log(mean);
        case MeasureKind::conditional_log_hazard_ratio:
            break;
    }
    throw std::logic_error("marginal_transform: conditional-only measure");
}

double marginal_transform_derivative(MeasureKind kind, double mean) {
    switch (kind) {
        case MeasureKind::mean_difference:
        case MeasureKind::risk_difference:
        case MeasureKind::rmst_difference:
            return 1.0;
        case MeasureKind::log_odds_ratio:
            return 1.0 / (mean * (1.0 - mean));
        case MeasureKind::log_risk_ratio:
        case MeasureKind::log_rmst_ratio:
            return 1.0 / mean;
        case MeasureKind::conditional_log_hazard_ratio:
            break;
    }
    throw std::logic_error("marginal_transform_derivative: conditional-only measure");
}

namespace {

void check_marginal(const EffectMeasure& measure, const OutcomeModel& model) {
    if (measure.estimand != EstimandKind::marginal)
        throw std::invalid_argument("marginal_effect requires a marginal estimand");
    if (measure.kind == MeasureKind::conditional_log_hazard_ratio)
        throw std::invalid_argument(
            "conditional_log_hazard_ratio has no marginal counterpart");
    require_compatible(measure.kind, model.link);
}

}  // namespace

double outcome_mean(const OutcomeModel& model, Treatment t, double x,
                    std::optional<double> tau) {
    const double eta = linear_predictor(model, t, x);
    if (model.link == Link::log_hazard_weibull) {
        if (!tau)
            throw std::invalid_argument(
                "outcome_mean for a Weibull model requires tau");
        return rmst(model, t, x, *tau);
    }
    return link_inverse(model.link, eta);
}

EstimandValue conditional_effect(const OutcomeModel& model,
                                 const EffectMeasure& measure,
                                 const PopulationSpec& pop, Treatment t,
                                 Treatment s) {
    if (measure.estimand != EstimandKind::conditional)
        throw std::invalid_argument(
            "conditional_effect requires a conditional estimand");
    check_pair(t, s);
    require_compatible(measure.kind, model.link);
    const double value = expectation_over_x(pop, [&](double x) {
        return conditional_contrast_at(model, measure, t, s, x);
    });
    if (scale_aligned(measure.kind, model.link)) {
        // Eq-at-the-mean shortcut; must agree with the averaged route.
        const double xbar = pop.mean();
        const double shortcut = linear_predictor(model, t, xbar) -
                                linear_predictor(model, s, xbar);
        if (std::abs(value - shortcut) > 1e-10)
            throw std::runtime_error(
                "conditional_effect: averaged and at-the-mean routes disagree");
    }
    return EstimandValue{value, measure, pop.label, t, s, std::nullopt};
}

EstimandValue marginal_effect(const OutcomeModel& model,
                              const EffectMeasure& measure,
                              const PopulationSpec& pop, Treatment t,
                              Treatment s) {
    check_marginal(measure, model);
    check_pair(t, s);
    auto mean_for = [&](Treatment arm) {
        return expectation_over_x(
            pop, [&](double x) { return outcome_mean(model, arm, x, measure.tau); });
    };
    const double value =
        marginal_transform(measure.kind, mean_for(t)) - marginal_transform(measure.kind, mean_for(s));
    return EstimandValue{value, measure, pop.label, t, s, std::nullopt};
}

EstimandValue conditional_effect_mc(const OutcomeModel& model,
                                    const EffectMeasure& measure,
                                    const PopulationSpec& pop, Treatment t,
                                    Treatment s, std::size_t n,
                                    std::uint64_t seed) {
    if (measure.estimand != EstimandKind::conditional)
        throw std::invalid_argument(
            "conditional_effect_mc requires a conditional estimand");
    check_pair(t, s);
    require_compatible(measure.kind, model.link);
    const auto xs = sample_covariates(pop, n, seed);
    double sum = 0.0, sumsq = 0.0;
    for (double x : xs) {
        double c = conditional_contrast_at(model, measure, t, s, x);
        sum += c;
        sumsq += c * c;
    }
    const double mean = sum / n;
    const double var = (sumsq - n * mean * mean) / (n - 1.0);
    const double se = std::sqrt(std::max(var, 0.0) / n);
    return EstimandValue{mean, measure, pop.label, t, s,
                         MonteCarloInfo{n, seed, se}};
}

EstimandValue marginal_effect_mc(const OutcomeModel& model,
                                 const EffectMeasure& measure,
                                 const PopulationSpec& pop, Treatment t,
                                 Treatment s, std::size_t n,
                                 std::uint64_t seed) {
    check_marginal(measure, model);
    check_pair(t, s);
    const auto xs = sample_covariates(pop, n, seed);
    // Per-individual potential outcome means for both arms on the shared
    // covariate sample; the delta method accounts for their covariance.
    double st = 0.0, ss = 0.0, stt = 0.0, sss = 0.0, sts = 0.0;
    for (double x : xs) {
        double pt = outcome_mean(model, t, x, measure.tau);
        double ps = outcome_mean(model, s, x, measure.tau);
        st += pt;
        ss += ps;
        stt += pt * pt;
        sss += ps * ps;
        sts += pt * ps;
    }
    const double mt = st / n, ms = ss / n;
    const double vt = (stt - n * mt * mt) / (n - 1.0);
    const double vs = (sss - n * ms * ms) / (n - 1.0);
    const double cts = (sts - n * mt * ms) / (n - 1.0);
    const double value = marginal_transform(measure.kind, mt) - marginal_transform(measure.kind, ms);
    const double gt = marginal_transform_derivative(measure.kind, mt);
    const double gs = -marginal_transform_derivative(measure.kind, ms);
    const double var = (gt * gt * vt + gs * gs * vs + 2.0 * gt * gs * cts) / n;
    const double se = std::sqrt(std::max(var, 0.0));
    return EstimandValue{value, measure, pop.label, t, s,
                         MonteCarloInfo{n, seed, se}};
}

std::vector<EstimandValue> effect_curve(const OutcomeModel& model,
                                        const EffectMeasure& measure,
                                        const PopulationGrid& grid, Treatment t,
                                        Treatment s) {
    if (grid.populations.empty())
        throw std::invalid_argument("effect_curve: empty population grid");
    std::vector<EstimandValue> curve;
    curve.reserve(grid.populations.size());
    for (const auto& pop : grid.populations) {
        curve.push_back(measure.estimand == EstimandKind::conditional
                            ? conditional_effect(model, measure, pop, t, s)
                            : marginal_effect(model, measure, pop, t, s));
    }
    return curve;
}

double simulate_outcome(const OutcomeModel& model, Treatment t, double x,
                        SplitMix64& rng) {
    const double eta = linear_predictor(model, t, x);
    switch (model.link) {
        case Link::identity: {
            const double sd = model.sigma.value_or(1.0);
            const double u1 = rng.next_double_open0();
            const double u2 = rng.next_double();
            const double z =
                std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            return eta + sd * z;
        }
        case Link::logit:
            return rng.next_double() < expit(eta) ? 1.0 : 0.0;
        case Link::log: {
            const double p = std::exp(eta);
            if (p >= 1.0)
                throw std::domain_error(
                    "simulate_outcome: log-link risk >= 1 at x = " +
                    std::to_string(x));
            return rng.next_double() < p ? 1.0 : 0.0;
        }
        case Link::log_hazard_weibull: {
            const double lambda = std::exp(eta);
            const double u = rng.next_double_open0();
            return std::pow(-std::log(u) / lambda, 1.0 / *model.shape);
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace transportlab
