#include "transportlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "transportlab/fitting.hpp"
#include "transportlab/rng.hpp"

namespace transportlab {

namespace {

// Stream indices for deriving sub-seeds from a pipeline base seed.
enum : std::uint64_t { kCovariateStream = 1, kAssignStream = 2, kOutcomeStream = 3,
                       kGcompStream = 4 };

double hajek_mean(const std::vector<double>& y,
                  const std::vector<double>& w,
                  const std::vector<bool>& in_arm, double* se) {
    double sw = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!in_arm[i]) continue;
        sw += w[i];
        swy += w[i] * y[i];
    }
    if (sw <= 0.0)
        throw std::invalid_argument(
            "weighted_marginal_outcome: no positive-weight observations in arm");
    const double mean = swy / sw;
    if (se) {
        double s2 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!in_arm[i]) continue;
            const double r = y[i] - mean;
            s2 += w[i] * w[i] * r * r;
        }
        *se = std::sqrt(s2) / sw;
    }
    return mean;
}

// Observed outcome on the scale that feeds the marginal transform:
// restricted event time for RMST measures, the raw outcome otherwise.
double observed_summary(const EffectMeasure& measure, double y) {
    return is_rmst_kind(measure.kind) ? std::min(y, *measure.tau) : y;
}

// MAIC path: simulate the index trial (arms A and B), reweight to the
// comparator covariate mean, and form the weighted B-vs-A contrast.
TransportEstimate maic_step1(const OutcomeModel& model,
                             const EffectMeasure& measure,
                             const PopulationSpec& index_pop,
                             const PopulationSpec& comparator,
                             const PipelineOptions& opts) {
    const auto xs = sample_covariates(index_pop, opts.n,
                                      mix_seed(opts.seed, kCovariateStream));
    const MaicWeights mw = maic_weights(xs, comparator.mean());

    TransportEstimate est;
    est.measure = measure;
    est.t = Treatment::B;
    est.s = Treatment::A;
    est.source = index_pop.label;
    est.target = comparator.label;
    est.mechanism = Mechanism::weighting;
    est.diagnostics["ess"] = mw.ess;
    est.diagnostics["weight_max"] =
        *std::max_element(mw.weights.begin(), mw.weights.end());
    est.diagnostics["weight_min"] =
        *std::min_element(mw.weights.begin(), mw.weights.end());
    est.diagnostics["solver_iterations"] = mw.iterations;
    est.diagnostics["alpha"] = mw.alpha;

    if (measure.estimand == EstimandKind::conditional) {
        // Weighted average of the covariate-specific contrast over the
        // reweighted index sample.
        std::vector<double> contrasts(opts.n);
        for (std::size_t i = 0; i < opts.n; ++i)
            contrasts[i] = conditional_contrast_at(model, measure, Treatment::B,
                                                   Treatment::A, xs[i]);
        std::vector<bool> all(opts.n, true);
        double se = 0.0;
        est.value = hajek_mean(contrasts, mw.weights, all, &se);
        est.se = se;
        return est;
    }

    const SimulatedTrial trial =
        simulate_index_trial(model, index_pop, opts.n, opts.seed);
    std::vector<double> ys(opts.n);
    std::vector<bool> arm_b(opts.n), arm_a(opts.n);
    for (std::size_t i = 0; i < opts.n; ++i) {
        arm_b[i] = trial.arm[i] == Treatment::B;
        arm_a[i] = !arm_b[i];
        ys[i] = observed_summary(measure, trial.y[i]);
    }
    double se_b = 0.0, se_a = 0.0;
    const double mb = hajek_mean(ys, mw.weights, arm_b, &se_b);
    const double ma = hajek_mean(ys, mw.weights, arm_a, &se_a);
    est.value = marginal_transform(measure.kind, mb) -
                marginal_transform(measure.kind, ma);
    const double gb = marginal_transform_derivative(measure.kind, mb);
    const double ga = marginal_transform_derivative(measure.kind, ma);
    est.se = std::sqrt(gb * gb * se_b * se_b + ga * ga * se_a * se_a);
    return est;
}

// STC path: g-computation of the B-vs-A contrast in the comparator
// population using the outcome model.
TransportEstimate gcomp_step1(const OutcomeModel& model,
                              const EffectMeasure& measure,
                              const PopulationSpec& index_pop,
                              const PopulationSpec& comparator,
                              const PipelineOptions& opts) {
    TransportEstimate est;
    est.measure = measure;
    est.t = Treatment::B;
    est.s = Treatment::A;
    est.source = index_pop.label;
    est.target = comparator.label;
    est.mechanism = Mechanism::gcomp;

    const OutcomeModel* effective = &model;
    OutcomeModel fitted;
    if (opts.mode == PipelineMode::estimated_model) {
        // Fit the outcome model on a simulated index trial, then standardize
        // the fitted model to the comparator.
        const SimulatedTrial trial =
            simulate_index_trial(model, index_pop, opts.n, opts.seed);
        if (model.link == Link::log_hazard_weibull) {
            std::vector<SurvObservation> data;
            data.reserve(opts.n);
            for (std::size_t i = 0; i < opts.n; ++i)
                data.push_back({trial.x[i], trial.arm[i], trial.y[i], true});
            const FitResult fit = fit_weibull(data);
            fitted = model_from_fit(fit, model.link);
            est.diagnostics["fit_iterations"] = fit.iterations;
        } else {
            std::vector<Observation> data;
            data.reserve(opts.n);
            for (std::size_t i = 0; i < opts.n; ++i)
                data.push_back({trial.x[i], trial.arm[i], trial.y[i]});
            const FitResult fit = model.link == Link::identity
                                      ? fit_linear(data)
                                      : fit_glm(data, model.link);
            fitted = model_from_fit(fit, model.link);
            est.diagnostics["fit_iterations"] = fit.iterations;
        }
        effective = &fitted;
    }

    if (opts.mode == PipelineMode::truth_monte_carlo) {
        const std::uint64_t seed = mix_seed(opts.seed, kGcompStream);
        const EstimandValue mc =
            measure.estimand == EstimandKind::conditional
                ? conditional_effect_mc(*effective, measure, comparator,
                                        Treatment::B, Treatment::A, opts.n, seed)
                : marginal_effect_mc(*effective, measure, comparator,
                                     Treatment::B, Treatment::A, opts.n, seed);
        est.value = mc.value;
        est.se = mc.monte_carlo->se;
        return est;
    }
    const EstimandValue exact =
        measure.estimand == EstimandKind::conditional
            ? conditional_effect(*effective, measure, comparator, Treatment::B,
                                 Treatment::A)
            : marginal_effect(*effective, measure, comparator, Treatment::B,
                              Treatment::A);
    est.value = exact.value;
    return est;
}

}  // namespace

SimulatedTrial simulate_index_trial(const OutcomeModel& model,
                                    const PopulationSpec& index_pop,
                                    std::size_t n, std::uint64_t seed) {
    SimulatedTrial trial;
    trial.x = sample_covariates(index_pop, n, mix_seed(seed, kCovariateStream));
    trial.arm.resize(n);
    trial.y.resize(n);
    SplitMix64 assign_rng(mix_seed(seed, kAssignStream));
    SplitMix64 outcome_rng(mix_seed(seed, kOutcomeStream));
    for (std::size_t i = 0; i < n; ++i) {
        trial.arm[i] =
            assign_rng.next_double() < 0.5 ? Treatment::A : Treatment::B;
        trial.y[i] = simulate_outcome(model, trial.arm[i], trial.x[i],
                                      outcome_rng);
    }
    return trial;
}

std::string to_string(Mechanism m) {
    switch (m) {
        case Mechanism::direct: return "direct";
        case Mechanism::gcomp: return "gcomp";
        case Mechanism::weighting: return "weighting";
    }
    throw std::logic_error("unreachable");
}

std::string to_string(PipelineMode m) {
    switch (m) {
        case PipelineMode::truth_quadrature: return "truth_quadrature";
        case PipelineMode::truth_monte_carlo: return "truth_monte_carlo";
        case PipelineMode::estimated_model: return "estimated_model";
    }
    throw std::logic_error("unreachable");
}

MaicWeights maic_weights(const std::vector<double>& source_x,
                         double target_mean) {
    if (source_x.empty())
        throw std::invalid_argument("maic_weights: empty covariate sample");
    const auto [lo, hi] = std::minmax_element(source_x.begin(), source_x.end());
    if (!(*lo < target_mean && target_mean < *hi))
        throw std::invalid_argument(
            "maic_weights: target mean " + std::to_string(target_mean) +
            " outside sample hull [" + std::to_string(*lo) + ", " +
            std::to_string(*hi) + "], no weights exist");

    const std::size_t n = source_x.size();
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = source_x[i] - target_mean;

    // Newton on the log-partition function: phi'(alpha) is the weighted mean
    // of z, phi'' the weighted variance.
    double alpha = 0.0;
    MaicWeights result;
    result.weights.resize(n);
    bool converged = false;
    double residual = 0.0;
    for (int iter = 1; iter <= 100; ++iter) {
        result.iterations = iter;
        double zmax = 0.0;
        for (double zi : z) zmax = std::max(zmax, alpha * zi);
        double sw = 0.0, swz = 0.0, swzz = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = std::exp(alpha * z[i] - zmax);
            sw += w;
            swz += w * z[i];
            swzz += w * z[i] * z[i];
        }
        const double mean_z = swz / sw;
        const double var_z = swzz / sw - mean_z * mean_z;
        residual = mean_z;
        if (std::abs(residual) < 1e-13) {
            converged = true;
            break;
        }
        alpha -= mean_z / var_z;
    }
    if (!converged)
        throw std::runtime_error(
            "maic_weights: Newton failed to converge, residual " +
            std::to_string(residual));

    double sw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        result.weights[i] = std::exp(alpha * z[i]);
        sw += result.weights[i];
    }
    double sw2 = 0.0;
    for (double& w : result.weights) {
        w *= static_cast<double>(n) / sw;  // normalize to mean 1
        sw2 += w * w;
    }
    result.alpha = alpha;
    result.ess = static_cast<double>(n) * static_cast<double>(n) / sw2;
    return result;
}

double weighted_marginal_outcome(const std::vector<double>& y,
                                 const std::vector<Treatment>& t_labels,
                                 const std::vector<double>& weights,
                                 Treatment t) {
    if (y.size() != t_labels.size() || y.size() != weights.size())
        throw std::invalid_argument(
            "weighted_marginal_outcome: mismatched input lengths");
    std::vector<bool> in_arm(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        in_arm[i] = t_labels[i] == t && weights[i] > 0.0;
    return hajek_mean(y, weights, in_arm, nullptr);
}

double gcomp_transport(const OutcomeModel& model, const PopulationSpec& target,
                       Treatment t, std::optional<double> tau,
                       const GcompMode& mode, double* se) {
    if (!mode.monte_carlo) {
        if (se) *se = 0.0;
        return expectation_over_x(
            target, [&](double x) { return outcome_mean(model, t, x, tau); });
    }
    const auto xs = sample_covariates(target, mode.n, mode.seed);
    double sum = 0.0, sumsq = 0.0;
    for (double x : xs) {
        const double v = outcome_mean(model, t, x, tau);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / mode.n;
    if (se) {
        const double var = (sumsq - mode.n * mean * mean) / (mode.n - 1.0);
        *se = std::sqrt(std::max(var, 0.0) / mode.n);
    }
    return mean;
}

TransportEstimate step1_anchored_estimate(const OutcomeModel& model,
                                          const EffectMeasure& measure,
                                          const PopulationSpec& index_pop,
                                          const PopulationSpec& comparator,
                                          const PipelineOptions& opts) {
    TransportEstimate delta_ba;
    if (opts.mechanism == Mechanism::weighting &&
        opts.mode != PipelineMode::truth_quadrature) {
        delta_ba = maic_step1(model, measure, index_pop, comparator, opts);
    } else {
        delta_ba = gcomp_step1(model, measure, index_pop, comparator, opts);
    }

    // Anchor against the comparator-population truth for C vs A.
    const EstimandValue delta_ca =
        measure.estimand == EstimandKind::conditional
            ? conditional_effect(model, measure, comparator, Treatment::C,
                                 Treatment::A)
            : marginal_effect(model, measure, comparator, Treatment::C,
                              Treatment::A);

    TransportEstimate anchored = delta_ba;
    anchored.t = Treatment::B;
    anchored.s = Treatment::C;
    anchored.value = anchored_indirect(delta_ba.value, delta_ca.value);
    return anchored;
}

std::vector<BiasPoint> two_step_pipeline(const OutcomeModel& model,
                                         const EffectMeasure& measure,
                                         const PopulationSpec& index_pop,
                                         const PopulationGrid& grid,
                                         const PipelineOptions& opts) {
    model.validate();
    const PopulationSpec& comparator = grid.comparator();
    const TransportEstimate anchored =
        step1_anchored_estimate(model, measure, index_pop, comparator, opts);

    std::vector<BiasPoint> points;
    points.reserve(grid.populations.size());
    for (const auto& target : grid.populations) {
        BiasPoint point;
        point.target_label = target.label;
        point.mu_x = target.mean();
        point.transported = anchored;
        point.transported.target = target.label;
        point.truth = measure.estimand == EstimandKind::conditional
                          ? conditional_effect(model, measure, target,
                                               Treatment::B, Treatment::C)
                          : marginal_effect(model, measure, target, Treatment::B,
                                            Treatment::C);
        point.bias = point.transported.value - point.truth.value;
        points.push_back(std::move(point));
    }
    return points;
}

}  // namespace transportlab
