#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "transportlab/model.hpp"
#include "transportlab/population.hpp"
#include "transportlab/rmst.hpp"
#include "transportlab/rng.hpp"

namespace transportlab {

struct MonteCarloInfo {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double se = 0.0;
};

struct EstimandValue {
    double value = 0.0;
    EffectMeasure measure;
    std::string population;
    Treatment t = Treatment::B;
    Treatment s = Treatment::A;
    std::optional<MonteCarloInfo> monte_carlo;  // empty for quadrature

    bool is_quadrature() const { return !monte_carlo.has_value(); }
};

// E_{X~pop}[ h(g^{-1}(eta_t(X))) - h(g^{-1}(eta_s(X))) ]. When the measure
// is scale-aligned with the link this equals eta_t(x_bar) - eta_s(x_bar);
// both routes are evaluated and must agree within 1e-10.
EstimandValue conditional_effect(const OutcomeModel& model,
                                 const EffectMeasure& measure,
                                 const PopulationSpec& pop, Treatment t,
                                 Treatment s);

// h(E_X[g^{-1}(eta_t(X))]) - h(E_X[g^{-1}(eta_s(X))]); RMST kinds average
// RMST_t(X) on the time scale before applying h.
EstimandValue marginal_effect(const OutcomeModel& model,
                              const EffectMeasure& measure,
                              const PopulationSpec& pop, Treatment t,
                              Treatment s);

// Monte Carlo counterparts: average over a covariate sample of size n,
// with a standard error attached.
EstimandValue conditional_effect_mc(const OutcomeModel& model,
                                    const EffectMeasure& measure,
                                    const PopulationSpec& pop, Treatment t,
                                    Treatment s, std::size_t n,
                                    std::uint64_t seed);
EstimandValue marginal_effect_mc(const OutcomeModel& model,
                                 const EffectMeasure& measure,
                                 const PopulationSpec& pop, Treatment t,
                                 Treatment s, std::size_t n,
                                 std::uint64_t seed);

// One estimand per grid population, grid order, quadrature mode.
std::vector<EstimandValue> effect_curve(const OutcomeModel& model,
                                        const EffectMeasure& measure,
                                        const PopulationGrid& grid, Treatment t,
                                        Treatment s);

// h on the outcome-mean scale for a marginal measure, and its derivative
// (used for delta-method standard errors).
double marginal_transform(MeasureKind kind, double mean);
double marginal_transform_derivative(MeasureKind kind, double mean);

// Arm-t conditional mean at covariate value x on the outcome scale
// (probability, mean, or RMST at tau for the Weibull link).
double outcome_mean(const OutcomeModel& model, Treatment t, double x,
                    std::optional<double> tau = std::nullopt);

// Simulated potential outcome for arm t at covariate value x: Gaussian noise
// for the identity link, Bernoulli for logit/log, inverse-transform Weibull
// event time for the survival model.
double simulate_outcome(const OutcomeModel& model, Treatment t, double x,
                        SplitMix64& rng);

}  // namespace transportlab
