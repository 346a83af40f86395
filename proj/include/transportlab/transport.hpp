#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "transportlab/estimands.hpp"
#include "transportlab/model.hpp"
#include "transportlab/population.hpp"

namespace transportlab {

enum class Mechanism { direct, gcomp, weighting };

std::string to_string(Mechanism m);

struct TransportEstimate {
    double value = 0.0;
    EffectMeasure measure;
    Treatment t = Treatment::B;
    Treatment s = Treatment::A;
    std::string source;
    std::string target;
    Mechanism mechanism = Mechanism::direct;
    std::optional<double> se;
    std::map<std::string, double> diagnostics;  // ess, weight extremes, iterations
};

struct MaicWeights {
    std::vector<double> weights;  // normalized to mean 1
    double alpha = 0.0;           // exponential tilt coefficient
    double ess = 0.0;             // (sum w)^2 / sum w^2
    int iterations = 0;
};

// Exponential-tilt weights w_i = exp(alpha * (x_i - target_mean)) matching
// the weighted first moment of x to target_mean (method of moments, solved
// by Newton on the log-partition function).
MaicWeights maic_weights(const std::vector<double>& source_x,
                         double target_mean);

// Hajek (self-normalized) weighted mean of y over observations with arm t.
double weighted_marginal_outcome(const std::vector<double>& y,
                                 const std::vector<Treatment>& t_labels,
                                 const std::vector<double>& weights,
                                 Treatment t);

struct GcompMode {
    bool monte_carlo = false;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

// E_{X~target}[ g^{-1}(eta_t(X)) ] (RMST at tau for Weibull models),
// by quadrature or by Monte Carlo over sampled target covariates.
// In MC mode *se receives the sampling standard error if non-null.
double gcomp_transport(const OutcomeModel& model, const PopulationSpec& target,
                       Treatment t, std::optional<double> tau,
                       const GcompMode& mode = {}, double* se = nullptr);

inline double anchored_indirect(double delta_ba, double delta_ca) {
    return delta_ba - delta_ca;
}

// One simulated two-arm (A/B) index trial: covariates, 1:1 randomized arms,
// and raw outcomes (event times for Weibull models, uncensored). The same
// seed yields the same trial the Monte Carlo and estimated-model pipeline
// paths consume.
struct SimulatedTrial {
    std::vector<double> x;
    std::vector<Treatment> arm;
    std::vector<double> y;
};

SimulatedTrial simulate_index_trial(const OutcomeModel& model,
                                    const PopulationSpec& index_pop,
                                    std::size_t n, std::uint64_t seed);

enum class PipelineMode { truth_quadrature, truth_monte_carlo, estimated_model };

std::string to_string(PipelineMode m);

struct PipelineOptions {
    Mechanism mechanism = Mechanism::gcomp;  // gcomp = STC path, weighting = MAIC path
    PipelineMode mode = PipelineMode::truth_quadrature;
    std::size_t n = 100000;  // per-population sample size in MC modes
    std::uint64_t seed = 0;
};

struct BiasPoint {
    std::string target_label;
    double mu_x = 0.0;
    TransportEstimate transported;
    EstimandValue truth;
    double bias = 0.0;  // transported - truth
};

// Step 1: conditionally transport Delta_BA from the index population to the
// comparator (weighting or g-computation) and anchor against the
// comparator-truth Delta_CA. Step 2: apply the resulting Delta_BC(AC)
// unchanged to every grid population and report the bias against the truth
// there.
std::vector<BiasPoint> two_step_pipeline(const OutcomeModel& model,
                                         const EffectMeasure& measure,
                                         const PopulationSpec& index_pop,
                                         const PopulationGrid& grid,
                                         const PipelineOptions& opts);

// The Step-1 anchored estimate Delta_BC(AC) on its own.
TransportEstimate step1_anchored_estimate(const OutcomeModel& model,
                                          const EffectMeasure& measure,
                                          const PopulationSpec& index_pop,
                                          const PopulationSpec& comparator,
                                          const PipelineOptions& opts);

}  // namespace transportlab
