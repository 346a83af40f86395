#pragma once

#include "transportlab/model.hpp"
#include "transportlab/population.hpp"

namespace transportlab {

// The four bundled outcome models behind the simulation studies, each in a
// SEMA and a no-SEMA variant.

// Continuous outcome, identity link: beta0=20, beta1=10, gamma_B=10,
// gamma_C=5; beta2 = (2,2) under SEMA, (2,-4) otherwise.
OutcomeModel study_mean_difference(bool sema);

// Binary outcome, logit link: beta0=0, beta1=-1, gamma_B=-3, gamma_C=-4;
// beta2 = (-3,-3) under SEMA, (-3,-4) otherwise.
OutcomeModel study_log_odds(bool sema);

// Weibull survival, log-hazard link, shape 1.5: beta0=-1, beta1=log 0.25,
// gamma_B=log 0.4, gamma_C=log 0.6; beta2 = (log 0.9, log 0.9) under SEMA,
// (log 0.7, log 0.9) otherwise.
OutcomeModel study_weibull(bool sema);

// Binary outcome, log link: beta0=-3, beta1=0.8, gamma_B=log 1.40,
// gamma_C=log 1.10; beta2 = (-0.6,-0.6) under SEMA, (-0.6,-1) otherwise.
OutcomeModel study_log_risk(bool sema);

// Default RMST restriction time for the survival study.
inline constexpr double kDefaultTau = 2.0;

// Default index-trial (AB) covariate population used by the transport
// pipeline. Shares the comparator's covariate law (uniform, mean 0), so the
// Step-1 reweighting is exercised against sampling noise only and the
// weighted and g-computed paths estimate the same marginal quantity even for
// non-collapsible measures.
PopulationSpec default_index_population();

}  // namespace transportlab
