#pragma once

#include <map>
#include <string>
#include <vector>

#include "transportlab/estimands.hpp"
#include "transportlab/model.hpp"
#include "transportlab/population.hpp"

namespace transportlab {

enum class Collapsibility {
    directly_collapsible,
    collapsible,       // weighted average of conditionals, weights may differ
    non_collapsible,
};

std::string to_string(Collapsibility c);

struct TransportVerdict {
    MeasureKind measure_kind = MeasureKind::mean_difference;
    EstimandKind estimand_kind = EstimandKind::conditional;
    bool sema = false;
    bool scale_aligned = false;
    Collapsibility collapsible = Collapsibility::directly_collapsible;
    bool directly_transportable = false;
    std::string reason;
};

// Rule-based verdict for a (measure, link, SEMA) combination. Conditional
// estimands need SEMA plus scale alignment; marginal estimands additionally
// need the measure to aggregate without distortion (directly collapsible, or
// collapsibility induced by the anchored contrast under a log link).
TransportVerdict classify_measure(const EffectMeasure& measure, Link link,
                                  bool sema);

struct CheckReport {
    std::string name;
    bool constancy_expected = false;  // per the encoded proposition
    bool ok = false;                  // observation matches the expectation
    double spread = 0.0;              // max - min over probes/grid
    std::map<std::string, double> values;
    std::string detail;

    // PASS when constancy was predicted and observed; EXPECTED-FAIL when
    // non-constancy was predicted and observed; FAIL on any mismatch.
    std::string status() const;
};

// Proposition A1: constancy of the conditional contrast over probe points
// when SEMA holds and the measure is scale-aligned; the constant must equal
// gamma_B - gamma_C.
CheckReport check_a1(const OutcomeModel& model, const EffectMeasure& measure,
                     const std::vector<double>& probe_points);

// Proposition A2: constancy of the marginal effect curve exactly when SEMA,
// scale alignment, and (possibly induced) direct collapsibility all hold.
CheckReport check_a2(const OutcomeModel& model, const EffectMeasure& measure,
                     const PopulationGrid& grid);

// Proposition B0: marginal contrast equals the population-average
// conditional contrast for directly collapsible difference measures.
// Refuses measures that are not directly collapsible.
CheckReport check_b0(const OutcomeModel& model, const EffectMeasure& measure,
                     const PopulationSpec& pop, double tol = 1e-10);

// Proposition B2 counterexample: two-point covariate law where the marginal
// log risk ratio (log 1.1) differs from the population-average conditional
// log risk ratio (0.5 log 2).
CheckReport check_b2_counterexample();

// The two-point model behind the B2 counterexample, expressed as a log-link
// outcome model plus its discrete population.
std::pair<OutcomeModel, PopulationSpec> b2_fixture();

// Proposition B3: under a log link with SEMA the marginal B-vs-C log risk
// ratio is constant at gamma_B - gamma_C across the grid, while the
// anchored B-vs-A and C-vs-A curves are not constant.
CheckReport check_b3(const OutcomeModel& model, const PopulationGrid& grid);

std::string reports_to_json(const std::vector<CheckReport>& reports);
std::string reports_to_text(const std::vector<CheckReport>& reports);

}  // namespace transportlab
