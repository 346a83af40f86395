#include "transportlab/propositions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace transportlab {

namespace {

// Decision boundary between "flat" and "genuinely varying" curves in
// quadrature mode: well above quadrature error (<= 1e-10) and well below
// the smallest genuine spread in the studied scenarios (>= 1e-3).
constexpr double kFlatnessThreshold = 1e-6;

Collapsibility collapsibility_of(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::mean_difference:
        case MeasureKind::risk_difference:
        case MeasureKind::rmst_difference:
            return Collapsibility::directly_collapsible;
        case MeasureKind::log_risk_ratio:
        case MeasureKind::log_rmst_ratio:
            return Collapsibility::collapsible;
        case MeasureKind::log_odds_ratio:
        case MeasureKind::conditional_log_hazard_ratio:
            return Collapsibility::non_collapsible;
    }
    throw std::logic_error("unreachable");
}

std::pair<double, double> range_of(const std::vector<double>& values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {*lo, *hi};
}

}  // namespace

std::string to_string(Collapsibility c) {
    switch (c) {
        case Collapsibility::directly_collapsible: return "directly_collapsible";
        case Collapsibility::collapsible: return "collapsible";
        case Collapsibility::non_collapsible: return "non_collapsible";
    }
    throw std::logic_error("unreachable");
}

std::string CheckReport::status() const {
    if (!ok) return "FAIL";
    return constancy_expected ? "PASS" : "EXPECTED-FAIL";
}

TransportVerdict classify_measure(const EffectMeasure& measure, Link link,
                                  bool sema) {
    require_compatible(measure.kind, link);
    TransportVerdict verdict;
    verdict.measure_kind = measure.kind;
    verdict.estimand_kind = measure.estimand;
    verdict.sema = sema;
    verdict.scale_aligned = transportlab::scale_aligned(measure.kind, link);
    verdict.collapsible = collapsibility_of(measure.kind);

    if (!sema) {
        verdict.directly_transportable = false;
        verdict.reason = "SEMA violated: effect modification differs across active arms";
        return verdict;
    }
    if (!verdict.scale_aligned) {
        verdict.directly_transportable = false;
        verdict.reason = "scale misalignment: estimand transform is not the "
                         "identity on the linear predictor scale";
        return verdict;
    }
    if (measure.estimand == EstimandKind::conditional) {
        verdict.directly_transportable = true;
        verdict.reason = "SEMA and scale alignment make the conditional "
                         "contrast constant in x";
        return verdict;
    }
    if (verdict.collapsible == Collapsibility::non_collapsible) {
        verdict.directly_transportable = false;
        verdict.reason = "non-collapsible marginal measure depends on the "
                         "covariate distribution";
        return verdict;
    }
    verdict.directly_transportable = true;
    verdict.reason = verdict.collapsible == Collapsibility::directly_collapsible
                         ? "SEMA, scale alignment, and direct collapsibility"
                         : "SEMA and scale alignment induce direct "
                           "collapsibility of the anchored contrast";
    return verdict;
}

CheckReport check_a1(const OutcomeModel& model, const EffectMeasure& measure,
                     const std::vector<double>& probe_points) {
    if (measure.estimand != EstimandKind::conditional)
        throw std::invalid_argument("check_a1 requires a conditional measure");
    if (probe_points.size() < 2)
        throw std::invalid_argument("check_a1 needs at least two probe points");

    CheckReport report;
    report.name = "A1/" + measure.name();
    report.constancy_expected =
        model.sema_holds() && scale_aligned(measure.kind, model.link);

    std::vector<double> contrasts;
    contrasts.reserve(probe_points.size());
    for (double x : probe_points)
        contrasts.push_back(conditional_contrast_at(model, measure, Treatment::B,
                                                    Treatment::C, x));
    const auto [lo, hi] = range_of(contrasts);
    report.spread = hi - lo;
    report.values["spread"] = report.spread;

    if (report.constancy_expected) {
        const double expected_constant =
            model.gamma_for(Treatment::B) - model.gamma_for(Treatment::C);
        report.values["constant"] = contrasts.front();
        report.values["gamma_B_minus_gamma_C"] = expected_constant;
        report.ok = report.spread < 1e-10 &&
                    std::abs(contrasts.front() - expected_constant) < 1e-10;
        report.detail = "conditional contrast constant at gamma_B - gamma_C";
    } else {
        report.ok = report.spread > kFlatnessThreshold;
        report.detail = "conditional contrast varies with x as predicted";
    }
    return report;
}

CheckReport check_a2(const OutcomeModel& model, const EffectMeasure& measure,
                     const PopulationGrid& grid) {
    if (measure.estimand != EstimandKind::marginal)
        throw std::invalid_argument("check_a2 requires a marginal measure");

    CheckReport report;
    report.name = "A2/" + measure.name();
    const TransportVerdict verdict =
        classify_measure(measure, model.link, model.sema_holds());
    report.constancy_expected = verdict.directly_transportable;

    const auto curve =
        effect_curve(model, measure, grid, Treatment::B, Treatment::C);
    std::vector<double> values;
    for (const auto& point : curve) values.push_back(point.value);
    const auto [lo, hi] = range_of(values);
    report.spread = hi - lo;
    report.values["spread"] = report.spread;
    report.values["comparator_value"] = curve[grid.comparator_index].value;

    if (report.constancy_expected) {
        report.ok = report.spread < 1e-8;
        report.detail = "marginal curve flat across the grid";
    } else {
        report.ok = report.spread > kFlatnessThreshold;
        report.detail = "marginal curve varies across the grid as predicted";
    }
    return report;
}

CheckReport check_b0(const OutcomeModel& model, const EffectMeasure& measure,
                     const PopulationSpec& pop, double tol) {
    if (collapsibility_of(measure.kind) != Collapsibility::directly_collapsible)
        throw std::invalid_argument("check_b0: measure " + measure.name() +
                                    " is not directly collapsible");
    const EffectMeasure marginal(measure.kind, EstimandKind::marginal,
                                 measure.tau);
    const EffectMeasure conditional(measure.kind, EstimandKind::conditional,
                                    measure.tau);
    const double marg =
        marginal_effect(model, marginal, pop, Treatment::B, Treatment::C).value;
    const double cond =
        conditional_effect(model, conditional, pop, Treatment::B, Treatment::C)
            .value;

    CheckReport report;
    report.name = "B0/" + measure.name();
    report.constancy_expected = true;
    report.values["marginal"] = marg;
    report.values["avg_conditional"] = cond;
    report.spread = std::abs(marg - cond);
    report.values["abs_difference"] = report.spread;
    report.ok = report.spread < tol;
    report.detail = "marginal equals population-average conditional";
    return report;
}

std::pair<OutcomeModel, PopulationSpec> b2_fixture() {
    // Conditional means mu_A = {0.1, 0.9}, mu_B = {0.2, 0.9} on X in {0,1},
    // expressed through a log link.
    OutcomeModel model;
    model.link = Link::log;
    model.beta0 = std::log(0.1);
    model.beta1 = std::log(9.0);
    model.gamma[Treatment::B] = std::log(2.0);
    model.beta2[Treatment::B] = -std::log(2.0);
    model.validate();
    PopulationSpec pop =
        PopulationSpec::discrete({{0.0, 0.5}, {1.0, 0.5}}, "B2-two-point");
    return {model, pop};
}

CheckReport check_b2_counterexample() {
    const auto [model, pop] = b2_fixture();
    const EffectMeasure conditional(MeasureKind::log_risk_ratio,
                                    EstimandKind::conditional);
    const EffectMeasure marginal(MeasureKind::log_risk_ratio,
                                 EstimandKind::marginal);
    const double cond =
        conditional_effect(model, conditional, pop, Treatment::B, Treatment::A)
            .value;
    const double marg =
        marginal_effect(model, marginal, pop, Treatment::B, Treatment::A).value;
    const double cond_expected = 0.5 * std::log(2.0);
    const double marg_expected = std::log(1.1);

    CheckReport report;
    report.name = "B2/log_risk_ratio_counterexample";
    report.constancy_expected = true;
    report.values["conditional"] = cond;
    report.values["marginal"] = marg;
    report.values["difference"] = cond - marg;
    report.spread = std::abs(cond - marg);
    report.ok = std::abs(cond - cond_expected) < 1e-12 &&
                std::abs(marg - marg_expected) < 1e-12 &&
                report.spread > 0.25;
    report.detail = "conditional = log(2)/2, marginal = log(1.1), unequal";
    return report;
}

CheckReport check_b3(const OutcomeModel& model, const PopulationGrid& grid) {
    if (model.link != Link::log)
        throw std::invalid_argument("check_b3 requires a log-link model");
    if (!model.sema_holds())
        throw std::invalid_argument("check_b3 requires SEMA");

    const EffectMeasure marginal(MeasureKind::log_risk_ratio,
                                 EstimandKind::marginal);
    const double expected_constant =
        model.gamma_for(Treatment::B) - model.gamma_for(Treatment::C);

    auto curve_values = [&](Treatment t, Treatment s) {
        std::vector<double> values;
        for (const auto& point : effect_curve(model, marginal, grid, t, s))
            values.push_back(point.value);
        return values;
    };
    const auto bc = curve_values(Treatment::B, Treatment::C);
    const auto ba = curve_values(Treatment::B, Treatment::A);
    const auto ca = curve_values(Treatment::C, Treatment::A);

    double bc_dev = 0.0;
    for (double v : bc) bc_dev = std::max(bc_dev, std::abs(v - expected_constant));
    const auto [ba_lo, ba_hi] = range_of(ba);
    const auto [ca_lo, ca_hi] = range_of(ca);

    CheckReport report;
    report.name = "B3/log_risk_ratio_induced_collapsibility";
    report.constancy_expected = true;
    report.spread = bc_dev;
    report.values["bc_max_deviation"] = bc_dev;
    report.values["gamma_B_minus_gamma_C"] = expected_constant;
    report.values["ba_spread"] = ba_hi - ba_lo;
    report.values["ca_spread"] = ca_hi - ca_lo;
    report.ok = bc_dev < 1e-8 && (ba_hi - ba_lo) > 1e-3 && (ca_hi - ca_lo) > 1e-3;
    report.detail =
        "B-vs-C marginal log RR constant while B-vs-A and C-vs-A vary";
    return report;
}

std::string reports_to_json(const std::vector<CheckReport>& reports) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& report : reports) {
        nlohmann::ordered_json item;
        item["name"] = report.name;
        item["status"] = report.status();
        item["constancy_expected"] = report.constancy_expected;
        item["spread"] = report.spread;
        item["values"] = report.values;
        item["detail"] = report.detail;
        out.push_back(item);
    }
    return out.dump(2);
}

std::string reports_to_text(const std::vector<CheckReport>& reports) {
    std::ostringstream os;
    std::size_t width = 4;
    for (const auto& report : reports) width = std::max(width, report.name.size());
    for (const auto& report : reports) {
        os << report.name << std::string(width - report.name.size() + 2, ' ')
           << report.status() << "  spread=" << report.spread << "  "
           << report.detail << '\n';
    }
    return os.str();
}

}  // namespace transportlab
