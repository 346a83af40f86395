#include "transportlab/model.hpp"

#include <cmath>

#include "transportlab/rmst.hpp"

namespace transportlab {

std::string to_string(Treatment t) {
    switch (t) {
        case Treatment::A: return "A";
        case Treatment::B: return "B";
        case Treatment::C: return "C";
    }
    throw std::logic_error("unreachable");
}

Treatment treatment_from_string(const std::string& s) {
    if (s == "A") return Treatment::A;
    if (s == "B") return Treatment::B;
    if (s == "C") return Treatment::C;
    throw std::invalid_argument("unknown treatment label: " + s);
}

std::string to_string(Link link) {
    switch (link) {
        case Link::identity: return "identity";
        case Link::logit: return "logit";
        case Link::log: return "log";
        case Link::log_hazard_weibull: return "log_hazard_weibull";
    }
    throw std::logic_error("unreachable");
}

Link link_from_string(const std::string& s) {
    if (s == "identity") return Link::identity;
    if (s == "logit") return Link::logit;
    if (s == "log") return Link::log;
    if (s == "log_hazard_weibull") return Link::log_hazard_weibull;
    throw std::invalid_argument("unknown link: " + s);
}

std::string to_string(MeasureKind k) {
    switch (k) {
        case MeasureKind::mean_difference: return "mean_difference";
        case MeasureKind::risk_difference: return "risk_difference";
        case MeasureKind::log_odds_ratio: return "log_odds_ratio";
        case MeasureKind::log_risk_ratio: return "log_risk_ratio";
        case MeasureKind::conditional_log_hazard_ratio:
            return "conditional_log_hazard_ratio";
        case MeasureKind::rmst_difference: return "rmst_difference";
        case MeasureKind::log_rmst_ratio: return "log_rmst_ratio";
    }
    throw std::logic_error("unreachable");
}

MeasureKind measure_kind_from_string(const std::string& s) {
    if (s == "mean_difference") return MeasureKind::mean_difference;
    if (s == "risk_difference") return MeasureKind::risk_difference;
    if (s == "log_odds_ratio") return MeasureKind::log_odds_ratio;
    if (s == "log_risk_ratio") return MeasureKind::log_risk_ratio;
    if (s == "conditional_log_hazard_ratio")
        return MeasureKind::conditional_log_hazard_ratio;
    if (s == "rmst_difference") return MeasureKind::rmst_difference;
    if (s == "log_rmst_ratio") return MeasureKind::log_rmst_ratio;
    throw std::invalid_argument("unknown effect measure: " + s);
}

std::string to_string(EstimandKind k) {
    return k == EstimandKind::conditional ? "conditional" : "marginal";
}

double link_forward(Link link, double mu) {
    switch (link) {
        case Link::identity: return mu;
        case Link::logit: return logit(mu);
        case Link::log:
        case Link::log_hazard_weibull:
            if (mu <= 0.0)
                throw std::domain_error("log link: mean must be > 0");
            return std::log(mu);
    }
    throw std::logic_error("unreachable");
}

double link_inverse(Link link, double u) {
    switch (link) {
        case Link::identity: return u;
        case Link::logit: return expit(u);
        case Link::log:
        case Link::log_hazard_weibull:
            return std::exp(u);
    }
    throw std::logic_error("unreachable");
}

bool scale_aligned(MeasureKind kind, Link link) {
    switch (kind) {
        case MeasureKind::mean_difference: return link == Link::identity;
        case MeasureKind::log_odds_ratio: return link == Link::logit;
        case MeasureKind::log_risk_ratio: return link == Link::log;
        case MeasureKind::conditional_log_hazard_ratio:
            return link == Link::log_hazard_weibull;
        case MeasureKind::risk_difference:
        case MeasureKind::rmst_difference:
        case MeasureKind::log_rmst_ratio:
            return false;
    }
    throw std::logic_error("unreachable");
}

void require_compatible(MeasureKind kind, Link link) {
    auto fail = [&] {
        throw std::invalid_argument("measure " + to_string(kind) +
                                    " cannot be evaluated under link " +
                                    to_string(link));
    };
    switch (kind) {
        case MeasureKind::mean_difference:
            if (link != Link::identity) fail();
            break;
        case MeasureKind::risk_difference:
        case MeasureKind::log_odds_ratio:
        case MeasureKind::log_risk_ratio:
            if (link != Link::logit && link != Link::log) fail();
            break;
        case MeasureKind::conditional_log_hazard_ratio:
        case MeasureKind::rmst_difference:
        case MeasureKind::log_rmst_ratio:
            if (link != Link::log_hazard_weibull) fail();
            break;
    }
}

double conditional_summary(const OutcomeModel& model,
                           const EffectMeasure& measure, Treatment t,
                           double x) {
    require_compatible(measure.kind, model.link);
    const double eta = linear_predictor(model, t, x);
    switch (measure.kind) {
        case MeasureKind::mean_difference:
            return eta;
        case MeasureKind::risk_difference:
            return link_inverse(model.link, eta);
        case MeasureKind::log_odds_ratio:
            return model.link == Link::logit ? eta
                                             : logit(link_inverse(model.link, eta));
        case MeasureKind::log_risk_ratio: {
            if (model.link == Link::log) return eta;
            return std::log(link_inverse(model.link, eta));
        }
        case MeasureKind::conditional_log_hazard_ratio:
            return eta;
        case MeasureKind::rmst_difference:
            return rmst(model, t, x, *measure.tau);
        case MeasureKind::log_rmst_ratio:
            return std::log(rmst(model, t, x, *measure.tau));
    }
    throw std::logic_error("unreachable");
}

double conditional_contrast_at(const OutcomeModel& model,
                               const EffectMeasure& measure, Treatment t,
                               Treatment s, double x) {
    if (measure.estimand != EstimandKind::conditional)
        throw std::invalid_argument(
            "conditional_contrast_at requires a conditional estimand");
    if (t == s)
        throw std::invalid_argument(
            "conditional contrast requires two distinct arms");
    return conditional_summary(model, measure, t, x) -
           conditional_summary(model, measure, s, x);
}

}  // namespace transportlab
