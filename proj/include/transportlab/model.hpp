#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace transportlab {

// Treatment arms. A is the common comparator (anchor); B and C are active.
enum class Treatment { A, B, C };

std::string to_string(Treatment t);
Treatment treatment_from_string(const std::string& s);

enum class Link { identity, logit, log, log_hazard_weibull };

std::string to_string(Link link);
Link link_from_string(const std::string& s);

// Numerically stable expit. Saturates to [1e-15, 1 - 1e-15] only when the
// exponential has already overflowed/underflowed in IEEE arithmetic.
inline double expit(double u) {
    constexpr double eps = 1e-15;
    if (u >= 0.0) {
        double p = 1.0 / (1.0 + std::exp(-u));
        return p >= 1.0 ? 1.0 - eps : p;
    }
    double e = std::exp(u);
    double p = e / (1.0 + e);
    return p <= 0.0 ? eps : p;
}

// log(1 + e^z) without overflow.
inline double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double logit(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("logit: argument " + std::to_string(p) +
                                " outside (0,1)");
    return std::log(p) - std::log1p(-p);
}

// g(mu) for each link. The Weibull link operates on the log-hazard scale.
double link_forward(Link link, double mu);

// g^{-1}(u). For log_hazard_weibull this is the hazard multiplier
// lambda = e^u; the conditional mean on the time scale needs the RMST
// machinery, not this scalar map.
double link_inverse(Link link, double u);

enum class MeasureKind {
    mean_difference,
    risk_difference,
    log_odds_ratio,
    log_risk_ratio,
    conditional_log_hazard_ratio,
    rmst_difference,
    log_rmst_ratio,
};

enum class EstimandKind { conditional, marginal };

std::string to_string(MeasureKind k);
MeasureKind measure_kind_from_string(const std::string& s);
std::string to_string(EstimandKind k);

inline bool is_rmst_kind(MeasureKind k) {
    return k == MeasureKind::rmst_difference || k == MeasureKind::log_rmst_ratio;
}

// Contrast scale h paired with the estimand kind (conditional or marginal).
struct EffectMeasure {
    MeasureKind kind = MeasureKind::mean_difference;
    EstimandKind estimand = EstimandKind::conditional;
    std::optional<double> tau;  // RMST restriction time

    EffectMeasure() = default;
    EffectMeasure(MeasureKind k, EstimandKind e,
                  std::optional<double> restriction = std::nullopt)
        : kind(k), estimand(e), tau(restriction) {
        if (k == MeasureKind::conditional_log_hazard_ratio &&
            e == EstimandKind::marginal)
            throw std::invalid_argument(
                "conditional_log_hazard_ratio cannot be a marginal estimand");
        if (is_rmst_kind(k)) {
            if (!tau) throw std::invalid_argument(
                "RMST-based measure requires a restriction time tau");
            if (*tau <= 0.0) throw std::invalid_argument("tau must be > 0");
        }
    }

    std::string name() const { return transportlab::to_string(kind); }
};

// Link-scale outcome regression: eta_t(x) = beta0 + beta1*x + beta2[t]*x + gamma[t].
// beta2[A] and gamma[A] are identically zero; absent entries default to zero.
struct OutcomeModel {
    Link link = Link::identity;
    double beta0 = 0.0;
    double beta1 = 0.0;
    std::map<Treatment, double> beta2;   // effect modification, per active arm
    std::map<Treatment, double> gamma;   // baseline treatment effect
    std::optional<double> shape;         // Weibull shape nu
    std::optional<double> sigma;         // Gaussian noise SD

    double beta2_for(Treatment t) const {
        auto it = beta2.find(t);
        return it == beta2.end() ? 0.0 : it->second;
    }
    double gamma_for(Treatment t) const {
        auto it = gamma.find(t);
        return it == gamma.end() ? 0.0 : it->second;
    }

    bool sema_holds() const {
        return beta2_for(Treatment::B) == beta2_for(Treatment::C);
    }

    void validate() const {
        if (beta2_for(Treatment::A) != 0.0 || gamma_for(Treatment::A) != 0.0)
            throw std::invalid_argument(
                "anchor arm A must have beta2 = gamma = 0");
        if (link == Link::log_hazard_weibull) {
            if (!shape) throw std::invalid_argument(
                "Weibull model requires a shape parameter");
            if (*shape <= 0.0)
                throw std::invalid_argument("Weibull shape must be > 0");
        } else if (shape) {
            throw std::invalid_argument(
                "shape is only meaningful for the Weibull link");
        }
        if (sigma && *sigma <= 0.0)
            throw std::invalid_argument("sigma must be > 0");
    }
};

inline double linear_predictor(const OutcomeModel& model, Treatment t,
                               double x) {
    return model.beta0 + model.beta1 * x + model.beta2_for(t) * x +
           model.gamma_for(t);
}

// True iff h compose g^{-1} is the identity, i.e. the measure is expressed
// on the model's linear predictor scale.
bool scale_aligned(MeasureKind kind, Link link);

// Throws if the conditional contrast for `kind` cannot be evaluated
// pointwise under `link` (e.g. risk_difference from an identity-link model).
void require_compatible(MeasureKind kind, Link link);

// h(g^{-1}(eta_t(x))): the arm-t conditional summary at covariate value x on
// the measure scale. RMST kinds integrate the Weibull survival curve.
double conditional_summary(const OutcomeModel& model, const EffectMeasure& measure,
                           Treatment t, double x);

// h(g^{-1}(eta_t(x))) - h(g^{-1}(eta_s(x))).
double conditional_contrast_at(const OutcomeModel& model,
                               const EffectMeasure& measure, Treatment t,
                               Treatment s, double x);

}  // namespace transportlab
