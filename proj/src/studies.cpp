#include "transportlab/studies.hpp"

#include <cmath>

namespace transportlab {

OutcomeModel study_mean_difference(bool sema) {
    OutcomeModel model;
    model.link = Link::identity;
    model.beta0 = 20.0;
    model.beta1 = 10.0;
    model.gamma[Treatment::B] = 10.0;
    model.gamma[Treatment::C] = 5.0;
    model.beta2[Treatment::B] = 2.0;
    model.beta2[Treatment::C] = sema ? 2.0 : -4.0;
    model.sigma = 1.0;
    model.validate();
    return model;
}

OutcomeModel study_log_odds(bool sema) {
    OutcomeModel model;
    model.link = Link::logit;
    model.beta0 = 0.0;
    model.beta1 = -1.0;
    model.gamma[Treatment::B] = -3.0;
    model.gamma[Treatment::C] = -4.0;
    model.beta2[Treatment::B] = -3.0;
    model.beta2[Treatment::C] = sema ? -3.0 : -4.0;
    model.validate();
    return model;
}

OutcomeModel study_weibull(bool sema) {
    OutcomeModel model;
    model.link = Link::log_hazard_weibull;
    model.shape = 1.5;
    model.beta0 = -1.0;
    model.beta1 = std::log(0.25);
    model.gamma[Treatment::B] = std::log(0.4);
    model.gamma[Treatment::C] = std::log(0.6);
    model.beta2[Treatment::B] = sema ? std::log(0.9) : std::log(0.7);
    model.beta2[Treatment::C] = std::log(0.9);
    model.validate();
    return model;
}

OutcomeModel study_log_risk(bool sema) {
    OutcomeModel model;
    model.link = Link::log;
    model.beta0 = -3.0;
    model.beta1 = 0.8;
    model.gamma[Treatment::B] = std::log(1.40);
    model.gamma[Treatment::C] = std::log(1.10);
    model.beta2[Treatment::B] = -0.6;
    model.beta2[Treatment::C] = sema ? -0.6 : -1.0;
    model.validate();
    return model;
}

PopulationSpec default_index_population() {
    return PopulationSpec::uniform(0.0, 2.0, "AB-index");
}

}  // namespace transportlab
