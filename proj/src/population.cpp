#include "transportlab/population.hpp"

#include <cmath>
#include <stdexcept>

#include "transportlab/quadrature.hpp"
#include "transportlab/rng.hpp"

namespace transportlab {

PopulationSpec PopulationSpec::uniform(double mean, double range,
                                       std::string label) {
    PopulationSpec spec;
    spec.dist = Uniform{mean, range};
    spec.label = std::move(label);
    spec.validate();
    return spec;
}

PopulationSpec PopulationSpec::discrete(
    std::vector<std::pair<double, double>> points, std::string label) {
    PopulationSpec spec;
    spec.dist = Discrete{std::move(points)};
    spec.label = std::move(label);
    spec.validate();
    return spec;
}

double PopulationSpec::mean() const {
    if (is_uniform()) return as_uniform().mean;
    double m = 0.0;
    for (const auto& [x, p] : as_discrete().points) m += x * p;
    return m;
}

void PopulationSpec::validate() const {
    if (is_uniform()) {
        if (as_uniform().range <= 0.0)
            throw std::invalid_argument("population " + label +
                                        ": uniform range must be > 0");
        return;
    }
    const auto& points = as_discrete().points;
    if (points.empty())
        throw std::invalid_argument("population " + label +
                                    ": discrete law needs at least one point");
    double total = 0.0;
    for (const auto& [x, p] : points) {
        if (p < 0.0)
            throw std::invalid_argument("population " + label +
                                        ": negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("population " + label +
                                    ": probabilities must sum to 1");
}

PopulationGrid default_grid() {
    PopulationGrid grid;
    for (int i = 0; i <= 20; ++i) {
        double mu = -0.5 + 0.05 * i;
        if (std::abs(mu) < 1e-12) mu = 0.0;
        char label[32];
        std::snprintf(label, sizeof(label), "mu=%+.2f", mu);
        grid.populations.push_back(PopulationSpec::uniform(mu, 2.0, label));
    }
    grid.comparator_index = 10;
    return grid;
}

std::vector<double> sample_covariates(const PopulationSpec& pop, std::size_t n,
                                      std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_covariates: n must be >= 1");
    SplitMix64 rng(seed);
    std::vector<double> draws;
    draws.reserve(n);
    if (pop.is_uniform()) {
        const auto& u = pop.as_uniform();
        for (std::size_t i = 0; i < n; ++i)
            draws.push_back(u.lower() + u.range * rng.next_double());
        return draws;
    }
    const auto& points = pop.as_discrete().points;
    for (std::size_t i = 0; i < n; ++i) {
        double v = rng.next_double();
        double cum = 0.0;
        double x = points.back().first;
        for (const auto& [xi, p] : points) {
            cum += p;
            if (v < cum) { x = xi; break; }
        }
        draws.push_back(x);
    }
    return draws;
}

double expectation_over_x(const PopulationSpec& pop,
                          const std::function<double(double)>& f, int nodes) {
    if (pop.is_uniform()) {
        const auto& u = pop.as_uniform();
        auto checked = [&](double x) {
            double v = f(x);
            if (!std::isfinite(v))
                throw std::runtime_error(
                    "expectation_over_x: non-finite integrand at x = " +
                    std::to_string(x));
            return v;
        };
        return gauss_legendre_integrate(checked, u.lower(), u.upper(), nodes) /
               u.range;
    }
    double sum = 0.0;
    for (const auto& [x, p] : pop.as_discrete().points) {
        double v = f(x);
        if (!std::isfinite(v))
            throw std::runtime_error(
                "expectation_over_x: non-finite integrand at x = " +
                std::to_string(x));
        sum += p * v;
    }
    return sum;
}

}  // namespace transportlab
