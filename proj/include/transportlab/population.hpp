#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace transportlab {

// Covariate law of X for one population. Either uniform with a given mean
// and range, or a finite discrete law (used by the collapsibility
// counterexamples).
struct PopulationSpec {
    struct Uniform {
        double mean;
        double range;
        Uniform() : mean(0.0), range(2.0) {}
        Uniform(double m, double r) : mean(m), range(r) {}
        double lower() const { return mean - 0.5 * range; }
        double upper() const { return mean + 0.5 * range; }
    };
    struct Discrete {
        std::vector<std::pair<double, double>> points;  // (x, prob)
    };

    std::variant<Uniform, Discrete> dist;
    std::string label;

    static PopulationSpec uniform(double mean, double range = 2.0,
                                  std::string label = "");
    static PopulationSpec discrete(std::vector<std::pair<double, double>> points,
                                   std::string label = "");

    bool is_uniform() const { return std::holds_alternative<Uniform>(dist); }
    const Uniform& as_uniform() const { return std::get<Uniform>(dist); }
    const Discrete& as_discrete() const { return std::get<Discrete>(dist); }

    double mean() const;
    void validate() const;
};

struct PopulationGrid {
    std::vector<PopulationSpec> populations;
    std::size_t comparator_index = 0;

    const PopulationSpec& comparator() const {
        return populations.at(comparator_index);
    }
};

// 21 uniform populations with means -0.5 .. 0.5 in steps of 0.05 and range 2;
// the comparator (mean 0) sits at index 10.
PopulationGrid default_grid();

// Deterministic draws from the covariate law. Same (pop, n, seed) always
// yields the same sequence.
std::vector<double> sample_covariates(const PopulationSpec& pop, std::size_t n,
                                      std::uint64_t seed);

// E_{X~pop}[f(X)]: 64-node Gauss-Legendre on the uniform support, exact
// probability-weighted sum for discrete laws.
double expectation_over_x(const PopulationSpec& pop,
                          const std::function<double(double)>& f,
                          int nodes = 64);

}  // namespace transportlab
