#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "copadapt/copulas.hpp"
#include "copadapt/marginals.hpp"
#include "copadapt/random.hpp"

namespace copadapt {

using Point2 = std::array<double, 2>;

// Bivariate law assembled from two marginals and a copula.
struct JointModel {
    MarginalModel first;
    MarginalModel second;
    CopulaModel copula;

    // f1(y1) f2(y2) c(F1(y1), F2(y2)); zero where either marginal density
    // underflows.
    double density(double y1, double y2) const;
    Point2 draw(Rng& rng) const;
    std::vector<Point2> sample(std::size_t n, std::uint64_t seed) const;
};

void validate(const JointModel& model);

}  // namespace copadapt
