#include "copadapt/joint.hpp"

#include <algorithm>

namespace copadapt {

namespace {
// Keeps PIT values off the boundary where copula densities are undefined.
double interior(double u) {
    return std::clamp(u, 1e-15, 1.0 - 1e-15);
}
}  // namespace

double JointModel::density(double y1, double y2) const {
    const double f1 = marginal_pdf(first, y1);
    const double f2 = marginal_pdf(second, y2);
    if (!(f1 > 0.0) || !(f2 > 0.0)) return 0.0;
    if (copula.family == CopulaFamily::Independence) return f1 * f2;
    const double c = copula_pdf(copula, interior(marginal_cdf(first, y1)), interior(marginal_cdf(second, y2)));
    return f1 * f2 * c;
}

Point2 JointModel::draw(Rng& rng) const {
    const auto uv = copula_draw(copula, rng);
    return {marginal_quantile(first, uv.u), marginal_quantile(second, uv.v)};
}

std::vector<Point2> JointModel::sample(std::size_t n, std::uint64_t seed) const {
    validate(*this);
    Rng rng(seed);
    std::vector<Point2> out(n);
    for (auto& p : out) p = draw(rng);
    return out;
}

void validate(const JointModel& model) {
    validate(model.first);
    validate(model.second);
    validate(model.copula);
}

}  // namespace copadapt
