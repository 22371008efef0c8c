#include "fremond/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fremond {

namespace {

std::vector<double> derivative(const std::vector<double>& c)
{
    if (c.size() <= 1)
        return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i)
        d[i - 1] = static_cast<double>(i) * c[i];
    return d;
}

double horner(const std::vector<double>& c, double y)
{
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        acc = acc * y + *it;
    return acc;
}

} // namespace

Potential::Potential(std::vector<double> coefficients, double lambda, bool double_well)
    : lambda_(lambda), double_well_(double_well)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ValidationFailed("lambda must be a nonnegative finite number");
    for (double c : coefficients)
        if (!std::isfinite(c))
            throw ValidationFailed("potential coefficients must be finite");
    while (coefficients.size() > 1 && coefficients.back() == 0.0)
        coefficients.pop_back();
    if (coefficients.empty())
        coefficients.push_back(0.0);

    const std::size_t degree = coefficients.size() - 1;
    if (degree >= 1) {
        if (degree % 2 != 0)
            throw ValidationFailed("potential degree must be even");
        if (coefficients.back() <= 0.0)
            throw ValidationFailed("leading coefficient must be positive");
        if (coefficients[1] != 0.0)
            throw ValidationFailed("potential must satisfy F'(0) = 0 (c1 = 0); no affine renormalization is applied");
    }

    coeffs_[0] = std::move(coefficients);
    for (int k = 1; k < 4; ++k)
        coeffs_[k] = derivative(coeffs_[k - 1]);
}

Potential Potential::double_well(double lambda)
{
    return Potential({1.0, 0.0, -2.0, 0.0, 1.0}, lambda, true);
}

Potential Potential::polynomial(std::vector<double> coefficients, double lambda)
{
    return Potential(std::move(coefficients), lambda, false);
}

double Potential::eval(double y, int order) const
{
    if (order < 0 || order > 3)
        throw std::invalid_argument("potential derivative order must be in 0..3");
    return horner(coeffs_[order], y);
}

double Potential::convex(double y, int order) const
{
    switch (order) {
    case 0:
        return eval(y, 0) + lambda_ * y * y;
    case 1:
        return eval(y, 1) + 2.0 * lambda_ * y;
    case 2:
        return eval(y, 2) + 2.0 * lambda_;
    default:
        throw std::invalid_argument("convex part order must be in 0..2");
    }
}

std::string Potential::describe() const
{
    if (double_well_)
        return "double_well";
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (std::size_t i = 0; i < coeffs_[0].size(); ++i)
        os << (i ? ", " : "") << coeffs_[0][i];
    os << ']';
    return os.str();
}

double eval(const Potential& spec, double y, int order) { return spec.eval(y, order); }
double convex_part(const Potential& spec, double y, int order) { return spec.convex(y, order); }

ValidationReport inspect_hypotheses(const Potential& spec, double lo, double hi, int samples)
{
    if (samples < 2)
        throw std::invalid_argument("hypothesis lattice needs at least 2 samples");
    if (!(hi > lo))
        throw std::invalid_argument("hypothesis lattice range must be nonempty");

    ValidationReport r;
    r.lo = lo;
    r.hi = hi;
    r.samples = samples;
    r.min_convexity = std::numeric_limits<double>::infinity();
    r.min_convex_second = std::numeric_limits<double>::infinity();

    auto growth = [](double value, double slope) {
        const double a = std::abs(slope);
        return a * std::log(std::exp(1.0) + a) / (1.0 + std::abs(value));
    };

    double min_f = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const double y = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(samples - 1);
        r.min_convexity = std::min(r.min_convexity, spec.eval(y, 2) + spec.lambda());
        r.min_convex_second = std::min(r.min_convex_second, spec.convex(y, 2));
        r.growth_constant_F = std::max(r.growth_constant_F, growth(spec.eval(y, 0), spec.eval(y, 1)));
        r.growth_constant_G = std::max(r.growth_constant_G, growth(spec.convex(y, 0), spec.convex(y, 1)));
        min_f = std::min(min_f, spec.eval(y, 0));
    }
    auto sgn = [](double y) { return (y > 0.0) - (y < 0.0); };
    r.coercivity_lo = spec.eval(lo, 1) * sgn(lo);
    r.coercivity_hi = spec.eval(hi, 1) * sgn(hi);
    r.lower_bound_constant = std::max(0.0, -min_f);
    return r;
}

ValidationReport validate_hypotheses(const Potential& spec, double lo, double hi, int samples)
{
    ValidationReport r = inspect_hypotheses(spec, lo, hi, samples);
    if (!r.convex_ok()) {
        std::ostringstream os;
        os << "lambda-convexity fails: min F'' + lambda = " << r.min_convexity << " < 0";
        throw HypothesisViolation(os.str(), r);
    }
    if (!r.coercive_ok()) {
        std::ostringstream os;
        os << "coercivity fails: F'(y) sgn(y) = " << r.coercivity_lo << " at " << lo << ", "
           << r.coercivity_hi << " at " << hi;
        throw HypothesisViolation(os.str(), r);
    }
    return r;
}

} // namespace fremond
