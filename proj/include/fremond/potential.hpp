#pragma once

#include <string>
#include <vector>

#include "fremond/errors.hpp"

namespace fremond {

/**
 * Polynomial potential F(y) = sum_i c_i y^i with its lambda-convex split
 * G(y) = F(y) + lambda y^2.
 *
 * Admissible specs have even degree with positive leading coefficient and
 * F'(0) = c_1 = 0. Constant polynomials are accepted (they are useful for
 * isolating the diffusion operators) but fail the coercivity validator.
 * Immutable after construction.
 */
class Potential {
public:
    /// F(r) = (r^2 - 1)^2.
    static Potential double_well(double lambda = 4.0);
    static Potential polynomial(std::vector<double> coefficients, double lambda);

    /// F^(order)(y) for order in 0..3, Horner evaluation of the derivative polynomial.
    double eval(double y, int order) const;
    /// G^(order)(y) for order in 0..2.
    double convex(double y, int order) const;

    double lambda() const { return lambda_; }
    const std::vector<double>& coefficients() const { return coeffs_[0]; }
    int degree() const { return static_cast<int>(coeffs_[0].size()) - 1; }
    bool is_double_well() const { return double_well_; }

    /// "double_well" or the coefficient list "[c0, c1, ...]".
    std::string describe() const;

private:
    Potential(std::vector<double> coefficients, double lambda, bool double_well);

    // coeffs_[k] holds the coefficients of the k-th derivative.
    std::vector<double> coeffs_[4];
    double lambda_ = 0.0;
    bool double_well_ = false;
};

double eval(const Potential& spec, double y, int order);
double convex_part(const Potential& spec, double y, int order);

struct ValidationReport {
    double lo = 0.0;
    double hi = 0.0;
    int samples = 0;
    /// min over the lattice of F'' + lambda (lambda-convexity witness).
    double min_convexity = 0.0;
    /// min over the lattice of G'' (expected >= lambda).
    double min_convex_second = 0.0;
    /// F'(y) sgn(y) at the two lattice endpoints.
    double coercivity_lo = 0.0;
    double coercivity_hi = 0.0;
    /// Smallest c with |H'| log(e + |H'|) <= c (1 + |H|) on the lattice, for H = F and H = G.
    double growth_constant_F = 0.0;
    double growth_constant_G = 0.0;
    /// Smallest c >= 0 with F >= -c on the lattice.
    double lower_bound_constant = 0.0;

    bool convex_ok() const { return min_convexity >= 0.0; }
    bool coercive_ok() const { return coercivity_lo > 0.0 && coercivity_hi > 0.0; }
};

/// Thrown by validate_hypotheses; carries the full report.
class HypothesisViolation : public ValidationFailed {
public:
    HypothesisViolation(const std::string& what, ValidationReport report)
        : ValidationFailed(what), report_(report)
    {
    }
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// Lattice audit of the structural hypotheses; returns the report without throwing.
ValidationReport inspect_hypotheses(const Potential& spec, double lo, double hi, int samples);
/// As inspect_hypotheses, but throws HypothesisViolation when convexity or coercivity fails.
ValidationReport validate_hypotheses(const Potential& spec, double lo, double hi, int samples);

} // namespace fremond
