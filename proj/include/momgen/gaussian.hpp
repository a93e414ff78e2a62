#pragma once

#include "momgen/polynomial.hpp"
#include "momgen/rational.hpp"

namespace momgen {

/// E[prod_v w_v^{e_v}] for independent standard normals:
/// prod (e_v - 1)!! when every e_v is even, else 0.
Rational gaussian_monomial_expectation(const Monomial& m);

/// Linear extension over the terms of `p`.
Rational gaussian_expectation(const ExactPoly& p);

/// E[m * p] without materialising the product.
Rational gaussian_expectation(const Monomial& m, const ExactPoly& p);

}  // namespace momgen
