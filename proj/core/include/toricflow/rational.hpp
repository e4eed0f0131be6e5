#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <optional>
#include <string>
#include <vector>

namespace toricflow {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;
using RVec = std::vector<Rational>;
using RMat = std::vector<RVec>;

// Exact binary value of a double.
Rational to_rational(double x);
double to_double(const Rational& q);
std::vector<double> to_double(const RVec& v);

// Parses "p", "p/q" or a decimal literal like "0.25" exactly.
Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& q);

Rational dot(const RVec& a, const RVec& b);
Integer factorial(unsigned k);

// Solves A x = b exactly; nullopt when A is singular.
std::optional<RVec> solve(RMat A, RVec b);
Rational determinant(RMat A);
int rank(RMat A);

struct RVecLess {
  bool operator()(const RVec& a, const RVec& b) const;
};

}  // namespace toricflow
