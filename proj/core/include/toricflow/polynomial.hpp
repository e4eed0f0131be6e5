#pragma once

#include "toricflow/rational.hpp"

#include <map>
#include <span>
#include <vector>

namespace toricflow {

using Exponent = std::vector<int>;

// Multivariate polynomial with exact rational coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, const Rational& c);
  static Polynomial variable(int nvars, int k);
  static Polynomial monomial(const Exponent& alpha, const Rational& c = 1);
  // <a, x> + c
  static Polynomial affine(const RVec& a, const Rational& c);

  int nvars() const { return nvars_; }
  const std::map<Exponent, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Rational& s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  Polynomial pow(unsigned k) const;
  Polynomial derivative(int k) const;

  // Substitutes x_k -> images[k] (polynomials in a new variable set).
  Polynomial compose(const std::vector<Polynomial>& images) const;

  Rational evaluate(const RVec& x) const;
  double evaluate(std::span<const double> x) const;

  void add_term(const Exponent& alpha, const Rational& c);

 private:
  int nvars_ = 0;
  std::map<Exponent, Rational> terms_;
};

// Polynomial with double coefficients for fast evaluation.
class PolynomialD {
 public:
  PolynomialD() = default;
  explicit PolynomialD(const Polynomial& p);
  double operator()(std::span<const double> x) const;
  int nvars() const { return nvars_; }

 private:
  int nvars_ = 0;
  std::vector<Exponent> exps_;
  std::vector<double> coeffs_;
};

// Integral of t^beta over the standard simplex {t >= 0, sum t <= 1}.
Rational standard_simplex_moment(const Exponent& beta);

}  // namespace toricflow
