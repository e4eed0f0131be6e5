#include "toricflow/polynomial.hpp"

#include "toricflow/errors.hpp"

#include <cmath>
#include <numeric>

namespace toricflow {

Polynomial Polynomial::constant(int nvars, const Rational& c) {
  Polynomial p(nvars);
  p.add_term(Exponent(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int k) {
  Exponent e(nvars, 0);
  e[k] = 1;
  return monomial(e);
}

Polynomial Polynomial::monomial(const Exponent& alpha, const Rational& c) {
  Polynomial p(static_cast<int>(alpha.size()));
  p.add_term(alpha, c);
  return p;
}

Polynomial Polynomial::affine(const RVec& a, const Rational& c) {
  const int n = static_cast<int>(a.size());
  Polynomial p = constant(n, c);
  for (int k = 0; k < n; ++k) p += variable(n, k) * a[k];
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
  return d;
}

void Polynomial::add_term(const Exponent& alpha, const Rational& c) {
  if (c == 0) return;
  auto it = terms_.find(alpha);
  if (it == terms_.end()) {
    terms_.emplace(alpha, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (nvars_ == 0) nvars_ = other.nvars_;
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (nvars_ == 0) nvars_ = other.nvars_;
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& s) {
  if (s == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial out(std::max(a.nvars(), b.nvars()));
  for (const auto& [ea, ca] : a.terms()) {
    for (const auto& [eb, cb] : b.terms()) {
      Exponent e(ea.size());
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

Polynomial Polynomial::pow(unsigned k) const {
  Polynomial result = constant(nvars_, 1);
  Polynomial base = *this;
  while (k) {
    if (k & 1u) result = result * base;
    k >>= 1u;
    if (k) base = base * base;
  }
  return result;
}

Polynomial Polynomial::derivative(int k) const {
  Polynomial out(nvars_);
  for (const auto& [e, c] : terms_) {
    if (e[k] == 0) continue;
    Exponent d = e;
    d[k] -= 1;
    out.add_term(d, c * e[k]);
  }
  return out;
}

Polynomial Polynomial::compose(const std::vector<Polynomial>& images) const {
  if (static_cast<int>(images.size()) != nvars_)
    throw Error(ErrorCode::InvalidInput, "compose: image count mismatch");
  const int m = images.empty() ? 0 : images[0].nvars();
  std::vector<std::vector<Polynomial>> powers(nvars_);
  Polynomial out(m);
  for (const auto& [e, c] : terms_) {
    Polynomial term = constant(m, c);
    for (int k = 0; k < nvars_; ++k) {
      if (e[k] == 0) continue;
      auto& cache = powers[k];
      while (static_cast<int>(cache.size()) <= e[k]) {
        cache.push_back(cache.empty() ? constant(m, 1) : cache.back() * images[k]);
      }
      term = term * cache[e[k]];
    }
    out += term;
  }
  return out;
}

Rational Polynomial::evaluate(const RVec& x) const {
  Rational s = 0;
  for (const auto& [e, c] : terms_) {
    Rational t = c;
    for (std::size_t k = 0; k < e.size(); ++k)
      for (int j = 0; j < e[k]; ++j) t *= x[k];
    s += t;
  }
  return s;
}

double Polynomial::evaluate(std::span<const double> x) const { return PolynomialD(*this)(x); }

PolynomialD::PolynomialD(const Polynomial& p) : nvars_(p.nvars()) {
  for (const auto& [e, c] : p.terms()) {
    exps_.push_back(e);
    coeffs_.push_back(to_double(c));
  }
}

double PolynomialD::operator()(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t t = 0; t < exps_.size(); ++t) {
    double v = coeffs_[t];
    for (std::size_t k = 0; k < exps_[t].size(); ++k)
      for (int j = 0; j < exps_[t][k]; ++j) v *= x[k];
    s += v;
  }
  return s;
}

Rational standard_simplex_moment(const Exponent& beta) {
  Integer num = 1;
  unsigned total = 0;
  for (int b : beta) {
    num *= factorial(static_cast<unsigned>(b));
    total += static_cast<unsigned>(b);
  }
  return Rational(num, factorial(total + static_cast<unsigned>(beta.size())));
}

}  // namespace toricflow
