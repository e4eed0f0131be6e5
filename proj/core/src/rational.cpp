#include "toricflow/rational.hpp"

#include "toricflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toricflow {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonPrimitiveNormal: return "NonPrimitiveNormal";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::EmptyInterior: return "EmptyInterior";
    case ErrorCode::RedundantFacet: return "RedundantFacet";
    case ErrorCode::NonSimpleVertex: return "NonSimpleVertex";
    case ErrorCode::NonUnimodularVertex: return "NonUnimodularVertex";
    case ErrorCode::SpacingTooCoarse: return "SpacingTooCoarse";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::ChartMismatch: return "ChartMismatch";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::SingularMomentMatrix: return "SingularMomentMatrix";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NonConvexStart: return "NonConvexStart";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::SegmentLeavesPolytope: return "SegmentLeavesPolytope";
    case ErrorCode::NegativeAffineFactor: return "NegativeAffineFactor";
    case ErrorCode::NonAdmissibleWeight: return "NonAdmissibleWeight";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularHessian:
    case ErrorCode::SingularMomentMatrix:
    case ErrorCode::StepUnderflow:
    case ErrorCode::TraceTooShort:
      return false;
    default:
      return true;
  }
}

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::InvalidInput, "non-finite number");
  return Rational(x);
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

std::vector<double> to_double(const RVec& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](const Rational& q) { return to_double(q); });
  return out;
}

Rational parse_rational(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw Error(ErrorCode::ParseError, "empty number");
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      Integer p(s.substr(0, slash));
      Integer q(s.substr(slash + 1));
      if (q == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + text + "'");
      return Rational(p, q);
    }
    bool negative = false;
    std::size_t pos = 0;
    if (s[0] == '-' || s[0] == '+') {
      negative = s[0] == '-';
      pos = 1;
    }
    std::string mantissa = s.substr(pos);
    long exponent = 0;
    auto e = mantissa.find_first_of("eE");
    if (e != std::string::npos) {
      exponent = std::stol(mantissa.substr(e + 1));
      mantissa = mantissa.substr(0, e);
    }
    auto dot_pos = mantissa.find('.');
    std::string digits = mantissa;
    if (dot_pos != std::string::npos) {
      digits = mantissa.substr(0, dot_pos) + mantissa.substr(dot_pos + 1);
      exponent -= static_cast<long>(mantissa.size() - dot_pos - 1);
    }
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
      throw Error(ErrorCode::ParseError, "not a number: '" + text + "'");
    Rational value{Integer(digits)};
    Integer ten(10);
    Integer scale = boost::multiprecision::pow(ten, static_cast<unsigned>(std::labs(exponent)));
    value = exponent >= 0 ? value * Rational(scale) : value / Rational(scale);
    return negative ? Rational(-value) : value;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "not a number: '" + text + "'");
  }
}

std::string format_rational(const Rational& q) {
  if (boost::multiprecision::denominator(q) == 1) return boost::multiprecision::numerator(q).str();
  return q.str();
}

Rational dot(const RVec& a, const RVec& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Integer factorial(unsigned k) {
  Integer r = 1;
  for (unsigned i = 2; i <= k; ++i) r *= i;
  return r;
}

namespace {

// Row echelon form in place; returns the pivot count and the determinant sign/product.
int eliminate(RMat& A, RVec* b, Rational* det) {
  const std::size_t rows = A.size();
  const std::size_t cols = rows ? A[0].size() : 0;
  std::size_t r = 0;
  Rational d = 1;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && A[p][c] == 0) ++p;
    if (p == rows) {
      d = 0;
      continue;
    }
    if (p != r) {
      std::swap(A[p], A[r]);
      if (b) std::swap((*b)[p], (*b)[r]);
      d = -d;
    }
    d *= A[r][c];
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (A[i][c] == 0) continue;
      Rational m = A[i][c] / A[r][c];
      for (std::size_t j = c; j < cols; ++j) A[i][j] -= m * A[r][j];
      if (b) (*b)[i] -= m * (*b)[r];
    }
    ++r;
  }
  if (r < rows) d = 0;
  if (det) *det = d;
  return static_cast<int>(r);
}

}  // namespace

std::optional<RVec> solve(RMat A, RVec b) {
  const std::size_t n = A.size();
  Rational det;
  if (eliminate(A, &b, &det) < static_cast<int>(n) || det == 0) return std::nullopt;
  RVec x(n);
  for (std::size_t i = n; i-- > 0;) {
    Rational s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

Rational determinant(RMat A) {
  Rational det;
  eliminate(A, nullptr, &det);
  return det;
}

int rank(RMat A) {
  if (A.empty()) return 0;
  return eliminate(A, nullptr, nullptr);
}

bool RVecLess::operator()(const RVec& a, const RVec& b) const {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace toricflow
