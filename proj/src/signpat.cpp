#include "coop2/signpat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coop2/mat3.hpp"

namespace coop2 {

std::string to_string(Sign s) {
  switch (s) {
    case Sign::Any: return "*";
    case Sign::Zero: return "0";
    case Sign::NonNeg: return ">=0";
    case Sign::NonPos: return "<=0";
  }
  return "?";
}

Sign parse_sign(const std::string& text) {
  if (text == "*") return Sign::Any;
  if (text == "0") return Sign::Zero;
  if (text == ">=0" || text == "+" || text == ">0") return Sign::NonNeg;
  if (text == "<=0" || text == "-" || text == "<0") return Sign::NonPos;
  throw std::invalid_argument("unknown sign symbol '" + text + "'");
}

MatrixN::MatrixN(const Mat3& m) : n_(3), a_(9) {
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) a_[i * 3 + j] = m[i][j];
}

MatrixN MatrixN::transposed() const {
  MatrixN t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

SignPattern::SignPattern(std::initializer_list<std::initializer_list<Sign>> rows)
    : n_(rows.size()), cells_() {
  cells_.reserve(n_ * n_);
  for (const auto& row : rows) {
    if (row.size() != n_) throw std::invalid_argument("SignPattern: rows must be square");
    cells_.insert(cells_.end(), row.begin(), row.end());
  }
}

bool conforms(const MatrixN& a, const SignPattern& p, double tol) {
  if (a.size() != p.size())
    throw std::invalid_argument("conforms: matrix is " + std::to_string(a.size()) +
                                "x" + std::to_string(a.size()) + ", pattern is " +
                                std::to_string(p.size()) + "x" + std::to_string(p.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double v = a(i, j);
      switch (p(i, j)) {
        case Sign::Any: break;
        case Sign::Zero:
          if (std::fabs(v) > tol) return false;
          break;
        case Sign::NonNeg:
          if (v < -tol) return false;
          break;
        case Sign::NonPos:
          if (v > tol) return false;
          break;
      }
    }
  }
  return true;
}

SignPattern pattern_A2(std::size_t n) {
  if (n < 3) throw std::invalid_argument("pattern_A2: n must be >= 3");
  SignPattern p(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j)
        p(i, j) = Sign::Any;
      else if (i + 1 == j || j + 1 == i)
        p(i, j) = Sign::NonNeg;
      else
        p(i, j) = Sign::Zero;
    }
  p(0, n - 1) = Sign::NonPos;
  p(n - 1, 0) = Sign::NonPos;
  return p;
}

bool is_metzler(const MatrixN& a, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j && a(i, j) < -tol) return false;
  return true;
}

namespace {

// Nodes reachable from node 0 following edges i->j with |a_ij| > tol.
std::size_t reach_count(const MatrixN& a, double tol) {
  const std::size_t n = a.size();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || seen[j] || !(std::fabs(a(i, j)) > tol)) continue;
      seen[j] = 1;
      ++count;
      stack.push_back(j);
    }
  }
  return count;
}

}  // namespace

bool is_irreducible(const MatrixN& a, double tol) {
  const std::size_t n = a.size();
  if (n <= 1) return true;
  // Strongly connected iff every node is reachable from node 0 in the graph
  // and in its reverse.
  return reach_count(a, tol) == n && reach_count(a.transposed(), tol) == n;
}

std::array<double, 9> minors2(const Mat3& m) {
  static constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
  std::array<double, 9> out{};
  std::size_t k = 0;
  for (const auto& r : kPairs)
    for (const auto& c : kPairs)
      out[k++] = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]];
  return out;
}

bool verify_strong_2positive_minors(const Mat3& a) {
  const auto minors = minors2(expm3(a));
  return std::all_of(minors.begin(), minors.end(), [](double v) { return v > 0.0; });
}

}  // namespace coop2
