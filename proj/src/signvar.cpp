#include "coop2/signvar.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace coop2 {

std::vector<double> snap(std::span<const double> x, double tol) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out)
    if (std::fabs(v) <= tol) v = 0.0;
  return out;
}

std::size_t sigma(std::span<const double> x) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0)
      throw std::invalid_argument("sigma: entry " + std::to_string(i) + " is zero");
    if (i > 0 && std::signbit(x[i]) != std::signbit(x[i - 1])) ++count;
  }
  return count;
}

std::size_t s_minus(std::span<const double> x) {
  std::size_t count = 0;
  int prev = 0;
  for (double v : x) {
    if (v == 0.0) continue;
    const int s = v > 0.0 ? 1 : -1;
    if (prev != 0 && s != prev) ++count;
    prev = s;
  }
  return count;
}

std::size_t s_plus(std::span<const double> x) {
  if (x.empty()) return 0;
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] == 0.0) zeros.push_back(i);
  if (zeros.size() == x.size()) return x.size() - 1;
  if (zeros.size() > 20) throw std::invalid_argument("s_plus: too many zero entries");

  std::vector<double> z(x.begin(), x.end());
  std::size_t best = 0;
  const std::size_t cases = std::size_t{1} << zeros.size();
  for (std::size_t mask = 0; mask < cases; ++mask) {
    for (std::size_t b = 0; b < zeros.size(); ++b)
      z[zeros[b]] = (mask >> b) & 1U ? 1.0 : -1.0;
    const std::size_t s = sigma(z);
    if (s > best) best = s;
  }
  return best;
}

ConeMembership cone_membership(std::span<const double> x, std::size_t k) {
  if (k < 1 || k > x.size())
    throw std::invalid_argument("cone_membership: k=" + std::to_string(k) +
                                " outside 1.." + std::to_string(x.size()));
  return {k, s_minus(x) <= k - 1, s_plus(x) <= k - 1};
}

}  // namespace coop2
