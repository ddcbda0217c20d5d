// Copyright 2026 The dubins_smc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DUBINS_SMC__DETAIL__TAYLOR_JET_HPP_
#define DUBINS_SMC__DETAIL__TAYLOR_JET_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace dubins_smc::detail
{

/**
 * Truncated Taylor expansion f(s0 + h) = sum_k c[k] h^k of a scalar signal
 * along the path coordinate. Arithmetic truncates to the lower order of the
 * operands; derivative() drops one order.
 */
class Jet
{
public:
  Jet() = default;
  explicit Jet(std::vector<double> coeffs)
  : c_(std::move(coeffs)) {}

  static Jet constant(double v, std::size_t order)
  {
    std::vector<double> c(order + 1, 0.0);
    c[0] = v;
    return Jet(std::move(c));
  }

  /// Builds a jet from the value and its derivatives f, f', f'', ...
  static Jet from_derivatives(const std::vector<double> & d)
  {
    std::vector<double> c(d.size());
    double fact = 1.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (k > 0) {
        fact *= static_cast<double>(k);
      }
      c[k] = d[k] / fact;
    }
    return Jet(std::move(c));
  }

  std::size_t order() const {return c_.size() - 1;}
  double value() const {return c_[0];}
  double coeff(std::size_t k) const {return c_[k];}

  /// k-th derivative at the expansion point.
  double derivative_value(std::size_t k) const
  {
    double fact = 1.0;
    for (std::size_t i = 2; i <= k; ++i) {
      fact *= static_cast<double>(i);
    }
    return c_[k] * fact;
  }

  Jet derivative() const
  {
    std::vector<double> d(std::max<std::size_t>(c_.size(), 2) - 1, 0.0);
    for (std::size_t k = 1; k < c_.size(); ++k) {
      d[k - 1] = static_cast<double>(k) * c_[k];
    }
    return Jet(std::move(d));
  }

  Jet truncated(std::size_t order) const
  {
    std::vector<double> c(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(
        std::min(order + 1, c_.size())));
    return Jet(std::move(c));
  }

  friend Jet operator+(const Jet & a, const Jet & b)
  {
    const std::size_t n = std::min(a.c_.size(), b.c_.size());
    std::vector<double> c(n);
    for (std::size_t k = 0; k < n; ++k) {
      c[k] = a.c_[k] + b.c_[k];
    }
    return Jet(std::move(c));
  }

  friend Jet operator-(const Jet & a, const Jet & b)
  {
    const std::size_t n = std::min(a.c_.size(), b.c_.size());
    std::vector<double> c(n);
    for (std::size_t k = 0; k < n; ++k) {
      c[k] = a.c_[k] - b.c_[k];
    }
    return Jet(std::move(c));
  }

  friend Jet operator*(const Jet & a, double k)
  {
    Jet r = a;
    for (double & v : r.c_) {
      v *= k;
    }
    return r;
  }

  friend Jet operator*(const Jet & a, const Jet & b)
  {
    const std::size_t n = std::min(a.c_.size(), b.c_.size());
    std::vector<double> c(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j <= k; ++j) {
        c[k] += a.c_[j] * b.c_[k - j];
      }
    }
    return Jet(std::move(c));
  }

  friend void sin_cos(const Jet & x, Jet & s, Jet & co)
  {
    const std::size_t n = x.c_.size();
    std::vector<double> sc(n, 0.0), cc(n, 0.0);
    sc[0] = std::sin(x.c_[0]);
    cc[0] = std::cos(x.c_[0]);
    // k s_k = sum_j j x_j c_{k-j},  k c_k = -sum_j j x_j s_{k-j}
    for (std::size_t k = 1; k < n; ++k) {
      double as = 0.0, ac = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {
        as += static_cast<double>(j) * x.c_[j] * cc[k - j];
        ac -= static_cast<double>(j) * x.c_[j] * sc[k - j];
      }
      sc[k] = as / static_cast<double>(k);
      cc[k] = ac / static_cast<double>(k);
    }
    s = Jet(std::move(sc));
    co = Jet(std::move(cc));
  }

  friend Jet cos(const Jet & x)
  {
    Jet s, c;
    sin_cos(x, s, c);
    return c;
  }

  friend Jet tan(const Jet & x)
  {
    // t' = (1 + t^2) x'
    const std::size_t n = x.c_.size();
    std::vector<double> t(n, 0.0), g(n, 0.0);
    t[0] = std::tan(x.c_[0]);
    g[0] = 1.0 + t[0] * t[0];
    for (std::size_t k = 1; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {
        acc += static_cast<double>(j) * x.c_[j] * g[k - j];
      }
      t[k] = acc / static_cast<double>(k);
      double sq = 0.0;
      for (std::size_t j = 0; j <= k; ++j) {
        sq += t[j] * t[k - j];
      }
      g[k] = sq;
    }
    return Jet(std::move(t));
  }

  friend Jet atan(const Jet & x)
  {
    // y' = x' / (1 + x^2); q = 1 + x^2, y' q = x'
    const std::size_t n = x.c_.size();
    std::vector<double> y(n, 0.0), q(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j <= k; ++j) {
        q[k] += x.c_[j] * x.c_[k - j];
      }
    }
    q[0] += 1.0;
    y[0] = std::atan(x.c_[0]);
    // coefficients of y' (d_m = (m+1) y_{m+1}) from d * q = x'
    std::vector<double> d(n > 0 ? n - 1 : 0, 0.0);
    for (std::size_t m = 0; m + 1 < n; ++m) {
      double acc = static_cast<double>(m + 1) * x.c_[m + 1];
      for (std::size_t j = 1; j <= m; ++j) {
        acc -= d[m - j] * q[j];
      }
      d[m] = acc / q[0];
      y[m + 1] = d[m] / static_cast<double>(m + 1);
    }
    return Jet(std::move(y));
  }

private:
  std::vector<double> c_{0.0};
};

}  // namespace dubins_smc::detail

#endif  // DUBINS_SMC__DETAIL__TAYLOR_JET_HPP_
