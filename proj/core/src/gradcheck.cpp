// Copyright 2026 The ucorr Authors. All Rights Reserved.
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

#include "ucorr/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ucorr/rng.hpp"

namespace ucorr {
namespace {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

// Central differences at steps h and h/2, Richardson-extrapolated:
// (4 D(h/2) - D(h)) / 3 cancels the h^2 truncation term. The result is
// only a reference for the gradient when every probe sits on the same
// smooth piece as the base point; otherwise h is halved, up to
// kMaxHalvings times.
constexpr int kMaxHalvings = 10;

struct Probe {
  double value;
  std::uint64_t signature;
};

template <typename Eval>
double central_difference(const Eval& eval, std::uint64_t base, double eps, bool& reduced) {
  double step = eps;
  for (int halvings = 0;; ++halvings) {
    const Probe probes[4] = {eval(step), eval(-step), eval(0.5 * step), eval(-0.5 * step)};
    const double wide = (probes[0].value - probes[1].value) / (2.0 * step);
    const double narrow = (probes[2].value - probes[3].value) / step;
    const bool smooth = std::all_of(std::begin(probes), std::end(probes),
                                    [base](const Probe& p) { return p.signature == base; });
    if (smooth || halvings == kMaxHalvings) return (4.0 * narrow - wide) / 3.0;
    reduced = true;
    step *= 0.5;
  }
}

}  // namespace

double gradient_check(const ScalarFn64& f, const Tensor64& x, double eps) {
  auto leaf = Tensor64::from_data(x.shape(), std::vector<double>(x.data().begin(), x.data().end()),
                                  true);
  backward(f(leaf));
  std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());
  if (analytic.empty()) analytic.assign(static_cast<std::size_t>(x.numel()), 0.0);

  double worst = 0.0;
  NoGradGuard no_grad;
  std::vector<double> probe(x.data().begin(), x.data().end());
  auto traced = [&] {
    BranchTrace trace;
    const double v = f(Tensor64::from_data(x.shape(), probe)).item();
    return Probe{v, trace.signature()};
  };
  const std::uint64_t base = traced().signature;
  bool reduced = false;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    auto eval = [&](double offset) {
      probe[i] = saved + offset;
      return traced();
    };
    const double numeric = central_difference(eval, base, eps, reduced);
    probe[i] = saved;
    worst = std::max(worst, relative_error(analytic[i], numeric));
  }
  return worst;
}

double gradient_check(const ScalarFn64& f, const Tensor& x, double eps) {
  return gradient_check(f, x.cast<double>(), eps);
}

GradCheckReport check_parameter_gradients(const std::function<Tensor64()>& loss,
                                          ParameterList<double>& params, double eps,
                                          std::size_t per_parameter, std::uint64_t seed) {
  for (auto& p : params) p.tensor.clear_grad();
  backward(loss());

  GradCheckReport report;
  Rng rng(seed);
  NoGradGuard no_grad;
  auto traced = [&] {
    BranchTrace trace;
    const double v = loss().item();
    return Probe{v, trace.signature()};
  };
  const std::uint64_t base = traced().signature;
  for (auto& p : params) {
    const auto n = static_cast<std::size_t>(p.tensor.numel());
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (n > per_parameter) {
      // partial Fisher-Yates
      for (std::size_t i = 0; i < per_parameter; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                                static_cast<std::int64_t>(n - 1)));
        std::swap(indices[i], indices[j]);
      }
      indices.resize(per_parameter);
    }
    std::vector<double> analytic(p.tensor.grad().begin(), p.tensor.grad().end());
    if (analytic.empty()) analytic.assign(n, 0.0);
    auto data = p.tensor.mutable_data();
    for (auto i : indices) {
      const double saved = data[i];
      auto eval = [&](double offset) {
        data[i] = saved + offset;
        return traced();
      };
      bool reduced = false;
      const double numeric = central_difference(eval, base, eps, reduced);
      data[i] = saved;
      const double err = relative_error(analytic[i], numeric);
      ++report.elements_checked;
      if (reduced) ++report.reduced_steps;
      if (report.worst_index < 0 || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_parameter = p.name;
        report.worst_index = static_cast<std::int64_t>(i);
      }
    }
  }
  return report;
}

}  // namespace ucorr
