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

#include "ucorr/correlation.hpp"

#include <algorithm>
#include <string>

#include "graph_builder.hpp"

namespace ucorr {

void CorrConfig::validate() const {
  if (max_displacement < 0 || patch_radius < 0 || stride < 1) {
    throw std::invalid_argument("CorrConfig needs d >= 0, k >= 0, stride >= 1 (got d=" +
                                std::to_string(max_displacement) + ", k=" +
                                std::to_string(patch_radius) + ", stride=" +
                                std::to_string(stride) + ")");
  }
}

namespace {

using detail::grad_of;
using detail::make_result;

struct CorrGeometry {
  std::int64_t n, c, h, w;
  int grid_radius, grid_size, stride, k;
  std::int64_t plane() const { return h * w; }
  std::int64_t channels_out() const { return std::int64_t{grid_size} * grid_size; }
};

CorrGeometry check_inputs(const Shape& a, const Shape& b, const CorrConfig& cfg) {
  cfg.validate();
  if (a.rank() != 4 || a != b) {
    throw ShapeError("correlate needs two identical NCHW shapes, got " + a.str() + " and " + b.str());
  }
  return {a[0], a[1], a[2], a[3], cfg.grid_radius(), cfg.grid_size(), cfg.stride, cfg.patch_radius};
}

template <typename T>
T norm_factor(const CorrGeometry& g, bool normalize) {
  if (!normalize || g.c == 0) return T(1);
  const auto kk = static_cast<T>((2 * g.k + 1) * (2 * g.k + 1));
  return T(1) / (kk * static_cast<T>(g.c));
}

// Zero-padded (2k+1)^2 box sum of an HxW plane, separable. tmp is scratch
// of the same size. The box is symmetric, so this is also its adjoint.
template <typename T>
void box_sum(const T* src, T* dst, T* tmp, std::int64_t h, std::int64_t w, int k) {
  for (std::int64_t y = 0; y < h; ++y) {
    const T* s = src + y * w;
    T* t = tmp + y * w;
    for (std::int64_t x = 0; x < w; ++x) {
      T acc = 0;
      const std::int64_t lo = std::max<std::int64_t>(0, x - k);
      const std::int64_t hi = std::min<std::int64_t>(w - 1, x + k);
      for (std::int64_t i = lo; i <= hi; ++i) acc += s[i];
      t[x] = acc;
    }
  }
  for (std::int64_t y = 0; y < h; ++y) {
    T* d = dst + y * w;
    std::fill(d, d + w, T(0));
    const std::int64_t lo = std::max<std::int64_t>(0, y - k);
    const std::int64_t hi = std::min<std::int64_t>(h - 1, y + k);
    for (std::int64_t i = lo; i <= hi; ++i) {
      const T* t = tmp + i * w;
      for (std::int64_t x = 0; x < w; ++x) d[x] += t[x];
    }
  }
}

// Valid range of q (one axis) so that q and q + disp are both in [0, extent).
inline void overlap(std::int64_t disp, std::int64_t extent, std::int64_t& lo, std::int64_t& hi) {
  lo = std::max<std::int64_t>(0, -disp);
  hi = std::min<std::int64_t>(extent, extent - disp);
}

}  // namespace

template <typename T>
BasicTensor<T> correlate(const BasicTensor<T>& f1, const BasicTensor<T>& f2, const CorrConfig& cfg) {
  const CorrGeometry g = check_inputs(f1.shape(), f2.shape(), cfg);
  const std::int64_t plane = g.plane();
  const std::int64_t dout = g.channels_out();
  const T norm = norm_factor<T>(g, cfg.normalize);
  std::vector<T> out(static_cast<std::size_t>(g.n * dout * plane), T(0));
  std::vector<T> prod(static_cast<std::size_t>(plane));
  std::vector<T> tmp(static_cast<std::size_t>(plane));

  for (std::int64_t n = 0; n < g.n; ++n) {
    const T* a = f1.data().data() + n * g.c * plane;
    const T* b = f2.data().data() + n * g.c * plane;
    for (int iy = 0; iy < g.grid_size; ++iy) {
      const std::int64_t dy = std::int64_t{iy - g.grid_radius} * g.stride;
      std::int64_t y0, y1;
      overlap(dy, g.h, y0, y1);
      for (int ix = 0; ix < g.grid_size; ++ix) {
        const std::int64_t dx = std::int64_t{ix - g.grid_radius} * g.stride;
        std::int64_t x0, x1;
        overlap(dx, g.w, x0, x1);
        T* dst = out.data() + (n * dout + iy * g.grid_size + ix) * plane;
        T* p = g.k == 0 ? dst : prod.data();
        std::fill(p, p + plane, T(0));
        // Loop order: channel, row, column. Column is contiguous in f1, f2
        // and the product plane.
        for (std::int64_t c = 0; c < g.c; ++c) {
          const T* ac = a + c * plane;
          const T* bc = b + c * plane;
          for (std::int64_t y = y0; y < y1; ++y) {
            const T* ar = ac + y * g.w;
            const T* br = bc + (y + dy) * g.w + dx;
            T* pr = p + y * g.w;
            for (std::int64_t x = x0; x < x1; ++x) pr[x] += ar[x] * br[x];
          }
        }
        if (g.k > 0) box_sum(prod.data(), dst, tmp.data(), g.h, g.w, g.k);
        if (norm != T(1)) {
          for (std::int64_t i = 0; i < plane; ++i) dst[i] *= norm;
        }
      }
    }
  }

  return make_result<T>(
      Shape{g.n, dout, g.h, g.w}, std::move(out), "correlate", {f1, f2},
      [g, norm](TensorNode<T>& self) {
        auto& n1 = *self.inputs[0];
        auto& n2 = *self.inputs[1];
        const std::int64_t plane = g.plane();
        const std::int64_t dout = g.channels_out();
        T* g1 = n1.requires_grad ? grad_of(n1).data() : nullptr;
        T* g2 = n2.requires_grad ? grad_of(n2).data() : nullptr;
        std::vector<T> gp(static_cast<std::size_t>(plane));
        std::vector<T> tmp(static_cast<std::size_t>(plane));
        for (std::int64_t n = 0; n < g.n; ++n) {
          const T* a = n1.data.data() + n * g.c * plane;
          const T* b = n2.data.data() + n * g.c * plane;
          for (int iy = 0; iy < g.grid_size; ++iy) {
            const std::int64_t dy = std::int64_t{iy - g.grid_radius} * g.stride;
            std::int64_t y0, y1;
            overlap(dy, g.h, y0, y1);
            for (int ix = 0; ix < g.grid_size; ++ix) {
              const std::int64_t dx = std::int64_t{ix - g.grid_radius} * g.stride;
              std::int64_t x0, x1;
              overlap(dx, g.w, x0, x1);
              const T* go = self.grad.data() + (n * dout + iy * g.grid_size + ix) * plane;
              if (g.k > 0) {
                box_sum(go, gp.data(), tmp.data(), g.h, g.w, g.k);
              } else {
                std::copy_n(go, plane, gp.data());
              }
              for (std::int64_t c = 0; c < g.c; ++c) {
                for (std::int64_t y = y0; y < y1; ++y) {
                  const T* gr = gp.data() + y * g.w;
                  const std::int64_t r1 = (n * g.c + c) * plane + y * g.w;
                  const std::int64_t r2 = (n * g.c + c) * plane + (y + dy) * g.w + dx;
                  const T* ar = a + c * plane + y * g.w;
                  const T* br = b + c * plane + (y + dy) * g.w + dx;
                  if (g1) {
                    for (std::int64_t x = x0; x < x1; ++x) g1[r1 + x] += norm * gr[x] * br[x];
                  }
                  if (g2) {
                    for (std::int64_t x = x0; x < x1; ++x) g2[r2 + x] += norm * gr[x] * ar[x];
                  }
                }
              }
            }
          }
        }
      });
}

template <typename T>
BasicTensor<T> correlate_oracle(const BasicTensor<T>& f1, const BasicTensor<T>& f2,
                                const CorrConfig& cfg) {
  const CorrGeometry g = check_inputs(f1.shape(), f2.shape(), cfg);
  const T norm = norm_factor<T>(g, cfg.normalize);
  const std::int64_t dout = g.channels_out();
  auto read = [&g](const BasicTensor<T>& f, std::int64_t n, std::int64_t c, std::int64_t y,
                   std::int64_t x) -> T {
    if (y < 0 || y >= g.h || x < 0 || x >= g.w) return T(0);
    return f.at(n, c, y, x);
  };
  std::vector<T> out(static_cast<std::size_t>(g.n * dout * g.h * g.w));
  for (std::int64_t n = 0; n < g.n; ++n)
    for (int iy = 0; iy < g.grid_size; ++iy)
      for (int ix = 0; ix < g.grid_size; ++ix)
        for (std::int64_t y = 0; y < g.h; ++y)
          for (std::int64_t x = 0; x < g.w; ++x) {
            const std::int64_t dy = std::int64_t{iy - g.grid_radius} * g.stride;
            const std::int64_t dx = std::int64_t{ix - g.grid_radius} * g.stride;
            T acc = 0;
            for (std::int64_t oy = -g.k; oy <= g.k; ++oy)
              for (std::int64_t ox = -g.k; ox <= g.k; ++ox)
                for (std::int64_t c = 0; c < g.c; ++c)
                  acc += read(f1, n, c, y + oy, x + ox) * read(f2, n, c, y + dy + oy, x + dx + ox);
            const std::int64_t d = iy * g.grid_size + ix;
            out[static_cast<std::size_t>(((n * dout + d) * g.h + y) * g.w + x)] = acc * norm;
          }

  return make_result<T>(
      Shape{g.n, dout, g.h, g.w}, std::move(out), "correlate_oracle", {f1, f2},
      [g, norm](TensorNode<T>& self) {
        auto& n1 = *self.inputs[0];
        auto& n2 = *self.inputs[1];
        const std::int64_t dout = g.channels_out();
        auto idx = [&g](std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) {
          return static_cast<std::size_t>(((n * g.c + c) * g.h + y) * g.w + x);
        };
        auto inside = [&g](std::int64_t y, std::int64_t x) {
          return y >= 0 && y < g.h && x >= 0 && x < g.w;
        };
        for (std::int64_t n = 0; n < g.n; ++n)
          for (int iy = 0; iy < g.grid_size; ++iy)
            for (int ix = 0; ix < g.grid_size; ++ix)
              for (std::int64_t y = 0; y < g.h; ++y)
                for (std::int64_t x = 0; x < g.w; ++x) {
                  const std::int64_t dy = std::int64_t{iy - g.grid_radius} * g.stride;
                  const std::int64_t dx = std::int64_t{ix - g.grid_radius} * g.stride;
                  const std::int64_t d = iy * g.grid_size + ix;
                  const T go =
                      norm * self.grad[static_cast<std::size_t>(((n * dout + d) * g.h + y) * g.w + x)];
                  for (std::int64_t oy = -g.k; oy <= g.k; ++oy)
                    for (std::int64_t ox = -g.k; ox <= g.k; ++ox) {
                      const std::int64_t y1 = y + oy, x1 = x + ox;
                      const std::int64_t y2 = y1 + dy, x2 = x1 + dx;
                      if (!inside(y1, x1) || !inside(y2, x2)) continue;
                      for (std::int64_t c = 0; c < g.c; ++c) {
                        if (n1.requires_grad) grad_of(n1)[idx(n, c, y1, x1)] += go * n2.data[idx(n, c, y2, x2)];
                        if (n2.requires_grad) grad_of(n2)[idx(n, c, y2, x2)] += go * n1.data[idx(n, c, y1, x1)];
                      }
                    }
                }
      });
}

template BasicTensor<float> correlate(const BasicTensor<float>&, const BasicTensor<float>&,
                                      const CorrConfig&);
template BasicTensor<double> correlate(const BasicTensor<double>&, const BasicTensor<double>&,
                                       const CorrConfig&);
template BasicTensor<float> correlate_oracle(const BasicTensor<float>&, const BasicTensor<float>&,
                                             const CorrConfig&);
template BasicTensor<double> correlate_oracle(const BasicTensor<double>&,
                                              const BasicTensor<double>&, const CorrConfig&);

}  // namespace ucorr
