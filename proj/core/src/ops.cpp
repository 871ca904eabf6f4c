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

#include "ucorr/ops.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <string>

#include "graph_builder.hpp"

namespace ucorr {
namespace {

using detail::grad_of;
using detail::make_result;

void require_rank4(const Shape& s, const char* what) {
  if (s.rank() != 4) {
    throw ShapeError(std::string(what) + " expects an NCHW tensor, got " + s.str());
  }
}

void require_same(const Shape& a, const Shape& b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
}

struct ConvGeometry {
  std::int64_t n, c, h, w, o, k, ho, wo;
  int stride, padding;
  std::int64_t col_rows() const { return c * k * k; }
  std::int64_t col_cols() const { return ho * wo; }
};

ConvGeometry conv_geometry(const Shape& in, const Shape& wt, int stride, int padding) {
  require_rank4(in, "conv2d input");
  if (wt.rank() != 4 || wt[2] != wt[3]) {
    throw ShapeError("conv2d weight must be OxIxKxK, got " + wt.str());
  }
  if (in[1] != wt[1]) {
    throw ShapeError("conv2d channel mismatch: input " + in.str() + " vs weight " + wt.str());
  }
  if (stride < 1 || padding < 0) {
    throw ShapeError("conv2d needs stride >= 1 and padding >= 0");
  }
  const std::int64_t k = wt[2];
  if (in[2] + 2 * padding < k || in[3] + 2 * padding < k) {
    throw ShapeError("conv2d kernel " + wt.str() + " does not fit padded input " + in.str());
  }
  ConvGeometry g{in[0], in[1], in[2], in[3], wt[0], k, 0, 0, stride, padding};
  g.ho = (g.h + 2 * padding - k) / stride + 1;
  g.wo = (g.w + 2 * padding - k) / stride + 1;
  return g;
}

// Output columns ox whose input column ox * stride - padding + kx lies
// inside [0, w).
struct ValidRange {
  std::int64_t lo, hi;  // [lo, hi)
};

ValidRange valid_columns(const ConvGeometry& g, std::int64_t kx) {
  const std::int64_t first = g.padding - kx;  // smallest ox * stride allowed
  std::int64_t lo = first <= 0 ? 0 : (first + g.stride - 1) / g.stride;
  std::int64_t hi = (g.w - 1 + g.padding - kx) / g.stride + 1;
  if (g.w - 1 + g.padding - kx < 0) hi = 0;
  lo = std::min(lo, g.wo);
  hi = std::clamp(hi, lo, g.wo);
  return {lo, hi};
}

// col is [C*K*K, Ho*Wo], rows ordered (c, ky, kx).
template <typename T>
void im2col(const T* img, const ConvGeometry& g, T* col) {
  for (std::int64_t c = 0; c < g.c; ++c) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        T* row = col + ((c * g.k + ky) * g.k + kx) * g.col_cols();
        const ValidRange vr = valid_columns(g, kx);
        for (std::int64_t oy = 0; oy < g.ho; ++oy) {
          const std::int64_t iy = oy * g.stride - g.padding + ky;
          T* dst = row + oy * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(dst, dst + g.wo, T(0));
            continue;
          }
          const T* src = img + (c * g.h + iy) * g.w - g.padding + kx;
          std::fill(dst, dst + vr.lo, T(0));
          if (g.stride == 1) {
            std::copy(src + vr.lo, src + vr.hi, dst + vr.lo);
          } else {
            for (std::int64_t ox = vr.lo; ox < vr.hi; ++ox) dst[ox] = src[ox * g.stride];
          }
          std::fill(dst + vr.hi, dst + g.wo, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* img) {
  for (std::int64_t c = 0; c < g.c; ++c) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const T* row = col + ((c * g.k + ky) * g.k + kx) * g.col_cols();
        const ValidRange vr = valid_columns(g, kx);
        for (std::int64_t oy = 0; oy < g.ho; ++oy) {
          const std::int64_t iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.h) continue;
          const T* src = row + oy * g.wo;
          T* dst = img + (c * g.h + iy) * g.w - g.padding + kx;
          if (g.stride == 1) {
            for (std::int64_t ox = vr.lo; ox < vr.hi; ++ox) dst[ox] += src[ox];
          } else {
            for (std::int64_t ox = vr.lo; ox < vr.hi; ++ox) dst[ox * g.stride] += src[ox];
          }
        }
      }
    }
  }
}

// C[i, j] += sum_p A(i, p) * B[p, j] with A(i, p) = a[i * a_row + p * a_col].
// B is K x N and C is M x N, both row-major. Each C element accumulates its
// products in increasing p, so results do not depend on the blocking.
template <typename T>
void gemm_acc(std::int64_t m, std::int64_t n, std::int64_t kdim, const T* a, std::int64_t a_row,
              std::int64_t a_col, const T* b, T* c) {
  using V [[gnu::vector_size(16)]] = T;
  constexpr std::int64_t kVec = 16 / sizeof(T);
  constexpr std::int64_t kLanes = 2 * kVec;
  constexpr std::int64_t kRows = 4;
  const std::int64_t m_full = m - m % kRows;

  // A as kRows-row panels, p-major inside each panel.
  std::vector<T> a_pack(static_cast<std::size_t>(m_full * kdim));
  for (std::int64_t i = 0; i < m_full; i += kRows) {
    T* dst = a_pack.data() + i * kdim;
    for (std::int64_t p = 0; p < kdim; ++p) {
      for (std::int64_t r = 0; r < kRows; ++r) dst[p * kRows + r] = a[(i + r) * a_row + p * a_col];
    }
  }
  std::vector<T> b_pack(static_cast<std::size_t>(kdim * kLanes));

  std::int64_t j = 0;
  for (; j + kLanes <= n; j += kLanes) {
    for (std::int64_t p = 0; p < kdim; ++p) std::memcpy(&b_pack[p * kLanes], b + p * n + j, sizeof(T) * kLanes);
    for (std::int64_t i = 0; i < m_full; i += kRows) {
      V lo[kRows], hi[kRows];
      for (std::int64_t r = 0; r < kRows; ++r) {
        std::memcpy(&lo[r], c + (i + r) * n + j, sizeof(V));
        std::memcpy(&hi[r], c + (i + r) * n + j + kVec, sizeof(V));
      }
      const T* ap = a_pack.data() + i * kdim;
      const T* bp = b_pack.data();
      for (std::int64_t p = 0; p < kdim; ++p, ap += kRows, bp += kLanes) {
        V b0, b1;
        std::memcpy(&b0, bp, sizeof(V));
        std::memcpy(&b1, bp + kVec, sizeof(V));
        for (std::int64_t r = 0; r < kRows; ++r) {
          lo[r] += ap[r] * b0;
          hi[r] += ap[r] * b1;
        }
      }
      for (std::int64_t r = 0; r < kRows; ++r) {
        std::memcpy(c + (i + r) * n + j, &lo[r], sizeof(V));
        std::memcpy(c + (i + r) * n + j + kVec, &hi[r], sizeof(V));
      }
    }
    for (std::int64_t i = m_full; i < m; ++i) {
      V lo, hi;
      std::memcpy(&lo, c + i * n + j, sizeof(V));
      std::memcpy(&hi, c + i * n + j + kVec, sizeof(V));
      const T* bp = b_pack.data();
      for (std::int64_t p = 0; p < kdim; ++p, bp += kLanes) {
        V b0, b1;
        std::memcpy(&b0, bp, sizeof(V));
        std::memcpy(&b1, bp + kVec, sizeof(V));
        const T av = a[i * a_row + p * a_col];
        lo += av * b0;
        hi += av * b1;
      }
      std::memcpy(c + i * n + j, &lo, sizeof(V));
      std::memcpy(c + i * n + j + kVec, &hi, sizeof(V));
    }
  }
  for (; j < n; ++j) {
    for (std::int64_t i = 0; i < m; ++i) {
      T acc = c[i * n + j];
      for (std::int64_t p = 0; p < kdim; ++p) acc += a[i * a_row + p * a_col] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

// C[i, r] += dot(G[i, :], B[r, :]) for G (M x N) and B (R x N), row-major.
template <typename T>
void gemm_nt_acc(std::int64_t m, std::int64_t r_n, std::int64_t n, const T* g, const T* b, T* c) {
  using V [[gnu::vector_size(16)]] = T;
  constexpr std::int64_t kVec = 16 / sizeof(T);
  const std::int64_t n_main = n - n % kVec;
  auto hsum = [](V v) {
    T s = 0;
    for (std::int64_t l = 0; l < kVec; ++l) s += v[l];
    return s;
  };
  for (std::int64_t i = 0; i < m; i += 2) {
    const bool two_i = i + 1 < m;
    const T* g0 = g + i * n;
    const T* g1 = two_i ? g0 + n : g0;
    for (std::int64_t r = 0; r < r_n; r += 2) {
      const bool two_r = r + 1 < r_n;
      const T* b0 = b + r * n;
      const T* b1 = two_r ? b0 + n : b0;
      V a00 = {}, a01 = {}, a10 = {}, a11 = {};
      for (std::int64_t j = 0; j < n_main; j += kVec) {
        V x0, x1, y0, y1;
        std::memcpy(&x0, g0 + j, sizeof(V));
        std::memcpy(&x1, g1 + j, sizeof(V));
        std::memcpy(&y0, b0 + j, sizeof(V));
        std::memcpy(&y1, b1 + j, sizeof(V));
        a00 += x0 * y0;
        a01 += x0 * y1;
        a10 += x1 * y0;
        a11 += x1 * y1;
      }
      T s00 = hsum(a00), s01 = hsum(a01), s10 = hsum(a10), s11 = hsum(a11);
      for (std::int64_t j = n_main; j < n; ++j) {
        s00 += g0[j] * b0[j];
        s01 += g0[j] * b1[j];
        s10 += g1[j] * b0[j];
        s11 += g1[j] * b1[j];
      }
      c[i * r_n + r] += s00;
      if (two_r) c[i * r_n + r + 1] += s01;
      if (two_i) {
        c[(i + 1) * r_n + r] += s10;
        if (two_r) c[(i + 1) * r_n + r + 1] += s11;
      }
    }
  }
}

template <typename T>
BasicTensor<T> conv2d_impl(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                           const BasicTensor<T>* bias, int stride, int padding) {
  const ConvGeometry g = conv_geometry(input.shape(), weight.shape(), stride, padding);
  if (bias && (bias->shape().rank() != 1 || bias->dim(0) != g.o)) {
    throw ShapeError("conv2d bias " + bias->shape().str() + " does not match weight " +
                     weight.shape().str());
  }
  const std::int64_t rows = g.col_rows();
  const std::int64_t cols = g.col_cols();
  std::vector<T> out(static_cast<std::size_t>(g.n * g.o * cols));
  std::vector<T> col(static_cast<std::size_t>(rows * cols));
  const T* w = weight.data().data();
  for (std::int64_t n = 0; n < g.n; ++n) {
    im2col(input.data().data() + n * g.c * g.h * g.w, g, col.data());
    T* dst = out.data() + n * g.o * cols;
    for (std::int64_t o = 0; o < g.o; ++o) {
      const T b0 = bias ? bias->data()[static_cast<std::size_t>(o)] : T(0);
      std::fill(dst + o * cols, dst + (o + 1) * cols, b0);
    }
    gemm_acc(g.o, cols, rows, w, rows, std::int64_t{1}, col.data(), dst);
  }

  auto backward_fn = [g](TensorNode<T>& self) {
    auto& in = *self.inputs[0];
    auto& wt = *self.inputs[1];
    TensorNode<T>* bs = self.inputs.size() > 2 ? self.inputs[2].get() : nullptr;
    const std::int64_t rows = g.col_rows();
    const std::int64_t cols = g.col_cols();
    std::vector<T> col(wt.requires_grad ? static_cast<std::size_t>(rows * cols) : 0);
    std::vector<T> gcol(in.requires_grad ? static_cast<std::size_t>(rows * cols) : 0);
    for (std::int64_t n = 0; n < g.n; ++n) {
      const T* gout = self.grad.data() + n * g.o * cols;
      if (bs && bs->requires_grad) {
        auto& gb = grad_of(*bs);
        for (std::int64_t o = 0; o < g.o; ++o) {
          T acc = 0;
          for (std::int64_t j = 0; j < cols; ++j) acc += gout[o * cols + j];
          gb[static_cast<std::size_t>(o)] += acc;
        }
      }
      if (wt.requires_grad) {
        im2col(in.data.data() + n * g.c * g.h * g.w, g, col.data());
        gemm_nt_acc(g.o, rows, cols, gout, col.data(), grad_of(wt).data());
      }
      if (in.requires_grad) {
        std::fill(gcol.begin(), gcol.end(), T(0));
        gemm_acc(rows, cols, g.o, wt.data.data(), std::int64_t{1}, rows, gout, gcol.data());
        col2im_add(gcol.data(), g, grad_of(in).data() + n * g.c * g.h * g.w);
      }
    }
  };

  const Shape out_shape{g.n, g.o, g.ho, g.wo};
  if (bias) {
    return make_result<T>(out_shape, std::move(out), "conv2d", {input, weight, *bias},
                          std::move(backward_fn));
  }
  return make_result<T>(out_shape, std::move(out), "conv2d", {input, weight},
                        std::move(backward_fn));
}

template <typename T, typename F, typename D>
BasicTensor<T> unary(const BasicTensor<T>& x, std::string_view op, F f, D dfdx) {
  std::vector<T> out(x.data().size());
  std::transform(x.data().begin(), x.data().end(), out.begin(), f);
  return make_result<T>(x.shape(), std::move(out), op, {x}, [dfdx](TensorNode<T>& self) {
    auto& in = *self.inputs[0];
    auto& gi = grad_of(in);
    for (std::size_t i = 0; i < gi.size(); ++i) {
      gi[i] += self.grad[i] * dfdx(in.data[i], self.data[i]);
    }
  });
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, int stride, int padding) {
  return conv2d_impl(input, weight, &bias, stride, padding);
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight, int stride,
                      int padding) {
  return conv2d_impl<T>(input, weight, nullptr, stride, padding);
}

template <typename T>
BasicTensor<T> max_pool2d(const BasicTensor<T>& input) {
  const Shape& s = input.shape();
  require_rank4(s, "max_pool2d");
  if (s[2] % 2 != 0 || s[3] % 2 != 0) {
    throw ShapeError("max_pool2d needs even spatial extents, got " + s.str());
  }
  const std::int64_t planes = s[0] * s[1], h = s[2], w = s[3], ho = h / 2, wo = w / 2;
  std::vector<T> out(static_cast<std::size_t>(planes * ho * wo));
  std::vector<std::int64_t> argmax(out.size());
  const T* src = input.data().data();
  for (std::int64_t p = 0; p < planes; ++p) {
    for (std::int64_t y = 0; y < ho; ++y) {
      for (std::int64_t x = 0; x < wo; ++x) {
        std::int64_t best = (p * h + 2 * y) * w + 2 * x;
        for (std::int64_t dy = 0; dy < 2; ++dy) {
          for (std::int64_t dx = 0; dx < 2; ++dx) {
            const std::int64_t idx = (p * h + 2 * y + dy) * w + 2 * x + dx;
            if (src[idx] > src[best]) best = idx;  // strict: first max wins
          }
        }
        const auto o = static_cast<std::size_t>((p * ho + y) * wo + x);
        out[o] = src[best];
        argmax[o] = best;
      }
    }
  }
  if (branch_trace_active()) {
    for (auto a : argmax) record_branch(static_cast<std::uint64_t>(a));
  }
  return make_result<T>(Shape{s[0], s[1], ho, wo}, std::move(out), "max_pool2d", {input},
                        [argmax = std::move(argmax)](TensorNode<T>& self) {
                          auto& gi = grad_of(*self.inputs[0]);
                          for (std::size_t o = 0; o < argmax.size(); ++o) {
                            gi[static_cast<std::size_t>(argmax[o])] += self.grad[o];
                          }
                        });
}

template <typename T>
BasicTensor<T> upsample_nearest2(const BasicTensor<T>& input) {
  const Shape& s = input.shape();
  require_rank4(s, "upsample_nearest2");
  const std::int64_t planes = s[0] * s[1], h = s[2], w = s[3];
  std::vector<T> out(static_cast<std::size_t>(planes * 4 * h * w));
  const T* src = input.data().data();
  for (std::int64_t p = 0; p < planes; ++p) {
    for (std::int64_t y = 0; y < 2 * h; ++y) {
      const T* srow = src + (p * h + y / 2) * w;
      T* drow = out.data() + (p * 2 * h + y) * 2 * w;
      for (std::int64_t x = 0; x < 2 * w; ++x) drow[x] = srow[x / 2];
    }
  }
  return make_result<T>(Shape{s[0], s[1], 2 * h, 2 * w}, std::move(out), "upsample_nearest2",
                        {input}, [planes, h, w](TensorNode<T>& self) {
                          auto& gi = grad_of(*self.inputs[0]);
                          for (std::int64_t p = 0; p < planes; ++p) {
                            for (std::int64_t y = 0; y < 2 * h; ++y) {
                              const T* grow = self.grad.data() + (p * 2 * h + y) * 2 * w;
                              T* dst = gi.data() + (p * h + y / 2) * w;
                              for (std::int64_t x = 0; x < 2 * w; ++x) dst[x / 2] += grow[x];
                            }
                          }
                        });
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  require_rank4(sa, "concat_channels");
  require_rank4(sb, "concat_channels");
  if (sa[0] != sb[0] || sa[2] != sb[2] || sa[3] != sb[3]) {
    throw ShapeError("concat_channels: batch/spatial mismatch " + sa.str() + " vs " + sb.str());
  }
  const std::int64_t n = sa[0], plane = sa[2] * sa[3];
  const std::int64_t ca = sa[1] * plane, cb = sb[1] * plane;
  std::vector<T> out(static_cast<std::size_t>(n * (ca + cb)));
  for (std::int64_t i = 0; i < n; ++i) {
    std::copy_n(a.data().data() + i * ca, ca, out.data() + i * (ca + cb));
    std::copy_n(b.data().data() + i * cb, cb, out.data() + i * (ca + cb) + ca);
  }
  return make_result<T>(Shape{n, sa[1] + sb[1], sa[2], sa[3]}, std::move(out), "concat_channels",
                        {a, b}, [n, ca, cb](TensorNode<T>& self) {
                          auto& na = *self.inputs[0];
                          auto& nb = *self.inputs[1];
                          for (std::int64_t i = 0; i < n; ++i) {
                            const T* g = self.grad.data() + i * (ca + cb);
                            if (na.requires_grad) {
                              T* d = grad_of(na).data() + i * ca;
                              for (std::int64_t j = 0; j < ca; ++j) d[j] += g[j];
                            }
                            if (nb.requires_grad) {
                              T* d = grad_of(nb).data() + i * cb;
                              for (std::int64_t j = 0; j < cb; ++j) d[j] += g[ca + j];
                            }
                          }
                        });
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  if (branch_trace_active()) {
    for (T v : x.data()) record_branch(v > T(0));
  }
  return unary(
      x, "relu", [](T v) { return v > T(0) ? v : T(0); },
      [](T in, T) { return in > T(0) ? T(1) : T(0); });
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  return unary(
      x, "sigmoid",
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T out) { return out * (T(1) - out); });
}

template <typename T>
BasicTensor<T> softplus(const BasicTensor<T>& x) {
  return unary(
      x, "softplus",
      [](T v) { return std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v))); },
      [](T in, T) {
        if (in >= T(0)) return T(1) / (T(1) + std::exp(-in));
        const T e = std::exp(in);
        return e / (T(1) + e);
      });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor) {
  return unary(
      x, "scale", [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
BasicTensor<T> add_scalar(const BasicTensor<T>& x, T offset) {
  return unary(
      x, "add_scalar", [offset](T v) { return v + offset; }, [](T, T) { return T(1); });
}

template <typename T>
BasicTensor<T> pow_scalar(const BasicTensor<T>& x, T exponent) {
  for (T v : x.data()) {
    if (v < T(0)) throw std::domain_error("pow_scalar needs nonnegative input");
  }
  if (branch_trace_active()) {
    for (T v : x.data()) record_branch(v > T(0));
  }
  return unary(
      x, "pow_scalar", [exponent](T v) { return std::pow(v, exponent); },
      [exponent](T in, T) {
        return in > T(0) ? exponent * std::pow(in, exponent - T(1)) : T(0);
      });
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same(a.shape(), b.shape(), "add");
  std::vector<T> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result<T>(a.shape(), std::move(out), "add", {a, b}, [](TensorNode<T>& self) {
    for (int k = 0; k < 2; ++k) {
      auto& in = *self.inputs[static_cast<std::size_t>(k)];
      if (!in.requires_grad) continue;
      auto& gi = grad_of(in);
      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += self.grad[i];
    }
  });
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same(a.shape(), b.shape(), "sub");
  std::vector<T> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return make_result<T>(a.shape(), std::move(out), "sub", {a, b}, [](TensorNode<T>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    if (na.requires_grad) {
      auto& g = grad_of(na);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (nb.requires_grad) {
      auto& g = grad_of(nb);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same(a.shape(), b.shape(), "mul");
  std::vector<T> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return make_result<T>(a.shape(), std::move(out), "mul", {a, b}, [](TensorNode<T>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    if (na.requires_grad) {
      auto& g = grad_of(na);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * nb.data[i];
    }
    if (nb.requires_grad) {
      auto& g = grad_of(nb);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * na.data[i];
    }
  });
}

template <typename T>
BasicTensor<T> div(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same(a.shape(), b.shape(), "div");
  std::vector<T> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] / b.data()[i];
  return make_result<T>(a.shape(), std::move(out), "div", {a, b}, [](TensorNode<T>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    if (na.requires_grad) {
      auto& g = grad_of(na);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / nb.data[i];
    }
    if (nb.requires_grad) {
      auto& g = grad_of(nb);
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] -= self.grad[i] * self.data[i] / nb.data[i];
      }
    }
  });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
  T acc = 0;
  for (T v : x.data()) acc += v;
  return make_result<T>(Shape{}, std::vector<T>{acc}, "sum", {x}, [](TensorNode<T>& self) {
    auto& gi = grad_of(*self.inputs[0]);
    for (auto& g : gi) g += self.grad[0];
  });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x) {
  const auto n = static_cast<T>(x.numel());
  if (x.numel() == 0) throw ShapeError("mean of empty tensor");
  T acc = 0;
  for (T v : x.data()) acc += v;
  return make_result<T>(Shape{}, std::vector<T>{acc / n}, "mean", {x},
                        [n](TensorNode<T>& self) {
                          auto& gi = grad_of(*self.inputs[0]);
                          const T g = self.grad[0] / n;
                          for (auto& v : gi) v += g;
                        });
}

template <typename T>
BasicTensor<T> mean_hw(const BasicTensor<T>& x) {
  const Shape& s = x.shape();
  require_rank4(s, "mean_hw");
  const std::int64_t planes = s[0] * s[1], hw = s[2] * s[3];
  if (hw == 0) throw ShapeError("mean_hw of empty spatial extent " + s.str());
  std::vector<T> out(static_cast<std::size_t>(planes));
  for (std::int64_t p = 0; p < planes; ++p) {
    T acc = 0;
    for (std::int64_t i = 0; i < hw; ++i) acc += x.data()[static_cast<std::size_t>(p * hw + i)];
    out[static_cast<std::size_t>(p)] = acc / static_cast<T>(hw);
  }
  return make_result<T>(Shape{s[0], s[1], 1, 1}, std::move(out), "mean_hw", {x},
                        [planes, hw](TensorNode<T>& self) {
                          auto& gi = grad_of(*self.inputs[0]);
                          for (std::int64_t p = 0; p < planes; ++p) {
                            const T g = self.grad[static_cast<std::size_t>(p)] / static_cast<T>(hw);
                            for (std::int64_t i = 0; i < hw; ++i) {
                              gi[static_cast<std::size_t>(p * hw + i)] += g;
                            }
                          }
                        });
}

#define UCORR_INSTANTIATE_OPS(T)                                                              \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&,                \
                                 const BasicTensor<T>&, int, int);                            \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, int, int);     \
  template BasicTensor<T> max_pool2d(const BasicTensor<T>&);                                  \
  template BasicTensor<T> upsample_nearest2(const BasicTensor<T>&);                           \
  template BasicTensor<T> concat_channels(const BasicTensor<T>&, const BasicTensor<T>&);      \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                        \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                     \
  template BasicTensor<T> softplus(const BasicTensor<T>&);                                    \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> div(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                    \
  template BasicTensor<T> add_scalar(const BasicTensor<T>&, T);                               \
  template BasicTensor<T> pow_scalar(const BasicTensor<T>&, T);                               \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                         \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                        \
  template BasicTensor<T> mean_hw(const BasicTensor<T>&);

UCORR_INSTANTIATE_OPS(float)
UCORR_INSTANTIATE_OPS(double)

#undef UCORR_INSTANTIATE_OPS

}  // namespace ucorr
