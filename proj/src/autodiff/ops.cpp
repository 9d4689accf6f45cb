#include "lcrl/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace lcrl::ad {
namespace {

void require_same_tape(const Tensor& a, const Tensor& b) {
  if (&a.tape() != &b.tape()) {
    throw std::invalid_argument("operands live on different tapes");
  }
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.shape().size() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got " + shape_str(a.shape()));
  }
}

// Pushes a node whose backward closure receives its own id.
template <class Backward>
Tensor make(Tape& tape, Shape shape, std::vector<double> values,
            bool requires_grad, Backward&& bw) {
  Tensor out = tape.push(std::move(shape), std::move(values), requires_grad, {});
  if (requires_grad) {
    const std::size_t self = out.id();
    tape.node(self).backward = [self, bw = std::forward<Backward>(bw)](
                                   Tape& t) { bw(t, self); };
  }
  return out;
}

bool tracks(const Tape& t, std::size_t id) { return t.node(id).requires_grad; }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  auto av = a.data(), bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  const auto ia = a.id(), ib = b.id();
  return make(a.tape(), a.shape(), std::move(out),
              a.requires_grad() || b.requires_grad(),
              [ia, ib](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                for (auto id : {ia, ib}) {
                  if (!tracks(t, id)) continue;
                  auto& dst = t.grad_of(id);
                  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
                }
              });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  auto av = a.data(), bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  const auto ia = a.id(), ib = b.id();
  return make(a.tape(), a.shape(), std::move(out),
              a.requires_grad() || b.requires_grad(),
              [ia, ib](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                if (tracks(t, ia)) {
                  auto& dst = t.grad_of(ia);
                  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
                }
                if (tracks(t, ib)) {
                  auto& dst = t.grad_of(ib);
                  for (std::size_t i = 0; i < g.size(); ++i) dst[i] -= g[i];
                }
              });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  auto av = a.data(), bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const auto ia = a.id(), ib = b.id();
  return make(a.tape(), a.shape(), std::move(out),
              a.requires_grad() || b.requires_grad(),
              [ia, ib](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                if (tracks(t, ia)) {
                  const auto& other = t.node(ib).value;
                  auto& dst = t.grad_of(ia);
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    dst[i] += g[i] * other[i];
                  }
                }
                if (tracks(t, ib)) {
                  const auto& other = t.node(ia).value;
                  auto& dst = t.grad_of(ib);
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    dst[i] += g[i] * other[i];
                  }
                }
              });
}

Tensor scale(const Tensor& a, double factor) {
  auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
  const auto ia = a.id();
  return make(a.tape(), a.shape(), std::move(out), a.requires_grad(),
              [ia, factor](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                auto& dst = t.grad_of(ia);
                for (std::size_t i = 0; i < g.size(); ++i) {
                  dst[i] += g[i] * factor;
                }
              });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: shape mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
  auto av = a.data(), bv = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      if (x == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += x * brow[j];
    }
  }
  const auto ia = a.id(), ib = b.id();
  return make(
      a.tape(), {m, n}, std::move(out), a.requires_grad() || b.requires_grad(),
      [ia, ib, m, k, n](Tape& t, std::size_t self) {
        const auto& g = t.node(self).grad;
        if (tracks(t, ia)) {
          const auto& bv = t.node(ib).value;
          auto& da = t.grad_of(ia);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j) {
                acc += g[i * n + j] * bv[p * n + j];
              }
              da[i * k + p] += acc;
            }
          }
        }
        if (tracks(t, ib)) {
          const auto& av = t.node(ia).value;
          auto& db = t.grad_of(ib);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              const double x = av[i * k + p];
              if (x == 0.0) continue;
              for (std::size_t j = 0; j < n; ++j) {
                db[p * n + j] += x * g[i * n + j];
              }
            }
          }
        }
      });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> indices) {
  require_rank("embedding_lookup", table, 2);
  const std::size_t rows = table.shape()[0], dim = table.shape()[1];
  std::vector<int> idx(indices.begin(), indices.end());
  for (int i : idx) {
    if (i < 0 || static_cast<std::size_t>(i) >= rows) {
      throw std::out_of_range("embedding_lookup: index " + std::to_string(i) +
                              " outside table of shape " +
                              shape_str(table.shape()));
    }
  }
  auto tv = table.data();
  std::vector<double> out(idx.size() * dim);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy_n(tv.data() + static_cast<std::size_t>(idx[r]) * dim, dim,
                out.data() + r * dim);
  }
  const auto it = table.id();
  const std::size_t n = idx.size();
  return make(table.tape(), {n, dim}, std::move(out),
              table.requires_grad(),
              [it, dim, idx = std::move(idx)](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                auto& dst = t.grad_of(it);
                for (std::size_t r = 0; r < idx.size(); ++r) {
                  double* row = dst.data() + static_cast<std::size_t>(idx[r]) * dim;
                  for (std::size_t j = 0; j < dim; ++j) row[j] += g[r * dim + j];
                }
              });
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::size_t pad) {
  require_same_tape(input, weight);
  require_same_tape(input, bias);
  require_rank("conv2d input", input, 4);
  require_rank("conv2d weight", weight, 4);
  require_rank("conv2d bias", bias, 1);
  const auto& is = input.shape();
  const auto& ws = weight.shape();
  const std::size_t batch = is[0], cin = is[1], h = is[2], w = is[3];
  const std::size_t cout = ws[0], kh = ws[2], kw = ws[3];
  if (ws[1] != cin || bias.shape()[0] != cout) {
    throw ShapeError("conv2d: shape mismatch input " + shape_str(is) +
                     " weight " + shape_str(ws) + " bias " +
                     shape_str(bias.shape()));
  }
  if (h + 2 * pad < kh || w + 2 * pad < kw) {
    throw ShapeError("conv2d: kernel " + shape_str(ws) +
                     " larger than padded input " + shape_str(is));
  }
  const std::size_t oh = h + 2 * pad - kh + 1, ow = w + 2 * pad - kw + 1;
  const std::ptrdiff_t ipad = static_cast<std::ptrdiff_t>(pad);

  // Weights as [cin, kh, kw, cout] so the innermost loop runs over cout.
  auto wv = weight.data();
  std::vector<double> wt(wv.size());
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t ci = 0; ci < cin; ++ci)
      for (std::size_t y = 0; y < kh; ++y)
        for (std::size_t x = 0; x < kw; ++x)
          wt[((ci * kh + y) * kw + x) * cout + co] =
              wv[((co * cin + ci) * kh + y) * kw + x];

  auto xv = input.data();
  auto bv = bias.data();
  std::vector<double> out(batch * cout * oh * ow);
  std::vector<double> hwc(oh * ow * cout);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t p = 0; p < oh * ow; ++p)
      std::copy(bv.begin(), bv.end(), hwc.begin() + p * cout);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      for (std::size_t iy = 0; iy < h; ++iy) {
        for (std::size_t ix = 0; ix < w; ++ix) {
          const double v = xv[((b * cin + ci) * h + iy) * w + ix];
          if (v == 0.0) continue;
          for (std::size_t ky = 0; ky < kh; ++ky) {
            const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(iy) + ipad -
                                      static_cast<std::ptrdiff_t>(ky);
            if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(oh)) continue;
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(ix) + ipad -
                                        static_cast<std::ptrdiff_t>(kx);
              if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(ow)) continue;
              double* dst = hwc.data() + (oy * ow + ox) * cout;
              const double* src = wt.data() + ((ci * kh + ky) * kw + kx) * cout;
              for (std::size_t co = 0; co < cout; ++co) dst[co] += v * src[co];
            }
          }
        }
      }
    }
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t p = 0; p < oh * ow; ++p)
        out[(b * cout + co) * oh * ow + p] = hwc[p * cout + co];
  }

  const auto ii = input.id(), iw = weight.id(), ib = bias.id();
  const bool rg =
      input.requires_grad() || weight.requires_grad() || bias.requires_grad();
  return make(
      input.tape(), {batch, cout, oh, ow}, std::move(out), rg,
      [=, wt = std::move(wt)](Tape& t, std::size_t self) {
        const auto& g = t.node(self).grad;
        const auto& xv = t.node(ii).value;
        const bool need_x = tracks(t, ii), need_w = tracks(t, iw),
                   need_b = tracks(t, ib);
        std::vector<double> dwt(need_w ? wt.size() : 0, 0.0);
        std::vector<double> ghwc(oh * ow * cout);
        std::vector<double>* dx = need_x ? &t.grad_of(ii) : nullptr;
        std::vector<double>* db = need_b ? &t.grad_of(ib) : nullptr;
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t co = 0; co < cout; ++co)
            for (std::size_t p = 0; p < oh * ow; ++p)
              ghwc[p * cout + co] = g[(b * cout + co) * oh * ow + p];
          if (db) {
            for (std::size_t p = 0; p < oh * ow; ++p)
              for (std::size_t co = 0; co < cout; ++co)
                (*db)[co] += ghwc[p * cout + co];
          }
          for (std::size_t ci = 0; ci < cin; ++ci) {
            for (std::size_t iy = 0; iy < h; ++iy) {
              for (std::size_t ix = 0; ix < w; ++ix) {
                const std::size_t xi = ((b * cin + ci) * h + iy) * w + ix;
                const double v = xv[xi];
                if (v == 0.0 && !dx) continue;
                double dxi = 0.0;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                  const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(iy) +
                                            ipad -
                                            static_cast<std::ptrdiff_t>(ky);
                  if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(oh)) continue;
                  for (std::size_t kx = 0; kx < kw; ++kx) {
                    const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(ix) +
                                              ipad -
                                              static_cast<std::ptrdiff_t>(kx);
                    if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(ow)) continue;
                    const double* gsrc = ghwc.data() + (oy * ow + ox) * cout;
                    const std::size_t wo = ((ci * kh + ky) * kw + kx) * cout;
                    if (need_w && v != 0.0) {
                      for (std::size_t co = 0; co < cout; ++co)
                        dwt[wo + co] += v * gsrc[co];
                    }
                    if (dx) {
                      for (std::size_t co = 0; co < cout; ++co)
                        dxi += wt[wo + co] * gsrc[co];
                    }
                  }
                }
                if (dx) (*dx)[xi] += dxi;
              }
            }
          }
        }
        if (need_w) {
          auto& dw = t.grad_of(iw);
          for (std::size_t co = 0; co < cout; ++co)
            for (std::size_t ci = 0; ci < cin; ++ci)
              for (std::size_t y = 0; y < kh; ++y)
                for (std::size_t x = 0; x < kw; ++x)
                  dw[((co * cin + ci) * kh + y) * kw + x] +=
                      dwt[((ci * kh + y) * kw + x) * cout + co];
        }
      });
}

Tensor max_pool_2x2(const Tensor& input) {
  require_rank("max_pool_2x2", input, 4);
  const auto& s = input.shape();
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3];
  const std::size_t oh = h / 2, ow = w / 2;
  if (oh == 0 || ow == 0) {
    throw ShapeError("max_pool_2x2: input too small " + shape_str(s));
  }
  auto xv = input.data();
  std::vector<double> out(planes * oh * ow);
  std::vector<std::size_t> arg(out.size());
  for (std::size_t p = 0; p < planes; ++p) {
    const std::size_t base = p * h * w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        std::size_t best = base + (2 * y) * w + 2 * x;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t i = base + (2 * y + dy) * w + 2 * x + dx;
            if (xv[i] > xv[best]) best = i;
          }
        const std::size_t o = (p * oh + y) * ow + x;
        out[o] = xv[best];
        arg[o] = best;
      }
    }
  }
  const auto ii = input.id();
  return make(input.tape(), {s[0], s[1], oh, ow}, std::move(out),
              input.requires_grad(),
              [ii, arg = std::move(arg)](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                auto& dst = t.grad_of(ii);
                for (std::size_t o = 0; o < g.size(); ++o) dst[arg[o]] += g[o];
              });
}

Tensor global_channel_max_pool(const Tensor& input) {
  require_rank("global_channel_max_pool", input, 4);
  const auto& s = input.shape();
  const std::size_t planes = s[0] * s[1], area = s[2] * s[3];
  if (area == 0) throw ShapeError("global_channel_max_pool: empty plane");
  auto xv = input.data();
  std::vector<double> out(planes);
  std::vector<std::size_t> arg(planes);
  for (std::size_t p = 0; p < planes; ++p) {
    std::size_t best = p * area;
    for (std::size_t i = p * area + 1; i < (p + 1) * area; ++i)
      if (xv[i] > xv[best]) best = i;
    out[p] = xv[best];
    arg[p] = best;
  }
  const auto ii = input.id();
  return make(input.tape(), {s[0], s[1]}, std::move(out),
              input.requires_grad(),
              [ii, arg = std::move(arg)](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                auto& dst = t.grad_of(ii);
                for (std::size_t o = 0; o < g.size(); ++o) dst[arg[o]] += g[o];
              });
}

Tensor relu(const Tensor& a) {
  auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  const auto ia = a.id();
  return make(a.tape(), a.shape(), std::move(out), a.requires_grad(),
              [ia](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                const auto& x = t.node(ia).value;
                auto& dst = t.grad_of(ia);
                for (std::size_t i = 0; i < g.size(); ++i)
                  if (x[i] > 0.0) dst[i] += g[i];
              });
}

Tensor tanh(const Tensor& a) {
  auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(av[i]);
  const auto ia = a.id();
  return make(a.tape(), a.shape(), std::move(out), a.requires_grad(),
              [ia](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                const auto& y = t.node(self).value;
                auto& dst = t.grad_of(ia);
                for (std::size_t i = 0; i < g.size(); ++i)
                  dst[i] += g[i] * (1.0 - y[i] * y[i]);
              });
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double x : a.data()) acc += x;
  const auto ia = a.id();
  return make(a.tape(), {1}, {acc}, a.requires_grad(),
              [ia](Tape& t, std::size_t self) {
                const double g = t.node(self).grad[0];
                for (auto& d : t.grad_of(ia)) d += g;
              });
}

Tensor concat(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b);
  const auto& as = a.shape();
  const auto& bs = b.shape();
  if (as.empty() || as.size() != bs.size() ||
      !std::equal(as.begin() + 1, as.end(), bs.begin() + 1)) {
    throw ShapeError("concat: shape mismatch " + shape_str(as) + " vs " +
                     shape_str(bs));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  Shape shape = as;
  shape[0] += bs[0];
  const auto ia = a.id(), ib = b.id();
  const std::size_t na = a.size();
  return make(a.tape(), std::move(shape), std::move(out),
              a.requires_grad() || b.requires_grad(),
              [ia, ib, na](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                if (tracks(t, ia)) {
                  auto& dst = t.grad_of(ia);
                  for (std::size_t i = 0; i < na; ++i) dst[i] += g[i];
                }
                if (tracks(t, ib)) {
                  auto& dst = t.grad_of(ib);
                  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[na + i];
                }
              });
}

Tensor log_softmax(const Tensor& a) {
  require_rank("log_softmax", a, 2);
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = av.data() + r * cols;
    const double mx = *std::max_element(x, x + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(x[c] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = x[c] - lse;
  }
  const auto ia = a.id();
  return make(a.tape(), a.shape(), std::move(out), a.requires_grad(),
              [ia, rows, cols](Tape& t, std::size_t self) {
                const auto& g = t.node(self).grad;
                const auto& y = t.node(self).value;
                auto& dst = t.grad_of(ia);
                for (std::size_t r = 0; r < rows; ++r) {
                  double gs = 0.0;
                  for (std::size_t c = 0; c < cols; ++c) gs += g[r * cols + c];
                  for (std::size_t c = 0; c < cols; ++c) {
                    const std::size_t i = r * cols + c;
                    dst[i] += g[i] - std::exp(y[i]) * gs;
                  }
                }
              });
}

}  // namespace lcrl::ad
