#include "vex/extrapolate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "vex/errors.hpp"

namespace vex {

SequenceWindow::SequenceWindow(std::vector<Vector> vectors) {
  vectors_.reserve(vectors.size());
  for (auto &v : vectors)
    push_back(std::move(v));
}

void SequenceWindow::push_back(Vector v) {
  if (!vectors_.empty() && v.size() != dim())
    throw DimensionError("SequenceWindow: vector of length " + std::to_string(v.size()) +
                         " in a window of dimension " + std::to_string(dim()));
  vectors_.push_back(std::move(v));
}

std::string_view to_string(ExtrapMethod m) {
  switch (m) {
  case ExtrapMethod::RRE:
    return "rre";
  case ExtrapMethod::MPE:
    return "mpe";
  case ExtrapMethod::VEA:
    return "vea";
  }
  return "?";
}

std::size_t window_size(ExtrapMethod m, std::size_t q) {
  return m == ExtrapMethod::VEA ? 2 * q + 1 : q + 2;
}

namespace {

Vector difference(const Vector &a, const Vector &b) {
  Vector d(a.size());
  kernels::lincomb(1.0, a, -1.0, b, d);
  return d;
}

// γ, α and t from unnormalized coefficients d of length order+1; the first
// `order` columns of qr span Δs_0..Δs_{order-1}.
ExtrapolationOutcome finish(const SequenceWindow &w, const IncrementalQr &qr, Vector d,
                            std::size_t order, ExtrapMethod method, const ExtrapConfig &cfg) {
  double lambda = 0.0, scale = 0.0;
  for (double v : d) {
    lambda += v;
    scale += std::abs(v);
  }
  if (!(std::abs(lambda) > cfg.degeneracy_tol * scale))
    throw DegenerateError(std::string(to_string(method)) +
                          ": coefficients cannot be normalized (sum of d vanishes)");

  ExtrapolationOutcome out;
  out.method = method;
  out.order = order;
  out.gamma.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    out.gamma[i] = d[i] / lambda;
  out.alpha.resize(order);
  for (std::size_t j = 0; j < order; ++j)
    out.alpha[j] = (j == 0 ? 1.0 : out.alpha[j - 1]) - out.gamma[j];

  out.t = w.front();
  if (order > 0) {
    const Vector ra = qr.r().leading(order).apply(out.alpha);
    kernels::axpy(1.0, qr.combine(ra), out.t);
  }
  return out;
}

ExtrapolationOutcome start_point(const SequenceWindow &w, ExtrapMethod method) {
  ExtrapolationOutcome out;
  out.method = method;
  out.t = w.front();
  out.gamma = {1.0};
  out.breakdown = true;
  return out;
}

// Order-`order` coefficients from a full-rank leading block of qr.
Vector standard_coefficients(const IncrementalQr &qr, std::size_t order, ExtrapMethod method) {
  if (method == ExtrapMethod::RRE) {
    const Vector e(order + 1, 1.0);
    return solve_normal_from_r(qr.r().leading(order + 1), e);
  }
  const auto last = qr.r().column(order);
  Vector rhs(order);
  for (std::size_t i = 0; i < order; ++i)
    rhs[i] = -last[i];
  Vector d = order > 0 ? solve_upper(qr.r().leading(order), rhs) : Vector{};
  d.push_back(1.0);
  return d;
}

ExtrapolationOutcome polynomial(const SequenceWindow &w, ExtrapMethod method,
                                const ExtrapConfig &cfg) {
  if (w.size() < 3)
    throw DimensionError(std::string(to_string(method)) +
                         ": window needs q+2 >= 3 vectors, got " + std::to_string(w.size()));
  const std::size_t q = w.size() - 2;

  IncrementalQr qr;
  std::optional<std::size_t> dependent_at;
  Vector dependency;
  for (std::size_t j = 0; j <= q; ++j) {
    Projection p = qr.project(difference(w[j + 1], w[j]), cfg.breakdown_tol);
    if (p.dependent) {
      dependent_at = j;
      dependency = std::move(p.coeffs);
      break;
    }
    qr.commit(std::move(p));
  }

  // A pivot negligible against the largest one is treated as a dependency too;
  // this is exactly the case in which the triangular solves would refuse.
  double biggest = 0.0;
  for (std::size_t i = 0; i < qr.size(); ++i)
    biggest = std::max(biggest, qr.r()(i, i));
  for (std::size_t i = 0; i < qr.size(); ++i) {
    if (qr.r()(i, i) < kSingularTol * biggest) {
      const auto c = qr.r().column(i);
      dependent_at = i;
      dependency.assign(c.begin(), c.end() - 1);
      qr.truncate(i);
      break;
    }
  }

  if (!dependent_at)
    return finish(w, qr, standard_coefficients(qr, q, method), q, method, cfg);

  const std::size_t j = *dependent_at;
  if (j == 0)
    return start_point(w, method);

  Vector rhs(j);
  for (std::size_t i = 0; i < j; ++i)
    rhs[i] = -dependency[i];
  Vector d = solve_upper(qr.r().leading(j), rhs);
  d.push_back(1.0);
  try {
    auto out = finish(w, qr, std::move(d), j, method, cfg);
    out.breakdown = true;
    return out;
  } catch (const DegenerateError &) {
  }

  if (j == 1)
    return start_point(w, method);
  auto out = finish(w, qr, standard_coefficients(qr, j - 1, method), j - 1, method, cfg);
  out.breakdown = true;
  return out;
}

} // namespace

DenseMatrix first_differences(const SequenceWindow &w) {
  if (w.size() < 2)
    throw DimensionError("first_differences: window needs at least two vectors");
  DenseMatrix du(w.dim(), 0);
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    du.append_column(difference(w[i + 1], w[i]));
  return du;
}

ExtrapolationOutcome rre(const SequenceWindow &w, const ExtrapConfig &cfg) {
  return polynomial(w, ExtrapMethod::RRE, cfg);
}

ExtrapolationOutcome mpe(const SequenceWindow &w, const ExtrapConfig &cfg) {
  return polynomial(w, ExtrapMethod::MPE, cfg);
}

ExtrapolationOutcome vea(const SequenceWindow &w, const ExtrapConfig &cfg) {
  if (w.size() < 3 || w.size() % 2 == 0)
    throw DimensionError("vea: window needs 2q+1 vectors with q >= 1, got " +
                         std::to_string(w.size()));
  const std::size_t columns = w.size() - 1;

  ExtrapolationOutcome out;
  out.method = ExtrapMethod::VEA;
  out.order = columns / 2;

  // ε_{k-1} and ε_k columns; ε_{-1} is identically zero.
  std::vector<Vector> previous;
  std::vector<Vector> current = w.vectors();
  Vector last_even = current.front();

  for (std::size_t k = 0; k < columns; ++k) {
    std::vector<Vector> next(current.size() - 1);
    for (std::size_t j = 0; j + 1 < current.size(); ++j) {
      Vector v = difference(current[j + 1], current[j]);
      const double vv = kernels::dot(v, v);
      const double ref = kernels::dot(current[j], current[j]);
      if (!(vv >= cfg.vea_guard * (1.0 + ref))) {
        out.breakdown = true;
        out.t = k == 0 ? w.back() : last_even;
        return out;
      }
      kernels::scale(1.0 / vv, v);
      if (!previous.empty())
        kernels::axpy(1.0, previous[j + 1], v);
      next[j] = std::move(v);
    }
    previous = std::move(current);
    current = std::move(next);
    if ((k + 1) % 2 == 0)
      last_even = current.front();
  }
  out.t = std::move(current.front());
  return out;
}

ExtrapolationOutcome extrapolate(ExtrapMethod m, const SequenceWindow &w,
                                 const ExtrapConfig &cfg) {
  switch (m) {
  case ExtrapMethod::RRE:
    return rre(w, cfg);
  case ExtrapMethod::MPE:
    return mpe(w, cfg);
  case ExtrapMethod::VEA:
    return vea(w, cfg);
  }
  throw UnsupportedError("extrapolate: unknown method");
}

Vector generalized_residual(const SequenceWindow &w, const ExtrapolationOutcome &outcome) {
  if (outcome.method == ExtrapMethod::VEA)
    throw UnsupportedError("generalized_residual: undefined for VEA outcomes");
  if (outcome.gamma.empty() || outcome.gamma.size() + 1 > w.size())
    throw DimensionError("generalized_residual: gamma does not fit the window");
  Vector r(w.dim(), 0.0);
  for (std::size_t j = 0; j < outcome.gamma.size(); ++j) {
    kernels::axpy(outcome.gamma[j], w[j + 1], r);
    kernels::axpy(-outcome.gamma[j], w[j], r);
  }
  return r;
}

} // namespace vex
