#pragma once

// Vector extrapolation: reduced rank extrapolation (RRE), minimal polynomial
// extrapolation (MPE) and the vector epsilon algorithm (VEA).
//
// RRE and MPE share one implementation: the first differences of the window
// are factored incrementally (ΔU = QR) and the extrapolated vector is
//
//     t = s_0 + Q_q (R_q α),   α_0 = 1 - γ_0,  α_j = α_{j-1} - γ_j,
//
// with γ = d / Σd. RRE takes d from R^T R d = e, MPE from R_q d = -r_q with
// d_q = 1.
//
// When a difference Δs_j is numerically dependent on Δs_0..Δs_{j-1}, the
// dependency coefficients already give a combination with zero generalized
// residual, so the window is cut at j and the extrapolation of order j is
// returned with `breakdown` set. Only if that combination cannot be
// normalized (its coefficients sum to zero) does the extrapolation fall
// back to order j - 1.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "vex/numkit.hpp"

namespace vex {

/// Ordered iterates s_0, ..., s_m of a fixed-point process, all of one length.
class SequenceWindow {
public:
  SequenceWindow() = default;
  explicit SequenceWindow(std::vector<Vector> vectors);

  void push_back(Vector v);

  std::size_t size() const { return vectors_.size(); }
  std::size_t dim() const { return vectors_.empty() ? 0 : vectors_.front().size(); }
  bool empty() const { return vectors_.empty(); }

  const Vector &operator[](std::size_t k) const { return vectors_[k]; }
  const Vector &front() const { return vectors_.front(); }
  const Vector &back() const { return vectors_.back(); }
  const std::vector<Vector> &vectors() const { return vectors_; }

private:
  std::vector<Vector> vectors_;
};

enum class ExtrapMethod { RRE, MPE, VEA };

std::string_view to_string(ExtrapMethod m);

struct ExtrapConfig {
  /// Relative threshold on the normalizing sum λ = Σ d_i.
  double degeneracy_tol = 1e-14;
  /// Relative residual below which a new difference counts as dependent.
  double breakdown_tol = kBreakdownTol;
  /// VEA: a table difference v is degenerate when v·v < guard (1 + |ε|^2).
  double vea_guard = 1e-28;
};

struct ExtrapolationOutcome {
  Vector t;
  Vector gamma; ///< q'+1 coefficients summing to one (empty for VEA)
  Vector alpha; ///< q' partial sums (empty for VEA)
  ExtrapMethod method = ExtrapMethod::RRE;
  std::size_t order = 0; ///< q' actually used (< q after a breakdown)
  bool breakdown = false;
};

/// Columns s_{i+1} - s_i. DimensionError for fewer than two vectors.
DenseMatrix first_differences(const SequenceWindow &w);

/// RRE of order q = w.size() - 2 (needs at least three vectors).
ExtrapolationOutcome rre(const SequenceWindow &w, const ExtrapConfig &cfg = {});
/// MPE of order q = w.size() - 2.
ExtrapolationOutcome mpe(const SequenceWindow &w, const ExtrapConfig &cfg = {});
/// ε_{2q}^{(0)} for a window of 2q+1 vectors.
ExtrapolationOutcome vea(const SequenceWindow &w, const ExtrapConfig &cfg = {});

ExtrapolationOutcome extrapolate(ExtrapMethod m, const SequenceWindow &w,
                                 const ExtrapConfig &cfg = {});

/// Σ_j γ_j Δs_j for an RRE/MPE outcome; UnsupportedError for VEA.
Vector generalized_residual(const SequenceWindow &w, const ExtrapolationOutcome &outcome);

/// Number of vectors a window must hold for restart length q.
std::size_t window_size(ExtrapMethod m, std::size_t q);

} // namespace vex
