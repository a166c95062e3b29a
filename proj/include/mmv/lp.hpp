#pragma once

// Bounded-variable primal simplex for
//
//   maximize c^T r   subject to   A^T r = z0,   0 <= r <= 1,
//
// with A a dense q x N matrix and N small (a handful of sensors). Nonbasic
// variables sit at one of their bounds, so every optimal solution returned
// is a basic solution with at most N fractional entries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmv/errors.hpp"

namespace mmv {

struct BoxedLp {
  Eigen::VectorXd objective;  // c, length q
  Eigen::MatrixXd eq_matrix;  // A, q x N
  Eigen::VectorXd eq_rhs;     // z0, length N
};

enum class LpStatus { optimal, infeasible, unbounded };

/// Opaque basis token. Valid for any LP sharing the constraint data it was
/// produced from; only the objective may change.
class WarmStart {
 public:
  bool empty() const noexcept { return basic_.empty() && at_upper_.empty(); }

 private:
  friend class BoxedSimplex;
  std::vector<int> basic_;
  std::vector<std::uint8_t> at_upper_;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd r;
  double objective_value = 0.0;
  /// Entries strictly inside (1e-7, 1 - 1e-7).
  std::size_t basis_fractional_count = 0;
  /// Multipliers of the equality rows; c_j - a_j^T duals is the reduced cost.
  Eigen::VectorXd duals;
  WarmStart basis;
  std::size_t iterations = 0;
};

class BoxedSimplex {
 public:
  static constexpr double kFractionalDelta = 1e-7;
  static constexpr double kBoundSlack = 1e-9;
  static constexpr double kEqualityRel = 1e-8;

  BoxedSimplex(Eigen::MatrixXd eq_matrix, Eigen::VectorXd eq_rhs)
      : a_(std::move(eq_matrix)), z0_(std::move(eq_rhs)) {
    if (a_.cols() != z0_.size()) throw DataError("BoxedSimplex: A and z0 sizes disagree");
    if (!a_.allFinite() || !z0_.allFinite()) throw DataError("BoxedSimplex: non-finite data");
    q_ = static_cast<int>(a_.rows());
    n_ = static_cast<int>(a_.cols());
    if (n_ > q_) throw DataError("BoxedSimplex: more equality rows than variables");
    row_scale_ = Eigen::VectorXd::Ones(n_);
    for (int i = 0; i < n_; ++i) {
      const double m = a_.col(i).cwiseAbs().maxCoeff();
      if (m > 0.0) row_scale_[i] = 1.0 / m;
    }
    cols_ = (a_ * row_scale_.asDiagonal());
    rhs_ = z0_.cwiseProduct(row_scale_);
    eq_tol_ = kEqualityRel * std::max(n_ > 0 ? z0_.cwiseAbs().maxCoeff() : 0.0, std::numeric_limits<double>::min());
  }

  int variables() const noexcept { return q_; }
  int rows() const noexcept { return n_; }

  /// Phase 1. Empty optional when z0 is not attainable.
  std::optional<WarmStart> feasible_basis() const {
    State st = phase_one();
    if (!st.feasible) return std::nullopt;
    return st.token();
  }

  /// The basic solution described by a token.
  Eigen::VectorXd point(const WarmStart& token) const {
    State st;
    if (!load(token, st)) throw NumericalError("BoxedSimplex: invalid basis token");
    return finish_point(st);
  }

  LpSolution maximize(const Eigen::VectorXd& c, const WarmStart* start = nullptr) const {
    if (c.size() != q_) throw DataError("BoxedSimplex: objective length mismatch");
    if (!c.allFinite()) throw DataError("BoxedSimplex: non-finite objective");
    LpSolution sol;
    if (n_ == 0) {
      sol.status = LpStatus::optimal;
      sol.r = (c.array() > 0.0).cast<double>().matrix();
      sol.objective_value = c.dot(sol.r);
      sol.duals = Eigen::VectorXd(0);
      return sol;
    }

    State st;
    bool warm = start != nullptr && !start->empty() && load(*start, st) && st.feasible;
    if (!warm) {
      st = phase_one();
      if (!st.feasible) {
        sol.status = LpStatus::infeasible;
        sol.iterations = st.iterations;
        return sol;
      }
    }

    const double cmax = c.cwiseAbs().maxCoeff();
    const double gamma = cmax > 0.0 ? 1.0 / cmax : 1.0;
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(q_ + n_);
    cost.head(q_) = gamma * c;
    const auto outcome = iterate(st, cost);
    if (outcome == Outcome::unbounded)
      throw NumericalError("BoxedSimplex: unbounded ray in a box-bounded problem");

    sol.status = LpStatus::optimal;
    sol.iterations = st.iterations;
    sol.r = finish_point(st);
    sol.objective_value = c.dot(sol.r);
    sol.basis_fractional_count = static_cast<std::size_t>(
        ((sol.r.array() > kFractionalDelta) && (sol.r.array() < 1.0 - kFractionalDelta)).count());
    const Eigen::MatrixXd b = basis_matrix(st);
    Eigen::VectorXd cb(n_);
    for (int i = 0; i < n_; ++i) cb[i] = cost[st.basis[i]];
    const Eigen::VectorXd pi = b.transpose().partialPivLu().solve(cb);
    sol.duals = row_scale_.cwiseProduct(pi) / gamma;
    sol.basis = st.token();
    return sol;
  }

 private:
  enum : std::uint8_t { kLower = 0, kUpper = 1, kBasic = 2 };
  enum class Outcome { optimal, unbounded };

  struct State {
    std::vector<double> x;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<std::uint8_t> status;
    std::vector<int> basis;
    std::vector<double> art_sign;
    bool feasible = false;
    std::size_t iterations = 0;

    WarmStart token() const {
      WarmStart w;
      w.basic_ = basis;
      const std::size_t q = x.size() - art_sign.size();
      w.at_upper_.resize(q);
      for (std::size_t j = 0; j < q; ++j) w.at_upper_[j] = status[j] == kUpper ? 1 : 0;
      return w;
    }
  };

  // Column j of the scaled constraint matrix (structural or artificial).
  double col_dot(const State& st, int j, const Eigen::VectorXd& v) const {
    if (j < q_) return cols_.row(j).dot(v);
    return st.art_sign[static_cast<std::size_t>(j - q_)] * v[j - q_];
  }

  Eigen::VectorXd column(const State& st, int j) const {
    if (j < q_) return cols_.row(j).transpose();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n_);
    e[j - q_] = st.art_sign[static_cast<std::size_t>(j - q_)];
    return e;
  }

  Eigen::MatrixXd basis_matrix(const State& st) const {
    Eigen::MatrixXd b(n_, n_);
    for (int i = 0; i < n_; ++i) b.col(i) = column(st, st.basis[static_cast<std::size_t>(i)]);
    return b;
  }

  // x_B = B^-1 (rhs - sum_nonbasic a_j x_j).
  bool recompute_basic(State& st) const {
    Eigen::VectorXd rhs = rhs_;
    for (int j = 0; j < q_ + n_; ++j) {
      if (st.status[static_cast<std::size_t>(j)] == kBasic) continue;
      const double xj = st.x[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      rhs -= xj * column(st, j);
    }
    const Eigen::MatrixXd b = basis_matrix(st);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    if (!lu.isInvertible()) return false;
    const Eigen::VectorXd xb = lu.solve(rhs);
    for (int i = 0; i < n_; ++i) st.x[static_cast<std::size_t>(st.basis[static_cast<std::size_t>(i)])] = xb[i];
    return true;
  }

  void init_bounds(State& st) const {
    const std::size_t nv = static_cast<std::size_t>(q_ + n_);
    st.x.assign(nv, 0.0);
    st.lo.assign(nv, 0.0);
    st.hi.assign(nv, 1.0);
    st.status.assign(nv, kLower);
    st.art_sign.assign(static_cast<std::size_t>(n_), 1.0);
    for (int i = 0; i < n_; ++i) st.hi[static_cast<std::size_t>(q_ + i)] = 0.0;
  }

  bool load(const WarmStart& token, State& st) const {
    if (token.basic_.size() != static_cast<std::size_t>(n_) ||
        token.at_upper_.size() != static_cast<std::size_t>(q_))
      return false;
    init_bounds(st);
    for (int j = 0; j < q_; ++j) {
      if (token.at_upper_[static_cast<std::size_t>(j)]) {
        st.status[static_cast<std::size_t>(j)] = kUpper;
        st.x[static_cast<std::size_t>(j)] = 1.0;
      }
    }
    st.basis = token.basic_;
    for (int b : st.basis) {
      if (b < 0 || b >= q_ + n_) return false;
      st.status[static_cast<std::size_t>(b)] = kBasic;
    }
    if (!recompute_basic(st)) return false;
    const double tol = 1e-9;
    st.feasible = true;
    for (int b : st.basis) {
      const auto k = static_cast<std::size_t>(b);
      if (st.x[k] < st.lo[k] - tol || st.x[k] > st.hi[k] + tol) st.feasible = false;
    }
    return true;
  }

  State phase_one() const {
    State st;
    init_bounds(st);
    st.basis.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      const auto k = static_cast<std::size_t>(q_ + i);
      const double res = rhs_[i];
      st.art_sign[static_cast<std::size_t>(i)] = res >= 0.0 ? 1.0 : -1.0;
      st.hi[k] = std::numeric_limits<double>::infinity();
      st.x[k] = std::abs(res);
      st.status[k] = kBasic;
      st.basis[static_cast<std::size_t>(i)] = q_ + i;
    }
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(q_ + n_);
    cost.tail(n_).setConstant(-1.0);
    iterate(st, cost);

    double infeasibility = 0.0;
    for (int i = 0; i < n_; ++i) infeasibility += std::abs(st.x[static_cast<std::size_t>(q_ + i)]);
    const double tol = 1e-9 * std::max(1.0, rhs_.cwiseAbs().maxCoeff());
    if (infeasibility > tol) {
      st.feasible = false;
      return st;
    }

    // Fix artificials at zero and drive the basic ones out where possible.
    for (int i = 0; i < n_; ++i) {
      const auto k = static_cast<std::size_t>(q_ + i);
      st.hi[k] = 0.0;
      if (st.status[k] != kBasic) st.x[k] = 0.0;
    }
    for (int row = 0; row < n_; ++row) {
      const int var = st.basis[static_cast<std::size_t>(row)];
      if (var < q_) continue;
      const Eigen::MatrixXd b = basis_matrix(st);
      const Eigen::VectorXd binv_row = b.transpose().partialPivLu().solve(Eigen::VectorXd::Unit(n_, row));
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < q_; ++j) {
        if (st.status[static_cast<std::size_t>(j)] == kBasic) continue;
        const double v = std::abs(cols_.row(j).dot(binv_row));
        if (v > best_abs) {
          best_abs = v;
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; the artificial stays basic at zero
      st.status[static_cast<std::size_t>(var)] = kLower;
      st.x[static_cast<std::size_t>(var)] = 0.0;
      st.status[static_cast<std::size_t>(best)] = kBasic;
      st.basis[static_cast<std::size_t>(row)] = best;
    }
    if (!recompute_basic(st)) throw NumericalError("BoxedSimplex: singular basis after phase 1");
    st.feasible = true;
    return st;
  }

  Outcome iterate(State& st, const Eigen::VectorXd& cost) const {
    constexpr double kOptTol = 1e-9;
    constexpr double kPivTol = 1e-9;
    constexpr double kDegenerate = 1e-12;
    const std::size_t cap = 100 * static_cast<std::size_t>(q_ + n_) + 1000;
    const std::size_t bland_after = 50 * static_cast<std::size_t>(q_);
    std::size_t degenerate = 0;
    bool bland = false;

    for (std::size_t it = 0;; ++it) {
      if (it >= cap) throw NumericalError("BoxedSimplex: iteration limit reached");
      if (it > 0 && it % 64 == 0) recompute_basic(st);

      const Eigen::MatrixXd b = basis_matrix(st);
      const Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
      Eigen::VectorXd cb(n_);
      for (int i = 0; i < n_; ++i) cb[i] = cost[st.basis[static_cast<std::size_t>(i)]];
      const Eigen::VectorXd pi = lu.transpose().solve(cb);

      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < q_ + n_; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (st.status[k] == kBasic || st.lo[k] == st.hi[k]) continue;
        const double d = cost[j] - col_dot(st, j, pi);
        const bool improving = (st.status[k] == kLower && d > kOptTol) ||
                               (st.status[k] == kUpper && d < -kOptTol);
        if (!improving) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
        }
      }
      if (enter < 0) {
        st.iterations += it;
        return Outcome::optimal;
      }

      const auto ke = static_cast<std::size_t>(enter);
      const double dir = st.status[ke] == kLower ? 1.0 : -1.0;
      const Eigen::VectorXd w = lu.solve(column(st, enter));

      double theta = st.hi[ke] - st.lo[ke];
      int leave = -1;
      double leave_delta = 0.0;
      for (int i = 0; i < n_; ++i) {
        const double delta = dir * w[i];
        const auto kb = static_cast<std::size_t>(st.basis[static_cast<std::size_t>(i)]);
        double limit;
        if (delta > kPivTol) {
          limit = (st.x[kb] - st.lo[kb]) / delta;
        } else if (delta < -kPivTol && std::isfinite(st.hi[kb])) {
          limit = (st.hi[kb] - st.x[kb]) / -delta;
        } else {
          continue;
        }
        limit = std::max(limit, 0.0);
        bool take;
        if (leave < 0) {
          take = limit < theta;  // ties keep the cheaper bound flip
        } else if (limit < theta - 1e-12) {
          take = true;
        } else if (limit <= theta + 1e-12) {
          take = bland ? st.basis[static_cast<std::size_t>(i)] < st.basis[static_cast<std::size_t>(leave)]
                       : std::abs(delta) > std::abs(leave_delta);
        } else {
          take = false;
        }
        if (take) {
          theta = limit;
          leave = i;
          leave_delta = delta;
        }
      }
      if (!std::isfinite(theta)) {
        st.iterations += it;
        return Outcome::unbounded;
      }

      for (int i = 0; i < n_; ++i) {
        const auto kb = static_cast<std::size_t>(st.basis[static_cast<std::size_t>(i)]);
        st.x[kb] -= theta * dir * w[i];
      }
      st.x[ke] += theta * dir;

      if (leave < 0) {
        st.status[ke] = dir > 0 ? kUpper : kLower;
        st.x[ke] = dir > 0 ? st.hi[ke] : st.lo[ke];
      } else {
        const auto kl = static_cast<std::size_t>(st.basis[static_cast<std::size_t>(leave)]);
        if (leave_delta > 0) {
          st.status[kl] = kLower;
          st.x[kl] = st.lo[kl];
        } else {
          st.status[kl] = kUpper;
          st.x[kl] = st.hi[kl];
        }
        st.status[ke] = kBasic;
        st.basis[static_cast<std::size_t>(leave)] = enter;
      }

      if (theta <= kDegenerate && ++degenerate > bland_after) bland = true;
    }
  }

  Eigen::VectorXd finish_point(State& st) const {
    if (!recompute_basic(st)) throw NumericalError("BoxedSimplex: singular final basis");
    Eigen::VectorXd r(q_);
    for (int j = 0; j < q_; ++j) {
      double v = st.x[static_cast<std::size_t>(j)];
      if (v < -kBoundSlack || v > 1.0 + kBoundSlack)
        throw NumericalError("BoxedSimplex: basic value " + std::to_string(v) + " outside bounds");
      r[j] = std::clamp(v, 0.0, 1.0);
    }
    const double residual = (a_.transpose() * r - z0_).cwiseAbs().maxCoeff();
    if (residual > eq_tol_)
      throw NumericalError("BoxedSimplex: equality residual " + std::to_string(residual) +
                           " exceeds tolerance " + std::to_string(eq_tol_));
    return r;
  }

  Eigen::MatrixXd a_;
  Eigen::VectorXd z0_;
  Eigen::VectorXd row_scale_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cols_;
  Eigen::VectorXd rhs_;
  double eq_tol_ = 0.0;
  int q_ = 0;
  int n_ = 0;
};

inline LpSolution solve(const BoxedLp& lp, const WarmStart* start = nullptr) {
  return BoxedSimplex(lp.eq_matrix, lp.eq_rhs).maximize(lp.objective, start);
}

/// Any r in [0,1]^q with A^T r = z0, or nullopt when none exists.
inline std::optional<Eigen::VectorXd> feasible_point(const BoxedLp& lp) {
  const BoxedSimplex simplex(lp.eq_matrix, lp.eq_rhs);
  if (lp.eq_matrix.cols() == 0) return Eigen::VectorXd::Zero(lp.eq_matrix.rows());
  const auto basis = simplex.feasible_basis();
  if (!basis) return std::nullopt;
  return simplex.point(*basis);
}

/// Objective of the Lagrangian dual at the given multipliers:
/// z0^T y + sum_j max(0, c_j - a_j^T y). Upper-bounds every feasible c^T r.
inline double dual_objective(const BoxedLp& lp, const Eigen::VectorXd& duals) {
  const Eigen::VectorXd reduced = lp.objective - lp.eq_matrix * duals;
  return lp.eq_rhs.dot(duals) + reduced.cwiseMax(0.0).sum();
}

}  // namespace mmv
