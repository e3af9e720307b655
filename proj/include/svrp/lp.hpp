#pragma once

// Small dense LP solver: bounded-variable primal simplex, two phases.
// Problems solved here are tiny (a few hundred variables), so the tableau
// is kept explicitly and updated by row elimination.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace svrp {

inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

enum class Rel { LessEqual, Equal, GreaterEqual };

struct LpRow {
  std::vector<double> coeffs;
  Rel rel = Rel::LessEqual;
  double rhs = 0.0;
};

// Variables live in [lower, upper]; lower must be finite, upper may be
// kLpInfinity. Objective is always minimized.
struct LpProblem {
  std::vector<double> objective;
  std::vector<LpRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  int add_var(double cost, double lo, double hi) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<int>(objective.size()) - 1;
  }

  void add_row(std::vector<double> coeffs, Rel rel, double rhs) {
    rows.push_back({std::move(coeffs), rel, rhs});
  }

  std::size_t num_vars() const { return objective.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  // One multiplier per input row, signed for the row as written: at an
  // optimum, >= rows carry nonnegative duals and <= rows nonpositive ones.
  std::vector<double> row_duals;
};

namespace detail {

inline void check_problem(const LpProblem& p) {
  std::size_t n = p.num_vars();
  if (p.lower.size() != n || p.upper.size() != n)
    throw std::invalid_argument("lp: bounds dimension mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(p.objective[j]))
      throw std::invalid_argument("lp: non-finite objective coefficient");
    if (!std::isfinite(p.lower[j]))
      throw std::invalid_argument("lp: lower bound must be finite");
    if (p.lower[j] > p.upper[j])
      throw std::invalid_argument("lp: lower bound exceeds upper bound");
  }
  for (const LpRow& r : p.rows) {
    if (r.coeffs.size() != n)
      throw std::invalid_argument("lp: row dimension mismatch");
    if (!std::isfinite(r.rhs))
      throw std::invalid_argument("lp: non-finite rhs");
    for (double c : r.coeffs)
      if (!std::isfinite(c))
        throw std::invalid_argument("lp: non-finite row coefficient");
  }
}

// Dense bounded-variable simplex over the augmented column set
// [structural | slack | artificial].
class Simplex {
 public:
  explicit Simplex(const LpProblem& p, bool bland_from_start = false)
      : n_(p.num_vars()), m_(p.rows.size()), bland_start_(bland_from_start) {
    total_ = n_ + 2 * m_;
    lo_.assign(total_, 0.0);
    hi_.assign(total_, kLpInfinity);
    x_.assign(total_, 0.0);
    at_upper_.assign(total_, false);
    in_basis_.assign(total_, false);
    row_mult_.assign(m_, 1.0);

    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = p.lower[j];
      hi_[j] = p.upper[j];
      x_[j] = p.lower[j];
    }

    // Rows are equilibrated and >= rows negated so every slack enters with
    // coefficient +1 and bound [0, inf) (equality slacks are pinned at 0).
    tab_.assign(m_, std::vector<double>(total_, 0.0));
    for (std::size_t i = 0; i < m_; ++i) {
      const LpRow& r = p.rows[i];
      double scale = 0.0;
      for (double c : r.coeffs) scale = std::max(scale, std::abs(c));
      if (scale <= 0.0) scale = 1.0;
      double sign = r.rel == Rel::GreaterEqual ? -1.0 : 1.0;
      row_mult_[i] = sign / scale;
      for (std::size_t j = 0; j < n_; ++j) tab_[i][j] = r.coeffs[j] * row_mult_[i];
      std::size_t slack = n_ + i;
      tab_[i][slack] = 1.0;
      if (r.rel == Rel::Equal) hi_[slack] = 0.0;

      // Artificial basis: one per row. Rows with a negative residual are
      // negated once more so the artificial column is +e_i and the initial
      // tableau equals B^-1 A with B = I on the artificial block.
      double resid = r.rhs * row_mult_[i];
      for (std::size_t j = 0; j < n_; ++j) resid -= tab_[i][j] * x_[j];
      if (resid < 0.0) {
        for (std::size_t j = 0; j <= slack; ++j) tab_[i][j] = -tab_[i][j];
        row_mult_[i] = -row_mult_[i];
        resid = -resid;
      }
      std::size_t art = n_ + m_ + i;
      tab_[i][art] = 1.0;
      basis_.push_back(art);
      beta_.push_back(resid);
      x_[art] = resid;
      in_basis_[art] = true;
    }
  }

  LpOutcome run(const LpProblem& p) {
    LpOutcome out;
    if (m_ > 0) {
      std::vector<double> phase1(total_, 0.0);
      for (std::size_t i = 0; i < m_; ++i) phase1[n_ + m_ + i] = 1.0;
      if (!iterate(phase1)) throw std::logic_error("lp: phase 1 unbounded");
      double infeas = 0.0;
      for (std::size_t i = 0; i < m_; ++i) infeas += x_[n_ + m_ + i];
      if (infeas > 1e-7) {
        out.status = LpStatus::Infeasible;
        return out;
      }
      retire_artificials();
    }

    std::vector<double> phase2(total_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) phase2[j] = p.objective[j];
    if (!iterate(phase2)) {
      out.status = LpStatus::Unbounded;
      out.objective = -kLpInfinity;
      return out;
    }

    out.status = LpStatus::Optimal;
    out.values.assign(x_.begin(), x_.begin() + n_);
    out.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) out.objective += p.objective[j] * x_[j];

    // Duals: the artificial column of row i is e_i in the stored system, so
    // its tableau column is the i-th column of B^-1; undo the row scaling.
    out.row_duals.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      std::size_t art = n_ + m_ + i;
      double y = 0.0;
      for (std::size_t r = 0; r < m_; ++r) y += phase2[basis_[r]] * tab_[r][art];
      out.row_duals[i] = y * row_mult_[i];
    }
    return out;
  }

 private:
  static constexpr double kPivotEps = 1e-7;  // rows below this never pivot
  static constexpr double kCostTol = 1e-9;
  static constexpr double kStepTol = 1e-11;
  static constexpr double kRatioTol = 1e-9;
  static constexpr int kDegenerateStreakLimit = 64;

  // Runs the simplex to optimality for the given cost vector. Returns false
  // on unboundedness. Dantzig pricing with a Bland fallback once pivots
  // stall on degenerate steps; Bland's entering rule pairs with the
  // smallest-basis-index leaving tie-break, so the fallback terminates.
  bool iterate(const std::vector<double>& cost) {
    std::vector<double> rc(total_);
    std::vector<double> cb(m_);
    int degenerate_streak = 0;
    bool bland = bland_start_;

    for (;;) {
      for (std::size_t i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      for (std::size_t j = 0; j < total_; ++j) {
        double v = cost[j];
        for (std::size_t i = 0; i < m_; ++i) v -= cb[i] * tab_[i][j];
        rc[j] = v;
      }

      // Entering column: from the lower bound wants rc < 0, from the upper
      // bound wants rc > 0. Fixed and basic columns never enter.
      std::size_t enter = total_;
      double best = -kCostTol;
      for (std::size_t j = 0; j < total_; ++j) {
        if (in_basis_[j] || hi_[j] == lo_[j]) continue;
        double score = at_upper_[j] ? -rc[j] : rc[j];
        if (score >= -kCostTol) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (score < best) {
          best = score;
          enter = j;
        }
      }
      if (enter == total_) return true;

      double dir = at_upper_[enter] ? -1.0 : 1.0;

      // Ratio test in two passes: the tightest step first, then the leaving
      // row among near-ties. Taking the largest pivot there keeps the
      // eliminations from amplifying the tableau; under Bland the smallest
      // basis index wins instead so the anti-cycling argument holds.
      auto room_of = [&](std::size_t i, double* change, bool* hits_upper) {
        *change = dir * tab_[i][enter];
        if (std::abs(*change) <= kPivotEps) return kLpInfinity;
        double room;
        if (*change > 0.0) {
          room = (beta_[i] - lo_[basis_[i]]) / *change;
          *hits_upper = false;
        } else {
          if (hi_[basis_[i]] == kLpInfinity) return kLpInfinity;
          room = (beta_[i] - hi_[basis_[i]]) / *change;
          *hits_upper = true;
        }
        return room < 0.0 ? 0.0 : room;
      };

      double limit = hi_[enter] - lo_[enter];
      for (std::size_t i = 0; i < m_; ++i) {
        double change;
        bool hits_upper;
        double room = room_of(i, &change, &hits_upper);
        if (room < limit) limit = room;
      }
      if (limit == kLpInfinity) return false;

      double slack = kRatioTol * (1.0 + std::abs(limit));
      std::size_t leave_row = m_;
      bool leave_to_upper = false;
      double leave_room = limit;
      double best_piv = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        double change;
        bool hits_upper;
        double room = room_of(i, &change, &hits_upper);
        if (room > limit + slack) continue;
        bool pick;
        if (bland) {
          pick = leave_row == m_ || basis_[i] < basis_[leave_row];
        } else {
          pick = std::abs(change) > best_piv;
        }
        if (pick) {
          best_piv = std::abs(change);
          leave_row = i;
          leave_to_upper = hits_upper;
          leave_room = room;
        }
      }

      double step = leave_row == m_ ? limit : leave_room;
      if (step > kStepTol)
        degenerate_streak = 0;
      else if (++degenerate_streak >= kDegenerateStreakLimit)
        bland = true;

      if (leave_row == m_) {
        // Bound flip: the entering variable crosses its whole range.
        for (std::size_t i = 0; i < m_; ++i) {
          beta_[i] -= dir * step * tab_[i][enter];
          x_[basis_[i]] = beta_[i];
        }
        x_[enter] += dir * step;
        at_upper_[enter] = !at_upper_[enter];
        continue;
      }

      double enter_val = x_[enter] + dir * step;
      for (std::size_t i = 0; i < m_; ++i)
        if (i != leave_row) beta_[i] -= dir * step * tab_[i][enter];

      std::size_t leave = basis_[leave_row];
      x_[leave] = leave_to_upper ? hi_[leave] : lo_[leave];
      at_upper_[leave] = leave_to_upper;
      in_basis_[leave] = false;

      eliminate(leave_row, enter);
      basis_[leave_row] = enter;
      beta_[leave_row] = enter_val;
      in_basis_[enter] = true;
      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = beta_[i];
    }
  }

  // Scales the pivot row and clears the entering column elsewhere. A pivot
  // row blowing past 1e12 marks the whole tableau as numerically suspect.
  void eliminate(std::size_t pivot_row, std::size_t enter) {
    double piv = tab_[pivot_row][enter];
    std::vector<double>& prow = tab_[pivot_row];
    double peak = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      prow[j] /= piv;
      peak = std::max(peak, std::abs(prow[j]));
    }
    if (peak > 1e12) poisoned_ = true;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == pivot_row) continue;
      double f = tab_[i][enter];
      if (f == 0.0) continue;
      std::vector<double>& row = tab_[i];
      for (std::size_t j = 0; j < total_; ++j) row[j] -= f * prow[j];
    }
  }

  // After phase 1, basic artificials sit at zero. Pivot them out where the
  // row has any usable real column, taking the largest; rows without one are
  // redundant and keep a pinned artificial that never moves again.
  void retire_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_ + m_) continue;
      std::size_t enter = total_;
      double best = kPivotEps;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (in_basis_[j]) continue;
        if (j >= n_ && hi_[j] == lo_[j]) continue;
        if (std::abs(tab_[i][j]) > best) {
          best = std::abs(tab_[i][j]);
          enter = j;
        }
      }
      if (enter == total_) continue;
      // Zero-step pivot: every value is unchanged, the entering variable
      // becomes basic at the bound it was resting on.
      std::size_t art = basis_[i];
      eliminate(i, enter);
      basis_[i] = enter;
      beta_[i] = x_[enter];
      in_basis_[enter] = true;
      in_basis_[art] = false;
      x_[art] = 0.0;
      at_upper_[art] = false;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      std::size_t art = n_ + m_ + i;
      lo_[art] = 0.0;
      hi_[art] = 0.0;
    }
  }

  std::size_t n_, m_, total_;
  bool bland_start_ = false;
  std::vector<std::vector<double>> tab_;
  std::vector<double> lo_, hi_, x_, beta_;
  std::vector<double> row_mult_;
  std::vector<std::size_t> basis_;
  std::vector<bool> at_upper_;
  std::vector<bool> in_basis_;

 public:
  bool poisoned() const { return poisoned_; }

 private:
  bool poisoned_ = false;
};

}  // namespace detail

// A run whose tableau degraded is redone with Bland's rule from the first
// pivot; that path is slower but picks pivots in a fixed order, which in
// practice keeps the eliminations tame on these inputs.
inline LpOutcome solve_lp(const LpProblem& p) {
  detail::check_problem(p);
  {
    detail::Simplex s(p);
    LpOutcome out = s.run(p);
    if (!s.poisoned()) return out;
  }
  detail::Simplex retry(p, true);
  return retry.run(p);
}

}  // namespace svrp
