#include <functional>

#include <gtest/gtest.h>

#include "mmv/lp.hpp"
#include "support.hpp"

using namespace mmv;

namespace {

// Best objective over all basic solutions: choose n basic columns, put every
// other variable at 0 or 1, solve for the basic ones and keep the feasible.
double enumerate_vertices(const BoxedLp& lp) {
  const int q = static_cast<int>(lp.eq_matrix.rows());
  const int n = static_cast<int>(lp.eq_matrix.cols());
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> basic(static_cast<std::size_t>(n));
  std::function<void(int, int)> choose = [&](int start, int depth) {
    if (depth == n) {
      std::vector<int> rest;
      for (int j = 0; j < q; ++j)
        if (std::find(basic.begin(), basic.end(), j) == basic.end()) rest.push_back(j);
      Eigen::MatrixXd ab(n, n);
      for (int k = 0; k < n; ++k) ab.col(k) = lp.eq_matrix.row(basic[static_cast<std::size_t>(k)]).transpose();
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(ab);
      if (!lu.isInvertible()) return;
      for (std::uint32_t mask = 0; mask < (1u << rest.size()); ++mask) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(q);
        for (std::size_t k = 0; k < rest.size(); ++k) r[rest[k]] = (mask >> k) & 1u;
        const Eigen::VectorXd rb = lu.solve(lp.eq_rhs - lp.eq_matrix.transpose() * r);
        bool ok = true;
        for (int k = 0; k < n; ++k) {
          if (rb[k] < -1e-9 || rb[k] > 1.0 + 1e-9) ok = false;
          r[basic[static_cast<std::size_t>(k)]] = rb[k];
        }
        if (ok) best = std::max(best, lp.objective.dot(r));
      }
      return;
    }
    for (int j = start; j < q; ++j) {
      basic[static_cast<std::size_t>(depth)] = j;
      choose(j + 1, depth + 1);
    }
  };
  choose(0, 0);
  return best;
}

BoxedLp random_lp(int q, int n, std::uint64_t seed) {
  const Eigen::MatrixXd a = test::random_matrix(q, n, seed, 0.0, 1.0);
  const Eigen::VectorXd rstar = test::random_matrix(q, 1, seed + 1).col(0);
  return {test::random_matrix(q, 1, seed + 2, -1.0, 1.0).col(0), a, a.transpose() * rstar};
}

}  // namespace

TEST(BoxedSimplex, MatchesVertexEnumeration) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const BoxedLp lp = random_lp(10, 2, seed);
    const LpSolution sol = solve(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal) << "seed " << seed;
    const double oracle = enumerate_vertices(lp);
    EXPECT_NEAR(sol.objective_value, oracle, 1e-9 * std::max(1.0, std::abs(oracle))) << "seed " << seed;
  }
}

TEST(BoxedSimplex, BasicSolutionStructureAndDuality) {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const BoxedLp lp = random_lp(351, 3, seed);
    const LpSolution sol = solve(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_LE(sol.basis_fractional_count, 3u);
    EXPECT_GE(sol.r.minCoeff(), 0.0);
    EXPECT_LE(sol.r.maxCoeff(), 1.0);
    const double eq = (lp.eq_matrix.transpose() * sol.r - lp.eq_rhs).cwiseAbs().maxCoeff();
    EXPECT_LE(eq, 1e-8 * lp.eq_rhs.cwiseAbs().maxCoeff());
    const double dual = dual_objective(lp, sol.duals);
    EXPECT_NEAR(sol.objective_value, dual, 1e-7 * std::max(1.0, std::abs(dual)));
  }
}

TEST(BoxedSimplex, ObjectiveScalingKeepsArgmax) {
  BoxedLp lp = random_lp(80, 3, 7);
  const LpSolution a = solve(lp);
  lp.objective *= 37.5;
  const LpSolution b = solve(lp);
  EXPECT_LT((a.r - b.r).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(b.objective_value, 37.5 * a.objective_value, 1e-9 * std::abs(b.objective_value));
}

TEST(BoxedSimplex, WarmStartReachesSameOptimum) {
  const BoxedLp lp = random_lp(200, 3, 21);
  const BoxedSimplex simplex(lp.eq_matrix, lp.eq_rhs);
  const auto start = simplex.feasible_basis();
  ASSERT_TRUE(start);
  const LpSolution cold = simplex.maximize(lp.objective);
  const LpSolution warm = simplex.maximize(lp.objective, &*start);
  EXPECT_NEAR(cold.objective_value, warm.objective_value, 1e-9 * std::abs(cold.objective_value));
  const LpSolution again = simplex.maximize(lp.objective, &warm.basis);
  EXPECT_EQ(again.iterations, 0u);
}

TEST(FeasiblePoint, GreyIsFeasibleBeyondWhiteIsNot) {
  const Eigen::MatrixXd a = test::random_matrix(40, 3, 5);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(40);
  const BoxedLp grey{Eigen::VectorXd::Zero(40), a, a.transpose() * (0.3 * ones)};
  const auto r = feasible_point(grey);
  ASSERT_TRUE(r);
  EXPECT_LE((a.transpose() * *r - grey.eq_rhs).cwiseAbs().maxCoeff(), 1e-8 * grey.eq_rhs.cwiseAbs().maxCoeff());

  const BoxedLp bright{Eigen::VectorXd::Zero(40), a, 2.0 * (a.transpose() * ones)};
  EXPECT_FALSE(feasible_point(bright));
  EXPECT_EQ(solve(bright).status, LpStatus::infeasible);
}

TEST(FeasiblePoint, RandomAttainableTargets) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const BoxedLp lp = random_lp(120, 3, 1000 + seed);
    const auto r = feasible_point(lp);
    ASSERT_TRUE(r) << "seed " << seed;
    EXPECT_GE(r->minCoeff(), 0.0);
    EXPECT_LE(r->maxCoeff(), 1.0);
    EXPECT_LE((lp.eq_matrix.transpose() * *r - lp.eq_rhs).cwiseAbs().maxCoeff(),
              1e-8 * lp.eq_rhs.cwiseAbs().maxCoeff());
  }
}

TEST(BoxedSimplex, NoEqualityRowsPicksPositiveCosts) {
  const Eigen::VectorXd c = (Eigen::VectorXd(4) << 1.0, -2.0, 0.5, -0.1).finished();
  const BoxedSimplex simplex(Eigen::MatrixXd(4, 0), Eigen::VectorXd(0));
  const LpSolution sol = simplex.maximize(c);
  EXPECT_EQ(sol.r, (Eigen::VectorXd(4) << 1.0, 0.0, 1.0, 0.0).finished());
}

TEST(BoxedSimplex, RejectsMalformedInput) {
  EXPECT_THROW(BoxedSimplex(Eigen::MatrixXd::Ones(5, 2), Eigen::VectorXd::Ones(3)), DataError);
  const BoxedSimplex s(Eigen::MatrixXd::Ones(5, 1), Eigen::VectorXd::Ones(1));
  EXPECT_THROW(s.maximize(Eigen::VectorXd::Ones(4)), DataError);
}
