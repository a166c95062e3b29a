#include <sstream>

#include <gtest/gtest.h>

#include "mmv/spectral.hpp"
#include "support.hpp"

using namespace mmv;

namespace {

std::vector<Spectrum> parse(const std::string& text) {
  std::istringstream in(text);
  return load_spectral_table(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(WavelengthGrid, VisibleGridHas351Samples) {
  const WavelengthGrid g = WavelengthGrid::visible(1.0);
  EXPECT_EQ(g.size(), 351u);
  EXPECT_DOUBLE_EQ(g[0], 380.0);
  EXPECT_DOUBLE_EQ(g.last(), 730.0);
  EXPECT_EQ(WavelengthGrid::visible(0.5).size(), 701u);
  EXPECT_EQ(WavelengthGrid::visible(10.0).size(), 36u);
}

TEST(WavelengthGrid, RejectsBadRanges) {
  EXPECT_THROW(WavelengthGrid(400.0, 400.0, 1.0), Error);
  EXPECT_THROW(WavelengthGrid(400.0, 500.0, 0.0), Error);
  EXPECT_THROW(WavelengthGrid(500.0, 400.0, 1.0), Error);
}

TEST(SpectralTable, ParsesCommentsAndColumns) {
  const auto s = parse("# comment\nnm,a,b\n400,1,2\n405,3,4\n\n410,5,6\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].name, "a");
  EXPECT_EQ(s[1].grid.size(), 3u);
  EXPECT_DOUBLE_EQ(s[1].grid.step(), 5.0);
  EXPECT_DOUBLE_EQ(s[1].values[2], 6.0);
}

TEST(SpectralTable, HeaderOnlyIsEmpty) { EXPECT_TRUE(parse("nm,a\n").empty()); }

TEST(SpectralTable, ErrorsNameTheRow) {
  EXPECT_NE(error_of("nm,a\n400,1\n405,x\n").find("row 2"), std::string::npos);
  EXPECT_NE(error_of("nm,a\n400,1\n405,1,2\n").find("row 2"), std::string::npos);
  EXPECT_NE(error_of("nm,a\n400,1\n399,1\n").find("row 2"), std::string::npos);
  EXPECT_NE(error_of("nm,a\n400,1\n405,1\n411,1\n").find("non-uniform"), std::string::npos);
  EXPECT_FALSE(error_of("nm,a\n400,1\n").empty());
  EXPECT_FALSE(error_of("").empty());
}

TEST(Resample, ExactAtNodesLinearBetween) {
  const Spectrum s(WavelengthGrid(400.0, 420.0, 10.0), {1.0, 3.0, 7.0}, "s");
  const Spectrum r = resample(s, WavelengthGrid(400.0, 420.0, 5.0));
  ASSERT_EQ(r.values.size(), 5u);
  EXPECT_DOUBLE_EQ(r.values[0], 1.0);
  EXPECT_DOUBLE_EQ(r.values[1], 2.0);
  EXPECT_DOUBLE_EQ(r.values[2], 3.0);
  EXPECT_DOUBLE_EQ(r.values[3], 5.0);
  EXPECT_DOUBLE_EQ(r.values[4], 7.0);
  EXPECT_THROW(resample(s, WavelengthGrid(395.0, 420.0, 5.0)), DataError);
}

TEST(Reflectance, ValidatesRange) {
  const WavelengthGrid g(400.0, 402.0, 1.0);
  EXPECT_THROW(Reflectance(g, Vector::Constant(3, 1.5)), DataError);
  EXPECT_THROW(Reflectance(g, Vector::Constant(2, 0.5)), DataError);
  EXPECT_NO_THROW(Reflectance::constant(g, 1.0));
}

TEST(Respond, LinearInReflectance) {
  const ColourSystem sys = test::toy_system(20, 3, 4);
  const Vector a = test::random_matrix(20, 1, 5).col(0);
  const Vector b = test::random_matrix(20, 1, 6).col(0);
  const Vector lhs = respond(sys, Vector(0.3 * a + 0.7 * b));
  const Vector rhs = 0.3 * respond(sys, a) + 0.7 * respond(sys, b);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

// Rectangle-rule whitepoints frozen from tests/oracles/whitepoint.py (numpy
// interpolation, independent of the C++ loader); the quadrature values from
// the same script bound the rectangle rule's discretization error.
struct Whitepoint {
  const char* illuminant;
  double rect[3];
  double quad[3];
};

TEST(Whitepoint, MatchesIndependentOracle) {
  const Whitepoint expected[] = {
      {"D65",
       {10021.596051475186, 10626.674526048142, 11065.155240693708},
       {10021.581209067259, 10626.657435300865, 11065.019962460037}},
      {"A", {11758.291883079528, 10803.71148908869, 3611.7919253450827}, {0, 0, 0}},
      {"F11", {1466.2954209638, 1468.9658230239802, 888.0837151050026}, {0, 0, 0}},
  };
  const auto cmf = load_cmfs();
  const WavelengthGrid grid = WavelengthGrid::visible(1.0);
  for (const Whitepoint& w : expected) {
    const ColourSystem sys = make_colour_system(cmf, load_illuminant(w.illuminant), grid);
    const Vector white = respond(sys, Reflectance::constant(grid, 1.0));
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(white[i], w.rect[i], 1e-10 * w.rect[i]) << w.illuminant << " channel " << i;
      if (w.quad[i] > 0.0) EXPECT_NEAR(white[i], w.quad[i], 2e-4 * w.quad[i]) << w.illuminant;
    }
  }
}

TEST(Orthonormalize, OrthonormalAndReconstructs) {
  const ColourSystem s = stack(test::toy_system(60, 3, 7), test::toy_system(60, 3, 8));
  const Orthonormalization o = orthonormalize(s);
  const Matrix& u = o.basis.values();
  EXPECT_LT((u.transpose() * u - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix back = u * o.singular_values.asDiagonal() * o.right_vectors.transpose();
  EXPECT_LT((back - s.values()).cwiseAbs().maxCoeff(), 1e-12 * s.values().cwiseAbs().maxCoeff());
  for (Eigen::Index i = 1; i < 6; ++i) EXPECT_GE(o.singular_values[i - 1], o.singular_values[i]);
  for (Eigen::Index c = 0; c < 6; ++c) {
    Eigen::Index arg = 0;
    u.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(u(arg, c), 0.0);
  }
}

TEST(Orthonormalize, RankDeficientNamesIndex) {
  Matrix m = test::random_matrix(30, 3, 9);
  m.col(2) = 2.0 * m.col(0) - m.col(1);
  const ColourSystem sys(WavelengthGrid(400.0, 429.0, 1.0), m);
  try {
    orthonormalize(sys);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("singular value 2"), std::string::npos);
  }
}

TEST(Orthonormalize, HeadlineSystemIsIllConditioned) {
  const MismatchProblem p = test::headline("D65", "A");
  const Orthonormalization o = orthonormalize(stack(p.phi, p.psi));
  const double ratio = o.singular_values[5] / o.singular_values[0];
  EXPECT_GT(ratio, 1e-4);
  EXPECT_LT(ratio, 0.1);
}
