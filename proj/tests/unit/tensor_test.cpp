#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "faithlab/tensor.hpp"

using faithlab::Tensor;

TEST(Tensor, RejectsZeroDimensionsAndSizeMismatch) {
  EXPECT_THROW(Tensor({2, 0}), std::invalid_argument);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), std::invalid_argument);
  EXPECT_NO_THROW(Tensor({2, 3}, std::vector<double>(6, 1.0)));
}

TEST(Tensor, RowMajorIndexing) {
  Tensor t({2, 3}, std::vector<double>{0, 1, 2, 3, 4, 5});
  EXPECT_EQ(t.at(1, 2), 5.0);
  EXPECT_EQ(t.at(0, 1), 1.0);
  EXPECT_THROW(t.at(2, 0), std::out_of_range);
}

TEST(Tensor, ReshapeKeepsData) {
  Tensor t({2, 3}, std::vector<double>{0, 1, 2, 3, 4, 5});
  auto r = t.reshaped({3, 2});
  EXPECT_EQ(r.data(), t.data());
  EXPECT_THROW(t.reshaped({4, 2}), std::invalid_argument);
}

TEST(Tensor, FiniteCheck) {
  Tensor t = Tensor::vector({1.0, 2.0});
  EXPECT_TRUE(t.all_finite());
  t[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}

TEST(Tensor, AffineForwardMatchesDenseFormula) {
  // x = [1, 0, 2], W = [[1,2],[3,4],[5,6]], b = [0.5, -0.5]
  std::vector<double> x{1, 0, 2};
  std::vector<double> w{1, 2, 3, 4, 5, 6};
  std::vector<double> b{0.5, -0.5};
  std::vector<double> out(2);
  faithlab::affine_forward(x, w, b, out);
  EXPECT_DOUBLE_EQ(out[0], 0.5 + 1 + 10);
  EXPECT_DOUBLE_EQ(out[1], -0.5 + 2 + 12);
}

TEST(Tensor, NormsAndDot) {
  std::vector<double> a{3, 4};
  EXPECT_DOUBLE_EQ(faithlab::l2_norm(a), 5.0);
  EXPECT_DOUBLE_EQ(faithlab::squared_norm(a), 25.0);
  EXPECT_DOUBLE_EQ(faithlab::dot(a, a), 25.0);
}
