#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hitrank/tensor.hpp"

using hitrank::Tensor;

TEST_SUITE_BEGIN("tensor");

TEST_CASE("shape product equals stored value count") {
  Tensor t({2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(t.rank() == 3);
  CHECK(t.dim(0) == 2);
  CHECK(t.dim(2) == 4);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == 0.0);
}

TEST_CASE("adopting values rejects a count mismatch") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_NOTHROW(Tensor({2, 2}, {1.0, 2.0, 3.0, 4.0}));
}

TEST_CASE("zero extents are rejected") {
  CHECK_THROWS_AS(Tensor({2, 0, 3}), std::invalid_argument);
}

TEST_CASE("scalar and zeros_like") {
  const Tensor s = Tensor::scalar(2.5);
  CHECK(s.size() == 1);
  CHECK(s[0] == 2.5);

  Tensor t({3, 2}, {1, 2, 3, 4, 5, 6});
  const Tensor z = Tensor::zeros_like(t);
  CHECK(z.same_shape(t));
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == 0.0);
}

TEST_CASE("rank-2 indexing is row-major") {
  Tensor t({2, 3}, {0, 1, 2, 10, 11, 12});
  CHECK(t.at(0, 0) == 0);
  CHECK(t.at(0, 2) == 2);
  CHECK(t.at(1, 0) == 10);
  CHECK(t.at(1, 2) == 12);
  t.at(1, 1) = 99;
  CHECK(t[4] == 99);
}

TEST_CASE("rank-4 indexing is row-major") {
  Tensor t({2, 2, 2, 2});
  for (std::size_t i = 0; i < 16; ++i) t[i] = static_cast<double>(i);
  CHECK(t.at(0, 0, 0, 0) == 0);
  CHECK(t.at(0, 0, 0, 1) == 1);
  CHECK(t.at(0, 0, 1, 0) == 2);
  CHECK(t.at(0, 1, 0, 0) == 4);
  CHECK(t.at(1, 0, 0, 0) == 8);
  CHECK(t.at(1, 1, 1, 1) == 15);
}

TEST_CASE("reshape keeps values and requires the same element count") {
  Tensor t({2, 6});
  for (std::size_t i = 0; i < 12; ++i) t[i] = static_cast<double>(i);
  t.reshape({3, 4});
  CHECK(t.dim(0) == 3);
  CHECK(t.dim(1) == 4);
  CHECK(t.at(2, 3) == 11);
  CHECK_THROWS_AS(t.reshape({5, 2}), std::invalid_argument);
}

TEST_CASE("all_finite flags NaN and infinity") {
  Tensor t({2, 2}, {1, 2, 3, 4});
  CHECK(t.all_finite());
  t[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(t.all_finite());
  t[2] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(t.all_finite());
  t[2] = -1e308;
  CHECK(t.all_finite());
}

TEST_CASE("fill overwrites every entry") {
  Tensor t({3, 3});
  t.fill(7.0);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == 7.0);
}

TEST_CASE("default tensor is empty") {
  const Tensor t;
  CHECK(t.empty());
  CHECK(t.rank() == 0);
  CHECK(t.size() == 0);
}

TEST_SUITE_END();
