#include <doctest.h>

#include <cmath>

#include "twf/rng.hpp"
#include "twf/thresholding.hpp"

using namespace twf;

TEST_CASE("soft and hard match the textbook values") {
  Vector v(3);
  v << 3.0, -0.5, 1.0;

  Vector soft = apply_threshold(ThresholdKind::soft, v, 1.0);
  CHECK(soft[0] == 2.0);
  CHECK(soft[1] == 0.0);
  CHECK(soft[2] == 0.0);  // |1| <= tau maps to zero

  Vector hard = apply_threshold(ThresholdKind::hard, v, 1.0);
  CHECK(hard[0] == 3.0);
  CHECK(hard[1] == 0.0);
  CHECK(hard[2] == 0.0);
}

TEST_CASE("tau = 0 is the identity for both kinds") {
  RngStream rng = RngStream::from_path(11, {});
  Vector v(64);
  for (int i = 0; i < 64; ++i) v[i] = rng.next_normal();
  v[10] = 0.0;
  v[11] = -0.0;
  for (ThresholdKind kind : {ThresholdKind::soft, ThresholdKind::hard}) {
    Vector out = apply_threshold(kind, v, 0.0);
    for (int i = 0; i < 64; ++i) CHECK(out[i] == v[i]);
  }
}

TEST_CASE("invalid tau is rejected") {
  Vector v = Vector::Ones(2);
  CHECK_THROWS_AS(apply_threshold(ThresholdKind::soft, v, -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_threshold(ThresholdKind::hard, v,
                                  std::numeric_limits<double>::quiet_NaN()),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_threshold(ThresholdKind::soft, v,
                                  std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("contract holds over a million random pairs") {
  RngStream rng = RngStream::from_path(12, {});
  for (int i = 0; i < 1000000; ++i) {
    const double scale = std::exp(6.0 * (rng.next_double() - 0.5));
    double x = scale * rng.next_normal();
    const double tau = std::abs(scale * rng.next_normal());
    if (i % 10 == 0) x = (i % 20 == 0) ? tau : -tau;  // exact boundary
    for (ThresholdKind kind : {ThresholdKind::soft, ThresholdKind::hard}) {
      const double t = apply_threshold(kind, x, tau);
      if (std::abs(x) <= tau) REQUIRE(t == 0.0);
      REQUIRE(std::abs(t - x) <= tau);
    }
  }
}

TEST_CASE("both kinds are odd functions") {
  RngStream rng = RngStream::from_path(13, {});
  for (int i = 0; i < 100000; ++i) {
    const double x = 3.0 * rng.next_normal();
    const double tau = std::abs(rng.next_normal());
    for (ThresholdKind kind : {ThresholdKind::soft, ThresholdKind::hard})
      CHECK(apply_threshold(kind, -x, tau) == -apply_threshold(kind, x, tau));
  }
}

TEST_CASE("soft thresholding is monotone; hard is monotone off the boundary") {
  RngStream rng = RngStream::from_path(14, {});
  for (int i = 0; i < 100000; ++i) {
    const double tau = std::abs(rng.next_normal());
    double a = 3.0 * rng.next_normal();
    double b = 3.0 * rng.next_normal();
    if (a > b) std::swap(a, b);
    CHECK(apply_threshold(ThresholdKind::soft, a, tau) <=
          apply_threshold(ThresholdKind::soft, b, tau));
    if (std::abs(a) != tau && std::abs(b) != tau)
      CHECK(apply_threshold(ThresholdKind::hard, a, tau) <=
            apply_threshold(ThresholdKind::hard, b, tau));
  }
}

TEST_CASE("output support never grows past the survivors") {
  RngStream rng = RngStream::from_path(15, {});
  Vector v(128);
  for (int i = 0; i < 128; ++i) v[i] = rng.next_normal();
  const double tau = 0.8;
  for (ThresholdKind kind : {ThresholdKind::soft, ThresholdKind::hard}) {
    Vector out = apply_threshold(kind, v, tau);
    for (int i = 0; i < 128; ++i)
      if (out[i] != 0.0) CHECK(std::abs(v[i]) > tau);
  }
}

TEST_CASE("operator names round-trip") {
  CHECK(threshold_kind_from_name("soft") == ThresholdKind::soft);
  CHECK(threshold_kind_from_name("hard") == ThresholdKind::hard);
  CHECK(threshold_kind_name(ThresholdKind::soft) == "soft");
  CHECK(threshold_kind_name(ThresholdKind::hard) == "hard");
  CHECK_THROWS_AS(threshold_kind_from_name("scad"), std::invalid_argument);
}
