#include "pairlab/rng.hpp"

#include <cmath>

#include <doctest.h>

using namespace pairlab;

// Reference outputs computed with an independent implementation of the same
// published algorithms (SplitMix64, xoshiro256++, AS241).

TEST_CASE("splitmix64 matches the published test vector") {
  SplitMix64 sm(0);
  CHECK(sm.next() == 0xE220A8397B1DCDAFULL);
  CHECK(sm.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(sm.next() == 0x06C45D188009454FULL);
  CHECK(sm.next() == 0xF88BB8A8724C81ECULL);

  SplitMix64 sm42(42);
  CHECK(sm42.next() == 0xBDD732262FEB6E95ULL);
  CHECK(sm42.next() == 0x28EFE333B266F103ULL);
}

TEST_CASE("xoshiro256++ matches the reference sequence") {
  Xoshiro256pp rng(12345);
  CHECK(rng.next() == 0x8D948A82DEF8A568ULL);
  CHECK(rng.next() == 0x3477F953796702A0ULL);
  CHECK(rng.next() == 0x15CAA2FCE6DB8D69ULL);
  CHECK(rng.next() == 0x2CEF8853C20C6DD0ULL);
  CHECK(rng.next() == 0x43FF3FFF9C039CD9ULL);
  CHECK(rng.next() == 0xB9C18B4A72333287ULL);
}

TEST_CASE("uniform01 mapping is exact and stays inside (0, 1)") {
  Xoshiro256pp rng(12345);
  CHECK(rng.uniform01() == doctest::Approx(0.5530478066930038).epsilon(1e-15));
  CHECK(rng.uniform01() == doctest::Approx(0.20495565689034484).epsilon(1e-15));
  CHECK(rng.uniform01() == doctest::Approx(0.08512324022636458).epsilon(1e-15));

  Xoshiro256pp other(99);
  for (int i = 0; i < 100000; ++i) {
    const double u = other.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("inverse normal CDF against independent reference values") {
  const auto ppf = Xoshiro256pp::inverse_normal_cdf;
  CHECK(ppf(0.5) == 0.0);
  CHECK(ppf(0.025) == doctest::Approx(-1.9599639845400545).epsilon(1e-14));
  CHECK(ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(ppf(0.31) == doctest::Approx(-0.4958503473474533).epsilon(1e-14));
  CHECK(ppf(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-14));
  CHECK(ppf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-13));
  CHECK(ppf(1.0 - 1e-10) == doctest::Approx(6.361340889697422).epsilon(1e-13));
  CHECK(ppf(1e-300) == doctest::Approx(-37.0470962993612).epsilon(1e-12));

  // Symmetry: ppf(p) == -ppf(1-p) on the central branch.
  for (double p : {0.1, 0.2, 0.3, 0.4, 0.45}) {
    CHECK(ppf(p) == doctest::Approx(-ppf(1.0 - p)).epsilon(1e-13));
  }
}

TEST_CASE("normal draws from the stream match the reference pipeline") {
  Xoshiro256pp rng(12345);
  CHECK(rng.normal(0.0, 1.0) ==
        doctest::Approx(0.13336542669835422).epsilon(1e-13));
  CHECK(rng.normal(0.0, 1.0) ==
        doctest::Approx(-0.8240497090629568).epsilon(1e-13));
  CHECK(rng.normal(0.0, 1.0) ==
        doctest::Approx(-1.3714122513934588).epsilon(1e-13));
}

TEST_CASE("derive_seed separates nearby keys") {
  const std::uint64_t a = derive_seed(7, 0);
  const std::uint64_t b = derive_seed(7, 1);
  const std::uint64_t c = derive_seed(8, 0);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(b != c);
  CHECK(derive_seed(7, 0) == a);
}

TEST_CASE("fnv1a64 known answers") {
  // Standard FNV-1a vectors.
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
}
