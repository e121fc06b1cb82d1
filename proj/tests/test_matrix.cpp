#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "dephase/matrix.hpp"
#include "support.hpp"

using namespace dephase;
using Catch::Approx;

namespace {

ComplexMatrix sigma_y() { return ComplexMatrix(2, 2, {0.0, Complex{0, -1}, Complex{0, 1}, 0.0}); }

ComplexMatrix bell_phi_plus() {
  ComplexMatrix m(4, 4);
  for (std::size_t i : {0u, 3u})
    for (std::size_t j : {0u, 3u}) m(i, j) = 0.5;
  return m;
}

}  // namespace

TEST_CASE("kron", "[tensor]") {
  SECTION("identity") { CHECK(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)) == ComplexMatrix::identity(4)); }

  SECTION("A-major ordering of a diagonal factor") {
    const double g = 0.3;
    CHECK(kron(ComplexMatrix::diagonal({1.0, g}), ComplexMatrix::identity(2)) == ComplexMatrix::diagonal({1.0, 1.0, g, g}));
  }

  SECTION("sigma_y x sigma_y is the anti-diagonal (-1, 1, 1, -1)") {
    const auto yy = kron(sigma_y(), sigma_y());
    ComplexMatrix expected(4, 4);
    expected(0, 3) = -1.0;
    expected(1, 2) = 1.0;
    expected(2, 1) = 1.0;
    expected(3, 0) = -1.0;
    CHECK(yy == expected);
  }

  SECTION("associative on dyadic operator matrices") {
    const auto a = ComplexMatrix::diagonal({1.0, 0.5});
    const auto b = sigma_y();
    const auto c = ComplexMatrix::diagonal({0.25, 1.0});
    CHECK(kron(kron(a, b), c) == kron(a, kron(b, c)));
  }
}

TEST_CASE("partial_trace", "[tensor]") {
  const QubitSet AB{Qubit::A, Qubit::B}, ABC{Qubit::A, Qubit::B, Qubit::C};

  SECTION("Bell state reduces to the maximally mixed qubit") {
    const auto r = partial_trace(bell_phi_plus(), QubitSet{Qubit::A}, AB);
    CHECK(frobenius_distance(r, ComplexMatrix::identity(2) * Complex{0.5, 0}) < 1e-15);
  }

  SECTION("keeps factors in A < B < C order") {
    // rho = rho_A (x) rho_B (x) rho_C with distinct factors.
    std::mt19937_64 rng(11);
    const auto ra = testing::random_density(2, rng), rb = testing::random_density(2, rng), rc = testing::random_density(2, rng);
    const auto rho = kron(kron(ra, rb), rc);
    CHECK(frobenius_distance(partial_trace(rho, QubitSet{Qubit::B}, ABC), rb) < 1e-14);
    CHECK(frobenius_distance(partial_trace(rho, QubitSet{Qubit::A, Qubit::C}, ABC), kron(ra, rc)) < 1e-14);
    CHECK(frobenius_distance(partial_trace(rho, QubitSet{Qubit::C, Qubit::B}, ABC), kron(rb, rc)) < 1e-14);
    CHECK(frobenius_distance(partial_trace(rho, ABC, ABC), rho) == 0.0);
  }

  SECTION("register without B") {
    std::mt19937_64 rng(12);
    const auto ra = testing::random_density(2, rng), rc = testing::random_density(2, rng);
    const QubitSet AC{Qubit::A, Qubit::C};
    CHECK(frobenius_distance(partial_trace(kron(ra, rc), QubitSet{Qubit::C}, AC), rc) < 1e-14);
  }

  SECTION("preserves trace and commutes for random mixed states") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
      const auto rho = testing::random_density(8, rng);
      for (const QubitSet keep : {QubitSet{Qubit::A}, QubitSet{Qubit::B, Qubit::C}, QubitSet{Qubit::A, Qubit::C}}) {
        CHECK(std::abs(partial_trace(rho, keep, ABC).trace() - Complex{1.0, 0.0}) < 1e-12);
      }
      const auto stepwise = partial_trace(partial_trace(rho, AB, ABC), QubitSet{Qubit::A}, AB);
      const auto at_once = partial_trace(rho, QubitSet{Qubit::A}, ABC);
      CHECK(frobenius_distance(stepwise, at_once) < 1e-12);
    }
  }

  SECTION("errors") {
    CHECK_THROWS_AS(partial_trace(ComplexMatrix::identity(4), QubitSet{Qubit::A}, ABC), Error);
    CHECK_THROWS_AS(partial_trace(ComplexMatrix::identity(4), QubitSet{Qubit::C}, AB), Error);
    CHECK_THROWS_AS(partial_trace(ComplexMatrix::identity(4), QubitSet{}, AB), Error);
  }
}

TEST_CASE("hermitian_eigenvalues", "[tensor]") {
  SECTION("diagonal input") {
    const auto ev = hermitian_eigenvalues(ComplexMatrix::diagonal({0.3, 0.7}));
    REQUIRE(ev.size() == 2);
    CHECK(ev[0] == Approx(0.7).margin(1e-15));
    CHECK(ev[1] == Approx(0.3).margin(1e-15));
  }

  SECTION("maximally mixed qubit") {
    const auto ev = hermitian_eigenvalues(ComplexMatrix::identity(2) * Complex{0.5, 0});
    CHECK(ev == std::vector<double>{0.5, 0.5});
  }

  SECTION("rho rho~ of the Bell state") {
    // For |Phi+>, rho~ = rho and rho^2 = rho, so the spectrum is {1, 0, 0, 0}.
    const auto rho = bell_phi_plus();
    const auto yy = kron(sigma_y(), sigma_y());
    const auto ev = hermitian_eigenvalues(rho * (yy * rho.conjugate() * yy));
    CHECK(ev[0] == Approx(1.0).margin(1e-14));
    for (int k = 1; k < 4; ++k) CHECK(std::abs(ev[k]) < 1e-14);
  }

  SECTION("agrees with an independent solver on random Hermitian matrices") {
    std::mt19937_64 rng(21);
    for (std::size_t dim : {2u, 4u, 8u}) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto m = testing::random_hermitian(dim, rng);
        Eigen::MatrixXcd e(dim, dim);
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j) e(i, j) = m(i, j);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(e);
        auto ref = solver.eigenvalues();
        const auto ev = hermitian_eigenvalues(m);
        for (std::size_t k = 0; k < dim; ++k) CHECK(ev[k] == Approx(ref[dim - 1 - k]).margin(1e-12));
      }
    }
  }

  SECTION("eigenvectors reconstruct the input") {
    std::mt19937_64 rng(22);
    const auto m = testing::random_hermitian(8, rng);
    const auto es = hermitian_eigensystem(m);
    ComplexMatrix rebuilt(8, 8);
    for (std::size_t k = 0; k < 8; ++k)
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) rebuilt(i, j) += es.values[k] * es.vectors(i, k) * std::conj(es.vectors(j, k));
    CHECK(frobenius_distance(rebuilt, m) < 1e-12);
  }

  SECTION("spectrum of a random state sums to one") {
    std::mt19937_64 rng(23);
    const auto ev = hermitian_eigenvalues(testing::random_density(8, rng));
    double s = 0.0;
    for (double v : ev) s += v;
    CHECK(s == Approx(1.0).margin(1e-10));
  }

  SECTION("rejects non-Hermitian input") {
    CHECK_THROWS_AS(hermitian_eigenvalues(ComplexMatrix(2, 2, {1.0, 1.0, 0.0, 1.0})), Error);
  }
}

TEST_CASE("frobenius_distance", "[tensor]") {
  std::mt19937_64 rng(31);
  const auto m = testing::random_hermitian(4, rng);
  CHECK(frobenius_distance(m, m) == 0.0);
  CHECK(frobenius_distance(ComplexMatrix::identity(2), ComplexMatrix(2, 2)) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  const double g = std::exp(-0.5);
  // 1 - e^{-1/2}
  CHECK(frobenius_distance(ComplexMatrix::diagonal({1.0, 1.0}), ComplexMatrix::diagonal({1.0, g})) ==
        Approx(0.393469340287366576).epsilon(1e-14));
  CHECK_THROWS_AS(frobenius_distance(ComplexMatrix::identity(2), ComplexMatrix::identity(4)), Error);
}

TEST_CASE("QubitSet parsing and ordering", "[tensor]") {
  CHECK(QubitSet::parse("ca") == QubitSet{Qubit::A, Qubit::C});
  CHECK(QubitSet::parse("BC").to_string() == "BC");
  CHECK_THROWS_AS(QubitSet::parse("AD"), Error);
  CHECK_THROWS_AS(QubitSet::parse("AA"), Error);
  CHECK(QubitSet{Qubit::C} < QubitSet{Qubit::A, Qubit::B});
  CHECK(QubitSet{Qubit::A, Qubit::B} < QubitSet{Qubit::A, Qubit::C});
}
