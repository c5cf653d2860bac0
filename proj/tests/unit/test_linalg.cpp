#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "fixtures.hpp"
#include "genprior/errors.hpp"
#include "genprior/linalg.hpp"

using namespace genprior;

TEST_CASE("SpdFactor solves and reports log det") {
    CounterRng rng(3);
    const Matrix b = fixtures::random_matrix(6, 6, rng);
    const Matrix m = b * b.transpose() + Matrix::Identity(6, 6);
    const SpdFactor f(m);
    const Vector rhs = rng.normal_vector(6);
    CHECK((m * f.solve(rhs) - rhs).norm() < 1e-10);
    CHECK(f.log_det() == doctest::Approx(std::log(m.determinant())).epsilon(1e-10));
    CHECK((f.inverse() - m.fullPivLu().inverse()).norm() < 1e-10);
    CHECK((f.lower() * f.lower().transpose() - m).norm() < 1e-10);
    CHECK(f.solve_lower(rhs).squaredNorm() == doctest::Approx(rhs.dot(m.fullPivLu().solve(rhs))));
    CHECK(f.jitter() == 0.0);
}

TEST_CASE("SpdFactor escalates jitter on a singular PSD matrix") {
    Vector v(3);
    v << 1.0, 2.0, 3.0;
    const Matrix m = v * v.transpose();
    const SpdFactor f(m);
    CHECK(f.jitter() > 0.0);
    CHECK(f.jitter() <= 1e-6 * m.trace() / 3.0 * 1.0000001);
}

TEST_CASE("SpdFactor rejects indefinite input") {
    Matrix m = Matrix::Identity(2, 2);
    m(1, 1) = -1.0;
    CHECK_THROWS_AS(SpdFactor{m}, NumericalError);
}

TEST_CASE("numerical rank counts singular values above the relative threshold") {
    CounterRng rng(5);
    const Matrix u = fixtures::random_matrix(8, 3, rng);
    const Matrix m = u * u.transpose();
    CHECK(numerical_rank(m, 1e-8) == 3);
    CHECK(numerical_rank(Matrix::Identity(4, 4), 1e-8) == 4);
    const Vector s = singular_values(m);
    for (Eigen::Index i = 1; i < s.size(); ++i) CHECK(s[i] <= s[i - 1]);
}

TEST_CASE("symmetric eigenvalues are increasing and symmetrize first") {
    Matrix m(2, 2);
    m << 2.0, 1.0, 0.0, 2.0;  // symmetric part [[2, .5], [.5, 2]]
    const Vector e = symmetric_eigenvalues(m);
    CHECK(e[0] == doctest::Approx(1.5));
    CHECK(e[1] == doctest::Approx(2.5));
}

TEST_CASE("sample covariance is unbiased on a hand example") {
    Matrix s(3, 2);
    s << 1, 2, 3, 4, 5, 9;
    const Matrix c = sample_covariance(s);
    // Column means 3 and 5; deviations (−2,0,2) and (−3,−1,4).
    CHECK(c(0, 0) == doctest::Approx(4.0));
    CHECK(c(0, 1) == doctest::Approx(7.0));
    CHECK(c(1, 1) == doctest::Approx(13.0));
}
