#include <doctest.h>

#include <cmath>
#include <complex>

#include "msgh/errors.hpp"
#include "msgh/gig.hpp"
#include "msgh/rng.hpp"
#include "oracles.hpp"

using msgh::GigParams;

namespace {
constexpr double kPi = 3.14159265358979323846;

GigParams random_interior(msgh::Rng& rng)
{
    return {-3.0 + 6.0 * rng.uniform(), 0.3 + 4.0 * rng.uniform(),
            0.3 + 4.0 * rng.uniform()};
}
}  // namespace

TEST_CASE("inverse gaussian pdf value")
{
    // IG at w = gamma = delta = 1: log(1/sqrt(2 pi) e^1 e^-1)
    CHECK(msgh::gig_log_pdf(1.0, {-0.5, 1.0, 1.0}) ==
          doctest::Approx(-0.5 * std::log(2.0 * kPi)).epsilon(1e-14));
}

TEST_CASE("reciprocal change of variable")
{
    // density of 1/W at w is w^-2 f_W(1/w); equals the GIG with
    // (lambda -> -lambda, gamma <-> delta)
    msgh::Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const GigParams p = random_interior(rng);
        const double w = 0.05 + 4.0 * rng.uniform();
        const double direct =
            msgh::gig_log_pdf(1.0 / w, p) - 2.0 * std::log(w);
        const double swapped =
            msgh::gig_log_pdf(w, {-p.lambda, p.delta, p.gamma});
        CHECK(direct == doctest::Approx(swapped).epsilon(1e-12));
    }
}

TEST_CASE("pdf normalizes to one")
{
    CHECK(oracle::gig_expectation({2.0, 1.5, 0.7}, [](double) { return 1.0; }) ==
          doctest::Approx(1.0).epsilon(1e-8));
    msgh::Rng rng(17);
    for (int i = 0; i < 5; ++i) {
        const GigParams p = random_interior(rng);
        CHECK(oracle::gig_expectation(p, [](double) { return 1.0; }) ==
              doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("moment formula")
{
    // half-integer order closed forms
    const GigParams ig{-0.5, 2.0, 3.0};
    CHECK(msgh::gig_moment(1, ig) == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(msgh::gig_moment(2, ig) ==
          doctest::Approx(1.5 * 1.5 * (1.0 + 1.0 / 6.0)).epsilon(1e-13));
    // frozen from the quadrature oracle
    CHECK(msgh::gig_moment(1, {1.0, 2.0, 3.0}) ==
          doctest::Approx(1.8884694653962375).epsilon(1e-12));
    // live quadrature, positive and negative orders
    msgh::Rng rng(3);
    for (int i = 0; i < 8; ++i) {
        const GigParams p = random_interior(rng);
        for (const int r : {-2, -1, 1, 2}) {
            const double q = oracle::gig_expectation(
                p, [&](double w) { return std::pow(w, r); });
            CHECK(msgh::gig_moment(r, p) == doctest::Approx(q).epsilon(1e-8));
        }
        // Jensen: E[W] E[1/W] >= 1
        CHECK(msgh::gig_moment(1, p) * msgh::gig_moment(-1, p) >= 1.0);
    }
}

TEST_CASE("sampler: determinism and moments")
{
    const GigParams p{-0.5, 2.0, 1.0};
    const auto a = msgh::gig_sample(p, 2000, 99);
    const auto b = msgh::gig_sample(p, 2000, 99);
    CHECK(a == b);

    const std::size_t n = 200000;
    const auto draws = msgh::gig_sample(p, n, 1234);
    double mean = 0.0;
    for (const double w : draws) mean += w;
    mean /= n;
    // IG mean delta/gamma = 1/2, variance delta/gamma^3 = 1/8
    const double se = std::sqrt(0.125 / n);
    CHECK(std::abs(mean - 0.5) < 4.0 * se);
}

TEST_CASE("sampler matches the quadrature cdf")
{
    for (const GigParams p :
         {GigParams{1.0, 1.0, 1.0}, GigParams{-0.5, 1.3, 0.8},
          GigParams{2.5, 0.6, 2.0}}) {
        const auto draws = msgh::gig_sample(p, 20000, 777);
        // transform draws through the quadrature cdf: uniform if correct
        const auto u = oracle::gig_cdf(p, draws);
        const double d = oracle::ks_distance(
            u, [](double v) { return std::min(1.0, std::max(0.0, v)); });
        CHECK(d < 0.012);  // ~1.6/sqrt(n) rejects only a broken sampler
    }
}

TEST_CASE("sampler two-sample test against inverse-cdf draws")
{
    msgh::Rng rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        const GigParams p = random_interior(rng);
        const std::size_t n = 4000;
        const auto draws = msgh::gig_sample(p, n, 1000 + rep);
        const auto ref = oracle::gig_inverse_cdf_draws(p, n, 5000 + rep);
        const double d = oracle::ks_two_sample(draws, ref);
        // alpha = 0.001: c(alpha) sqrt((n+m)/(nm)), c = 1.9495
        CHECK(d < 1.9495 * std::sqrt(2.0 / static_cast<double>(n)));
    }
}

TEST_CASE("characteristic function at the NIG order")
{
    const GigParams p{-0.5, 1.0, 1.0};
    CHECK(std::abs(msgh::gig_cf(0.0, p) - 1.0) < 1e-15);

    const GigParams p2{-0.5, 2.0, 1.0};
    for (const double t : {0.3, 1.0, 4.5}) {
        const std::complex<double> cf = msgh::gig_cf(t, p2);
        const std::complex<double> conj_cf = msgh::gig_cf(-t, p2);
        CHECK(std::abs(cf - std::conj(conj_cf)) < 1e-14);
    }

    // oscillatory quadrature oracle at t = 1
    const double re = oracle::gig_expectation(
        p2, [](double w) { return std::cos(w); });
    const double im = oracle::gig_expectation(
        p2, [](double w) { return std::sin(w); });
    const std::complex<double> cf = msgh::gig_cf(1.0, p2);
    CHECK(std::abs(cf - std::complex<double>(re, im)) < 1e-7);
}

TEST_CASE("boundary and order errors")
{
    CHECK_THROWS_AS(msgh::gig_log_pdf(0.0, {-0.5, 1.0, 1.0}),
                    std::domain_error);
    CHECK_THROWS_AS(msgh::gig_log_pdf(1.0, {-1.0, 0.0, 1.0}),
                    msgh::boundary_error);
    CHECK_THROWS_AS(msgh::gig_moment(1, {1.0, 1.0, 0.0}),
                    msgh::boundary_error);
    CHECK_THROWS_AS(msgh::gig_sample({-1.0, 0.0, 1.0}, 10, 1),
                    msgh::boundary_error);
    CHECK_THROWS_AS(msgh::gig_cf(1.0, {1.0, 1.0, 1.0}),
                    msgh::unsupported_order_error);
    // boundary cases that are not even representable
    CHECK(!GigParams{1.0, 0.0, 1.0}.valid());   // gamma=0 needs lambda<0
    CHECK(GigParams{-1.0, 0.0, 1.0}.valid());
    CHECK(!GigParams{-1.0, 1.0, 0.0}.valid());  // delta=0 needs lambda>0
    CHECK(GigParams{1.0, 1.0, 0.0}.valid());
}
