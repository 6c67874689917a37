#include "tvcopula/distributions.hpp"
#include "tvcopula/dynamic.hpp"
#include "tvcopula/fit.hpp"
#include "tvcopula/simulate.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

using doctest::Approx;
using namespace tvc;

namespace {

constexpr std::array<LinkRole, 5> kRoles = {LinkRole::Correlation, LinkRole::DegreesOfFreedom,
                                            LinkRole::GumbelTheta, LinkRole::ClaytonDelta,
                                            LinkRole::TailProbability};

EvolutionParams evo_of(Family f, std::initializer_list<EvolutionTriple> triples) {
  EvolutionParams e;
  e.family = f;
  e.triples = triples;
  return e;
}

// A static parameter inside each family's range, matching link(omega).
EvolutionParams collapsed(Family f) {
  switch (f) {
    case Family::StudentT: return evo_of(f, {{0.8, 0, 0}, {-1.5, 0, 0}});
    case Family::SJC: return evo_of(f, {{-1.0, 0, 0}, {0.4, 0, 0}});
    default: return evo_of(f, {{0.7, 0, 0}});
  }
}

StaticCopulaParams linked(const EvolutionParams& e) {
  const auto roles = link_roles(e.family);
  std::vector<double> x;
  for (std::size_t i = 0; i < roles.size(); ++i) x.push_back(link_transform(roles[i], e.triples[i].omega));
  return from_vector(e.family, x);
}

}  // namespace

TEST_CASE("link examples") {
  CHECK(link_transform(LinkRole::Correlation, 0.0) == 0.0);
  CHECK(link_transform(LinkRole::TailProbability, 0.0) == 0.5);
  const double dof = link_transform(LinkRole::DegreesOfFreedom, 40.0);
  CHECK(dof < 200.0 + 1e-12);
  CHECK(200.0 - dof < 1e-10);
  CHECK(link_transform(LinkRole::GumbelTheta, 0.0) == Approx(1.0 + std::log(2.0)));
  CHECK(link_transform(LinkRole::ClaytonDelta, 0.0) == Approx(std::log(2.0)));
  CHECK(link_transform(LinkRole::Correlation, 1.3) == Approx((1.0 - std::exp(-1.3)) / (1.0 + std::exp(-1.3))));
  CHECK(link_transform(LinkRole::DegreesOfFreedom, -0.4) == Approx(2.0 + 198.0 / (1.0 + std::exp(0.4))));
}

TEST_CASE("links are strictly increasing, stay in range and invert") {
  for (LinkRole role : kRoles) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
      const double x = -15.0 + 30.0 * static_cast<double>(i) / 999.0;
      const double y = link_transform(role, x);
      CHECK(y > prev);
      prev = y;
      CHECK(link_inverse(role, y) == Approx(x).epsilon(1e-8));
    }
    for (double x : {-1e6, -700.0, 700.0, 1e6}) {
      const double y = link_transform(role, x);
      switch (role) {
        case LinkRole::Correlation: CHECK(std::abs(y) < 1.0); break;
        case LinkRole::DegreesOfFreedom: CHECK((y > 2.0 && y <= 200.0)); break;
        case LinkRole::GumbelTheta: CHECK(y > 1.0); break;
        case LinkRole::ClaytonDelta: CHECK(y > 0.0); break;
        case LinkRole::TailProbability: CHECK((y > 0.0 && y < 1.0)); break;
      }
    }
  }
  CHECK_THROWS(link_inverse(LinkRole::TailProbability, 1.5));
}

TEST_CASE("forcing examples") {
  const std::vector<double> half(12, 0.5);
  CHECK(forcing_term(Family::Gumbel, half, half, 11) == 0.0);
  const std::vector<double> one(12, norm_cdf(1.0));
  CHECK(forcing_term(Family::Normal, one, one, 10) == Approx(1.0).epsilon(1e-12));
  const std::vector<double> u{0.1, 0.7, 0.4, 0.9}, v{0.3, 0.2, 0.8, 0.5};
  // index 2: two lags available
  CHECK(forcing_term(Family::Clayton, u, v, 2) == Approx((0.2 + 0.5) / 2.0));
  CHECK(forcing_term(Family::SJC, u, v, 0) == 0.0);
  const double nu = 6.0;
  const double hand = (t_quantile(0.1, nu) * t_quantile(0.3, nu) + t_quantile(0.7, nu) * t_quantile(0.2, nu) +
                       t_quantile(0.4, nu) * t_quantile(0.8, nu)) /
                      3.0;
  CHECK(forcing_term(Family::StudentT, u, v, 3, nu) == Approx(hand).epsilon(1e-12));
  const auto a = testutil::uniforms(30, 1), b = testutil::uniforms(30, 2);
  double tail = 0.0;
  for (std::size_t j = 15; j < 25; ++j) tail += std::abs(a[j] - b[j]);
  CHECK(forcing_term(Family::Gumbel, a, b, 25) == Approx(tail / 10.0).epsilon(1e-14));
}

TEST_CASE("Gumbel recursion unrolled by hand on 13 points") {
  const std::vector<double> u{0.12, 0.55, 0.91, 0.33, 0.47, 0.08, 0.76, 0.64, 0.29, 0.95, 0.51, 0.18, 0.83};
  const std::vector<double> v{0.20, 0.49, 0.85, 0.41, 0.30, 0.15, 0.88, 0.59, 0.35, 0.90, 0.62, 0.11, 0.70};
  const double w = 0.3, a = -1.1, b = 0.6;
  auto softplus = [](double x) { return std::log1p(std::exp(x)); };
  std::vector<double> theta;
  double prev = 1.0 + softplus(w / (1.0 - b));
  for (std::size_t t = 0; t < u.size(); ++t) {
    double f = 0.0;
    const std::size_t k = std::min<std::size_t>(10, t);
    for (std::size_t j = t - k; j < t; ++j) f += std::abs(u[j] - v[j]);
    if (k > 0) f /= static_cast<double>(k);
    prev = 1.0 + softplus(w + b * prev + a * f);
    theta.push_back(prev);
  }
  // first three steps spelled out
  const double t0 = 1.0 + softplus(0.3 + 0.6 * (1.0 + softplus(0.75)));
  const double t1 = 1.0 + softplus(0.3 + 0.6 * t0 - 1.1 * 0.08);
  const double t2 = 1.0 + softplus(0.3 + 0.6 * t1 - 1.1 * (0.08 + 0.06) / 2.0);
  CHECK(theta[0] == Approx(t0).epsilon(1e-14));
  CHECK(theta[1] == Approx(t1).epsilon(1e-14));
  CHECK(theta[2] == Approx(t2).epsilon(1e-14));

  const auto path = filter_dynamic(evo_of(Family::Gumbel, {{w, a, b}}), u, v);
  REQUIRE(path.size() == 13);
  double ll = 0.0;
  for (std::size_t t = 0; t < 13; ++t) {
    CHECK(std::abs(path.first[t] - theta[t]) <= 1e-10);
    CHECK(path.tail[t].lambda_u == Approx(2.0 - std::pow(2.0, 1.0 / theta[t])).epsilon(1e-12));
    ll += copula_logpdf(GumbelParams{theta[t]}, u[t], v[t]);
  }
  CHECK(path.loglik == Approx(ll).epsilon(1e-12));
  CHECK(path.second.empty());
}

TEST_CASE("alpha = beta = 0 collapses to the static likelihood") {
  const auto u = testutil::uniforms(500, 7), v = testutil::uniforms(500, 8);
  for (Family f : kAllFamilies) {
    INFO(to_string(f));
    const auto e = collapsed(f);
    const double stat = static_loglik(linked(e), u, v);
    CHECK(std::abs(dynamic_loglik(e, u, v) - stat) <= 1e-10 * std::max(1.0, std::abs(stat)));
    const auto path = filter_dynamic(e, u, v);
    CHECK(path.loglik == dynamic_loglik(e, u, v));
    for (std::size_t t = 0; t < path.size(); ++t) REQUIRE(path.first[t] == path.first[0]);
  }
}

TEST_CASE("the likelihood is finite over a coefficient grid") {
  const auto u = testutil::uniforms(500, 11), v = testutil::uniforms(500, 12);
  for (Family f : kAllFamilies) {
    INFO(to_string(f));
    const std::size_t k = EvolutionParams::size(f);
    int bad = 0;
    for (double w : {-2.0, 0.0, 2.0}) {
      for (double a : {-2.0, 0.0, 2.0}) {
        for (double b : {-2.0, 0.0, 2.0}) {
          std::vector<double> x(k);
          for (std::size_t i = 0; i < k; i += 3) {
            x[i] = w;
            x[i + 1] = a;
            x[i + 2] = b;
          }
          const auto e = EvolutionParams::from_vector(f, x);
          const auto path = filter_dynamic(e, u, v);
          bad += !std::isfinite(path.loglik);
          for (std::size_t t = 0; t < path.size(); ++t) bad += !is_valid(path.at(t));
        }
      }
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("every filtered parameter is valid and the path is deterministic") {
  const auto u = testutil::uniforms(300, 13), v = testutil::uniforms(300, 14);
  for (Family f : kAllFamilies) {
    std::vector<double> x(EvolutionParams::size(f));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.3 * std::sin(static_cast<double>(i) + 1.0);
    const auto e = EvolutionParams::from_vector(f, x);
    const auto p1 = filter_dynamic(e, u, v), p2 = filter_dynamic(e, u, v);
    CHECK(p1.first == p2.first);
    CHECK(p1.second == p2.second);
    CHECK(p1.loglik == p2.loglik);
    for (std::size_t t = 0; t < p1.size(); ++t) REQUIRE(is_valid(p1.at(t)));
    CHECK(EvolutionParams::from_vector(f, e.to_vector()).to_vector() == e.to_vector());
    CHECK(EvolutionParams::names(f).size() == x.size());
  }
}

TEST_CASE("SJC tails evolve independently") {
  const auto u = testutil::uniforms(400, 15), v = testutil::uniforms(400, 16);
  const auto base = evo_of(Family::SJC, {{-0.5, 1.0, 0.3}, {-1.0, -0.8, 0.5}});
  auto moved = base;
  moved.triples[0].omega = 0.9;
  const auto a = filter_dynamic(base, u, v), b = filter_dynamic(moved, u, v);
  CHECK(a.second == b.second);
  CHECK(a.first != b.first);
}

TEST_CASE("Student-t dof path stays in (2, 200]") {
  const auto u = testutil::uniforms(300, 17), v = testutil::uniforms(300, 18);
  const auto e = evo_of(Family::StudentT, {{0.2, 0.1, 0.5}, {-30.0, 5.0, 0.2}});
  const auto path = filter_dynamic(e, u, v);
  for (double nu : path.second) CHECK((nu > 2.0 && nu <= 200.0));
  CHECK(std::isfinite(path.loglik));
}

TEST_CASE("fitted dynamic model dominates the zero coefficients and the static fit") {
  const auto e = evo_of(Family::Gumbel, {{-0.4, -1.5, 0.7}});
  const auto sample = sample_dynamic(e, 1500, Seed{21});
  const auto fit = fit_dynamic(Family::Gumbel, sample.data.u, sample.data.v);
  const auto zero = evo_of(Family::Gumbel, {{0.0, 0.0, 0.0}});
  CHECK(fit.report.loglik >= dynamic_loglik(zero, sample.data.u, sample.data.v));
  const auto st = fit_static(Family::Gumbel, sample.data.u, sample.data.v);
  CHECK(fit.report.loglik >= st.report.loglik - 1e-8);
  CHECK(fit.report.k == 3);
  CHECK(fit.path.loglik == Approx(fit.report.loglik));
}

TEST_CASE("filtered Gumbel tail path follows a slowly varying truth") {
  const std::size_t n = 4000;
  Xoshiro256 rng(Seed{77});
  std::vector<double> u(n), v(n), truth(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double theta = 1.85 + 0.65 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 1000.0);
    truth[t] = 2.0 - std::pow(2.0, 1.0 / theta);
    std::tie(u[t], v[t]) = draw_pair(GumbelParams{theta}, rng);
  }
  const auto fit = fit_dynamic(Family::Gumbel, u, v);
  std::vector<double> filtered(n);
  for (std::size_t t = 0; t < n; ++t) filtered[t] = fit.path.tail[t].lambda_u;
  CHECK(oracle::pearson(filtered, truth) >= 0.5);
}

TEST_CASE("a precomputed Student-t cache leaves the filter unchanged") {
  const auto u = testutil::uniforms(300, 91), v = testutil::uniforms(300, 92);
  const auto evo = evo_of(Family::StudentT, {{0.3, 0.2, 0.5}, {-1.0, -0.4, 0.3}});
  const auto cache = make_t_forcing_cache(u, v);
  const auto plain = filter_dynamic(evo, u, v);
  const auto cached = filter_dynamic(evo, u, v, &cache);
  CHECK(plain.first == cached.first);
  CHECK(plain.second == cached.second);
  CHECK(plain.loglik == cached.loglik);
  CHECK(dynamic_loglik(evo, u, v, &cache) == plain.loglik);

  // the forcing matches products of exact quantiles to interpolation accuracy
  for (std::size_t t : {1u, 5u, 10u, 150u}) {
    const double nu = 4.5;
    double exact = 0.0;
    const std::size_t k = std::min<std::size_t>(10, t);
    for (std::size_t j = t - k; j < t; ++j) exact += t_quantile(u[j], nu) * t_quantile(v[j], nu);
    exact /= static_cast<double>(k);
    CHECK(forcing_term(Family::StudentT, u, v, t, nu) == Approx(exact).epsilon(1e-10));
  }

  const auto short_cache = make_t_forcing_cache(std::span(u).first(10), std::span(v).first(10));
  CHECK_THROWS_AS(filter_dynamic(evo, u, v, &short_cache), std::invalid_argument);
  CHECK(dynamic_loglik(evo_of(Family::Gumbel, {{0.3, 0.1, 0.5}}), u, v, &cache) ==
        dynamic_loglik(evo_of(Family::Gumbel, {{0.3, 0.1, 0.5}}), u, v));
}
