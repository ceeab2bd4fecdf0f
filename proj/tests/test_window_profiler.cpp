#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bqpt/errors.hpp"
#include "bqpt/window_profiler.hpp"
#include "bqpt/xy_model.hpp"

using namespace bqpt;
using namespace bqpt::window;
using benford::Distance;

namespace {

Source identity() {
  return [](const Eigen::ArrayXd& x) { return Eigen::ArrayXd(x); };
}

Source log_uniform(double decades) {
  return [decades](const Eigen::ArrayXd& x) {
    return Eigen::ArrayXd((decades * x * std::log(10.0)).exp());
  };
}

}  // namespace

TEST_CASE("window layout") {
  const WindowSpec a{0.5, 1.5, 0.05, 0.01, 100};
  const auto w = windows(a);
  REQUIRE(w.size() == 96);
  CHECK(w.front().lo == 0.5);
  CHECK(w.front().hi == doctest::Approx(0.55));
  CHECK(w.back().lo == doctest::Approx(1.45));
  CHECK(w.back().hi == doctest::Approx(1.5));

  const auto q = windows({0.0, 1.0, 0.5, 0.25, 100});
  REQUIRE(q.size() == 3);
  CHECK(q[1].lo == 0.25);
  CHECK(q[1].hi == 0.75);
  CHECK(q[2].hi == 1.0);

  CHECK(WindowSpec{0.0, 1.0, 0.05, 5e-5, 100}.count() == 19001);
  const WindowSpec fine{0.5, 1.5, 0.05, 1e-3, 100};
  for (std::size_t m : {0ul, 17ul, 950ul}) {
    CHECK(fine.midpoint(m) == 0.5 + 0.025 + static_cast<double>(m) * 1e-3);
    CHECK(fine.window(m).hi <= fine.b);
  }
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS((WindowSpec{1.0, 0.5, 0.05, 1e-3, 100}.validate()), DomainError);
  CHECK_THROWS_AS((WindowSpec{0.5, 1.5, 0.05, 0.05, 100}.validate()), DomainError);
  CHECK_THROWS_AS((WindowSpec{0.5, 1.5, 1.0, 1e-3, 100}.validate()), DomainError);
  CHECK_THROWS_AS((WindowSpec{0.5, 1.5, 0.05, 1e-3, 99}.validate()), DomainError);
  CHECK_NOTHROW((WindowSpec{0.5, 1.5, 0.05, 1e-3, 100}.validate()));
}

TEST_CASE("normalization") {
  Eigen::ArrayXd x(3);
  x << 2, 4, 6;
  CHECK(normalize(x).isApprox((Eigen::ArrayXd(3) << 0, 0.5, 1).finished()));
  x << -1, 0, 3;
  CHECK(normalize(x).isApprox((Eigen::ArrayXd(3) << 0, 0.25, 1).finished()));
  Eigen::ArrayXd y(5);
  y << 0.3, -2.0, 7.5, 1.25, 4.0;
  const Eigen::ArrayXd affine = 3.5 + 0.25 * y;
  CHECK((normalize(affine) - normalize(y)).abs().maxCoeff() < 1e-15);
  const Eigen::ArrayXd n = normalize(y);
  CHECK(normalize(n).isApprox(n));
  CHECK_THROWS_AS(normalize(Eigen::ArrayXd::Constant(4, 2.0)), NumericError);
}

TEST_CASE("sample points") {
  const auto s = sample_points({0.1, 0.3}, 101);
  CHECK(s.size() == 101);
  CHECK(s[0] == 0.1);
  CHECK(s[100] == 0.3);
}

TEST_CASE("violation of reference sources") {
  // Evenly spaced uniform data, zero excluded; high-precision tabulation.
  CHECK(window_violation(identity(), {0.2, 0.7}, 10000, 1, Distance::md) ==
        doctest::Approx(5.8339390989004243544).epsilon(1e-12));
  // Min-max normalization turns 10^lambda into (10^lambda - 1) / 9, which is
  // far from log-uniform; spreading the source over many decades keeps all
  // but the lowest one log-uniform after the shift.
  CHECK(window_violation(log_uniform(1), {0.0, 1.0}, 10000, 1, Distance::md) ==
        doctest::Approx(2.2582375732649796357).epsilon(1e-9));
  const double spread = window_violation(log_uniform(60), {0.0, 1.0}, 10000, 1, Distance::md);
  CHECK(spread == doctest::Approx(0.045864715895040230432).epsilon(1e-9));
  CHECK(spread < 0.1);
}

TEST_CASE("profiles") {
  const WindowSpec spec{0.0, 2.0, 1.0, 0.1, 5000};
  const auto p = profile(log_uniform(60), spec, 1, Distance::md, 2, "exp10");
  CHECK(p.size() == 11);
  CHECK(p.delta.maxCoeff() < 0.1);
  for (Eigen::Index m = 1; m < p.size(); ++m) {
    CHECK(p.lambda_mid[m] > p.lambda_mid[m - 1]);
    CHECK(p.lambda_mid[m] == spec.midpoint(static_cast<std::size_t>(m)));
  }

  const WindowSpec pair{0.0, 1.0, 0.9, 0.1, 1000};
  const auto two = profile(identity(), pair, 1, Distance::sd);
  REQUIRE(two.size() == 2);
  CHECK(two.delta[0] == window_violation(identity(), pair.window(0), 1000, 1, Distance::sd));
  CHECK(two.delta[1] == window_violation(identity(), pair.window(1), 1000, 1, Distance::sd));
}

TEST_CASE("shared sampling matches single profiles and is scheduling-invariant") {
  const xy::ChainParams chain{0.5, xy::kZeroTemperature, xy::SystemSize::sites(20)};
  const auto source = xy::make_observable(xy::ObservableKind::mz(), chain);
  const WindowSpec spec{0.8, 1.2, 0.05, 0.01, 2000};
  const ProfileRequest requests[] = {{1, Distance::md}, {3, Distance::bd}, {2, Distance::sd}};
  const auto serial = profiles(source, spec, requests, 1);
  const auto parallel = profiles(source, spec, requests, 8);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(serial[i].delta == parallel[i].delta);
    const auto alone = profile(source, spec, requests[i].depth, requests[i].distance, 3);
    CHECK(alone.delta == serial[i].delta);
  }
  std::ostringstream a, b;
  write_profile_csv(a, serial[0]);
  write_profile_csv(b, parallel[0]);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("lambda_mid,delta\n", 0) == 0);
}

TEST_CASE("degenerate windows") {
  const Source flat = [](const Eigen::ArrayXd& x) { return Eigen::ArrayXd::Constant(x.size(), 3.0); };
  CHECK_THROWS_AS(window_violation(flat, {0.0, 1.0}, 1000, 1, Distance::md), NumericError);
  CHECK_THROWS_AS(convergence_check(flat, {0.0, 1.0, 0.5, 0.25, 100}, 1, Distance::md),
                  NumericError);
}

TEST_CASE("convergence") {
  const WindowSpec spec{0.0, 1.0, 0.5, 0.25, 100};
  const auto r = convergence_check(identity(), spec, 1, Distance::md, 0.01, 2500);
  CHECK(r.n >= 2500);
  CHECK(r.deviation < 0.01);
  CHECK(r.history.back().n == r.n);
  // A budget too small for the tolerance is reported, not silently accepted.
  CHECK_THROWS_AS(convergence_check(identity(), spec, 4, Distance::md, 1e-9, 2500, 10000),
                  NumericError);
}
