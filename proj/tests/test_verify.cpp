#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aniso/report.hpp"
#include "aniso/verify.hpp"

using namespace aniso;

namespace {

VecN vec2(double a, double b) {
  VecN v(2);
  v << a, b;
  return v;
}

NormModel euclid(int n) { return NormModel::weighted_euclidean(MatN(MatN::Identity(n, n))); }

// int_{B_s} |x . e|^g dx in the plane, |e| = 1
double plane_ball_power_integral(double s, double g) {
  const double angular = 2.0 * std::sqrt(M_PI) * std::tgamma((g + 1.0) / 2.0) /
                         std::tgamma(g / 2.0 + 1.0);
  return std::pow(s, g + 2.0) * angular / (g + 2.0);
}

Problem plain_problem(int res, double gamma, NormModel nm, ScalarMap bd, double half_side = 1.0,
                      double q = 6.0) {
  return Problem(Box::centered(2, half_side), res, gamma, std::move(nm), q, std::move(bd));
}

}  // namespace

TEST_CASE("caccioppoli ratio: zero for constants, closed form for linear fields") {
  Problem p = plain_problem(64, 2.0, euclid(2), [](const VecN&) { return 3.0; });
  DiscreteField cst(*p.grid, [](const VecN&) { return 3.0; });
  VecN c0 = vec2(0, 0);
  CHECK(caccioppoli_ratio(p, cst, c0, 0.35) == 0.0);

  // u = b.x: || rho(Du) ||_{L^g(B_R)} = |b| |B_R|^{1/g};
  // denominator = ||u||_{L^g(B_2R)} / R
  VecN b = vec2(2.0, 0.0);
  const double R = 0.3, gamma = 2.0;
  double expected_num = b.norm() * std::pow(M_PI * R * R, 1.0 / gamma);
  double expected_den =
      std::pow(std::pow(b.norm(), gamma) * plane_ball_power_integral(2.0 * R, gamma),
               1.0 / gamma) / R;
  const double expected = expected_num / expected_den;
  double prev = 0.0;
  for (int res : {64, 128}) {
    Problem pr = plain_problem(res, gamma, euclid(2), [&](const VecN& x) { return b.dot(x); });
    DiscreteField lin(*pr.grid, [&](const VecN& x) { return b.dot(x); });
    const double got = caccioppoli_ratio(pr, lin, c0, R);
    CHECK(got == doctest::Approx(expected).epsilon(0.02));
    if (prev != 0.0) CHECK(got == doctest::Approx(prev).epsilon(0.02));
    prev = got;
  }

  CHECK_THROWS_AS(caccioppoli_ratio(p, cst, c0, 11.0), std::invalid_argument);
  CHECK_THROWS_AS(caccioppoli_ratio(p, cst, vec2(0.8, 0), 0.35), std::domain_error);
}

TEST_CASE("sup-bound ratio: scale invariance and the delta exponent") {
  CHECK(data_exponent(3, 2.0, 6.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(data_exponent_checked(3, 2.0, 6.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(data_exponent_checked(2, 2.0, 2.0), std::invalid_argument);

  Problem p = plain_problem(64, 2.0, euclid(2), [](const VecN&) { return 2.5; });
  VecN c0 = vec2(0, 0);
  for (double c : {1.0, 2.5, 40.0}) {
    DiscreteField cf(*p.grid, [=](const VecN&) { return c; });
    const double r1 = sup_bound_ratio(p, cf, c0, 0.1, 0.2, 2.0);
    DiscreteField c1(*p.grid, [](const VecN&) { return 1.0; });
    const double rbase = sup_bound_ratio(p, c1, c0, 0.1, 0.2, 2.0);
    CHECK(r1 == doctest::Approx(rbase).epsilon(1e-9));
  }
  CHECK_THROWS_AS(sup_bound_ratio(p, DiscreteField(*p.grid), c0, 0.3, 0.2, 1.0),
                  std::invalid_argument);
}

TEST_CASE("weak harnack ratio: closed-form linear witness within 2%") {
  // u = 2 + x1, R = 0.5, theta = 0.4, tau = 0.8, p = 1:
  // numerator inf_{B_0.2}: 1.8; denominator R^{-2} * int_{B_0.4} (2 + x1)
  const double R = 0.5, theta = 0.4, tau = 0.8;
  const double expected = 1.8 / (std::pow(R, -2.0) * (2.0 * M_PI * 0.4 * 0.4));
  Problem p = plain_problem(128, 2.0, euclid(2), [](const VecN& x) { return 2.0 + x[0]; }, 1.25);
  DiscreteField u(*p.grid, [](const VecN& x) { return 2.0 + x[0]; });
  VecN c0 = vec2(0, 0);
  const double got = weak_harnack_ratio(p, u, c0, R, theta, tau, 1.0);
  CHECK(got == doctest::Approx(expected).epsilon(0.02));

  // both sides scale linearly in u
  DiscreteField u5 = u;
  u5.values *= 5.0;
  CHECK(weak_harnack_ratio(p, u5, c0, R, theta, tau, 1.0) ==
        doctest::Approx(got).epsilon(1e-9));

  DiscreteField zero(*p.grid);
  CHECK(std::isinf(weak_harnack_ratio(p, zero, c0, R, theta, tau, 1.0)));
  CHECK_THROWS_AS(weak_harnack_ratio(p, u, c0, R, 0.9, 0.8, 1.0), std::invalid_argument);
}

TEST_CASE("harnack ratio: constants give 1, the linear witness gives 1.5") {
  Problem p = plain_problem(128, 2.0, euclid(2), [](const VecN& x) { return 2.0 + x[0]; });
  VecN c0 = vec2(0, 0);
  DiscreteField cst(*p.grid, [](const VecN&) { return 7.0; });
  HarnackResult hc = harnack_ratio(p, cst, c0, 0.2);
  CHECK(hc.ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!hc.degenerate);

  // sup_{B_0.25}(2+x1) = 2.25, inf_{B_0.5}(2+x1) = 1.5
  DiscreteField u(*p.grid, [](const VecN& x) { return 2.0 + x[0]; });
  HarnackResult hr = harnack_ratio(p, u, c0, 0.25);
  CHECK(hr.ratio == doctest::Approx(1.5).epsilon(0.02));

  DiscreteField u3 = u;
  u3.values *= 3.0;
  CHECK(harnack_ratio(p, u3, c0, 0.25).ratio == doctest::Approx(hr.ratio).epsilon(1e-9));

  DiscreteField zero(*p.grid);
  HarnackResult hz = harnack_ratio(p, zero, c0, 0.2);
  CHECK(hz.degenerate);
  CHECK(hz.ratio == 1.0);
}

TEST_CASE("oscillation profiles: linear decay, constants, the 4/3 power function") {
  Box sq = Box::centered(2, 1.0);
  Grid g(sq, 128);
  VecN c0 = vec2(0, 0);

  DiscreteField lin(g, [](const VecN& x) { return 1.5 * x[0] - 0.5 * x[1]; });
  auto prof = oscillation_profile(lin, c0, 0.4, 4);
  for (size_t k = 0; k + 1 < prof.size(); ++k) CHECK(prof[k + 1].second <= prof[k].second + 1e-12);
  DecayFit fit = fit_decay(prof, 1e-12);
  CHECK(fit.alpha == doctest::Approx(1.0).epsilon(0.02));

  DiscreteField cst(g, [](const VecN&) { return 2.0; });
  auto cprof = oscillation_profile(cst, c0, 0.4, 4);
  for (const auto& [r, osc] : cprof) CHECK(osc == doctest::Approx(0.0));
  CHECK_THROWS_AS(fit_decay(cprof, 1e-12), InsufficientDataError);

  // |x1|^{4/3} - |x2|^{4/3} oscillates like 2 r^{4/3} around the origin
  double prev_alpha = 0.0;
  for (int res : {128, 256}) {
    Grid gf(sq, res);
    DiscreteField w(gf, [](const VecN& x) {
      return std::pow(std::abs(x[0]), 4.0 / 3.0) - std::pow(std::abs(x[1]), 4.0 / 3.0);
    });
    DecayFit f = fit_decay(oscillation_profile(w, c0, 0.4, 5), 1e-9);
    CHECK(f.alpha == doctest::Approx(4.0 / 3.0).epsilon(0.03));
    if (prev_alpha != 0.0) CHECK(f.alpha == doctest::Approx(prev_alpha).epsilon(0.05));
    prev_alpha = f.alpha;
  }

  CHECK_THROWS_AS(oscillation_profile(lin, c0, 0.4, 2), std::invalid_argument);
}

TEST_CASE("fit_decay recovers exact power laws and honors the tail floor") {
  std::vector<std::pair<double, double>> prof;
  for (int k = 0; k < 6; ++k) {
    const double r = 0.5 * std::pow(0.5, k);
    prof.emplace_back(r, std::pow(r, 0.7));
  }
  DecayFit fit = fit_decay(prof, 0.0);
  CHECK(std::abs(fit.alpha - 0.7) <= 1e-10);
  CHECK(fit.residual <= 1e-12);
  CHECK(fit.points_used == 6);

  // points at or below the floor are excluded
  prof.emplace_back(1e-4, 1e-13);
  DecayFit fit2 = fit_decay(prof, 1e-12);
  CHECK(fit2.points_used == 6);
  CHECK(std::abs(fit2.alpha - 0.7) <= 1e-10);

  std::vector<std::pair<double, double>> tiny = {{0.5, 1.0}, {0.25, 0.5}};
  CHECK_THROWS_AS(fit_decay(tiny, 0.0), InsufficientDataError);
}

TEST_CASE("moser schedule: table values and the telescoping identity") {
  auto rows = moser_schedule(4, 2.0, 3);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].beta == 0.0);
  CHECK(rows[0].exponent == 2.0);
  CHECK(rows[1].beta == 0.0);
  CHECK(rows[1].exponent == 2.0);
  CHECK(rows[2].beta == 2.0);
  CHECK(rows[2].exponent == 4.0);
  CHECK(rows[3].beta == 6.0);
  CHECK(rows[3].exponent == 8.0);
  CHECK(rows[0].radius == doctest::Approx(0.5));

  for (auto [n, gamma] : std::vector<std::pair<int, double>>{{3, 1.5}, {3, 2.0}, {4, 2.0},
                                                             {5, 3.0}}) {
    const double chi = sobolev_chi(n, gamma);
    auto sched = moser_schedule(n, gamma, 21);
    for (int k = 0; k + 1 <= 20; ++k)
      CHECK(std::abs(sched[k].exponent * chi - sched[k + 1].exponent) <=
            1e-12 * sched[k + 1].exponent);
    // geometric sum of chi^{-i} equals n/gamma
    double sum = 0.0, term = 1.0;
    for (int i = 0; i < 400 && term > 1e-18; ++i) {
      sum += term;
      term /= chi;
    }
    CHECK(std::abs(sum - n / gamma) <= 1e-12 * (n / gamma));
  }

  CHECK_THROWS_AS(moser_schedule(2, 2.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(moser_schedule(3, 3.5, 5), std::invalid_argument);
}

TEST_CASE("ratio invariance under field scaling with zero data") {
  SweepSpec spec;
  spec.norm_spec = "ellp(4)";
  spec.gamma = 2.0;
  spec.q = 6.0;
  spec.resolutions = {24};
  spec.seeds = 1;
  Problem p = make_sweep_instance(spec, 0, 24);
  SolveOptions opt;
  auto [u, rep] = solve(p, opt);
  DiscreteField su = u;
  su.values *= 3.0;
  VecN c0 = vec2(0, 0);
  CHECK(harnack_ratio(p, su, c0, 0.2).ratio ==
        doctest::Approx(harnack_ratio(p, u, c0, 0.2).ratio).epsilon(1e-9));
  CHECK(weak_harnack_ratio(p, su, c0, 0.42, 0.4, 0.8, 1.0) ==
        doctest::Approx(weak_harnack_ratio(p, u, c0, 0.42, 0.4, 0.8, 1.0)).epsilon(1e-9));
  CHECK(sup_bound_ratio(p, su, c0, 0.1, 0.4, 1.0) ==
        doctest::Approx(sup_bound_ratio(p, u, c0, 0.1, 0.4, 1.0)).epsilon(1e-9));
  CHECK(caccioppoli_ratio(p, su, c0, 0.35) ==
        doctest::Approx(caccioppoli_ratio(p, u, c0, 0.35)).epsilon(1e-9));
}

TEST_CASE("sweep with constant boundary data reports the trivial ratios") {
  SweepSpec spec;
  spec.norm_spec = "euclidean(1)";
  spec.gamma = 2.0;
  spec.q = 6.0;
  spec.resolutions = {16};
  spec.seeds = 1;
  spec.boundary_family = "constant";
  VerificationReport report = sweep(spec);
  CHECK(report.failed_instances == 0);
  REQUIRE(report.instances.size() == 1);
  CHECK(report.instances[0].classification == "solution");
  const SweepSummary* cacc = report.find_summary("caccioppoli", 16);
  REQUIRE(cacc != nullptr);
  CHECK(cacc->max_ratio == 0.0);
  const SweepSummary* har = report.find_summary("harnack", 16);
  REQUIRE(har != nullptr);
  CHECK(har->max_ratio == doctest::Approx(1.0).epsilon(1e-12));
  // constant fields have no oscillation decay to fit
  CHECK(report.find_summary("oscillation_alpha", 16) == nullptr);
}

TEST_CASE("sweep instances are deterministic and failures are recorded") {
  SweepSpec spec;
  spec.norm_spec = "ellp(4)";
  spec.gamma = 2.0;
  spec.q = 6.0;
  spec.resolutions = {16};
  spec.seeds = 2;
  Problem a = make_sweep_instance(spec, 1, 16);
  Problem b = make_sweep_instance(spec, 1, 16);
  for (Index v = 0; v < a.grid->n_vertices(); ++v) {
    const VecN& x = a.grid->vertex(v);
    CHECK(a.boundary(x) == b.boundary(x));
  }

  SweepSpec doomed = spec;
  doomed.solver_max_iterations = 1;
  doomed.solver_tolerance = 1e-15;
  VerificationReport report = sweep(doomed);
  CHECK(report.failed_instances == 2);
  for (const auto& inst : report.instances) CHECK(!inst.error.empty());
}

TEST_CASE("divergence alarms fire on monotone drift only") {
  auto mk = [](const std::string& check, int res, double maxr, double minr) {
    SweepSummary s;
    s.check = check;
    s.resolution = res;
    s.count = 5;
    s.max_ratio = maxr;
    s.min_ratio = minr;
    s.median_ratio = 0.5 * (maxr + minr);
    return s;
  };
  std::vector<SweepSummary> stable = {mk("harnack", 16, 1.20, 1.0), mk("harnack", 32, 1.22, 1.0)};
  CHECK(divergence_alarms(stable, {16, 32}).empty());

  std::vector<SweepSummary> blowup = {mk("harnack", 16, 1.2, 1.0), mk("harnack", 32, 1.5, 1.0),
                                      mk("harnack", 64, 2.0, 1.0)};
  auto alarms = divergence_alarms(blowup, {16, 32, 64});
  REQUIRE(alarms.size() == 1);
  CHECK(alarms[0].check == "harnack");
  CHECK(alarms[0].statistic == "max");

  // the lower-bound check alarms on its minimum collapsing
  std::vector<SweepSummary> collapse = {mk("weak_harnack", 16, 1.0, 0.40),
                                        mk("weak_harnack", 32, 1.0, 0.20)};
  auto alarms2 = divergence_alarms(collapse, {16, 32});
  REQUIRE(alarms2.size() == 1);
  CHECK(alarms2[0].statistic == "min");
}

TEST_CASE("liouville experiment: zero amplitude is flat, decay is monotone") {
  NormModel nm = euclid(2);
  auto flat = liouville_experiment(nm, 2.0, {1.0, 2.0}, 0.0, 8, 1e-8);
  for (const auto& [L, osc] : flat) CHECK(osc <= 1e-9);

  auto decay = liouville_experiment(nm, 2.0, {1.0, 2.0, 4.0}, 1.0, 8, 1e-8);
  REQUIRE(decay.size() == 3);
  CHECK(decay[1].second < decay[0].second);
  CHECK(decay[2].second < decay[1].second);
}

TEST_CASE("report json is deterministic") {
  SweepSpec spec;
  spec.norm_spec = "ellp(4)";
  spec.gamma = 2.0;
  spec.q = 6.0;
  spec.resolutions = {16};
  spec.seeds = 2;
  const std::string a = report_to_json(sweep(spec)).dump(2);
  const std::string b = report_to_json(sweep(spec)).dump(2);
  CHECK(a == b);
  SweepSpec two = spec;
  two.threads = 2;
  CHECK(report_to_json(sweep(two)).dump(2) == a);
}
