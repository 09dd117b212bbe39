#include "doctest.h"

#include <random>
#include <filesystem>
#include <fstream>

#include "ehdcs/analysis.hpp"
#include "ehdcs/dataio.hpp"
#include "ehdcs/montecarlo.hpp"

using namespace ehdcs;

namespace {

CampaignConfig table_config(double total, double ratio, RecoveryMode mode, long long trials) {
  CampaignConfig c;
  c.scci = {50, 2, 4, 1, 1.0};
  c.eh = EhParams::from_total(total, ratio, 2, 1.0);
  c.mode = mode;
  c.trials = trials;
  c.seed = 3;
  return c;
}

std::filesystem::path temp_file(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ehdcs_test_" + std::to_string(std::random_device{}()) + "_" + name);
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST_SUITE("montecarlo") {
  TEST_CASE("Wilson interval") {
    const Interval none = wilson_interval(0, 100);
    CHECK(none.low == 0.0);
    CHECK(none.high == doctest::Approx(0.0370).epsilon(0.01));
    const Interval half = wilson_interval(50, 100);
    CHECK(half.low == doctest::Approx(0.4038).epsilon(0.001));
    CHECK(half.high == doctest::Approx(0.5962).epsilon(0.001));
    CHECK(wilson_interval(100, 100).high == 1.0);
    CHECK_THROWS_AS(wilson_interval(5, 0), std::invalid_argument);
    CHECK_THROWS_AS(wilson_interval(6, 5), std::invalid_argument);
    const PidrEstimate e = make_estimate(25, 100, 1, 2);
    CHECK(e.pidr == 0.25);
    CHECK(e.standard_error() == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
  }

  TEST_CASE("mode names round trip") {
    CHECK(parse_recovery_mode(to_string(RecoveryMode::cs)) == RecoveryMode::cs);
    CHECK(parse_recovery_mode(to_string(RecoveryMode::dcs)) == RecoveryMode::dcs);
    CHECK_THROWS_AS(parse_recovery_mode("joint"), std::invalid_argument);
  }

  TEST_CASE("configuration validation and digest") {
    CampaignConfig c = table_config(200, 1, RecoveryMode::dcs, 100);
    CHECK_NOTHROW(c.validate());
    CampaignConfig w = c;
    w.workers = 7;
    CHECK(w.digest() == c.digest());
    CampaignConfig s = c;
    s.seed = 4;
    CHECK(s.digest() != c.digest());
    s = c;
    s.mode = RecoveryMode::cs;
    CHECK(s.digest() != c.digest());
    s = c;
    s.eh.tau = 1.5;
    CHECK(s.digest() != c.digest());
    s = c;
    s.trials = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = c;
    s.threshold = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = c;
    s.eh.lambdas = {0.1};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }

  TEST_CASE("trial budgets follow the harvest") {
    const CampaignConfig c = table_config(200, 1, RecoveryMode::dcs, 10);
    for (long long t = 0; t < 10; ++t) {
      const TrialOutcome o = run_trial(c, t);
      REQUIRE(o.budgets.size() == 2);
      for (int m : o.budgets) {
        CHECK(m >= 0);
        CHECK(m <= 50);
      }
      const TrialOutcome again = run_trial(c, t);
      CHECK(again.budgets == o.budgets);
      CHECK(again.success == o.success);
    }
  }

  TEST_CASE("results do not depend on the worker count") {
    for (RecoveryMode mode : {RecoveryMode::cs, RecoveryMode::dcs}) {
      CampaignConfig c = table_config(120, 4.0 / 3.0, mode, 400);
      c.workers = 1;
      const PidrEstimate a = run_campaign(c);
      c.workers = 3;
      const PidrEstimate b = run_campaign(c);
      c.workers = 8;
      const PidrEstimate d = run_campaign(c);
      CHECK(a.failures == b.failures);
      CHECK(a.failures == d.failures);
      CHECK(a.config_digest == d.config_digest);
      CHECK(a.failures > 0);
    }
  }

  TEST_CASE("free measurements never fail") {
    for (RecoveryMode mode : {RecoveryMode::cs, RecoveryMode::dcs}) {
      CampaignConfig c = table_config(200, 4.0 / 3.0, mode, 200);
      c.eh.tau = 0.0;
      CHECK(run_campaign(c).failures == 0);
    }
  }

  TEST_CASE("empirical PIDR respects the lower bound") {
    for (double E : {100.0, 200.0, 300.0}) {
      for (RecoveryMode mode : {RecoveryMode::cs, RecoveryMode::dcs}) {
        const CampaignConfig c = table_config(E, 1.0, mode, 1500);
        const PidrEstimate est = run_campaign(c);
        const double bound = mode == RecoveryMode::cs ? pidr_cs_bound(c.eh, 5, 2) : pidr_dcs_bound(c.eh, 4, 1, 2);
        INFO("E=" << E << " mode=" << to_string(mode) << " pidr=" << est.pidr << " bound=" << bound);
        CHECK(est.pidr >= bound - 3 * est.standard_error());
      }
    }
  }

  TEST_CASE("ledger resumes finished campaigns") {
    const auto path = temp_file("ledger.csv");
    const CampaignConfig c = table_config(150, 1, RecoveryMode::dcs, 150);
    PidrEstimate first;
    {
      CampaignLedger ledger(path);
      CHECK_FALSE(ledger.find(c.digest()).has_value());
      first = run_campaign_cached(c, &ledger);
      REQUIRE(ledger.find(c.digest()).has_value());
    }
    CampaignLedger reopened(path);
    const auto hit = reopened.find(c.digest());
    REQUIRE(hit.has_value());
    CHECK(hit->failures == first.failures);
    CHECK(hit->trials == first.trials);
    CHECK(hit->ci95.high == doctest::Approx(first.ci95.high));
    CHECK(run_campaign_cached(c, &reopened).failures == first.failures);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("schema_version,digest,mode,trials,seed,failures", 0) == 0);
    int rows = 0;
    for (std::string line; std::getline(in, line);) rows += !line.empty();
    CHECK(rows == 1);
    std::filesystem::remove(path);
  }

  TEST_CASE("energy search returns a bracketed answer") {
    CampaignConfig base = table_config(100, 1, RecoveryMode::dcs, 300);
    TargetSearchOptions opts;
    const TargetSearchResult r = energy_for_target(base, 1.0, 0.1, opts);
    CHECK(r.estimate.ci95.high <= 0.1);
    CHECK(r.energy >= opts.low);
    CHECK(r.probes.size() >= 3);
    // every probe below the answer by more than the tolerance misses the target
    for (const auto& p : r.probes)
      if (p.energy < r.energy - opts.tolerance) CHECK(p.estimate.ci95.high > 0.1);
    opts.reuse_monotone = false;
    const TargetSearchResult plain = energy_for_target(base, 1.0, 0.1, opts);
    CHECK(plain.energy == r.energy);
    CHECK(plain.estimate.failures == r.estimate.failures);
  }

  TEST_CASE("energy search reports unreachable targets") {
    CampaignConfig base = table_config(100, 1, RecoveryMode::dcs, 50);
    TargetSearchOptions opts;
    opts.max_high = 4000;
    CHECK_THROWS_AS(energy_for_target(base, 1.0, 1e-4, opts), std::runtime_error);
    CHECK_THROWS_AS(energy_for_target(base, 1.0, 0.0, opts), std::invalid_argument);
    CHECK_THROWS_AS(energy_for_target(base, 1.0, 1.0, opts), std::invalid_argument);
  }

  TEST_CASE("signal campaign on smooth windows") {
    const int n = 64;
    SignalCampaignConfig c;
    c.basis = std::make_shared<const Matrix>(dct_basis(n));
    for (int w = 0; w < 3; ++w) {
      std::vector<Vector> win;
      for (int k = 0; k < 2; ++k) {
        Vector f(n);
        for (int i = 0; i < n; ++i) f[i] = 20.0 + w + 2.0 * std::cos(M_PI * (i + 0.5) * (1 + k) / n);
        win.push_back(f);
      }
      c.windows.push_back(win);
    }
    c.eh = EhParams::from_total(100.0, 1.0, 2, 0.0);
    c.trials = 20;
    for (RecoveryMode mode : {RecoveryMode::cs, RecoveryMode::dcs}) {
      c.mode = mode;
      CHECK(run_signal_campaign(c).failures == 0);
    }
    c.eh = EhParams::from_total(100.0, 1.0, 2, 1.0);
    c.eh.lambda_c = 1e12;
    c.eh.lambdas = {1e12, 1e12};
    c.mode = RecoveryMode::cs;
    CHECK(run_signal_campaign(c).failures == 20);
    c.workers = 2;
    c.eh = EhParams::from_total(20.0, 1.0, 2, 1.0);
    const PidrEstimate a = run_signal_campaign(c);
    c.workers = 1;
    CHECK(run_signal_campaign(c).failures == a.failures);
  }
}
