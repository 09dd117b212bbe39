#include "doctest.h"

#include "ehdcs/recovery.hpp"
#include "ehdcs/rng.hpp"
#include "ehdcs/scci.hpp"
#include "ehdcs/sensing.hpp"
#include "oracles.hpp"

using namespace ehdcs;

namespace {

struct Instance {
  ScciEnsemble ens;
  SensingEnsemble sensing;
  MeasurementSet ms;
};

Instance make_instance(const ScciParams& p, const std::vector<int>& m, std::uint64_t seed) {
  Instance in;
  in.ens = generate_ensemble(p, identity_basis(p.n), seed);
  for (int k = 0; k < p.K; ++k) {
    in.sensing.matrices.push_back(gaussian_matrix(m[k], p.n, derive_seed(seed, 0, streams::sensing, k)));
    in.ms.y.push_back(acquire(in.sensing.matrices.back(), in.ens.x[k]));
    in.ms.quant.emplace_back();
  }
  return in;
}

bool recovered(RecoveryResult r, const Instance& in, double threshold = 1e-4) {
  assess(r, in.ens.f, threshold);
  return r.success;
}

}  // namespace

TEST_SUITE("recovery") {
  TEST_CASE("success predicate") {
    const std::vector<Vector> f{Vector::Ones(10), Vector::Ones(10)};
    CHECK(is_success(f, f, 1e-3));
    std::vector<Vector> g = f;
    g[1][0] += std::sqrt(2e-3 * 10);
    CHECK(relative_squared_error(f[1], g[1]) == doctest::Approx(2e-3));
    CHECK_FALSE(is_success(f, g, 1e-3));
    g[0][0] = 1.0 + std::sqrt(1e-4 * 10);
    g[1][0] = 1.0 + std::sqrt(9e-4 * 10);
    CHECK(is_success(f, g, 1e-3));
    CHECK_THROWS_AS(relative_squared_error(Vector::Zero(3), Vector::Ones(3)), std::domain_error);
  }

  TEST_CASE("full-rate subsampling is exact for both pipelines") {
    const ScciParams p{40, 3, 6, 3, 1.0};
    const ScciEnsemble ens = generate_ensemble(p, identity_basis(40), 5);
    SensingEnsemble se;
    se.kind = SensingKind::row_subsample;
    MeasurementSet ms;
    for (int k = 0; k < 3; ++k) {
      se.matrices.push_back(subsample_matrix(40, 40, 10 + k));
      ms.y.push_back(acquire(se.matrices.back(), ens.f[k]));
      ms.quant.emplace_back();
    }
    for (auto r : {cs_recover(se, ms, *ens.basis), dcs_recover(se, ms, *ens.basis)}) {
      assess(r, ens.f, 1e-12);
      CHECK(r.success);
      for (double e : r.per_sensor_rel_err) CHECK(e < 1e-20);
    }
  }

  TEST_CASE("a sensor below its sparsity cannot be recovered by CS") {
    const ScciParams p{50, 2, 4, 1, 1.0};
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      Instance in = make_instance(p, {12, 0}, seed);
      const int s1 = static_cast<int>((in.ens.x[1].array() != 0.0).count());
      in = make_instance(p, {12, s1 - 1}, seed);
      RecoveryResult r = cs_recover(in.sensing, in.ms, *in.ens.basis);
      assess(r, in.ens.f, 1e-4);
      CHECK_FALSE(r.success);
      CHECK(r.per_sensor_rel_err[1] >= 1e-4);
    }
  }

  TEST_CASE("CS decisions at twelve measurements match the LP oracle") {
    const ScciParams p{50, 2, 4, 1, 1.0};
    int agree = 0, total = 0, ok = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Instance in = make_instance(p, {12, 12}, seed);
      RecoveryResult r = cs_recover(in.sensing, in.ms, *in.ens.basis);
      assess(r, in.ens.f, 1e-4);
      for (int k = 0; k < 2; ++k) {
        const Vector lp = oracle::l1_min(in.sensing.matrices[k], in.ms.y[k]).x;
        const bool lp_ok = (lp - in.ens.x[k]).squaredNorm() / in.ens.x[k].squaredNorm() < 1e-4;
        const bool ours = r.per_sensor_rel_err[k] < 1e-4;
        agree += lp_ok == ours;
        ok += ours;
        ++total;
      }
    }
    MESSAGE("per-sensor CS success at m=12: " << ok << "/" << total);
    CHECK(agree >= total - 2);
  }

  TEST_CASE("joint solution is consistent with the extended system") {
    const ScciParams p{50, 3, 4, 1, 1.0};
    Instance in = make_instance(p, {6, 0, 9}, 77);
    const RecoveryResult r = dcs_recover(in.sensing, in.ms, *in.ens.basis);
    const Vector y = stack_measurements(in.ms);
    CHECK((build_extended(in.sensing) * r.z_tilde - y).norm() <= 1e-6 * std::max(1.0, y.norm()));
    for (int k = 0; k < 3; ++k) {
      const Vector xk = r.z_tilde.head(50) + r.z_tilde.segment(50 * (k + 1), 50);
      CHECK((xk - r.x_hat[k]).norm() < 1e-12);
    }
  }

  TEST_CASE("zero-measurement sensors") {
    const ScciParams p{50, 2, 4, 1, 1.0};
    Instance in = make_instance(p, {20, 0}, 3);
    RecoveryResult cs = cs_recover(in.sensing, in.ms, *in.ens.basis);
    CHECK(cs.sensor_failed[1]);
    assess(cs, in.ens.f, 1e-4);
    CHECK_FALSE(cs.success);
    const RecoveryResult dcs = dcs_recover(in.sensing, in.ms, *in.ens.basis);
    CHECK(dcs.x_hat.size() == 2);
    CHECK(dcs.solver_failures == 0);
  }

  TEST_CASE("single sensor: CS and DCS agree") {
    const ScciParams p{50, 1, 4, 2, 1.0};
    int agree = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Instance in = make_instance(p, {8 + static_cast<int>(seed % 12)}, seed);
      const RecoveryResult cs = cs_recover(in.sensing, in.ms, *in.ens.basis);
      const RecoveryResult dcs = dcs_recover(in.sensing, in.ms, *in.ens.basis);
      // any split of the CS solution is feasible for the joint problem
      CHECK(dcs.z_tilde.lpNorm<1>() <= cs.x_hat[0].lpNorm<1>() + 1e-6);
      agree += recovered(cs, in) == recovered(dcs, in);
    }
    CHECK(agree >= 95);
  }

  TEST_CASE("sensing diversity with unequal budgets") {
    // The second sensor is below its sparsity, so CS must fail every trial.
    const ScciParams p{50, 2, 4, 1, 1.0};
    for (auto budgets : {std::vector<int>{4, 3}, std::vector<int>{20, 3}, std::vector<int>{15, 4}}) {
      int cs_ok = 0, dcs_ok = 0;
      for (std::uint64_t seed = 0; seed < 400; ++seed) {
        Instance in = make_instance(p, budgets, seed);
        cs_ok += recovered(cs_recover(in.sensing, in.ms, *in.ens.basis), in);
        dcs_ok += recovered(dcs_recover(in.sensing, in.ms, *in.ens.basis), in);
      }
      MESSAGE("(" << budgets[0] << "," << budgets[1] << "): CS " << cs_ok << "/400, DCS " << dcs_ok << "/400");
      CHECK(cs_ok == 0);
      if (budgets[0] + budgets[1] >= 19) CHECK(dcs_ok >= 8);
    }
  }

  TEST_CASE("joint recovery beats separate recovery at equal totals") {
    const ScciParams p{50, 2, 4, 1, 1.0};
    for (int m : {10, 12, 16}) {
      int cs_ok = 0, dcs_ok = 0;
      for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Instance in = make_instance(p, {m, m}, seed);
        cs_ok += recovered(cs_recover(in.sensing, in.ms, *in.ens.basis), in);
        dcs_ok += recovered(dcs_recover(in.sensing, in.ms, *in.ens.basis), in);
      }
      MESSAGE("(" << m << "," << m << "): CS " << cs_ok << "/300, DCS " << dcs_ok << "/300");
      CHECK(dcs_ok > cs_ok);
    }
  }

  TEST_CASE("more measurements never hurt, paired seeds") {
    const ScciParams p{50, 2, 4, 1, 1.0};
    std::vector<int> wins(4, 0);
    const int budgets[] = {4, 7, 10, 14};
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      for (int b = 0; b < 4; ++b) {
        Instance in = make_instance(p, {budgets[b], 6}, seed);
        wins[b] += recovered(dcs_recover(in.sensing, in.ms, *in.ens.basis), in);
      }
    }
    for (int b = 1; b < 4; ++b) {
      const double p0 = wins[b - 1] / 300.0, p1 = wins[b] / 300.0;
      const double sigma = std::sqrt((p0 * (1 - p0) + p1 * (1 - p1)) / 300.0);
      CHECK(p1 >= p0 - 2 * sigma);
    }
  }
}
