#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rdcdyn/log.hpp"
#include "rdcdyn/rdc.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <sstream>

using namespace rdcdyn;

namespace {

PrincipalFrame frame_of(double sxx, double syy, double szz, double a, double b,
                        double g) {
  return PrincipalFrame{sxx, syy, szz, {a, b, g}};
}

const PrincipalFrame kMedium1 = frame_of(3e-4, 5e-4, -8e-4, 0, 0, 0);
const PrincipalFrame kMedium2 = frame_of(-4e-4, -6e-4, 1e-3, 40, 50, -60);

const std::vector<VectorType> kAllTypes = {VectorType::N_H, VectorType::C_N,
                                           VectorType::C_H, VectorType::CA_HA};

DynamicsModel arc_model(int n_residues, int hinge, double degrees,
                        std::vector<double> occupancies) {
  DynamicsModel model;
  const BackboneStructure helix = make_ideal_helix(n_residues);
  model.states.push_back(helix);
  for (std::size_t i = 1; i < occupancies.size(); ++i)
    model.states.push_back(rotate_phi(helix, hinge, degrees * double(i)));
  model.occupancies = std::move(occupancies);
  model.static_domain = {2, hinge - 2};
  model.dynamic_domain = {hinge + 1, n_residues};
  return model;
}

}  // namespace

TEST_CASE("simulate_rdcs: zero tensor gives zero couplings") {
  const BackboneStructure s = make_ideal_helix(15);
  const RdcSet set = simulate_rdcs(s, frame_of(0, 0, 0, 0, 0, 0), kAllTypes,
                                   s.full_range());
  CHECK(set.size() > 40);
  for (const auto& [key, obs] : set) CHECK(obs.value_hz == 0.0);
}

TEST_CASE("simulate_rdcs: N-H along principal z") {
  // A single vector pointing along z under the diagonal medium-1 tensor:
  // D = 24350 * (-8e-4) = -19.48 Hz.
  std::vector<Residue> rs(2);
  rs[0].index = 1;
  rs[0].set_atom(BackboneAtom::N, Vec3(0, 0, 0));
  rs[0].set_atom(BackboneAtom::H, Vec3(0, 0, 1.02));
  rs[1].index = 2;  // placeholder so the structure has 2 residues
  rs[1].set_atom(BackboneAtom::N, Vec3(5, 0, 0));
  const BackboneStructure s(std::move(rs), 'A');
  set_log_quiet(true);
  const RdcSet set =
      simulate_rdcs(s, kMedium1, {VectorType::N_H}, s.full_range());
  set_log_quiet(false);
  REQUIRE(set.size() == 1);
  CHECK(set.find({1, VectorType::N_H})->value_hz ==
        doctest::Approx(-19.48).epsilon(1e-6));
}

TEST_CASE("simulate_rdcs agrees with the angle-form oracle on a helix") {
  const BackboneStructure s = make_ideal_helix(20);
  const RdcSet set = simulate_rdcs(s, kMedium1, kAllTypes, s.full_range());
  const auto vectors = build_vectors(s, kAllTypes, s.full_range());
  for (const VectorRecord& rec : vectors) {
    const double want = oracle::angle_form_rdc(
        kMedium1.s_xx, kMedium1.s_yy, kMedium1.s_zz, 0, 0, 0, rec.v,
        dmax_hz(rec.type));
    CHECK(set.find({rec.residue, rec.type})->value_hz ==
          doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("average_rdcs: trivial occupancies") {
  const BackboneStructure s = make_ideal_helix(10);
  const RdcSet a = simulate_rdcs(s, kMedium1, {VectorType::N_H},
                                 s.full_range());
  const RdcSet b = simulate_rdcs(rotate_phi(s, 5, 60), kMedium1,
                                 {VectorType::N_H}, s.full_range());

  const RdcSet only_a = average_rdcs({a, b}, {1.0, 0.0});
  for (const auto& [key, obs] : only_a)
    CHECK(obs.value_hz == doctest::Approx(a.find(key)->value_hz));

  const RdcSet same = average_rdcs({a, a}, {0.3, 0.7});
  for (const auto& [key, obs] : same)
    CHECK(obs.value_hz == doctest::Approx(a.find(key)->value_hz));
}

TEST_CASE("average_rdcs: constructed arithmetic") {
  RdcSet a("m"), b("m");
  a.insert({1, VectorType::N_H}, {10.0, std::nullopt});
  b.insert({1, VectorType::N_H}, {-5.0, std::nullopt});
  const RdcSet avg = average_rdcs({a, b}, {0.6, 0.4});
  CHECK(avg.find({1, VectorType::N_H})->value_hz == doctest::Approx(4.0));
}

TEST_CASE("average_rdcs: intersection and error cases") {
  RdcSet a("m"), b("m");
  a.insert({1, VectorType::N_H}, {1.0, std::nullopt});
  a.insert({2, VectorType::N_H}, {2.0, std::nullopt});
  b.insert({1, VectorType::N_H}, {3.0, std::nullopt});
  set_log_quiet(true);
  const RdcSet avg = average_rdcs({a, b}, {0.5, 0.5});
  set_log_quiet(false);
  CHECK(avg.size() == 1);

  RdcSet c("m");
  c.insert({9, VectorType::N_H}, {0.0, std::nullopt});
  CHECK_THROWS_AS(average_rdcs({a, c}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(average_rdcs({a, b}, {0.5, 0.6}), std::invalid_argument);
}

TEST_CASE("average over permuted state order is identical") {
  const BackboneStructure s = make_ideal_helix(12);
  const RdcSet a = simulate_rdcs(s, kMedium2, {VectorType::N_H},
                                 s.full_range());
  const RdcSet b = simulate_rdcs(rotate_phi(s, 6, 30), kMedium2,
                                 {VectorType::N_H}, s.full_range());
  const RdcSet ab = average_rdcs({a, b}, {0.3, 0.7});
  const RdcSet ba = average_rdcs({b, a}, {0.7, 0.3});
  for (const auto& [key, obs] : ab)
    CHECK(obs.value_hz == doctest::Approx(ba.find(key)->value_hz));
}

TEST_CASE("add_noise: zero width, determinism, uniform statistics") {
  RdcSet base("m");
  for (int i = 0; i < 10000; ++i)
    base.insert({i, VectorType::N_H}, {0.0, std::nullopt});

  const RdcSet same = add_noise(base, 0.0, 99);
  for (const auto& [key, obs] : same) CHECK(obs.value_hz == 0.0);

  const RdcSet n1 = add_noise(base, 1.0, 1234);
  const RdcSet n2 = add_noise(base, 1.0, 1234);
  double max_abs = 0, mean_abs = 0;
  for (const auto& [key, obs] : n1) {
    CHECK(obs.value_hz == n2.find(key)->value_hz);
    CHECK(*obs.error_hz == 1.0);
    max_abs = std::max(max_abs, std::abs(obs.value_hz));
    mean_abs += std::abs(obs.value_hz);
  }
  mean_abs /= double(n1.size());
  CHECK(max_abs <= 1.0);
  // |uniform(-1,1)| has mean 0.5.
  CHECK(mean_abs == doctest::Approx(0.5).epsilon(0.04));

  const RdcSet n3 = add_noise(base, 1.0, 1235);
  bool differs = false;
  for (const auto& [key, obs] : n3)
    if (obs.value_hz != n1.find(key)->value_hz) differs = true;
  CHECK(differs);
}

TEST_CASE("dynamics model validation") {
  DynamicsModel model = arc_model(30, 15, 60, {0.5, 0.5});
  model.validate();

  DynamicsModel bad = model;
  bad.occupancies = {0.6, 0.6};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  // A state whose static domain moved is rejected.
  DynamicsModel moved = model;
  moved.states[1] = rotate_phi(model.states[0], 5, 25.0);
  CHECK_THROWS_AS(moved.validate(), std::invalid_argument);
}

TEST_CASE("simulate_dynamics: single state equals plain simulation") {
  const BackboneStructure helix = make_ideal_helix(25);
  DynamicsModel model;
  model.states = {helix};
  model.occupancies = {1.0};
  model.static_domain = {2, 10};
  model.dynamic_domain = {15, 25};
  const auto sets = simulate_dynamics(model, {{"m1", kMedium1}}, kAllTypes,
                                      0.0, 7);
  const RdcSet direct =
      simulate_rdcs(helix, kMedium1, kAllTypes, helix.full_range(), "m1");
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].size() == direct.size());
  for (const auto& [key, obs] : sets[0])
    CHECK(obs.value_hz == doctest::Approx(direct.find(key)->value_hz));
}

TEST_CASE("simulate_dynamics: static-domain couplings are state-invariant") {
  const DynamicsModel model = arc_model(40, 25, 60, {0.5, 0.5});
  const auto sets = simulate_dynamics(model, {{"m1", kMedium1}}, kAllTypes,
                                      0.0, 7);
  const RdcSet single = simulate_rdcs(model.states[0], kMedium1, kAllTypes,
                                      model.states[0].full_range(), "m1");
  for (const auto& [key, obs] : sets[0]) {
    if (!model.static_domain.contains(key.residue)) continue;
    CHECK(obs.value_hz ==
          doctest::Approx(single.find(key)->value_hz).epsilon(1e-12));
  }
}

TEST_CASE("simulate_dynamics: identical states collapse to one") {
  const BackboneStructure helix = make_ideal_helix(20);
  DynamicsModel model;
  model.states = {helix, helix, helix};
  model.occupancies = {0.2, 0.3, 0.5};
  model.static_domain = {2, 8};
  model.dynamic_domain = {12, 20};
  const auto sets =
      simulate_dynamics(model, {{"m2", kMedium2}}, kAllTypes, 0.0, 3);
  const RdcSet direct =
      simulate_rdcs(helix, kMedium2, kAllTypes, helix.full_range(), "m2");
  for (const auto& [key, obs] : sets[0])
    CHECK(obs.value_hz == doctest::Approx(direct.find(key)->value_hz));
}

TEST_CASE("rdc csv round trip") {
  const DynamicsModel model = arc_model(20, 10, 60, {0.7, 0.3});
  const auto sets = simulate_dynamics(
      model, {{"m1", kMedium1}, {"m2", kMedium2}}, kAllTypes, 1.0, 42);
  std::ostringstream os;
  write_rdc_csv(os, sets);
  std::istringstream in(os.str());
  const auto back = read_rdc_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].medium() == "m1");
  CHECK(back[1].medium() == "m2");
  for (std::size_t m = 0; m < 2; ++m) {
    REQUIRE(back[m].size() == sets[m].size());
    for (const auto& [key, obs] : sets[m]) {
      const RdcObservation* o = back[m].find(key);
      REQUIRE(o != nullptr);
      CHECK(o->value_hz == doctest::Approx(obs.value_hz).epsilon(1e-9));
      CHECK(*o->error_hz == doctest::Approx(*obs.error_hz));
    }
  }
}

TEST_CASE("redcat listing carries coordinates and values") {
  const BackboneStructure s = make_ideal_helix(8);
  const RdcSet set = simulate_rdcs(s, kMedium1, {VectorType::N_H, VectorType::C_N},
                                   s.full_range());
  std::ostringstream os;
  write_redcat(os, s, set);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        static_cast<long>(set.size()));
  CHECK(text.find("N-H") != std::string::npos);
  CHECK(text.find("C'-N") != std::string::npos);
}

TEST_CASE("duplicate keys are rejected") {
  RdcSet set("m");
  set.insert({1, VectorType::N_H}, {1.0, std::nullopt});
  CHECK_THROWS_AS(set.insert({1, VectorType::N_H}, {2.0, std::nullopt}),
                  std::invalid_argument);
  CHECK_THROWS_AS(RdcSet(""), std::invalid_argument);
}
