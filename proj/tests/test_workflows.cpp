#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "tmera/gradients.hpp"
#include "tmera/resources.hpp"
#include "tmera/workflows.hpp"

using namespace tmera;
using namespace tmera::workflows;
using network::NetworkForm;
using network::NetworkKind;

namespace {

constexpr double pi = std::numbers::pi;

RunConfig small_config() {
  RunConfig c;
  c.model.parameter = 1.25;
  c.network = {"mod-binary", 3, 1, 2, "FREE"};
  c.init.mode = "random";
  c.init.seed = 7;
  c.init.scale = 0.1;
  c.optimizer.max_iter = 150;
  c.optimizer.eps = 1e-9;
  return c;
}

network::InitSpec random_init(std::uint64_t seed, double scale = 0) {
  network::InitSpec s;
  s.mode = network::InitMode::Random;
  s.seed = seed;
  s.scale = scale;
  return s;
}

}  // namespace

TEST_CASE("identity init with no iterations reports e = g") {
  for (double g : {0.5, 1.25}) {
    RunConfig c;
    c.model.parameter = g;
    c.optimizer.max_iter = 0;
    const auto out = optimize_run(c);
    REQUIRE(out.record.iterations.size() == 1);
    CHECK(out.record.final_energy == doctest::Approx(g).epsilon(1e-14));
    REQUIRE(out.reference);
    CHECK(*out.rel_error == doctest::Approx(std::abs(g - out.reference->value) / std::abs(out.reference->value)));
  }
}

TEST_CASE("optimize_run is deterministic") {
  auto c = small_config();
  c.optimizer.max_iter = 20;
  const auto a = optimize_run(c), b = optimize_run(c);
  CHECK(record_jsonl(a.record, a.hash) == record_jsonl(b.record, b.hash));
  CHECK(network::serialize(a.state) == network::serialize(b.state));
  c.init.seed = 8;
  CHECK(record_jsonl(optimize_run(c).record, a.hash) != record_jsonl(a.record, a.hash));
}

TEST_CASE("both product initial states are selectable") {
  RunConfig c;
  c.optimizer.max_iter = 0;
  c.init.mode = "product";
  // R_z(pi/4) R_y(pi/4)|0> has Bloch vector (1/2, 1/2, 1/sqrt2); on a product state
  // the bond energy is -<X>^2 + g <Z>
  const double e = -0.25 + 1.25 / std::sqrt(2.0);
  CHECK(optimize_run(c).record.final_energy == doctest::Approx(e).epsilon(1e-12));
  // the extra R_z acts on |0> as a phase only
  c.init.product = "alternative";
  CHECK(optimize_run(c).record.final_energy == doctest::Approx(e).epsilon(1e-12));
}

TEST_CASE("ttn warm start bookkeeping and nesting") {
  const auto model = models::tfim_term(1.25, 1);
  auto s = network::build_network(NetworkKind::ModBinary1D, 3, 1, 1, NetworkForm::Free, random_init(3, 0.1));
  int dis_gates = 0;
  for (const auto& g : s.gates) dis_gates += g.role == network::Role::Disentangler;
  optimizer::LbfgsConfig cfg;
  cfg.max_iter = 400;
  cfg.eps = 1e-10;
  const auto w = ttn_warmstart(s, model, cfg, cfg);
  // each free two-qubit gate carries 16 complex = 32 real registry entries
  CHECK(w.registry_full - w.registry_phase1 == 32 * dis_gates);
  CHECK(w.phase1.final_energy >= w.phase2.final_energy - 1e-9);
  for (const auto& g : s.gates) CHECK_FALSE(g.frozen);

  // an independently built tree (identity disentanglers, frozen) reaches the same optimum
  auto ttn = network::build_network(NetworkKind::ModBinary1D, 3, 1, 1, NetworkForm::Free, random_init(11, 0.1));
  reset_disentanglers(ttn);
  network::set_disentanglers_frozen(ttn, true);
  const auto r = optimize_state(ttn, model, cfg, Mode::Riemannian);
  CHECK(r.final_energy == doctest::Approx(w.phase1.final_energy).epsilon(1e-6));
}

TEST_CASE("scan grid") {
  RunConfig::Scan p;
  const auto v = scan_values(p);
  REQUIRE(v.size() == 21);
  CHECK(v.front().second == 1.25);
  CHECK(v[10].second == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(v[10].first == "forward");
  CHECK(v[11].first == "backward");
  CHECK(v.back().second == 1.25);
  for (size_t i = 0; i < 10; ++i) CHECK(v[i].second == v[20 - i].second);
  p.backward = false;
  CHECK(scan_values(p).size() == 11);
  p.stop = p.start;
  CHECK(scan_values(p).size() == 1);
  p.step = 0;
  CHECK_THROWS_AS(scan_values(p), InputError);
}

TEST_CASE("single-point scan equals optimize_run") {
  auto c = small_config();
  c.optimizer.max_iter = 30;
  c.scan.start = c.scan.stop = c.model.parameter;
  const auto r = scan_run(c);
  REQUIRE(r.points.size() == 1);
  const auto o = optimize_run(c);
  CHECK(r.points[0].energy == o.record.final_energy);
  CHECK(r.points[0].state == network::serialize(o.state));
  CHECK(r.points[0].init_from == "config");
}

TEST_CASE("forward-backward scan") {
  auto c = small_config();
  c.scan.start = 1.25;
  c.scan.stop = 0.75;
  c.scan.step = 0.25;
  const auto r = scan_run(c);
  REQUIRE(r.points.size() == 5);
  for (const auto& p : r.points) {
    CHECK(p.error.empty());
    REQUIRE(p.reference);
    CHECK(p.energy >= *p.reference - 1e-9);
  }
  // backward never ends above the forward result at the same g
  for (int k = 0; k < 2; ++k) {
    CHECK(r.points[4 - k].parameter == r.points[k].parameter);
    CHECK(r.points[4 - k].energy <= r.points[k].energy + 1e-9);
  }

  // rerunning a point from its warm-start state reproduces it
  const auto model = models::tfim_term(r.points[1].parameter, 1);
  REQUIRE(r.points[1].init_from == "previous");
  auto s = network::deserialize(r.points[0].state);
  const auto rec = optimize_state(s, model, c.lbfgs(), Mode::Riemannian);
  CHECK(std::abs(rec.final_energy - r.points[1].energy) <= 1e-9);
  CHECK(std::abs(simulator::energy_density(network::deserialize(r.points[1].state), model) - r.points[1].energy) <=
        1e-9);

  const auto table = scan_table(r);
  CHECK(table.rfind("# config_hash " + r.hash, 0) == 0);
}

TEST_CASE("critical point is harder at fixed resources") {
  // benchmark-sized network; at q = 1 the paramagnetic side is the harder one
  RunConfig c;
  c.network = {"mod-binary", 4, 2, 2, "FREE"};
  c.init.mode = "random";
  c.init.seed = 1;
  c.init.scale = 0.1;
  c.init.ttn_warmstart = true;
  c.init.ttn_max_iter = 300;
  c.optimizer.max_iter = 1500;
  c.optimizer.eps = 1e-10;
  c.model.parameter = 1.25;
  const auto para = optimize_run(c);
  c.model.parameter = 1.0;
  const auto crit = optimize_run(c);
  CHECK(*crit.rel_error > *para.rel_error);
}

TEST_CASE("wrap_angle lands in (-pi, pi]") {
  CHECK(wrap_angle(pi) == doctest::Approx(pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  CHECK(wrap_angle(0.3 + 8 * pi) == doctest::Approx(0.3));
}

TEST_CASE("identity network histogram is a single zero bin") {
  for (auto form : {NetworkForm::Free, NetworkForm::Can}) {
    const auto s = network::build_network(NetworkKind::Binary1D, 2, 2, 2, form);
    const auto h = angle_histogram(s);
    CHECK(h.skipped == 0);
    for (const auto& [cls, bins] : h.counts) {
      REQUIRE(bins.size() == 1);
      CHECK(bins.begin()->first == 0);
    }
  }
}

TEST_CASE("histogram bookkeeping") {
  const auto s = network::build_network(NetworkKind::ModBinary1D, 2, 2, 2, NetworkForm::Can, random_init(5));
  const auto h = angle_histogram(s, pi / 10);
  int two = 0;
  for (const auto& g : s.gates) two += g.qubits.size() == 2;
  CHECK(two == s.count_two_qubit_gates());
  const long long ising = h.total("XX") + h.total("YY") + h.total("ZZ");
  CHECK(ising == 3LL * two);
  CHECK(h.total("Rz_a") == 4LL * two);  // two pre and two post local factors per CAN gate
  const auto ex = extract_angles(s);
  for (const auto& [cls, v] : ex.by_class) {
    CHECK(h.total(cls) == static_cast<long long>(v.size()));
    for (double a : v) CHECK((a > -pi && a <= pi));
  }
  const auto tab = histogram_table(h, "abc");
  CHECK(tab.find("class\tbin_center\tcount") != std::string::npos);
  CHECK_THROWS_AS(angle_histogram(s, 0), InputError);
}

TEST_CASE("histogram ignores global gate phases") {
  const auto s = network::build_network(NetworkKind::Binary1D, 2, 2, 1, NetworkForm::Free, random_init(9));
  auto p = s;
  for (const auto& g : s.gates)
    p.set_gate(g.id, gates::free_gate(std::polar(1.0, 0.37 * (g.id + 1)) * g.gate.matrix));
  CHECK(angle_histogram(s).counts == angle_histogram(p).counts);
}

TEST_CASE("resource table rows") {
  struct Row {
    NetworkKind kind;
    int b;
    const char* A;
    int reg, aux, r, f;
  };
  // q = 1 rows of the complexity table
  const Row rows[] = {{NetworkKind::Binary1D, 2, "3", 4, 1, 9, 8},
                      {NetworkKind::ModBinary1D, 2, "2", 3, 2, 7, 8},
                      {NetworkKind::Ternary1D, 3, "2", 4, 2, 8, 8},
                      {NetworkKind::Square2x2, 4, "3x3", 14, 2, 28, 16},
                      {NetworkKind::Square3x3, 9, "2x2", 15, 4, 16, 20}};
  for (const auto& w : rows)
    for (int q : {1, 2, 3}) {
      const auto r = resources::estimate_resources(w.kind, q, 2, 4);
      CHECK(r.b == w.b);
      CHECK(r.A == w.A);
      CHECK(r.register_qubits == w.reg * q);
      CHECK(r.aux_qubits_per_layer == w.aux);
      CHECK(r.r == w.r);
      CHECK(r.f == w.f);
      CHECK(r.no_reset_qubits == static_cast<long long>(w.b - 1) * r.A_sites * q * 4);
      CHECK(r.classical == "O(2^{" + std::to_string(w.r) + "q}T)");
      CHECK(r.quantum_value == doctest::Approx(q * 64.0));
    }
  CHECK(resources::estimate_resources(NetworkKind::Square2x2, 1, 1, 1).A_sites == 9);
  CHECK(resources::estimate_resources(NetworkKind::Square3x3, 1, 1, 1).A_sites == 4);
}

TEST_CASE("resource examples") {
  const auto m = resources::estimate_resources(NetworkKind::ModBinary1D, 3, 2, 6);
  CHECK(m.register_qubits == 9);
  CHECK(m.aux_qubits_per_layer == 2);
  CHECK(m.r == 7);
  const auto s = resources::estimate_resources(NetworkKind::Square2x2, 1, 1, 1);
  CHECK(s.register_qubits == 14);
  CHECK(s.aux_qubits_per_layer == 2);
  CHECK(s.r == 28);
  CHECK(resources::estimate_resources(NetworkKind::Binary1D, 2, 1, 5).no_reset_qubits == 30);

  const auto h = resources::estimate_resources(NetworkKind::Binary1D, 2, 3, 4, 1024LL, 1e-3);
  CHECK(*h.quantum_heterogeneous_value == doctest::Approx(2 * 144.0 * 1024));
  CHECK(*h.classical_heterogeneous_log2 == doctest::Approx(18 + 10));
  CHECK(*h.qae_value == doctest::Approx(16 * 9 * 2 * std::log(1e3) / 1e-3));
  const auto j = resources::to_json(h);
  CHECK(j.at("no_reset_qubits") == 24);
  CHECK(j.contains("qae"));
  CHECK_THROWS_AS(resources::estimate_resources(NetworkKind::Binary1D, 0, 1, 1), InputError);
  CHECK_THROWS_AS(resources::estimate_resources(NetworkKind::Binary1D, 1, 1, 1, {}, 2.0), InputError);
}

TEST_CASE("loglog fit") {
  std::vector<double> x{1e2, 1e3, 1e4, 1e5}, y;
  for (double v : x) y.push_back(3 / std::sqrt(v));
  const auto f = loglog_fit(x, y);
  REQUIRE(f);
  CHECK(f->slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f->intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f->residual < 1e-12);
  CHECK(f->points == 4);
  // nonpositive entries are dropped, leaving two points
  CHECK_FALSE(loglog_fit({1, 2, 3, 4}, {1, 2, 0, -1}));
  CHECK_THROWS_AS(loglog_fit({1, 2}, {1}), InputError);
}

TEST_CASE("shot noise study") {
  const auto s = network::build_network(NetworkKind::ModBinary1D, 2, 1, 1, NetworkForm::Free, random_init(3));
  const auto m = models::tfim_term(1.0, 1);
  const auto st = shot_noise_study(s, m, {100, 1000, 10000}, 30, 4);
  REQUIRE(st.rows.size() == 3);
  REQUIRE(st.fit);
  CHECK(st.fit->slope == doctest::Approx(-0.5).epsilon(0.3));
  const auto again = shot_noise_study(s, m, {100, 1000, 10000}, 30, 4);
  CHECK(again.rows[2].mean == st.rows[2].mean);
  CHECK_THROWS_AS(shot_noise_study(s, m, {100}, 1, 4), InputError);
}

TEST_CASE("cost-accuracy sweep") {
  auto c = small_config();
  c.network.form = "CAN";
  c.optimizer.max_iter = 200;
  const auto r = cost_accuracy_sweep(c, {1}, {1, 2, 3, 4});
  REQUIRE(r.rows.size() == 4);
  for (size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].cost_proxy > r.rows[i - 1].cost_proxy);
  // twice the steps: both gates per evaluation and parameters grow, so the proxy
  // grows faster than linearly
  CHECK(double(r.rows[3].cost_proxy) / double(r.rows[1].cost_proxy) > 3.0);
  REQUIRE(r.fit);
  CHECK(std::isfinite(r.fit->slope));
  CHECK(std::isfinite(r.fit->residual));
  const auto tab = sweep_table(r, "h");
  CHECK(tab.find("no classical fMERA baseline") != std::string::npos);
  CHECK(tab.find("# fit log(eps)") != std::string::npos);
}

TEST_CASE("derived seeds are distinct and stable") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 100; ++k) seen.insert(derive_seed(42, k));
  CHECK(seen.size() == 100);
  CHECK(derive_seed(42, 3) == derive_seed(42, 3));
  CHECK(derive_seed(42, 3) != derive_seed(43, 3));
}

TEST_CASE("config echo is a fixed point") {
  auto c = small_config();
  c.output.tags = {"a", "b"};
  const std::string e = config::echo(c);
  const auto back = config::parse_text(e);
  CHECK(config::echo(back) == e);
  CHECK(config::config_hash(back) == config::config_hash(c));
  // defaults are explicit
  const auto j = nlohmann::json::parse(config::echo(config::parse_text("{}")));
  CHECK(j.at("optimizer").at("memory") == 9);
  CHECK(j.at("init").at("mode") == "identity");
  CHECK(j.at("scan").at("step") == 0.05);
}

TEST_CASE("config rejects bad input with the field name") {
  auto msg = [](const std::string& text) {
    try {
      config::parse_text(text);
    } catch (const config::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg(R"({"model": {"nme": "tfim"}})").find("model.nme") != std::string::npos);
  CHECK(msg(R"({"colour": 1})").find("config.colour") != std::string::npos);
  CHECK(msg(R"({"network": {"T": "three"}})").find("network.T") != std::string::npos);
  CHECK(msg(R"({"network": {"kind": "square2x2"}})").find("network.kind") != std::string::npos);
  CHECK(msg(R"({"optimizer": {"c1": 0.95}})").find("optimizer") != std::string::npos);
  CHECK(msg(R"({"optimizer": {"mode": "euclidean"}})").find("optimizer.mode") != std::string::npos);
  CHECK(msg(R"({"init": {"mode": "state"}})").find("init.state_file") != std::string::npos);
  CHECK(msg(R"({"model": {"parameter": -1}})").find("model.parameter") != std::string::npos);
  CHECK(msg("{ not json").find("malformed") != std::string::npos);
  CHECK(msg("{}").empty());
}

TEST_CASE("fnv1a reference values") {
  CHECK(config::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(config::fnv1a_hex("a") == "af63dc4c8601ec8c");
}
