#include <doctest.h>

#include <cmath>
#include <random>

#include "dtadag/prob.hpp"
#include "oracle.hpp"

using namespace dta;

namespace {

// The imperfect-reference generative model used throughout.
BayesNet figure1_net() {
  Dag dag({{"D", NodeRole::Target, false},
           {"T1", NodeRole::ReferenceTest, true},
           {"T2", NodeRole::IndexTest, true}},
          {{"D", "T1"}, {"D", "T2"}});
  return BayesNet(std::move(dag), {{"D", {}, {0.10}},
                                   {"T1", {"D"}, {0.02, 0.80}},
                                   {"T2", {"D"}, {0.05, 0.90}}});
}

}  // namespace

TEST_CASE("attach_cpts validates the model") {
  Dag single({{"D"}}, {});
  CHECK_NOTHROW(BayesNet(single, {{"D", {}, {0.10}}}));

  SUBCASE("non-parent in the CPT") {
    Dag dag({{"A"}, {"B"}}, {});
    CHECK_THROWS_WITH_AS(BayesNet(dag, {{"A", {}, {0.5}}, {"B", {"A"}, {0.1, 0.2}}}),
                         doctest::Contains("do not match"), ValidationError);
  }
  SUBCASE("missing CPT") {
    Dag dag({{"A"}, {"B"}}, {});
    CHECK_THROWS_WITH_AS(BayesNet(dag, {{"A", {}, {0.5}}}),
                         doctest::Contains("missing CPT for node 'B'"), ValidationError);
  }
  SUBCASE("unknown CPT") {
    CHECK_THROWS_WITH_AS(BayesNet(single, {{"D", {}, {0.5}}, {"X", {}, {0.5}}}),
                         doctest::Contains("unknown node"), ValidationError);
  }
  SUBCASE("wrong table size") {
    CHECK_THROWS_WITH_AS(BayesNet(single, {{"D", {}, {0.5, 0.5}}}),
                         doctest::Contains("needs 1 entries"), ValidationError);
  }
  SUBCASE("probability out of range") {
    CHECK_THROWS_WITH_AS(BayesNet(single, {{"D", {}, {1.5}}}),
                         doctest::Contains("out of [0,1]"), ValidationError);
  }
  SUBCASE("figure-1 defaults are a valid net") { CHECK_NOTHROW(figure1_net()); }
}

TEST_CASE("exact_joint enumerates the chain rule") {
  SUBCASE("single node") {
    Dag dag({{"D"}}, {});
    const auto joint = exact_joint(BayesNet(dag, {{"D", {}, {0.3}}}));
    CHECK(joint.mass()[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(joint.mass()[1] == doctest::Approx(0.3).epsilon(1e-15));
  }
  SUBCASE("hand-computed cell of the figure-1 net") {
    const auto joint = exact_joint(figure1_net());
    CHECK(joint.prob({{"T1", 1}, {"T2", 1}}) == doctest::Approx(0.0729).epsilon(1e-12));
  }
  SUBCASE("total mass is one") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
      const Dag dag = oracle::random_dag(rng, 5, 0.4);
      const auto joint = exact_joint(oracle::random_net(rng, dag));
      double total = 0;
      for (double m : joint.mass()) {
        CHECK(m >= 0.0);
        total += m;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("variables come out in topological order of declaration") {
    Dag dag({{"B"}, {"A"}}, {{"A", "B"}});
    const auto joint = exact_joint(BayesNet(dag, {{"A", {}, {0.5}}, {"B", {"A"}, {0.1, 0.9}}}));
    CHECK(joint.variables() == std::vector<std::string>{"A", "B"});
  }
  SUBCASE("node cap") {
    std::vector<Node> nodes;
    std::vector<Cpt> cpts;
    for (int i = 0; i < 21; ++i) {
      nodes.push_back({"N" + std::to_string(i)});
      cpts.push_back({"N" + std::to_string(i), {}, {0.5}});
    }
    CHECK_THROWS_AS(exact_joint(BayesNet(Dag(nodes, {}), cpts)), LimitError);
  }
}

TEST_CASE("marginal") {
  const auto joint = exact_joint(figure1_net());
  SUBCASE("marginal on one test") {
    const auto m = marginal(joint, {"T1"});
    CHECK(m.variables() == std::vector<std::string>{"T1"});
    CHECK(m.prob({{"T1", 1}}) == doctest::Approx(0.098).epsilon(1e-12));
  }
  SUBCASE("keeping all variables is the identity") {
    const auto m = marginal(joint, joint.variables());
    CHECK(m.variables() == joint.variables());
    for (size_t i = 0; i < m.mass().size(); ++i)
      CHECK(m.mass()[i] == doctest::Approx(joint.mass()[i]).epsilon(1e-15));
  }
  SUBCASE("chain child marginal") {
    Dag chain({{"A"}, {"B"}}, {{"A", "B"}});
    const auto j = exact_joint(BayesNet(chain, {{"A", {}, {0.4}}, {"B", {"A"}, {0.2, 0.7}}}));
    const auto m = marginal(j, {"B"});
    CHECK(m.prob({{"B", 1}}) == doctest::Approx(0.4 * 0.7 + 0.6 * 0.2).epsilon(1e-12));
  }
  SUBCASE("unknown variable") { CHECK_THROWS_AS(marginal(joint, {"X"}), UnknownNodeError); }
}

TEST_CASE("condition and query_prob") {
  const auto joint = exact_joint(figure1_net());
  SUBCASE("conditioning on nothing is the identity") {
    const auto [c, p] = condition(joint, {});
    CHECK(p == 1.0);
    CHECK(c.variables() == joint.variables());
  }
  SUBCASE("conditional probability of the index test") {
    const auto [c, p] = condition(joint, {{"T1", 1}});
    CHECK(p == doctest::Approx(0.098).epsilon(1e-12));
    CHECK(c.prob({{"T2", 1}}) == doctest::Approx(0.0729 / 0.098).epsilon(1e-12));
    CHECK(query_prob(joint, {{"T2", 1}}, {{"T1", 1}}) ==
          doctest::Approx(0.0729 / 0.098).epsilon(1e-12));
  }
  SUBCASE("zero-probability evidence") {
    Dag dag({{"A"}, {"B"}}, {});
    const auto j = exact_joint(BayesNet(dag, {{"A", {}, {0.0}}, {"B", {}, {0.5}}}));
    CHECK_THROWS_AS(condition(j, {{"A", 1}}), NumericError);
    CHECK_THROWS_AS(query_prob(j, {{"B", 1}}, {{"A", 1}}), NumericError);
  }
  SUBCASE("event and given must not overlap") {
    CHECK_THROWS_AS(query_prob(joint, {{"T1", 1}}, {{"T1", 1}}), ValidationError);
  }
}

TEST_CASE("conditioning identity P(A,B) = P(A|B) P(B)") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 15; ++i) {
    const Dag dag = oracle::random_dag(rng, 5, 0.4);
    const auto joint = exact_joint(oracle::random_net(rng, dag));
    const auto& a = dag.nodes()[0].name;
    const auto& b = dag.nodes()[3].name;
    for (int av : {0, 1})
      for (int bv : {0, 1}) {
        const double pb = joint.prob({{b, bv}});
        if (pb <= 0) continue;
        CHECK(joint.prob({{a, av}, {b, bv}}) ==
              doctest::Approx(query_prob(joint, {{a, av}}, {{b, bv}}) * pb).epsilon(1e-12));
      }
  }
}

TEST_CASE("chain-rule consistency: conditionals reproduce the CPT entries") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 15; ++i) {
    const Dag dag = oracle::random_dag(rng, 4, 0.5);
    const auto net = oracle::random_net(rng, dag);
    const auto joint = exact_joint(net);
    for (const auto& cpt : net.cpts()) {
      const int k = static_cast<int>(cpt.parents.size());
      for (uint32_t cfg = 0; cfg < (1u << k); ++cfg) {
        std::vector<Assignment> given;
        for (int p = 0; p < k; ++p) given.emplace_back(cpt.parents[p], (cfg >> (k - 1 - p)) & 1u);
        if (!given.empty() && joint.prob(given) <= 0) continue;
        CHECK(query_prob(joint, {{cpt.node, 1}}, given) ==
              doctest::Approx(cpt.p1[cfg]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sample is deterministic and honors the model") {
  const auto net = figure1_net();
  SUBCASE("identical seed, identical rows") {
    const auto a = sample(net, 5, 99);
    const auto b = sample(net, 5, 99);
    CHECK(a.rows == b.rows);
    CHECK(a.variables == b.variables);
  }
  SUBCASE("different seeds differ") {
    const auto a = sample(net, 200, 1);
    const auto b = sample(net, 200, 2);
    CHECK(a.rows != b.rows);
  }
  SUBCASE("degenerate all-zero CPTs") {
    Dag dag({{"A"}, {"B"}}, {{"A", "B"}});
    const auto data = sample(BayesNet(dag, {{"A", {}, {0.0}}, {"B", {"A"}, {0.0, 0.0}}}), 50, 3);
    for (const auto& row : data.rows) {
      CHECK(row[0] == 0);
      CHECK(row[1] == 0);
    }
  }
  SUBCASE("n must be positive") { CHECK_THROWS_AS(sample(net, 0, 1), ValidationError); }
  SUBCASE("monte carlo margin approaches the exact value") {
    const auto data = sample(net, 1000000, 42);
    const auto joint = empirical_joint(data);
    CHECK(std::abs(joint.prob({{"T1", 1}}) - 0.098) < 0.005);
  }
}

TEST_CASE("empirical_joint") {
  SUBCASE("single row concentrates the mass") {
    Dataset d{{"A", "B"}, {{1, 0}}, 0};
    const auto joint = empirical_joint(d);
    CHECK(joint.prob({{"A", 1}, {"B", 0}}) == 1.0);
    CHECK(joint.prob({{"A", 0}}) == 0.0);
  }
  SUBCASE("duplicated rows do not change frequencies") {
    Dataset one{{"A"}, {{1}}, 0};
    Dataset two{{"A"}, {{1}, {1}}, 0};
    CHECK(empirical_joint(one).mass() == empirical_joint(two).mass());
  }
  SUBCASE("empty dataset") {
    Dataset d{{"A"}, {}, 0};
    CHECK_THROWS_AS(empirical_joint(d), ValidationError);
  }
  SUBCASE("large sample matches the exact joint cellwise") {
    const auto net = figure1_net();
    const auto exact = exact_joint(net);
    const auto approx = empirical_joint(sample(net, 1000000, 42));
    REQUIRE(approx.variables() == exact.variables());
    for (size_t i = 0; i < exact.mass().size(); ++i)
      CHECK(std::abs(approx.mass()[i] - exact.mass()[i]) < 0.005);
  }
}

TEST_CASE("d-separation implies vanishing conditional mutual information") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 10; ++i) {
    const Dag dag = oracle::random_dag(rng, 4, 0.5);
    for (int rep = 0; rep < 5; ++rep) {
      const auto joint = exact_joint(oracle::random_net(rng, dag));
      for (const auto& a : dag.nodes())
        for (const auto& b : dag.nodes()) {
          if (a.name >= b.name) continue;
          for (const auto& z : oracle::conditioning_sets(dag, a.name, b.name)) {
            if (!d_separated(dag, {a.name}, {b.name}, z)) continue;
            const std::vector<std::string> zv(z.begin(), z.end());
            CHECK(std::abs(oracle::cmi(joint, {a.name}, {b.name}, zv)) < 1e-12);
          }
        }
    }
  }
}
