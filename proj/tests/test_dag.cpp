#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "collider/dag.hpp"
#include "collider/figures.hpp"
#include "collider/report.hpp"
#include "dsep_oracle.hpp"
#include "support.hpp"

using namespace collider;

namespace {

std::vector<std::string> texts(const std::vector<Path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.to_string());
  return out;
}

Path path_named(const Dag& g, const std::string& x, const std::string& y, const std::string& text) {
  for (const auto& p : enumerate_paths(g, x, y)) {
    if (p.to_string() == text) return p;
  }
  FAIL("no path " << text);
  return {};
}

Dag m_bias_without_direct_edge() {
  return build_dag({"W1", "W2", "A", "C", "Y"}, {{"W1", "A"}, {"W1", "C"}, {"W2", "C"}, {"W2", "Y"}});
}

}  // namespace

TEST_CASE("build_dag validates structure") {
  const Dag g = figures::collider();
  CHECK(g.nodes() == std::vector<std::string>{"A", "C", "Y"});
  CHECK(g.has_edge("A", "C"));
  CHECK(g.has_edge("Y", "C"));
  CHECK(g.has_edge("A", "Y"));
  CHECK(g.topological_order() == std::vector<std::string>{"A", "Y", "C"});

  const Dag single = build_dag({"A"}, {});
  CHECK(single.nodes().size() == 1);
  CHECK(single.edges().empty());

  CHECK_ERROR_KIND(build_dag({"A", "Y"}, {{"A", "Y"}, {"Y", "A"}}), ErrorKind::CycleError);
  CHECK_ERROR_KIND(build_dag({"A", "Y"}, {{"A", "Y"}, {"A", "Y"}}), ErrorKind::DuplicateEdge);
  CHECK_ERROR_KIND(build_dag({"A"}, {{"A", "A"}}), ErrorKind::DuplicateEdge);
  CHECK_ERROR_KIND(build_dag({"A"}, {{"A", "B"}}), ErrorKind::UnknownNode);
}

TEST_CASE("cycle errors name the cycle") {
  try {
    build_dag({"A", "B", "C", "D"}, {{"D", "A"}, {"A", "B"}, {"B", "C"}, {"C", "A"}});
    FAIL("expected a cycle");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CycleError);
    const std::string msg = e.what();
    CHECK(msg.find("A") != std::string::npos);
    CHECK(msg.find("B") != std::string::npos);
    CHECK(msg.find("C") != std::string::npos);
    CHECK(msg.find("D") == std::string::npos);
  }
}

TEST_CASE("enumerate_paths lists simple paths in fixed order") {
  CHECK(texts(enumerate_paths(figures::collider(), "A", "Y")) == std::vector<std::string>{"A -> Y", "A -> C <- Y"});
  CHECK(texts(enumerate_paths(figures::m_bias(), "A", "Y")) ==
        std::vector<std::string>{"A -> Y", "A <- W1 -> C <- W2 -> Y"});
  CHECK(enumerate_paths(build_dag({"A", "B"}, {}), "A", "B").empty());
  CHECK_ERROR_KIND(enumerate_paths(figures::collider(), "A", "Q"), ErrorKind::UnknownNode);

  // Reversing the query reverses every path.
  const auto forward = enumerate_paths(figures::sodium(), "SOD", "SBP");
  const auto backward = enumerate_paths(figures::sodium(), "SBP", "SOD");
  REQUIRE(forward.size() == backward.size());
  for (const auto& p : forward) {
    std::vector<std::string> rev(p.nodes.rbegin(), p.nodes.rend());
    CHECK(std::any_of(backward.begin(), backward.end(), [&](const Path& q) { return q.nodes == rev; }));
  }
}

TEST_CASE("classify_node_on_path") {
  const Dag b = figures::collider();
  const Path collider_path = path_named(b, "A", "Y", "A -> C <- Y");
  CHECK(classify_node_on_path(collider_path, "C") == NodeRole::Collider);
  CHECK(classify_node_on_path(collider_path, "A") == NodeRole::Endpoint);
  CHECK_ERROR_KIND(classify_node_on_path(collider_path, "W"), ErrorKind::NodeNotOnPath);

  const Dag a = figures::confounding();
  CHECK(classify_node_on_path(path_named(a, "A", "Y", "A <- W -> Y"), "W") == NodeRole::Fork);

  const Dag chain = build_dag({"X", "M", "Y"}, {{"X", "M"}, {"M", "Y"}});
  CHECK(classify_node_on_path(enumerate_paths(chain, "X", "Y").front(), "M") == NodeRole::Chain);
}

TEST_CASE("is_path_blocked follows the blocking rules") {
  const Dag b = figures::collider();
  const Path acy = path_named(b, "A", "Y", "A -> C <- Y");
  CHECK(is_path_blocked(b, acy, {}));
  CHECK_FALSE(is_path_blocked(b, acy, {"C"}));

  const Dag a = figures::confounding();
  const Path awy = path_named(a, "A", "Y", "A <- W -> Y");
  CHECK(is_path_blocked(a, awy, {"W"}));
  CHECK_FALSE(is_path_blocked(a, awy, {}));

  // A descendant of the collider opens it too.
  const Dag deep = build_dag({"A", "C", "Y", "D"}, {{"A", "C"}, {"Y", "C"}, {"C", "D"}});
  const Path p = enumerate_paths(deep, "A", "Y").front();
  CHECK(is_path_blocked(deep, p, {}));
  CHECK_FALSE(is_path_blocked(deep, p, {"D"}));

  CHECK_ERROR_KIND(is_path_blocked(b, acy, {"A"}), ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(is_path_blocked(b, acy, {"Q"}), ErrorKind::UnknownNode);
}

TEST_CASE("d_separated on the M-bias graph") {
  const Dag g = m_bias_without_direct_edge();
  CHECK(d_separated(g, "A", "Y", {}));
  CHECK_FALSE(d_separated(g, "A", "Y", {"C"}));
  CHECK(d_separated(g, "A", "Y", {"C", "W1"}));
  CHECK(d_separated(g, "A", "Y", {"C", "W2"}));
  CHECK_FALSE(d_separated(figures::m_bias(), "A", "Y", {}));
}

TEST_CASE("check_adjustment_set on the sodium graph") {
  const Dag g = figures::sodium();

  const AdjustmentVerdict age = check_adjustment_set(g, "SOD", "SBP", {"AGE"});
  CHECK(age.valid);

  const AdjustmentVerdict age_pro = check_adjustment_set(g, "SOD", "SBP", {"AGE", "PRO"});
  CHECK_FALSE(age_pro.valid);
  CHECK(texts(age_pro.opened_collider_paths) == std::vector<std::string>{"SOD -> PRO <- SBP"});
  CHECK(age_pro.descendants_of_exposure_in_set == std::vector<std::string>{"PRO"});
  CHECK(age_pro.open_backdoor_paths.empty());

  const AdjustmentVerdict none = check_adjustment_set(g, "SOD", "SBP", {});
  CHECK_FALSE(none.valid);
  CHECK(texts(none.open_backdoor_paths) == std::vector<std::string>{"SOD <- AGE -> SBP"});
  CHECK(none.opened_collider_paths.empty());
  CHECK(none.descendants_of_exposure_in_set.empty());

  CHECK_ERROR_KIND(check_adjustment_set(g, "SOD", "SBP", {"BMI"}), ErrorKind::UnknownNode);
}

TEST_CASE("fixture files match the built-in figures") {
  CHECK(dag_from_json(json::parse(read_fixture("figures/fig1a.dag.json"))) == figures::confounding());
  CHECK(dag_from_json(json::parse(read_fixture("figures/fig1b.dag.json"))) == figures::collider());
  CHECK(dag_from_json(json::parse(read_fixture("figures/fig1c.dag.json"))) == figures::m_bias());
  CHECK(dag_from_json(json::parse(read_fixture("figures/fig3.dag.json"))) == figures::sodium());
  CHECK(dag_from_json(dag_to_json(figures::sodium())) == figures::sodium());
}

TEST_CASE("graph properties on fixtures") {
  const std::vector<Dag> graphs{figures::confounding(), figures::collider(), figures::m_bias(), figures::sodium(),
                                m_bias_without_direct_edge()};
  for (const Dag& g : graphs) {
    const auto& nodes = g.nodes();
    const std::size_t k = nodes.size();
    for (std::size_t xi = 0; xi < k; ++xi) {
      for (std::size_t yi = 0; yi < k; ++yi) {
        if (xi == yi) continue;
        const auto& x = nodes[xi];
        const auto& y = nodes[yi];
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
          if ((mask >> xi & 1u) || (mask >> yi & 1u)) continue;
          NameSet z;
          for (std::size_t i = 0; i < k; ++i) {
            if (mask >> i & 1u) z.insert(nodes[i]);
          }
          // Symmetry.
          CHECK(d_separated(g, x, y, z) == d_separated(g, y, x, z));

          for (const auto& p : enumerate_paths(g, x, y)) {
            std::vector<std::string> colliders, others;
            for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) {
              (classify_node_on_path(p, p.nodes[i]) == NodeRole::Collider ? colliders : others).push_back(p.nodes[i]);
            }
            // Conditioning on a chain or fork node blocks.
            for (const auto& o : others) {
              if (z.count(o)) CHECK(is_path_blocked(g, p, z));
            }
            // Monotone collider opening: blocked only by collider c => open with c added.
            if (!is_path_blocked(g, p, z) || colliders.empty()) continue;
            for (const auto& c : colliders) {
              NameSet with_c = z;
              with_c.insert(c);
              bool only_c = std::none_of(others.begin(), others.end(), [&](const auto& o) { return z.count(o) > 0; });
              for (const auto& c2 : colliders) {
                if (c2 == c || z.count(c2)) continue;
                const NameSet d = g.descendants(c2);
                if (std::none_of(d.begin(), d.end(), [&](const auto& v) { return z.count(v) > 0; })) only_c = false;
              }
              if (only_c) CHECK_FALSE(is_path_blocked(g, p, with_c));
            }
          }
        }
      }
    }
    // Valid verdicts imply every back-door path is blocked.
    for (std::size_t xi = 0; xi < k; ++xi) {
      for (std::size_t yi = 0; yi < k; ++yi) {
        if (xi == yi) continue;
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
          if ((mask >> xi & 1u) || (mask >> yi & 1u)) continue;
          NameSet z;
          for (std::size_t i = 0; i < k; ++i) {
            if (mask >> i & 1u) z.insert(nodes[i]);
          }
          const auto v = check_adjustment_set(g, nodes[xi], nodes[yi], z);
          CHECK(v.valid == (v.open_backdoor_paths.empty() && v.opened_collider_paths.empty() &&
                            v.descendants_of_exposure_in_set.empty()));
          if (!v.valid) continue;
          for (const auto& p : enumerate_paths(g, nodes[xi], nodes[yi])) {
            if (p.starts_into_source()) CHECK(is_path_blocked(g, p, z));
          }
        }
      }
    }
  }
}

TEST_CASE("d_separated agrees with moralization on every DAG up to 5 nodes") {
  const oracle::SweepResult r = oracle::exhaustive_check(5);
  // 1 + 3 + 25 + 543 + 29281 labelled DAGs on 1..5 nodes.
  CHECK(r.dags == 29853);
  CHECK(r.mismatches == 0);
}
