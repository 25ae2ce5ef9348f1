#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tandem/mapf.hpp"

using namespace tandem;
using namespace tandem::mapf;

namespace {

SearchGraph road_search_graph(const RoadGraph& g) {
  SearchGraph sg(g.num_nodes());
  for (const auto& e : g.edges()) sg.add_instance(e.origin, e.dest, e.truck_cost);
  return sg;
}

// Two agents whose shortest routes share a capacity-1 middle arc; an
// unlimited parallel arc costs 0.5 more.
struct Bowtie {
  SearchGraph sg{6};
  std::vector<AgentSpec> agents;
  InstanceId middle = 0;
  Bowtie() {
    // 0,1 sources; 2,3 middle; 4,5 sinks
    sg.add_instance(0, 2, 1.0);
    sg.add_instance(1, 2, 1.0);
    middle = sg.add_instance(2, 3, 1.0, 1);
    sg.add_instance(2, 3, 1.5);
    sg.add_instance(3, 4, 1.0);
    sg.add_instance(3, 5, 1.0);
    agents = {{0, AgentKind::Truck, 0, 4}, {1, AgentKind::Truck, 1, 5}};
  }
};

// `pairs` independent bowties side by side, agents 2i and 2i+1 fighting
// over pair i's middle arc.
std::pair<SearchGraph, std::vector<AgentSpec>> bowtie_chain(int pairs) {
  SearchGraph sg;
  std::vector<AgentSpec> agents;
  for (int i = 0; i < pairs; ++i) {
    VertexId s1 = sg.add_vertex(), s2 = sg.add_vertex(), m1 = sg.add_vertex(), m2 = sg.add_vertex();
    VertexId t1 = sg.add_vertex(), t2 = sg.add_vertex();
    sg.add_instance(s1, m1, 1.0);
    sg.add_instance(s2, m1, 1.0);
    sg.add_instance(m1, m2, 1.0, 1);
    sg.add_instance(m1, m2, 1.5);
    sg.add_instance(m2, t1, 1.0);
    sg.add_instance(m2, t2, 1.0);
    agents.push_back({2 * i, AgentKind::Truck, s1, t1});
    agents.push_back({2 * i + 1, AgentKind::Truck, s2, t2});
  }
  return {std::move(sg), std::move(agents)};
}

std::vector<AgentId> ids_of(const std::vector<AgentSpec>& agents) {
  std::vector<AgentId> ids;
  for (const auto& a : agents) ids.push_back(a.id);
  return ids;
}

std::string dump(const SearchGraph& sg, const std::vector<AgentSpec>& agents, const Solution& s) {
  std::ostringstream out;
  out << to_string(s.status) << '\n';
  write_solution(out, sg, agents, s.paths);
  return out.str();
}

// Enumeration reference for focal_path.
std::optional<oracle::Walk> focal_oracle(const oracle::Graph& g, int s, int t, double w,
                                         const std::vector<int>& conflicts) {
  double opt = oracle::dist_to(g, t)[static_cast<std::size_t>(s)];
  if (opt == oracle::kInf) return std::nullopt;
  auto all = oracle::simple_paths(g, s, t, w * opt);
  auto score = [&](const oracle::Walk& p) {
    int c = 0;
    for (int a : p.arcs) c += conflicts[static_cast<std::size_t>(a)];
    return c;
  };
  return *std::min_element(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    if (score(a) != score(b)) return score(a) < score(b);
    return oracle::canonical_less(a, b);
  });
}

}  // namespace

TEST_SUITE("mapf") {
  TEST_CASE("search graph basics") {
    SearchGraph sg(2);
    auto v = sg.add_vertex();
    CHECK(v == 2);
    auto a = sg.add_instance(0, 1, 2.0, 3);
    auto b = sg.add_instance(0, 1, 1.0);
    CHECK(a == 0);
    CHECK(b == 1);
    CHECK(sg.instance(a).limited());
    CHECK_FALSE(sg.instance(b).limited());
    CHECK(sg.out(0).size() == 2);
    CHECK(sg.in(1).size() == 2);
    auto d = sg.distances_to(1);
    CHECK(d[0] == 1.0);
    CHECK(d[2] == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("constrained shortest path without constraints equals plain shortest path") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto g = gen_grid(4, 4, 1.0, seed, 0.3);
      auto sg = road_search_graph(g);
      for (NodeId s = 0; s < 16; s += 3) {
        for (NodeId t = 0; t < 16; t += 5) {
          auto p = constrained_shortest_path(sg, {0, AgentKind::Truck, s, t}, {});
          auto q = shortest_path(g, CostKind::Truck, s, t);
          REQUIRE(p);
          REQUIRE(q);
          CHECK(p->instances == q->edges);
          CHECK(p->cost == q->cost);
        }
      }
    }
  }

  TEST_CASE("cut edge makes the goal unreachable") {
    SearchGraph sg(3);
    auto ab = sg.add_instance(0, 1, 1.0);
    sg.add_instance(1, 2, 1.0);
    ConstraintSet cs;
    cs.forbid(7, ab);
    CHECK_FALSE(constrained_shortest_path(sg, {7, AgentKind::Truck, 0, 2}, cs));
    // Constraints are per agent.
    CHECK(constrained_shortest_path(sg, {8, AgentKind::Truck, 0, 2}, cs));
  }

  TEST_CASE("constrained shortest path matches enumeration with forbidden instances") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
      auto g = gen_grid(3, 3, 1.0, static_cast<std::uint64_t>(trial), 0.3);
      auto sg = road_search_graph(g);
      auto og = oracle::from_search(sg);
      std::uniform_int_distribution<int> inst(0, static_cast<int>(sg.num_instances()) - 1);
      std::uniform_int_distribution<int> node(0, 8);
      ConstraintSet cs;
      std::vector<bool> banned(sg.num_instances(), false);
      for (int i = 0; i < 2; ++i) {
        int x = inst(rng);
        cs.forbid(0, x);
        banned[static_cast<std::size_t>(x)] = true;
      }
      int s = node(rng), t = node(rng);
      auto got = constrained_shortest_path(sg, {0, AgentKind::Truck, s, t}, cs);
      auto want = oracle::best_path(og, s, t, banned, 8);
      REQUIRE(got.has_value() == want.has_value());
      if (!got) continue;
      CHECK(got->cost == doctest::Approx(want->cost).epsilon(1e-12));
      CHECK(got->instances == want->arcs);
      for (auto i : got->instances) CHECK_FALSE(cs.forbidden(0, i));
    }
  }

  TEST_CASE("focal path at w = 1 keeps optimal cost") {
    Bowtie b;
    auto opt = constrained_shortest_path(b.sg, b.agents[0], {});
    auto f = focal_path(b.sg, b.agents[0], {}, 1.0, [&](InstanceId i) { return i == b.middle ? 1 : 0; });
    REQUIRE(opt);
    REQUIRE(f);
    CHECK(f->cost == opt->cost);
  }

  TEST_CASE("focal path avoids a contested route of equal cost") {
    // two diamonds: s->a->t and s->b->t, all weight 1; s->a contested.
    SearchGraph sg(4);
    auto sa = sg.add_instance(0, 1, 1.0);
    sg.add_instance(1, 3, 1.0);
    sg.add_instance(0, 2, 1.0);
    sg.add_instance(2, 3, 1.0);
    AgentSpec agent{0, AgentKind::Truck, 0, 3};
    CHECK(constrained_shortest_path(sg, agent, {})->instances == std::vector<InstanceId>{0, 1});
    auto f = focal_path(sg, agent, {}, 1.0, [&](InstanceId i) { return i == sa ? 1 : 0; });
    REQUIRE(f);
    CHECK(f->instances == std::vector<InstanceId>{2, 3});
  }

  TEST_CASE("focal path takes a costlier conflict-free route inside the band") {
    SearchGraph sg(4);
    auto sa = sg.add_instance(0, 1, 1.0);
    sg.add_instance(1, 3, 1.0);
    sg.add_instance(0, 2, 1.4);
    sg.add_instance(2, 3, 1.4);
    AgentSpec agent{0, AgentKind::Truck, 0, 3};
    auto count = [&](InstanceId i) { return i == sa ? 1 : 0; };
    auto wide = focal_path(sg, agent, {}, 1.5, count);
    REQUIRE(wide);
    CHECK(wide->instances == std::vector<InstanceId>{2, 3});
    CHECK(wide->cost == doctest::Approx(2.8));
    auto narrow = focal_path(sg, agent, {}, 1.3, count);
    REQUIRE(narrow);
    CHECK(narrow->instances == std::vector<InstanceId>{0, 1});
  }

  TEST_CASE("focal path matches enumeration on random instances") {
    std::mt19937_64 rng(23);
    const double ws[] = {1.0, 1.2, 1.5, 2.0};
    for (int trial = 0; trial < 60; ++trial) {
      auto inst = oracle::contested_instance(rng, 4, 1);
      std::vector<int> conflicts(inst.sg.num_instances());
      for (auto& c : conflicts) c = std::uniform_int_distribution<int>(0, 2)(rng) == 0 ? 1 : 0;
      double w = ws[trial % 4];
      const auto& a = inst.agents[0];
      auto got = focal_path(inst.sg, a, {}, w, [&](InstanceId i) { return conflicts[static_cast<std::size_t>(i)]; });
      auto want = focal_oracle(inst.graph, a.start, a.goal, w, conflicts);
      REQUIRE(got);
      REQUIRE(want);
      CHECK(got->instances == want->arcs);
      double opt = constrained_shortest_path(inst.sg, a, {})->cost;
      CHECK(got->cost <= w * opt + 1e-9);
    }
  }

  TEST_CASE("detect conflicts") {
    SearchGraph sg(4);
    auto shared = sg.add_instance(0, 1, 1.0, 2);
    sg.add_instance(1, 2, 1.0, 1);
    sg.add_instance(2, 3, 1.0, 1);
    std::vector<AgentSpec> agents = {{0, AgentKind::Drone, 0, 1}, {1, AgentKind::Drone, 0, 1}, {2, AgentKind::Drone, 0, 1}};
    std::vector<Path> paths(3, Path{{shared}, 1.0});
    auto cs = detect_conflicts(sg, agents, paths);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].instance == shared);
    CHECK(cs[0].agents == std::vector<AgentId>{0, 1, 2});
    CHECK(cs[0].capacity == 2);

    std::vector<AgentSpec> two = {{0, AgentKind::Drone, 1, 2}, {1, AgentKind::Drone, 2, 3}};
    std::vector<Path> disjoint = {{{1}, 1.0}, {{2}, 1.0}};
    CHECK(detect_conflicts(sg, two, disjoint).empty());

    std::map<AgentId, Path> by_id = {{4, {{shared}, 1.0}}, {9, {{shared}, 1.0}}, {5, {{shared}, 1.0}}};
    auto cm = detect_conflicts(sg, by_id);
    REQUIRE(cm.size() == 1);
    CHECK(cm[0].agents == std::vector<AgentId>{4, 5, 9});
  }

  TEST_CASE("detect conflicts matches an independent recount") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      auto inst = oracle::contested_instance(rng, 4, 5);
      while (inst.agents.size() < 5) inst = oracle::contested_instance(rng, 4, 5);
      std::vector<Path> paths;
      for (const auto& a : inst.agents) paths.push_back(*constrained_shortest_path(inst.sg, a, {}));
      auto got = detect_conflicts(inst.sg, inst.agents, paths);
      auto want = oracle::over_capacity(inst.sg, inst.agents, paths);
      REQUIRE(got.size() == want.size());
      std::size_t i = 0;
      for (const auto& [instance, users] : want) {
        CHECK(got[i].instance == instance);
        CHECK(got[i].agents == users);
        CHECK(got[i].capacity == inst.sg.instance(instance).capacity);
        ++i;
      }
    }
  }

  TEST_CASE("branch with capacity one") {
    auto kids = branch({5, {10, 11}, 1});
    REQUIRE(kids.size() == 2);
    std::set<ConstraintDelta> got(kids.begin(), kids.end());
    std::set<ConstraintDelta> want = {{{10, 5}}, {{11, 5}}};
    CHECK(got == want);
  }

  TEST_CASE("branch child counts and survivors") {
    CHECK(branch({0, {1, 2, 3}, 2}).size() == 3);
    CHECK(branch({0, {1, 2, 3, 4}, 2}).size() == 6);
    auto binom = [](int n, int k) {
      long r = 1;
      for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
      return r;
    };
    for (int cap = 1; cap <= 4; ++cap) {
      for (int users = cap + 1; users <= 7; ++users) {
        Conflict c{3, {}, cap};
        for (int a = 0; a < users; ++a) c.agents.push_back(a * 2);
        auto kids = branch(c);
        CHECK(static_cast<long>(kids.size()) == binom(users, cap));
        std::set<std::set<AgentId>> survivor_sets;
        for (const auto& k : kids) {
          CHECK(static_cast<int>(k.size()) == users - cap);
          std::set<AgentId> survivors(c.agents.begin(), c.agents.end());
          for (auto [agent, inst] : k) {
            CHECK(inst == 3);
            CHECK(survivors.erase(agent) == 1);
          }
          survivor_sets.insert(survivors);
        }
        CHECK(survivor_sets.size() == kids.size());
        CHECK(branch(c) == kids);
      }
    }
  }

  TEST_CASE("cbs without shared limited instances returns independent paths") {
    auto g = gen_grid(3, 3, 1.0, 0);
    auto sg = road_search_graph(g);
    std::vector<AgentSpec> agents = {{0, AgentKind::Truck, 0, 8}, {1, AgentKind::Truck, 8, 0}, {2, AgentKind::Truck, 2, 6}};
    auto s = cbs(sg, agents, {});
    REQUIRE(s.ok());
    for (std::size_t i = 0; i < agents.size(); ++i) {
      CHECK(s.paths[i] == *constrained_shortest_path(sg, agents[i], {}));
    }
    CHECK(s.stats.conflicts_resolved == 0);
  }

  TEST_CASE("bowtie") {
    Bowtie b;
    auto c = cbs(b.sg, b.agents, {});
    REQUIRE(c.ok());
    CHECK(c.cost == doctest::Approx(6.5));
    CHECK(detect_conflicts(b.sg, b.agents, c.paths).empty());
    auto want = oracle::joint_optimum(oracle::from_search(b.sg), oracle::oracle_agents(b.agents), 8.0);
    REQUIRE(want);
    CHECK(c.cost == doctest::Approx(*want).epsilon(1e-12));

    auto e = ecbs(b.sg, b.agents, {500, 600.0, 1.3});
    REQUIRE(e.ok());
    CHECK(e.cost <= 1.3 * c.cost + 1e-9);

    std::vector<AgentId> ab = {0, 1}, ba = {1, 0};
    auto p = pp(b.sg, b.agents, ab, {});
    REQUIRE(p.ok());
    CHECK(p.paths[0].instances == std::vector<InstanceId>{0, b.middle, 4});
    CHECK(p.paths[1].instances == std::vector<InstanceId>{1, 3, 5});
    CHECK(p.cost >= c.cost - 1e-9);
    auto q = pp(b.sg, b.agents, ba, {});
    REQUIRE(q.ok());
    CHECK(q.paths[1].instances == std::vector<InstanceId>{1, b.middle, 5});
    CHECK(oracle::capacity_valid(b.sg, b.agents, q.paths));
  }

  TEST_CASE("pp single agent") {
    auto g = gen_grid(3, 4, 1.0, 2, 0.2);
    auto sg = road_search_graph(g);
    std::vector<AgentSpec> one = {{3, AgentKind::Drone, 0, 11}};
    std::vector<AgentId> order = {3};
    auto s = pp(sg, one, order, {});
    REQUIRE(s.ok());
    CHECK(s.paths[0] == *constrained_shortest_path(sg, one[0], {}));
  }

  TEST_CASE("pp reports the agent that cannot be routed") {
    SearchGraph sg(2);
    sg.add_instance(0, 1, 1.0, 1);
    std::vector<AgentSpec> agents = {{4, AgentKind::Drone, 0, 1}, {9, AgentKind::Drone, 0, 1}};
    std::vector<AgentId> order = {9, 4};
    auto s = pp(sg, agents, order, {});
    CHECK(s.status == SolveStatus::Unsolvable);
    REQUIRE(s.failed_agent);
    CHECK(*s.failed_agent == 4);
    CHECK(cbs(sg, agents, {}).status == SolveStatus::Unsolvable);
    CHECK(ecbs(sg, agents, {}).status == SolveStatus::Unsolvable);
  }

  TEST_CASE("pp rejects a bad ordering") {
    Bowtie b;
    std::vector<AgentId> bad = {0, 0};
    CHECK_THROWS_AS(pp(b.sg, b.agents, bad, {}), std::invalid_argument);
  }

  TEST_CASE("unreachable root reports unsolvable") {
    SearchGraph sg(3);
    sg.add_instance(0, 1, 1.0);
    std::vector<AgentSpec> agents = {{0, AgentKind::Truck, 0, 2}};
    auto s = cbs(sg, agents, {});
    CHECK(s.status == SolveStatus::Unsolvable);
    REQUIRE(s.failed_agent);
    CHECK(*s.failed_agent == 0);
  }

  TEST_CASE("conflict threshold") {
    auto [sg, agents] = bowtie_chain(2);
    auto tight = cbs(sg, agents, {1, 600.0, 1.0});
    CHECK(tight.status == SolveStatus::ConflictOverflow);
    CHECK(ecbs(sg, agents, {1, 600.0, 1.0}).status == SolveStatus::ConflictOverflow);
    // At w = 1.3 the root already detours around both middles.
    auto wide = ecbs(sg, agents, {1, 600.0, 1.3});
    REQUIRE(wide.ok());
    CHECK(wide.stats.conflicts_resolved == 0);
    // Root plus both equal-cost children are resolved before a solution.
    CHECK(cbs(sg, agents, {2, 600.0, 1.0}).status == SolveStatus::ConflictOverflow);
    auto loose = cbs(sg, agents, {3, 600.0, 1.0});
    REQUIRE(loose.ok());
    CHECK(loose.cost == doctest::Approx(13.0));
  }

  TEST_CASE("default threshold of 500 overflows on ten independent bowties") {
    auto [sg, agents] = bowtie_chain(10);
    auto s = ecbs(sg, agents, {500, 600.0, 1.0});
    CHECK(s.status == SolveStatus::ConflictOverflow);
    CHECK(s.stats.conflicts_resolved == 500);
    // A wider band reaches a solution quickly.
    auto fast = ecbs(sg, agents, {500, 600.0, 1.3});
    REQUIRE(fast.ok());
    CHECK(fast.cost <= 1.3 * 65.0 + 1e-9);
  }

  TEST_CASE("timeout") {
    auto [sg, agents] = bowtie_chain(10);
    auto s = cbs(sg, agents, {1000000, 0.0, 1.0});
    CHECK(s.status == SolveStatus::Timeout);
  }

  TEST_CASE("solver dispatch and names") {
    CHECK(parse_solver_kind("cbs") == SolverKind::Cbs);
    CHECK(parse_solver_kind("ecbs") == SolverKind::Ecbs);
    CHECK(parse_solver_kind("pp") == SolverKind::Pp);
    CHECK_THROWS(parse_solver_kind("astar"));
    CHECK(std::string(to_string(SolveStatus::ConflictOverflow)) == "conflict_overflow");
    Bowtie b;
    std::vector<AgentId> ab = {0, 1};
    CHECK(solve(SolverKind::Cbs, b.sg, b.agents, ab, {}).cost == doctest::Approx(6.5));
  }

  TEST_CASE("solver solutions agree with the joint oracle on random instances") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 40; ++trial) {
      auto inst = oracle::contested_instance(rng, 4, 3);
      auto want = oracle::joint_optimum(inst.graph, oracle::oracle_agents(inst.agents), inst.upper);
      REQUIRE(want);
      auto c = cbs(inst.sg, inst.agents, {});
      REQUIRE(c.ok());
      CHECK(c.cost == doctest::Approx(*want).epsilon(1e-12));
      CHECK(oracle::capacity_valid(inst.sg, inst.agents, c.paths));
      for (double w : {1.0, 1.3, 2.0}) {
        auto e = ecbs(inst.sg, inst.agents, {500, 600.0, w});
        REQUIRE(e.ok());
        CHECK(e.cost <= w * c.cost + 1e-9);
        if (w == 1.0) CHECK(e.cost == doctest::Approx(c.cost).epsilon(1e-12));
        CHECK(oracle::capacity_valid(inst.sg, inst.agents, e.paths));
      }
      auto order = ids_of(inst.agents);
      std::shuffle(order.begin(), order.end(), rng);
      auto p = pp(inst.sg, inst.agents, order, {});
      REQUIRE(p.ok());
      CHECK(p.cost >= c.cost - 1e-9);
      CHECK(oracle::capacity_valid(inst.sg, inst.agents, p.paths));
    }
  }

  TEST_CASE("identical inputs give identical solutions") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      auto inst = oracle::contested_instance(rng, 5, 4);
      auto order = ids_of(inst.agents);
      for (auto kind : {SolverKind::Cbs, SolverKind::Ecbs, SolverKind::Pp}) {
        auto a = solve(kind, inst.sg, inst.agents, order, {});
        auto b = solve(kind, inst.sg, inst.agents, order, {});
        CHECK(dump(inst.sg, inst.agents, a) == dump(inst.sg, inst.agents, b));
      }
    }
  }

  TEST_CASE("solution text form") {
    Bowtie b;
    auto s = cbs(b.sg, b.agents, {});
    std::ostringstream out;
    write_solution(out, b.sg, b.agents, s.paths);
    CHECK(out.str() == "agent 0 cost 3\n  0 1\n  2 1\n  4 1\nagent 1 cost 3.5\n  1 1\n  3 1.5\n  5 1\n");
  }

  TEST_CASE("duplicate agent ids are rejected") {
    Bowtie b;
    auto agents = b.agents;
    agents[1].id = 0;
    CHECK_THROWS_AS(cbs(b.sg, agents, {}), std::invalid_argument);
  }
}
