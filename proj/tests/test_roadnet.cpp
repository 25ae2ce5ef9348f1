#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tandem/roadnet.hpp"

using namespace tandem;

namespace {

RoadnetError::Kind error_kind(const std::string& text) {
  try {
    load_edgelist(text);
  } catch (const RoadnetError& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return RoadnetError::Kind::ParseFailure;
}

const char* kTwoNodeGraphml = R"(<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="d0" for="node" attr.name="y" attr.type="double"/>
  <key id="d1" for="node" attr.name="x" attr.type="double"/>
  <key id="d9" for="edge" attr.name="length" attr.type="double"/>
  <graph edgedefault="directed">
    <node id="42"><data key="d0">40.7</data><data key="d1">-73.9</data></node>
    <node id="43"/>
    <edge source="42" target="43"><data key="d9">500</data></edge>
  </graph>
</graphml>
)";

}  // namespace

TEST_SUITE("roadnet") {
  TEST_CASE("edge list basics") {
    auto g = load_edgelist("a,b,1.0\nb,c,2.0");
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 2);
    CHECK(g.total_length_km() == doctest::Approx(3.0));
    CHECK(g.label(0) == "a");
    CHECK(g.find_node("c") == NodeId{2});
    CHECK_FALSE(g.find_node("z"));
    // default times: round(len / 0.5)
    CHECK(g.edge(0).truck_time == 2);
    CHECK(g.edge(1).drone_time == 4);
    CHECK(g.edge(0).truck_cost == 1.0);
    CHECK(g.edge(0).drone_cost == 1.0);
  }

  TEST_CASE("edge list explicit times and comments") {
    auto g = load_edgelist("# header\n\nx,y,0.1,7,9\n");
    REQUIRE(g.num_edges() == 1);
    CHECK(g.edge(0).truck_time == 7);
    CHECK(g.edge(0).drone_time == 9);
    CHECK(default_time(0.1, 0.5) == 1);
  }

  TEST_CASE("edge list errors") {
    CHECK(error_kind("") == RoadnetError::Kind::EmptyGraph);
    CHECK(error_kind("# only comments\n") == RoadnetError::Kind::EmptyGraph);
    CHECK(error_kind("a,b,-1") == RoadnetError::Kind::NegativeLength);
    CHECK(error_kind("a,a,1") == RoadnetError::Kind::SelfLoop);
    CHECK(error_kind("a,b") == RoadnetError::Kind::MalformedLine);
    CHECK(error_kind("a,b,xyz") == RoadnetError::Kind::MalformedLine);
    try {
      load_edgelist("a,b,1\nb,c,1\nc,d,-2\n");
      FAIL("expected error");
    } catch (const RoadnetError& e) {
      CHECK(e.kind() == RoadnetError::Kind::NegativeLength);
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("parallel edges are kept") {
    auto g = load_edgelist("a,b,1\na,b,2\n");
    CHECK(g.num_edges() == 2);
    CHECK(g.out_edges(0).size() == 2);
    CHECK(g.in_edges(1).size() == 2);
  }

  TEST_CASE("edge list round trip preserves the edge multiset") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
      auto g = gen_grid(3, 4, 0.37, trial, 0.3);
      std::stringstream ss;
      write_edgelist(ss, g);
      auto h = load_edgelist(ss);
      REQUIRE(h.num_edges() == g.num_edges());
      for (std::size_t i = 0; i < g.num_edges(); ++i) {
        const auto& a = g.edge(static_cast<EdgeId>(i));
        const auto& b = h.edge(static_cast<EdgeId>(i));
        CHECK(g.label(a.origin) == h.label(b.origin));
        CHECK(g.label(a.dest) == h.label(b.dest));
        CHECK(a.length_km == b.length_km);
        CHECK(a.truck_time == b.truck_time);
        CHECK(a.drone_time == b.drone_time);
      }
      std::stringstream again;
      write_edgelist(again, h);
      CHECK(again.str() == ss.str());
    }
  }

  TEST_CASE("graphml two nodes with unit scale") {
    std::istringstream in(kTwoNodeGraphml);
    auto g = load_graphml(in, "length", 0.001);
    CHECK(g.num_nodes() == 2);
    REQUIRE(g.num_edges() == 1);
    CHECK(g.edge(0).length_km == doctest::Approx(0.5));
    REQUIRE(g.geo(0));
    CHECK(g.geo(0)->lat == doctest::Approx(40.7));
    CHECK(g.geo(0)->lon == doctest::Approx(-73.9));
    CHECK_FALSE(g.geo(1));
  }

  TEST_CASE("graphml errors") {
    auto kind_of = [](const std::string& text, const std::string& attr) {
      std::istringstream in(text);
      try {
        load_graphml(in, attr, 1.0);
      } catch (const RoadnetError& e) {
        return e.kind();
      }
      FAIL("no error raised");
      return RoadnetError::Kind::EmptyGraph;
    };
    CHECK(kind_of(kTwoNodeGraphml, "travel_time") == RoadnetError::Kind::MissingLengthAttr);
    std::string undirected = kTwoNodeGraphml;
    undirected.replace(undirected.find("edgedefault=\"directed\""), 22, "edgedefault=\"undirected\"");
    CHECK(kind_of(undirected, "length") == RoadnetError::Kind::UndirectedGraph);
    CHECK(kind_of("<graphml><graph>", "length") == RoadnetError::Kind::ParseFailure);
  }

  TEST_CASE("grid edge counts") {
    auto count = [](int r, int c) { return 2 * (r * (c - 1) + c * (r - 1)); };
    auto g22 = gen_grid(2, 2, 1.0, 0);
    CHECK(g22.num_nodes() == 4);
    CHECK(g22.num_edges() == 8);
    auto g13 = gen_grid(1, 3, 1.0, 0);
    CHECK(g13.num_nodes() == 3);
    CHECK(g13.num_edges() == 4);
    auto g33 = gen_grid(3, 3, 1.0, 0);
    CHECK(g33.num_nodes() == 9);
    CHECK(g33.num_edges() == 24);
    for (int r = 1; r <= 6; ++r) {
      for (int c = 1; c <= 6; ++c) {
        if (r * c < 2) continue;
        CHECK(gen_grid(r, c, 1.0, 0).num_edges() == static_cast<std::size_t>(count(r, c)));
      }
    }
  }

  TEST_CASE("grid determinism and jitter") {
    auto a = gen_grid(4, 4, 1.0, 11, 0.2);
    auto b = gen_grid(4, 4, 1.0, 11, 0.2);
    auto c = gen_grid(4, 4, 1.0, 12, 0.2);
    bool differs = false;
    for (std::size_t i = 0; i < a.num_edges(); ++i) {
      CHECK(a.edge(static_cast<EdgeId>(i)).length_km == b.edge(static_cast<EdgeId>(i)).length_km);
      differs |= a.edge(static_cast<EdgeId>(i)).length_km != c.edge(static_cast<EdgeId>(i)).length_km;
    }
    CHECK(differs);
    auto plain = gen_grid(4, 4, 1.0, 99);
    for (const auto& e : plain.edges()) CHECK(e.length_km == 1.0);
  }

  TEST_CASE("shortest path small cases") {
    auto g = gen_grid(2, 2, 1.0, 0);
    auto self = shortest_path(g, CostKind::Truck, 2, 2);
    REQUIRE(self);
    CHECK(self->edges.empty());
    CHECK(self->cost == 0.0);
    auto diag = shortest_path(g, CostKind::Truck, grid_node(2, 0, 0), grid_node(2, 1, 1));
    REQUIRE(diag);
    CHECK(diag->cost == 2.0);
    CHECK(diag->edges.size() == 2);
    auto one_way = load_edgelist("a,b,1\n");
    CHECK_FALSE(shortest_path(one_way, CostKind::Drone, 1, 0));
  }

  TEST_CASE("shortest path breaks ties by hops then edge ids") {
    // a->d directly costs 2; a->b->d also 2 with two hops.
    auto g = load_edgelist("a,b,1\nb,d,1\na,d,2\na,c,1\nc,d,1\n");
    auto p = shortest_path(g, CostKind::Truck, 0, *g.find_node("d"));
    REQUIRE(p);
    CHECK(p->edges == std::vector<EdgeId>{2});
    auto h = load_edgelist("a,c,1\nc,d,1\na,b,1\nb,d,1\n");
    auto q = shortest_path(h, CostKind::Truck, 0, *h.find_node("d"));
    REQUIRE(q);
    CHECK(q->edges == std::vector<EdgeId>{0, 1});
  }

  TEST_CASE("shortest path matches exhaustive enumeration") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      auto g = gen_grid(5, 5, 1.0, seed, 0.4);
      auto og = oracle::from_road(g, CostKind::Truck);
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> node(0, 24);
      for (int q = 0; q < 8; ++q) {
        int s = node(rng), t = node(rng);
        auto got = shortest_path(g, CostKind::Truck, s, t);
        REQUIRE(got);
        auto full = oracle::best_path(og, s, t);
        REQUIRE(full);
        CHECK(got->cost == doctest::Approx(full->cost).epsilon(1e-12));
        std::vector<EdgeId> expect(full->arcs.begin(), full->arcs.end());
        CHECK(got->edges == expect);
        if (full->arcs.size() <= 8) {
          auto bounded = oracle::best_path(og, s, t, {}, 8);
          REQUIRE(bounded);
          CHECK(bounded->arcs == full->arcs);
        }
        CHECK(path_cost(g, CostKind::Truck, got->edges) == doctest::Approx(got->cost));
      }
    }
  }

  TEST_CASE("truck and drone costs agree under the default model") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto g = gen_grid(4, 5, 0.8, seed, 0.3);
      for (NodeId s = 0; s < 20; s += 3) {
        for (NodeId t = 0; t < 20; t += 2) {
          auto a = shortest_path(g, CostKind::Truck, s, t);
          auto b = shortest_path(g, CostKind::Drone, s, t);
          REQUIRE(a);
          REQUIRE(b);
          CHECK(a->cost == b->cost);
          CHECK(a->edges == b->edges);
        }
      }
    }
  }

  TEST_CASE("triangle property") {
    std::mt19937_64 rng(3);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      auto g = gen_grid(5, 4, 1.0, seed, 0.5);
      std::uniform_int_distribution<int> node(0, 19);
      for (int i = 0; i < 40; ++i) {
        int a = node(rng), b = node(rng), c = node(rng);
        double ac = shortest_path(g, CostKind::Truck, a, c)->cost;
        double ab = shortest_path(g, CostKind::Truck, a, b)->cost;
        double bc = shortest_path(g, CostKind::Truck, b, c)->cost;
        CHECK(ac <= ab + bc + 1e-12);
      }
    }
  }

  TEST_CASE("path nodes") {
    auto g = load_edgelist("a,b,1\nb,c,1\n");
    CHECK(path_nodes(g, 0, std::vector<EdgeId>{0, 1}) == std::vector<NodeId>{0, 1, 2});
    CHECK(path_nodes(g, 2, std::vector<EdgeId>{}) == std::vector<NodeId>{2});
  }

  TEST_CASE("hop distances") {
    auto line = load_edgelist("a,b,1\nb,c,1\n");
    CHECK(hop_distances(line, {1}, 0) == std::map<NodeId, int>{{1, 0}});
    CHECK(hop_distances(line, {0}, 2) == std::map<NodeId, int>{{0, 0}, {1, 1}, {2, 2}});
    // Direction is ignored: from c, walking against the arcs.
    CHECK(hop_distances(line, {2}, 1) == std::map<NodeId, int>{{1, 1}, {2, 0}});

    // 3x3 grid, seeds = top row: row r sits r hops away.
    auto g = gen_grid(3, 3, 1.0, 0);
    auto d = hop_distances(g, {0, 1, 2}, 2);
    std::map<NodeId, int> manual = {{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 1}, {6, 2}, {7, 2}, {8, 2}};
    CHECK(d == manual);
    auto d1 = hop_distances(g, {0, 1, 2}, 1);
    CHECK(d1.size() == 6);
  }

  TEST_CASE("hop distances property") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      auto g = gen_grid(5, 5, 1.0, 0);
      std::set<NodeId> seeds;
      int k = std::uniform_int_distribution<int>(0, 4)(rng);
      for (int i = 0; i < 3; ++i) seeds.insert(std::uniform_int_distribution<int>(0, 24)(rng));
      auto d = hop_distances(g, seeds, k);
      for (auto s : seeds) CHECK(d.at(s) == 0);
      for (auto [v, h] : d) {
        CHECK(h <= k);
        // Manhattan distance to the nearest seed is the grid hop count.
        int best = 1 << 30;
        for (auto s : seeds) best = std::min(best, std::abs(v / 5 - s / 5) + std::abs(v % 5 - s % 5));
        CHECK(h == best);
      }
    }
  }
}
