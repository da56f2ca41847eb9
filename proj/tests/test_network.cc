#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "restoro/generator.h"
#include "restoro/network.h"
#include "test_support.h"

using namespace restoro;
using namespace restoro::testing;

namespace {

NetworkSpec three_layer_spec() {
  NetworkSpec spec;
  spec.layers = {"water", "gas", "power"};
  spec.spaces = {{"s0", 5}, {"s1", 3}};
  for (const char* layer : {"water", "gas", "power"}) {
    spec.nodes.push_back(make_node(layer, "1", 4, 1, 50));
    spec.nodes.push_back(make_node(layer, "2", -4, 1, 50, 20, "s1"));
    spec.arcs.push_back(make_arc(layer, "1", "2", 6, 2));
  }
  spec.links = {{{"power", "1"}, {"water", "1"}}, {{"gas", "1"}, {"power", "1"}}};
  return spec;
}

bool has_violation(const std::vector<std::string>& v, const std::string& s) {
  for (const auto& msg : v) {
    if (msg.find(s) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("well-formed spec has no violations") {
  CHECK(validate(three_layer_spec()).empty());
}

TEST_CASE("cross-layer arc is the single violation") {
  NetworkSpec spec = three_layer_spec();
  spec.arcs.push_back(make_arc("water", "1", "2", 1, 1));
  spec.arcs.back().head = {"power", "2"};
  const auto v = validate(spec);
  REQUIRE(v.size() == 1);
  CHECK(has_violation(v, "cross-layer arc"));
}

TEST_CASE("intra-layer link is the single violation") {
  NetworkSpec spec = three_layer_spec();
  spec.nodes.push_back(make_node("water", "3", 0, 1, 1));
  spec.nodes.push_back(make_node("water", "5", 0, 1, 1));
  spec.links.push_back({{"water", "3"}, {"water", "5"}});
  const auto v = validate(spec);
  REQUIRE(v.size() == 1);
  CHECK(has_violation(v, "intra-layer interdependency"));
}

TEST_CASE("other invariants") {
  NetworkSpec spec = three_layer_spec();
  spec.nodes[0].repair_cost = -1;
  spec.arcs[0].capacity = -2;
  spec.nodes[1].space = "nowhere";
  const auto v = validate(spec);
  CHECK(v.size() == 3);
  CHECK(has_violation(v, "negative repair cost"));
  CHECK(has_violation(v, "negative capacity"));
  CHECK(has_violation(v, "unknown space nowhere"));
  CHECK_THROWS_AS(Network{spec}, ValidationError);
}

TEST_CASE("text round trip is the identity") {
  const NetworkSpec spec = three_layer_spec();
  std::stringstream ss;
  write_network(spec, ss);
  CHECK(parse_network(ss) == spec);

  const NetworkSpec big = generate_network(shelby_like_options(), 3);
  const auto path = std::filesystem::temp_directory_path() / "restoro_rt.net";
  save_network(big, path);
  CHECK(load_network(path) == big);
  std::filesystem::remove(path);
}

TEST_CASE("duplicate node id is a parse error naming the id") {
  std::stringstream ss;
  write_network(three_layer_spec(), ss);
  std::string text = ss.str();
  const auto pos = text.find("[arcs]");
  text.insert(pos, "gas,1,0,1,1,1,s0,0,0,0\n");
  std::istringstream in(text);
  try {
    parse_network(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("gas:1") != std::string::npos);
    CHECK(e.line() > 0);
  }
}

TEST_CASE("malformed and missing files") {
  std::istringstream bad("[nodes]\nwater,1,abc,1,1,1,s0,0,0,0\n");
  CHECK_THROWS_AS(parse_network(bad), ParseError);
  CHECK_THROWS_AS(load_network("/nonexistent/dir/x.net"), IoError);
}

TEST_CASE("shelby-like testbed: 49 water, 16 gas, 60 power") {
  const Network net(generate_network(shelby_like_options(), 11));
  CHECK(net.node_count() == 125);
  CHECK(net.layer_sizes() == std::vector<int>{49, 16, 60});
  CHECK(net.spec().layers == std::vector<std::string>{"water", "gas", "power"});
  CHECK(validate(net.spec()).empty());
}

TEST_CASE("canonical ordering groups nodes by layer") {
  const Network net(generate_network(shelby_like_options(), 11));
  const auto& spec = net.spec();
  // Oracle: position in a walk over layers in declared order.
  std::vector<NodeRef> order;
  for (const auto& layer : spec.layers) {
    for (const auto& n : spec.nodes) {
      if (n.ref.layer == layer) order.push_back(n.ref);
    }
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(net.canonical_index(order[i]) == static_cast<int>(i));
  }
  CHECK(order[0].layer == "water");
  CHECK(net.canonical_index(order[0]) == 0);
  CHECK(net.canonical_index(order[49]) == 49);
  CHECK(order[49].layer == "gas");
  CHECK(net.canonical_index(order.back()) == 124);
  CHECK(net.canonical_arc_index(0) == 125);
  CHECK_THROWS_AS(net.canonical_index({"water", "nope"}), std::out_of_range);
}

TEST_CASE("generator is seed-deterministic and integral") {
  const auto a = generate_network(generic_options({4, 5, 3}), 99);
  const auto b = generate_network(generic_options({4, 5, 3}), 99);
  const auto c = generate_network(generic_options({4, 5, 3}), 100);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (const auto& n : a.nodes) {
    CHECK(n.balance == std::round(n.balance));
    CHECK(n.repair_cost == std::round(n.repair_cost));
  }
  for (const auto& arc : a.arcs) {
    CHECK(arc.capacity == std::round(arc.capacity));
    CHECK(arc.flow_cost == std::round(arc.flow_cost));
  }
}

}  // TEST_SUITE
