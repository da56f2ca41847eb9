#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "restoro/analysis.h"
#include "restoro/generator.h"
#include "restoro/random.h"
#include "test_support.h"

using namespace restoro;
using namespace restoro::testing;

namespace {

SurrogateModel model_with(std::vector<int> dims, std::uint64_t seed,
                          Activation act = Activation::kRelu) {
  ModelShape shape;
  shape.dims = std::move(dims);
  shape.hidden_activation = act;
  return init_model(shape, seed);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const CategoryPartition kTestbed{{"water", "gas", "power"}, {49, 16, 60}};

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("partition boundaries") {
  CHECK(kTestbed.total() == 125);
  CHECK(kTestbed.boundaries() == std::vector<int>{49, 65});
  const Network net(generate_network(shelby_like_options(), 1));
  const CategoryPartition p = CategoryPartition::from_network(net);
  CHECK(p.names == kTestbed.names);
  CHECK(p.sizes == kTestbed.sizes);
}

TEST_CASE("block aggregates") {
  SurrogateModel m = model_with({125, 7, 125}, 3);
  SUBCASE("all-ones weights count category members") {
    m.weights[0].setOnes();
    m.weights[1].setOnes();
    const BlockAggregate a = block_aggregate(m, kTestbed);
    REQUIRE(a.input_mass.size() == 7);
    for (int j = 0; j < 7; ++j) {
      CHECK(a.input_mass[j] == std::vector<double>{49, 16, 60});
      CHECK(a.output_mass[j] == std::vector<double>{49, 16, 60});
    }
  }
  SUBCASE("zero weights give zero masses") {
    m.weights[0].setZero();
    m.weights[1].setZero();
    const BlockAggregate a = block_aggregate(m, kTestbed);
    for (const auto& row : a.input_mass) {
      for (double v : row) CHECK(v == 0.0);
    }
  }
  SUBCASE("category masses partition each neuron's total mass") {
    const BlockAggregate a = block_aggregate(m, kTestbed);
    for (int j = 0; j < 7; ++j) {
      // Sequential left-to-right sums in the same order are bit-identical.
      double in_total = 0.0, out_total = 0.0;
      for (int i = 0; i < 125; ++i) {
        in_total += std::abs(m.weights[0](j, i));
        out_total += std::abs(m.weights[1](i, j));
      }
      double in_sum = 0.0, out_sum = 0.0;
      for (int c = 0; c < 3; ++c) {
        in_sum += a.input_mass[j][c];
        out_sum += a.output_mass[j][c];
      }
      CHECK(in_sum == doctest::Approx(in_total).epsilon(1e-14));
      CHECK(out_sum == doctest::Approx(out_total).epsilon(1e-14));
    }
    const BlockAggregate s = block_aggregate(m, kTestbed, true);
    CHECK(s.input_mass[0][0] <= a.input_mass[0][0]);
  }
  CHECK_THROWS_AS(block_aggregate(model_with({125, 4, 4, 125}, 1), kTestbed),
                  std::invalid_argument);
  CHECK_THROWS_AS(block_aggregate(model_with({10, 4, 10}, 1), kTestbed),
                  std::invalid_argument);
}

TEST_CASE("recovery operator") {
  SUBCASE("single hidden neuron gives the rank-1 outer product") {
    SurrogateModel m = model_with({5, 1, 4}, 2);
    const Eigen::MatrixXd op = recovery_operator(m);
    const Eigen::MatrixXd outer = m.weights[1].col(0) * m.weights[0].row(0);
    CHECK(op.isApprox(outer, 1e-15));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(op);
    CHECK(lu.rank() == 1);
  }
  SUBCASE("identity weights give the identity") {
    SurrogateModel m = model_with({6, 6, 6}, 2);
    m.weights[0].setIdentity();
    m.weights[1].setIdentity();
    CHECK(recovery_operator(m) == Eigen::MatrixXd::Identity(6, 6));
  }
  SUBCASE("double-loop oracle") {
    const SurrogateModel m = model_with({9, 4, 7}, 5);
    const Eigen::MatrixXd op = recovery_operator(m);
    for (int k = 0; k < 7; ++k) {
      for (int i = 0; i < 9; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += m.weights[1](k, j) * m.weights[0](j, i);
        CHECK(std::abs(op(k, i) - s) <= 1e-12);
      }
    }
  }
  SUBCASE("linear zero-bias models are reproduced exactly") {
    const SurrogateModel m = model_with({8, 5, 6, 8}, 7, Activation::kIdentity);
    const Eigen::MatrixXd op = recovery_operator(m);
    Rng rng(3);
    Eigen::MatrixXd x(8, 20);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform01(rng);
    CHECK((forward_batch(m, x) - op * x).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(operator_fidelity(m, op, x) == doctest::Approx(1.0));
    const SurrogateModel relu = model_with({8, 5, 6, 8}, 7);
    CHECK(operator_fidelity(relu, recovery_operator(relu), x) < 1.0);
  }
}

TEST_CASE("operator CSV") {
  SurrogateModel m = model_with({3, 2, 3}, 1);
  const Eigen::MatrixXd op = recovery_operator(m);
  const auto dir = std::filesystem::temp_directory_path();
  const CategoryPartition p{{"a", "b"}, {2, 1}};
  write_operator_csv(op, p, dir / "restoro_op1.csv");
  write_operator_csv(op, p, dir / "restoro_op2.csv");
  const std::string text = slurp(dir / "restoro_op1.csv");
  CHECK(text == slurp(dir / "restoro_op2.csv"));
  int body = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') ++body;
  }
  CHECK(body == 3);
  CHECK(text.find("# boundaries_after_columns 2\n") != std::string::npos);

  const Eigen::MatrixXd big = Eigen::MatrixXd::Zero(125, 125);
  write_operator_csv(big, kTestbed, dir / "restoro_op3.csv");
  CHECK(slurp(dir / "restoro_op3.csv").find("# boundaries_after_columns 49 65\n") !=
        std::string::npos);
}

TEST_CASE("trade-off curve") {
  const Network net(generate_network(generic_options({5, 5}), 4));
  DamageScenario sc{FunctionalityState::all_up(net), 6, "t"};
  for (int v : {0, 2, 4, 6, 8}) sc.initial.node_up[v] = 0;
  std::map<int, SurrogateModel> models;
  for (int rc = 1; rc <= 5; ++rc) {
    ModelShape shape;
    shape.dims = {10, 3, 10};
    shape.resource_cap = rc;
    shape.horizon = 6;
    models.emplace(rc, init_model(shape, rc));
  }
  const TradeoffCurve a =
      tradeoff(net, sc, {5, 1, 3, 2, 4}, models, SolverMode::kIterative, 6, 1);
  const TradeoffCurve b =
      tradeoff(net, sc, {1, 2, 3, 4, 5}, models, SolverMode::kIterative, 6, 3);
  REQUIRE(a.points.size() == 5);
  double prev_cost = std::numeric_limits<double>::infinity();
  int prev_time = 100;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.points[i].resource_cap == static_cast<int>(i) + 1);
    CHECK(a.points[i].solver_time == b.points[i].solver_time);
    CHECK(a.points[i].surrogate_time == b.points[i].surrogate_time);
    CHECK(a.points[i].solver_time <= prev_time);
    prev_time = a.points[i].solver_time;
    prev_cost = a.points[i].solver_cost;
  }
  CHECK(prev_cost > 0);
  CHECK(a.points.back().solver_time == 1);  // R_c = number damaged

  const TradeoffCurve exact =
      tradeoff(net, sc, {1, 2, 3}, models, SolverMode::kExact, 4, 1);
  for (std::size_t i = 1; i < exact.points.size(); ++i) {
    CHECK(exact.points[i].solver_cost <= exact.points[i - 1].solver_cost);
  }
  CHECK_THROWS_AS(tradeoff(net, sc, {1, 9}, models, SolverMode::kIterative, 6),
                  std::invalid_argument);
  CHECK_THROWS_AS(tradeoff(net, sc, {1, 1}, models, SolverMode::kIterative, 6),
                  std::invalid_argument);

  const auto path = std::filesystem::temp_directory_path() / "restoro_curve.csv";
  write_tradeoff_csv(a, path);
  CHECK(slurp(path).rfind("Rc,solver_time,nn_time,solver_cost\n1,", 0) == 0);
}

}  // TEST_SUITE
