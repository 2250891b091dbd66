#include <cmath>

#include <doctest.h>

#include "coxlab/io.hpp"

using namespace coxlab;
using coxlab::io::Json;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    io::parse_chain_text(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Parse;
}

std::string message_of(const std::string& text) {
  try {
    io::parse_chain_text(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("chain files") {
  const auto file = io::parse_chain_text(R"({
    "states": [ { "label": "hi", "lambda": 2 }, { "label": "lo", "lambda": 1 } ],
    "Q": [[-3, 3], [1, -1]],
    "service": { "type": "erlang", "shape": 2, "rate": 5 }
  })");
  CHECK(file.chain.labels() == std::vector<std::string>{"lo", "hi"});
  CHECK(file.chain.lambda() == std::vector<double>{1, 2});
  CHECK(file.chain.input_index() == std::vector<std::size_t>{1, 0});
  CHECK(file.chain.generator()(0, 1) == 1.0);
  CHECK(file.chain.generator()(1, 0) == 3.0);
  REQUIRE(file.service.has_value());
  CHECK(std::get<ErlangService>(*file.service).shape == 2);

  const auto unlabeled = io::parse_chain_text(R"({"states":[{"lambda":0},{"lambda":1}],"Q":[[-1,1],[1,-1]]})");
  CHECK(unlabeled.chain.labels() == std::vector<std::string>{"0", "1"});
  CHECK_FALSE(unlabeled.service.has_value());

  const auto round = io::parse_chain(io::chain_to_json(file.chain));
  CHECK(round.chain.generator() == file.chain.generator());
  CHECK(round.chain.lambda() == file.chain.lambda());
}

TEST_CASE("chain file diagnostics") {
  CHECK(kind_of("{") == ErrorKind::Parse);
  CHECK(kind_of(R"({"states":[{"lambda":0},{"lambda":1}]})") == ErrorKind::Parse);
  CHECK(kind_of(R"({"states":[{"lambda":"x"},{"lambda":1}],"Q":[[-1,1],[1,-1]]})") == ErrorKind::Parse);
  CHECK(kind_of(R"({"states":[{"lambda":0},{"lambda":1}],"Q":[[-1,1]]})") == ErrorKind::Parse);
  CHECK(kind_of(R"({"states":[{"lambda":0},{"lambda":1}],"Q":[[-1,1],[1,-1]],
                   "service":{"type":"gamma"}})") == ErrorKind::Parse);
  CHECK(kind_of(R"({"states":[{"lambda":0},{"lambda":1}],"Q":[[-1,1],[0,0]]})") ==
        ErrorKind::NotIrreducible);

  const auto bad_row = message_of(R"({"states":[{"lambda":0},{"lambda":1}],"Q":[[-1,1],[1,-2]]})");
  CHECK(bad_row.find("row 1") != std::string::npos);
  CHECK(message_of(R"({"states":[{"lambda":0}],"Q":[[0]]})").find("states") != std::string::npos);
  CHECK(message_of(R"({"states":[{"lambda":0},{"lambda":1}],"Q":[[-1,1],[1]]})").find("Q[1]") !=
        std::string::npos);
}

TEST_CASE("service and distribution round trips") {
  for (const ServiceDistribution& s :
       {ServiceDistribution{ExponentialService{2.0}}, ServiceDistribution{DeterministicService{0.5}},
        ServiceDistribution{ErlangService{3, 1.5}},
        ServiceDistribution{HyperexponentialService{{0.3, 0.7}, {1.0, 4.0}}}}) {
    const Json j = io::service_to_json(s);
    CHECK(io::service_to_json(io::parse_service(j)) == j);
  }
  CHECK_THROWS_AS(io::parse_service(Json{{"type", "exponential"}, {"rate", -1}}), Error);
  CHECK_THROWS_AS(io::parse_service(Json{{"type", "erlang"}, {"shape", 1.5}, {"rate", 1}}), Error);

  const GridDistribution law({0, 2}, 2, {0.1, 0.2, 0.3, 0.4});
  const auto back = io::parse_grid_distribution(io::grid_distribution_to_json(law));
  CHECK(back.pmf() == law.pmf());
  CHECK(back.levels() == law.levels());
  CHECK_THROWS_AS(io::parse_grid_distribution(Json{{"levels", {0, 1}}, {"dim", 2}, {"pmf", {1, 0, 0}}}),
                  Error);
}

TEST_CASE("report serialization") {
  OrderVerdict v;
  v.status = OrderStatus::IncomparableMarginals;
  v.lp_optimum = std::nan("");
  const Json j = io::to_json(v);
  CHECK(j["verdict"] == "IncomparableMarginals");
  CHECK(j["lp_optimum"].is_null());
  CHECK(j["witness"].is_null());

  RolskiBounds b;
  b.workload_upper = INFINITY;
  CHECK(io::to_json(b)["upper"] == "inf");

  CHECK(io::fingerprint(Json{{"a", 1}}) == io::fingerprint(Json::parse(R"({ "a" : 1 })")));
  CHECK(io::fingerprint(Json{{"a", 1}}) != io::fingerprint(Json{{"a", 2}}));
  CHECK(io::hex(0xabcULL) == "0000000000000abc");
}
