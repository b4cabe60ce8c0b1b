#include <doctest.h>

#include <sstream>

#include "polyparse/error.hpp"
#include "polyparse/serialization.hpp"

using namespace polyparse;

TEST_CASE("container round trip") {
  ad::ParameterStore<float> store;
  store.add("a", 2, 3);
  store.add_lookup("b", 4, 2);
  ad::Rng rng(1);
  store.initialize(rng);
  Container c;
  c.manifest = "{\"x\":1}";
  c.vocabulary = "vocab";
  c.tensors = store_records(store);
  std::stringstream io;
  write_container(io, c);
  auto back = read_container(io);
  CHECK(back.version == kContainerVersion);
  CHECK(back.manifest == c.manifest);
  CHECK(back.vocabulary == c.vocabulary);
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.tensors[0].name == "a");
  CHECK(back.tensors[0].shape == std::vector<std::uint64_t>{2, 3});
  CHECK(back.tensors[0].precision == 4);

  ad::ParameterStore<float> other;
  other.add("a", 2, 3);
  other.add_lookup("b", 4, 2);
  load_records(other, back.tensors);
  CHECK(other.get("a").value == store.get("a").value);
  CHECK(other.get("b").value == store.get("b").value);
}

TEST_CASE("precision conversion and shape checks") {
  ad::Matrix<double> m(1, 2);
  m << 0.5, -2.25;
  auto rec = make_record<double>("m", m);
  CHECK(rec.precision == 8);
  CHECK(to_matrix<float>(rec) == m.cast<float>());
  ad::ParameterStore<double> store;
  store.add("m", 2, 1);
  CHECK_THROWS_AS(load_records(store, {rec}), Error);
  ad::ParameterStore<double> missing;
  missing.add("n", 1, 2);
  CHECK_THROWS_AS(load_records(missing, {rec}), Error);
}

TEST_CASE("corrupt files are rejected") {
  std::stringstream bad("NOTAMODEL");
  CHECK_THROWS_AS(read_container(bad), Error);
  Container c;
  std::stringstream io;
  write_container(io, c);
  std::string bytes = io.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 2));
  CHECK_THROWS_AS(read_container(truncated), Error);
}
