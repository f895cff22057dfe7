#include <doctest.h>

#include <cmath>
#include <limits>

#include "weakmzi/envelope.hpp"
#include "weakmzi/numerics.hpp"

using namespace weakmzi;

namespace {

OutputEnvelope sample(OutputFormat f) {
  auto e = make_envelope("test", ExperimentConfig::make(M_PI / 3, 1.0, 1.0), f);
  e.set_meta("note", "commas, \"quotes\" and colons: kept");
  e.set_meta("empty", "");
  e.add_column("x", ColumnType::Real);
  e.add_column("label", ColumnType::Text);
  e.add_column("n", ColumnType::Integer);
  e.add_row({0.1, std::string("a,b"), std::int64_t(-3)});
  e.add_row({1.0 / 3.0, std::string("say \"hi\""), std::int64_t(1) << 60});
  e.add_row({std::numeric_limits<double>::quiet_NaN(), std::string(""), std::int64_t(0)});
  e.add_row({std::numeric_limits<double>::infinity(), std::string("x"), std::int64_t(7)});
  e.add_row({-std::numeric_limits<double>::infinity(), std::string("nan"), std::int64_t(8)});
  e.add_row({5e-324, std::string("denormal"), std::int64_t(9)});
  return e;
}

}  // namespace

TEST_CASE("csv round trip") {
  const auto e = sample(OutputFormat::Csv);
  const auto text = emit(e);
  CHECK(text.find("# artifact_version: ") == 0);
  CHECK(text.find("\nx,label,n\n") != std::string::npos);
  CHECK(parse_envelope(text, OutputFormat::Csv) == e);
}

TEST_CASE("json round trip") {
  const auto e = sample(OutputFormat::Json);
  const auto text = emit(e);
  CHECK(text.find("\"metadata\"") != std::string::npos);
  CHECK(text.find("\"payload\"") != std::string::npos);
  CHECK(parse_envelope(text, OutputFormat::Json) == e);
}

TEST_CASE("random doubles survive both formats") {
  RngStream rng(77, 0);
  for (auto f : {OutputFormat::Csv, OutputFormat::Json}) {
    auto e = make_envelope("rand", ExperimentConfig{}, f);
    e.add_column("v", ColumnType::Real);
    for (int i = 0; i < 500; ++i) {
      const double v = (rng.uniform() - 0.5) * std::pow(10.0, int(rng.uniform() * 40) - 20);
      e.add_row({v});
    }
    CHECK(parse_envelope(emit(e), f) == e);
  }
}

TEST_CASE("csv numbers use 17 significant digits") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(NAN) == "nan");
}

TEST_CASE("envelope invariants") {
  auto e = make_envelope("t", ExperimentConfig{}, OutputFormat::Csv);
  CHECK_THROWS(emit(e));
  e.add_column("a", ColumnType::Real);
  CHECK_THROWS(e.add_column("a", ColumnType::Real));
  CHECK_THROWS(e.add_row({std::string("text in a real column")}));
  CHECK_THROWS(e.add_row({1.0, 2.0}));
  e.add_row({1.0});
  CHECK_THROWS(e.add_column("b", ColumnType::Real));
  OutputEnvelope bare;
  bare.add_column("a", ColumnType::Real);
  CHECK_THROWS(emit(bare));
}

TEST_CASE("parse rejects malformed input") {
  CHECK_THROWS(parse_envelope("# a: 1\nx\n1\n", OutputFormat::Csv));
  CHECK_THROWS(parse_envelope("# column_types: real\n", OutputFormat::Csv));
  CHECK_THROWS(parse_envelope("# column_types: real\nx\nabc\n", OutputFormat::Csv));
  CHECK_THROWS(parse_envelope("# column_types: real,real\nx,y\n1\n", OutputFormat::Csv));
  CHECK_THROWS(parse_envelope("{\"metadata\": {}}", OutputFormat::Json));
  CHECK_THROWS(parse_envelope("not json", OutputFormat::Json));
  CHECK_THROWS(parse_format("xml"));
}

TEST_CASE("metadata echoes the configuration") {
  const auto e = make_envelope("weakvalue", ExperimentConfig::make(0.25, 2.0, 0.5),
                               OutputFormat::Csv);
  REQUIRE(e.meta("phi"));
  CHECK(*e.meta("phi") == "0.25");
  CHECK(*e.meta("g") == "2");
  CHECK(*e.meta("sigma") == "0.5");
  CHECK(*e.meta("command") == "weakvalue");
  CHECK(e.meta("nope") == nullptr);
}
