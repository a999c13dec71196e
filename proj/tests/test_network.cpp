#include <doctest.h>

#include <random>
#include <string>

#include "secmkt/network.hpp"
#include "support.hpp"

using namespace secmkt;
using testing::data_file;

namespace {

const char* kTwoBus = R"({
  "meta": {"name": "two", "base_mva": 100, "reference_bus": 1, "horizon": 2},
  "buses": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}],
  "lines": [{"id": 7, "from": 1, "to": 2, "reactance_pu": 0.1, "rating_mw": 50}],
  "generators": [{"id": 3, "bus": 1, "p_min": 0, "p_max": 100, "cost_energy": 10, "cost_noload": 0,
                  "cost_startup": 0, "cost_shutdown": 0, "ramp_hourly": 100, "ramp_10min": 20,
                  "ramp_startup": 100, "ramp_shutdown": 100, "min_up": 1, "min_down": 1}],
  "loads": [{"bus": 2, "mw": [20, 30]}]
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("minimal two-bus case") {
    const auto net = parse_case(kTwoBus);
    CHECK(net.num_buses() == 2);
    CHECK(net.num_lines() == 1);
    CHECK(net.num_generators() == 1);
    CHECK(net.horizon() == 2);
    CHECK(net.load_profile.at(1, 1) == 30.0);
    CHECK(net.load_profile.system_load(0) == 20.0);
    CHECK(net.generator_bus(0) == 0);
}

TEST_CASE("missing emergency rating defaults to 1.1 x normal") {
    const auto net = parse_case(kTwoBus);
    CHECK(net.lines[0].emergency_defaulted);
    CHECK(net.lines[0].rating_emergency == doctest::Approx(55.0));
}

TEST_CASE("invalid cases are rejected") {
    CHECK_THROWS_AS(parse_case("{not json"), ParseError);
    CHECK_THROWS_AS(parse_case(replace(kTwoBus, "\"reactance_pu\": 0.1", "\"reactance_pu\": 0")), ValidationError);
    CHECK_THROWS_AS(parse_case(replace(kTwoBus, "\"to\": 2", "\"to\": 1")), ValidationError);
    CHECK_THROWS_AS(parse_case(replace(kTwoBus, "\"bus\": 1, \"p_min\"", "\"bus\": 9, \"p_min\"")), ValidationError);
    CHECK_THROWS_AS(parse_case(replace(kTwoBus, "\"p_min\": 0", "\"p_min\": 200")), ValidationError);
    CHECK_THROWS_AS(parse_case(replace(kTwoBus, "\"min_up\": 1", "\"min_up\": 0")), ValidationError);
    CHECK_THROWS_AS(parse_case(replace(kTwoBus, "[20, 30]", "[20, -1]")), ValidationError);
    CHECK_THROWS_AS(parse_case(replace(kTwoBus, "[20, 30]", "[20]")), ParseError);
    CHECK_THROWS_AS(parse_case(replace(kTwoBus, "\"rating_mw\": 50", "\"rating_mw\": 50, \"emergency_rating_mw\": 40")),
                    ValidationError);
    CHECK_THROWS_AS(parse_case(replace(kTwoBus, "\"reference_bus\": 1", "\"reference_bus\": 5")), ValidationError);
    CHECK_THROWS_AS(load_case(data_file("no_such_case.json")), ParseError);
}

TEST_CASE("disconnected network is rejected") {
    const std::string three = replace(kTwoBus, R"({"id": 2, "name": "b"}])", R"({"id": 2, "name": "b"}, {"id": 3, "name": "c"}])");
    CHECK_THROWS_AS(parse_case(three), ValidationError);
}

TEST_CASE("bundled large case has the published dimensions") {
    const auto net = load_case(data_file("case118.json"));
    CHECK(net.num_buses() == 118);
    CHECK(net.num_lines() == 186);
    CHECK(net.num_generators() == 54);
    CHECK(net.num_loaded_buses() == 91);
    CHECK(net.horizon() == 24);
    const auto radial = classify_lines(net);
    CHECK(std::count(radial.begin(), radial.end(), true) == 9);
    CHECK(std::count(radial.begin(), radial.end(), false) == 177);
}

TEST_CASE("classify_lines on small topologies") {
    using testing::line;
    using testing::make_network;
    SUBCASE("triangle has no radial lines") {
        const auto net = make_network(3, {line(1, 1, 2, 0.1, 10), line(2, 2, 3, 0.1, 10), line(3, 1, 3, 0.1, 10)}, {}, {});
        const auto r = classify_lines(net);
        CHECK(std::count(r.begin(), r.end(), true) == 0);
    }
    SUBCASE("star has two radial lines") {
        const auto net = make_network(3, {line(1, 1, 2, 0.1, 10), line(2, 1, 3, 0.1, 10)}, {}, {});
        const auto r = classify_lines(net);
        CHECK(std::count(r.begin(), r.end(), true) == 2);
    }
    SUBCASE("parallel pair is never radial") {
        const auto net = make_network(3, {line(1, 1, 2, 0.1, 10), line(2, 1, 2, 0.2, 10), line(3, 2, 3, 0.1, 10)}, {}, {});
        const auto r = classify_lines(net);
        CHECK_FALSE(r[0]);
        CHECK_FALSE(r[1]);
        CHECK(r[2]);
    }
}

TEST_CASE("classify_lines agrees with a connectivity search") {
    for (const char* name : {"toy3.json", "case6.json", "case118.json"}) {
        const auto net = load_case(data_file(name));
        CHECK(classify_lines(net) == testing::radial_by_search(net));
    }
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        const auto net = testing::random_network(rng, 3 + trial % 9, trial % 5);
        CHECK(classify_lines(net) == testing::radial_by_search(net));
    }
}

TEST_CASE("serialize and reload reproduces the network") {
    for (const char* name : {"toy3.json", "case6.json", "case118.json"}) {
        const auto net = load_case(data_file(name));
        CHECK(parse_case(serialize_case(net)) == net);
    }
    const auto two = parse_case(kTwoBus);
    const auto again = parse_case(serialize_case(two));
    CHECK(again == two);
    CHECK(again.lines[0].emergency_defaulted);
}

TEST_CASE("horizon truncation and line removal") {
    const auto net = load_case(data_file("case6.json"));
    const auto short_net = net.with_horizon(3);
    CHECK(short_net.horizon() == 3);
    CHECK(short_net.load_profile.at(2, 2) == net.load_profile.at(2, 2));
    CHECK_THROWS_AS(net.with_horizon(0), DomainError);
    CHECK_THROWS_AS(net.with_horizon(25), DomainError);
    const auto cut = net.without_line(0);
    CHECK(cut.num_lines() == net.num_lines() - 1);
    CHECK(cut.lines[0].id == net.lines[1].id);
}
