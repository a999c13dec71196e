#include <doctest.h>

#include <random>

#include "secmkt/sensitivity.hpp"
#include "support.hpp"

using namespace secmkt;
using testing::line;
using testing::make_network;

namespace {

Network triangle(int reference) {
    // lines: 1-2, 2-3, 1-3
    return make_network(3, {line(1, 1, 2, 0.1, 100), line(2, 2, 3, 0.1, 100), line(3, 1, 3, 0.1, 100)}, {}, {},
                        reference);
}

double scale(const std::vector<double>& v) {
    double m = 1.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Largest |a - b| relative to max(1, max|b|).
double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d / scale(b);
}

/// Post-outage flows by the LODF update of base flows.
std::vector<double> lodf_flows(const SensitivityFactors& sens, const std::vector<double>& base, std::size_t out) {
    std::vector<double> f(base.size(), 0.0);
    for (std::size_t k = 0; k < base.size(); ++k)
        if (k != out) f[k] = base[k] + sens.lodf()(k, out) * base[out];
    return f;
}

void check_against_oracle(const Network& net, std::mt19937_64& rng, int draws) {
    const SensitivityFactors sens(net);
    for (int d = 0; d < draws; ++d) {
        const auto inj = testing::balanced_injection(rng, net.num_buses());
        const auto base = line_flows(sens.ptdf_base(), inj);
        CHECK(rel_diff(base, testing::dc_flows(net, inj)) < 1e-8);
        for (std::size_t l = 0; l < net.num_lines(); ++l) {
            if (sens.radial()[l]) continue;
            const auto oracle = testing::dc_flows(net, inj, static_cast<long>(l));
            CHECK(rel_diff(lodf_flows(sens, base, l), oracle) < 1e-8);
            auto post = line_flows(sens.ptdf_post(l), inj);
            CHECK(rel_diff(post, oracle) < 1e-8);
        }
    }
}

}  // namespace

TEST_CASE("triangle PTDF by hand") {
    const auto net = triangle(3);
    const auto ptdf = compute_ptdf(net);
    CHECK(ptdf(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(ptdf(1, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(ptdf(2, 0) == doctest::Approx(2.0 / 3.0));
    for (int k = 0; k < 3; ++k) CHECK(ptdf(k, 2) == 0.0);
}

TEST_CASE("two-bus line carries the whole injection") {
    const auto net = make_network(2, {line(1, 1, 2, 0.3, 10)}, {}, {}, 2);
    const auto ptdf = compute_ptdf(net);
    CHECK(ptdf(0, 0) == doctest::Approx(1.0));
    CHECK(ptdf(0, 1) == 0.0);
}

TEST_CASE("LODF examples") {
    SUBCASE("parallel twins") {
        const auto net = make_network(2, {line(1, 1, 2, 0.2, 10), line(2, 1, 2, 0.2, 10)}, {}, {});
        const SensitivityFactors sens(net);
        CHECK(sens.lodf()(0, 1) == doctest::Approx(1.0));
        CHECK(sens.lodf()(1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("triangle outage of 1-3") {
        const auto net = triangle(3);
        const SensitivityFactors sens(net);
        CHECK(sens.lodf()(0, 2) == doctest::Approx(1.0));
        const auto& post = sens.ptdf_post(2);
        CHECK(post(0, 0) == doctest::Approx(1.0));
        CHECK(post(2, 0) == 0.0);
        for (int k = 0; k < 3; ++k) CHECK(post(k, 2) == 0.0);
    }
    SUBCASE("radial outage and self entries are errors") {
        const auto net = make_network(3, {line(1, 1, 2, 0.1, 10), line(2, 1, 2, 0.1, 10), line(3, 2, 3, 0.1, 10)}, {}, {});
        const SensitivityFactors sens(net);
        CHECK_FALSE(sens.lodf().defined(0, 2));
        CHECK_THROWS_AS(sens.lodf()(0, 2), DomainError);
        CHECK_THROWS_AS(sens.lodf()(1, 1), DomainError);
        CHECK_THROWS_AS(sens.ptdf_post(2), DomainError);
        CHECK_THROWS_AS(compute_post_ptdf(net, 2), DomainError);
    }
}

TEST_CASE("post-contingency PTDF formula equals the rebuilt topology") {
    for (const char* name : {"toy3.json", "case6.json", "case118.json"}) {
        const auto net = load_case(testing::data_file(name));
        const SensitivityFactors sens(net);
        std::size_t checked = 0;
        for (std::size_t l = 0; l < net.num_lines(); ++l) {
            if (sens.radial()[l]) continue;
            ++checked;
            const auto rebuilt = compute_ptdf(net.without_line(l));
            const auto& post = sens.ptdf_post(l);
            double worst = 0.0;
            for (std::size_t k = 0, r = 0; k < net.num_lines(); ++k) {
                if (k == l) continue;
                worst = std::max(worst, (post.row(static_cast<Eigen::Index>(k)) - rebuilt.row(static_cast<Eigen::Index>(r++)))
                                            .cwiseAbs()
                                            .maxCoeff());
            }
            CHECK(worst < 1e-8);
        }
        if (net.num_lines() == 186) CHECK(checked == 177);
    }
}

TEST_CASE("flows match an independent DC power flow on random graphs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const auto net = testing::random_network(rng, 3 + trial % 10, 1 + trial % 6);
        check_against_oracle(net, rng, 3);
    }
}

TEST_CASE("flows match an independent DC power flow on the bundled cases") {
    std::mt19937_64 rng(11);
    for (const char* name : {"case6.json", "case118.json"}) check_against_oracle(load_case(testing::data_file(name)), rng, 2);
}

TEST_CASE("PTDF is linear and reference independent") {
    const auto net = load_case(testing::data_file("case6.json"));
    std::mt19937_64 rng(3);
    const auto a = testing::balanced_injection(rng, net.num_buses());
    const auto b = testing::balanced_injection(rng, net.num_buses());
    std::vector<double> sum(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];
    const SensitivityFactors sens(net);
    const auto fa = line_flows(sens.ptdf_base(), a), fb = line_flows(sens.ptdf_base(), b);
    const auto fs = line_flows(sens.ptdf_base(), sum);
    for (std::size_t k = 0; k < fs.size(); ++k) CHECK(fs[k] == doctest::Approx(fa[k] + fb[k]).epsilon(1e-12));

    for (const auto& bus : net.buses) {
        const auto other = compute_ptdf(net, bus.id);
        const auto fo = line_flows(other, a);
        CHECK(rel_diff(fo, fa) < 1e-8);
        CHECK(other.col(static_cast<Eigen::Index>(net.bus_index(bus.id))).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("injection at the reference bus moves nothing after an outage") {
    const auto net = load_case(testing::data_file("case6.json"));
    const SensitivityFactors sens(net);
    for (std::size_t l = 0; l < net.num_lines(); ++l) {
        if (sens.radial()[l]) continue;
        CHECK(sens.ptdf_post(l).col(static_cast<Eigen::Index>(net.reference_index())).cwiseAbs().maxCoeff() == 0.0);
    }
}
