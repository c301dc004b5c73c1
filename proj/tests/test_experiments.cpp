#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bilin/experiments.hpp"

using namespace bilin;
using namespace bilin::exp;

namespace {

ExperimentConfig config(const std::string& name) {
    ExperimentConfig c;
    c.experiment = name;
    return c;
}

std::size_t column(const Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (t.columns[i] == name) return i;
    }
    throw std::out_of_range(name);
}

double num(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return *d;
    return static_cast<double>(std::get<std::int64_t>(c));
}

}  // namespace

TEST(Config, HashIgnoresOutputAndThreads) {
    auto a = config("padic");
    auto b = a;
    b.out = "/tmp/elsewhere.csv";
    b.threads = 7;
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    b.seed = 2;
    EXPECT_NE(a.hash(), b.hash());
    auto c = a;
    c.poly = "0, 0, 1,0";  // same polynomial, different spelling
    EXPECT_EQ(a.hash(), c.hash());
}

TEST(Config, Validation) {
    EXPECT_THROW(config("nope").validate(), std::invalid_argument);
    auto c = config("gauss");
    c.C1 = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config("sampling");
    c.band = 0.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config("v2growth");
    c.depths = {4, 17};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config("weyl");
    c.poly = "x";
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_NO_THROW(config("iw").validate());
}

TEST(Config, ConstantHierarchy) {
    auto c = config("bessel");
    EXPECT_EQ(c.u_parameter(0), 4);
    EXPECT_EQ(c.u_parameter(2), 8);  // 4 * 2^{2 * 1/4 * 2}
    EXPECT_EQ(c.l_of_N(2), 0u);
    EXPECT_EQ(c.l_of_N(16), 4u);  // 2 log2 log2 16
}

TEST(Emit, CsvQuotingAndHash) {
    auto c = config("gauss");
    c.q_values = {5, 7};
    const Table t = run(c);
    std::ostringstream os;
    emit(os, t, c);
    std::istringstream is(os.str());
    std::string header, line;
    std::getline(is, header);
    EXPECT_EQ(header, "poly,q,prime,re,im,abs,min_abs,max_abs,q_inv_sqrt,config_hash");
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        EXPECT_EQ(line.rfind('"', 0), 0u) << line;  // poly text holds commas
        EXPECT_EQ(line.substr(line.size() - 16), c.hash());
    }
    EXPECT_EQ(n, 4u);
    EXPECT_EQ(csv_field(Cell{std::string("a\"b")}), "\"a\"\"b\"");
    EXPECT_EQ(csv_field(Cell{std::int64_t{-3}}), "-3");
}

TEST(Emit, JsonLayout) {
    auto c = config("padic");
    c.p_values = {3};
    c.jmax = 4;
    c.format = Format::json;
    const Table t = run(c);
    std::ostringstream os;
    emit(os, t, c);
    const auto j = nlohmann::json::parse(os.str());
    EXPECT_EQ(j["experiment"], "padic");
    EXPECT_EQ(j["config_hash"], c.hash());
    ASSERT_EQ(j["rows"].size(), 4u);
    EXPECT_EQ(j["rows"][0]["config_hash"], c.hash());
    EXPECT_EQ(j["rows"][2]["j"], 3);
    EXPECT_FALSE(j["verdicts"].empty());
    for (const auto& v : j["verdicts"]) EXPECT_TRUE(v.contains("pass"));
}

TEST(Experiments, GaussSquaresAtPrimes) {
    auto c = config("gauss");
    for (std::int64_t p : {3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101}) {
        c.q_values.push_back(p);
    }
    const Table t = run(c);
    const auto ia = column(t, "abs"), ir = column(t, "q_inv_sqrt"), ip = column(t, "poly");
    std::size_t checked = 0;
    for (const auto& row : t.rows) {
        if (std::get<std::string>(row[ip]) != "0,0,1") continue;
        EXPECT_NEAR(num(row[ia]), num(row[ir]), 1e-9);
        EXPECT_NEAR(num(row[column(t, "min_abs")]), num(row[ir]), 1e-9);
        EXPECT_NEAR(num(row[column(t, "max_abs")]), num(row[ir]), 1e-9);
        ++checked;
    }
    EXPECT_EQ(checked, 25u);
}

TEST(Experiments, SamplingIsometryAtQ8) {
    auto c = config("sampling");
    c.q_values = {8};
    c.draws = 4;
    const Table t = run(c);
    const auto ip = column(t, "p"), ir = column(t, "ratio");
    std::size_t checked = 0;
    for (const auto& row : t.rows) {
        if (cell_text(row[ip]) != cell_text(Cell{2.0})) continue;
        EXPECT_GE(num(row[ir]), 0.999);
        EXPECT_LE(num(row[ir]), 1.001);
        ++checked;
    }
    EXPECT_EQ(checked, 4u);
}

TEST(Experiments, IwTableAgreesWithModule) {
    auto c = config("iw");
    c.qmax = 30;
    c.iw = IWConfig(0.5, 2, 1000);
    const Table t = run(c);
    const auto iq = column(t, "q"), ia = column(t, "a"), ih = column(t, "height_exponent");
    for (const auto& row : t.rows) {
        const auto alpha = reduce_fraction(std::get<std::int64_t>(row[ia]), std::get<std::int64_t>(row[iq]));
        EXPECT_EQ(std::get<std::int64_t>(row[ih]), static_cast<std::int64_t>(height(alpha, c.iw)));
    }
    std::size_t phi_sum = 0;
    for (std::int64_t q = 1; q <= 30; ++q) {
        for (std::int64_t a = 0; a < q; ++a) phi_sum += std::gcd(a, q) == 1;
    }
    EXPECT_EQ(t.rows.size(), phi_sum);
}

TEST(Experiments, DeterministicForFixedSeed) {
    auto c = config("v2growth");
    c.depths = {2, 3, 5};
    c.trials = 8;
    c.seed = 17;
    std::ostringstream a, b;
    emit(a, run(c), c);
    emit(b, run(c), c);
    EXPECT_EQ(a.str(), b.str());
}

TEST(Experiments, ErrorsCarryContext) {
    auto c = config("ibp");
    c.n_values = {8};
    try {
        run(c);
        FAIL() << "expected ExperimentError";
    } catch (const ExperimentError& e) {
        EXPECT_NE(std::string(e.what()).find("ibp"), std::string::npos);
    }
}

TEST(Experiments, LogLogSlope) {
    EXPECT_NEAR(loglog_slope({2, 4, 8, 16}, {1, 0.5, 0.25, 0.125}), -1.0, 1e-14);
    EXPECT_THROW(loglog_slope({1}, {1}), std::invalid_argument);
}
