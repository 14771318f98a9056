#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spheroid/spheroid.h"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace {

std::string serialized(const sph_config* cfg) {
    size_t needed = 0;
    REQUIRE(sph_config_serialize(cfg, nullptr, 0, &needed) == SPH_OK);
    std::string buf(needed, '\0');
    REQUIRE(sph_config_serialize(cfg, buf.data(), buf.size(), &needed) == SPH_OK);
    buf.resize(needed - 1);
    return buf;
}

} // namespace

TEST_CASE("config lifecycle and error reporting") {
    sph_config* cfg = nullptr;
    REQUIRE(sph_config_default(&cfg) == SPH_OK);
    CHECK(std::string(sph_last_error()).empty());
    CHECK(sph_config_set(cfg, "grid.N", "101") == SPH_OK);
    CHECK(sph_config_set(cfg, "grid.N", "2") == SPH_ERR_CONFIG);
    CHECK(std::string(sph_error_key()) == "grid.N");
    CHECK_FALSE(std::string(sph_last_error()).empty());
    CHECK(sph_config_validate(cfg) == SPH_OK);

    const std::string text = serialized(cfg);
    CHECK(text.find("N = 101") != std::string::npos);
    sph_config* copy = nullptr;
    REQUIRE(sph_config_parse(text.c_str(), &copy) == SPH_OK);
    CHECK(serialized(copy) == text);
    CHECK(sph_config_hash(copy) == sph_config_hash(cfg));

    char small[8];
    size_t needed = 0;
    CHECK(sph_config_serialize(cfg, small, sizeof small, &needed) == SPH_OK);
    CHECK(needed == text.size() + 1);
    CHECK(std::string(small) == text.substr(0, 7));

    sph_config_free(copy);
    sph_config_free(cfg);

    sph_config* bad = nullptr;
    CHECK(sph_config_parse("[solver]\nfoo = 1\n", &bad) == SPH_ERR_CONFIG);
    CHECK(bad == nullptr);
    CHECK(std::string(sph_error_key()) == "solver.foo");
    CHECK(sph_config_load("/nonexistent/spheroid.ini", &bad) == SPH_ERR_IO);
    CHECK(sph_config_default(nullptr) == SPH_ERR_INVALID_ARGUMENT);
    CHECK(std::string(sph_status_name(SPH_ERR_FORMAT)) == "format error");
}

TEST_CASE("reports") {
    sph_config* cfg = nullptr;
    REQUIRE(sph_config_default(&cfg) == SPH_OK);
    sph_report* rep = nullptr;
    REQUIRE(sph_check_assumptions(cfg, &rep) == SPH_OK);
    CHECK(sph_report_passed(rep) == 1);
    CHECK(std::string(sph_report_text(rep)).find("A5") != std::string::npos);
    sph_report_free(rep);
    REQUIRE(sph_lemma31(cfg, &rep) == SPH_OK);
    CHECK(sph_report_passed(rep) == 1);
    sph_report_free(rep);
    sph_config_free(cfg);
}

TEST_CASE("stationary solution, states and snapshots") {
    sph_config* cfg = nullptr;
    REQUIRE(sph_config_default(&cfg) == SPH_OK);
    REQUIRE(sph_config_set(cfg, "grid.N", "51") == SPH_OK);
    sph_stationary* st = nullptr;
    REQUIRE(sph_stationary_solve(cfg, &st) == SPH_OK);
    const size_t n = sph_stationary_size(st);
    CHECK(n == 51);
    std::vector<double> r(n), c(n), p(n), v(n);
    CHECK(sph_stationary_field(st, "r", r.data()) == SPH_OK);
    CHECK(sph_stationary_field(st, "c", c.data()) == SPH_OK);
    CHECK(sph_stationary_field(st, "p", p.data()) == SPH_OK);
    CHECK(sph_stationary_field(st, "v", v.data()) == SPH_OK);
    CHECK(sph_stationary_field(st, "q", v.data()) == SPH_ERR_INVALID_ARGUMENT);
    CHECK(r.back() == 1.0);
    CHECK(c.back() == 1.0);
    double v1 = 1, tr = 1, zd = 0;
    CHECK(sph_stationary_residuals(st, &v1, &tr, &zd) == SPH_OK);
    CHECK(v1 < 1e-6);
    CHECK(std::abs(zd - sph_stationary_z(st)) < 1e-3);

    sph_state* s = nullptr;
    REQUIRE(sph_stationary_state(st, &s) == SPH_OK);
    const std::string path = "capi_test_state.sph";
    REQUIRE(sph_state_save(s, cfg, path.c_str()) == SPH_OK);
    sph_state* loaded = nullptr;
    REQUIRE(sph_state_load(path.c_str(), &loaded) == SPH_OK);
    double t = -1, z = 0;
    size_t m = 0;
    CHECK(sph_state_info(loaded, &t, &z, &m) == SPH_OK);
    CHECK(t == 0.0);
    CHECK(z == sph_stationary_z(st));
    CHECK(m == n);
    std::vector<double> c2(n);
    CHECK(sph_state_field(loaded, "c", c2.data()) == SPH_OK);
    CHECK(c2 == c);

    std::FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fseek(f, 50, SEEK_SET);
    std::fputc(0x7f, f);
    std::fclose(f);
    sph_state* broken = nullptr;
    CHECK(sph_state_load(path.c_str(), &broken) == SPH_ERR_FORMAT);
    std::remove(path.c_str());

    sph_state_free(loaded);
    sph_state_free(s);
    sph_stationary_free(st);
    sph_config_free(cfg);
}

TEST_CASE("commands run through the library") {
    sph_config* cfg = nullptr;
    REQUIRE(sph_config_default(&cfg) == SPH_OK);
    int status = -1;
    size_t needed = 0;
    std::vector<char> buf(4096);
    REQUIRE(sph_run_captured(cfg, "check-assumptions", &status, buf.data(), buf.size(), &needed) == SPH_OK);
    CHECK(status == 0);
    CHECK(std::string(buf.data()).find("all assumptions pass") != std::string::npos);
    CHECK(sph_run_captured(cfg, "dance", &status, buf.data(), buf.size(), &needed) == SPH_ERR_DOMAIN);
    CHECK(sph_config_set(cfg, "rates.K_Q.steepness", "-8") == SPH_OK);
    REQUIRE(sph_run_captured(cfg, "check-assumptions", &status, buf.data(), buf.size(), &needed) == SPH_OK);
    CHECK(status == 1);
    sph_config_free(cfg);
}

TEST_CASE("decay fit") {
    std::vector<double> t, y;
    for (int i = 0; i < 20; ++i) {
        t.push_back(i * 0.5);
        y.push_back(2.0 * std::exp(-0.3 * i * 0.5));
    }
    double mu = 0, C = 0;
    CHECK(sph_fit_decay(t.data(), y.data(), t.size(), 1.0, 0.0, 5, &mu, &C) == SPH_OK);
    CHECK(mu == doctest::Approx(0.3));
    CHECK(C == doctest::Approx(2.0));
    CHECK(sph_fit_decay(t.data(), y.data(), 3, 1.0, 0.0, 5, &mu, &C) == SPH_ERR_INSUFFICIENT_DATA);
    CHECK(std::string(sph_version()).find("spheroid") == 0);
}
