#include <cmath>
#include <vector>

#include "doctest.h"
#include "tsdiff/errors.hpp"
#include "tsdiff/schedule.hpp"

using namespace tsdiff;

namespace {

// Independent oracle: betas and alpha-bars straight from the closed form
// f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2), beta_t = 1 - f(t/T)/f((t-1)/T)
// clipped at 0.999, alpha_bars as the cumulative product.
struct OracleSchedule {
    std::vector<double> betas, alpha_bars;
};

OracleSchedule oracle_cosine(int t_count, double offset) {
    auto f = [&](double frac) {
        const double c = std::cos((frac + offset) / (1.0 + offset) * M_PI / 2.0);
        return c * c;
    };
    OracleSchedule o;
    double abar = 1.0;
    for (int t = 1; t <= t_count; ++t) {
        const double ratio = f(static_cast<double>(t) / t_count) / f(static_cast<double>(t - 1) / t_count);
        const double beta = std::min(1.0 - ratio, 0.999);
        o.betas.push_back(beta);
        abar *= 1.0 - beta;
        o.alpha_bars.push_back(abar);
    }
    return o;
}

}  // namespace

TEST_CASE("cosine schedule matches the closed-form oracle elementwise") {
    for (int t_count : {1, 10, 100, 1000}) {
        const NoiseSchedule s = cosine_schedule(t_count, 0.008);
        const OracleSchedule o = oracle_cosine(t_count, 0.008);
        REQUIRE(s.num_steps == t_count);
        for (int i = 0; i < t_count; ++i) {
            CAPTURE(t_count);
            CAPTURE(i);
            CHECK(std::abs(s.betas[i] - o.betas[i]) < 1e-6);
            CHECK(std::abs(s.alpha_bars[i] - o.alpha_bars[i]) < 1e-6);
        }
    }
}

TEST_CASE("cosine schedule first alpha-bar equals the f(1/T)/f(0) ratio") {
    const NoiseSchedule s = cosine_schedule(1000, 0.008);
    const double f1 = std::pow(std::cos((1.0 / 1000 + 0.008) / 1.008 * M_PI / 2.0), 2);
    const double f0 = std::pow(std::cos(0.008 / 1.008 * M_PI / 2.0), 2);
    CHECK(std::abs(s.alpha_bars[0] - f1 / f0) < 1e-6);
}

TEST_CASE("schedule invariants: ranges, exact alpha relation, recurrence, clipping") {
    for (int t_count : {1, 2, 7, 50, 400}) {
        const NoiseSchedule s = cosine_schedule(t_count);
        for (int i = 0; i < t_count; ++i) {
            CHECK(s.betas[i] > 0.0);
            CHECK(s.betas[i] <= 0.999);
            CHECK(s.alphas[i] == 1.0 - s.betas[i]);
            CHECK(s.alpha_bars[i] > 0.0);
            CHECK(s.alpha_bars[i] < 1.0);
            if (i > 0) {
                CHECK(s.alpha_bars[i] < s.alpha_bars[i - 1]);
                CHECK(std::abs(s.alpha_bars[i] - s.alpha_bars[i - 1] * s.alphas[i]) < 1e-12);
            }
        }
    }
}

TEST_CASE("single-step schedule is a valid degenerate case") {
    const NoiseSchedule s = cosine_schedule(1);
    REQUIRE(s.betas.size() == 1);
    CHECK(s.betas[0] > 0.0);
    CHECK(s.betas[0] <= 0.999);
}

TEST_CASE("schedule construction rejects bad arguments") {
    CHECK_THROWS_AS(cosine_schedule(0), ConfigError);
    CHECK_THROWS_AS(cosine_schedule(-5), ConfigError);
    CHECK_THROWS_AS(cosine_schedule(10, 0.0), ConfigError);
    CHECK_THROWS_AS(cosine_schedule(10, -0.008), ConfigError);
}

TEST_CASE("sigma policy beta takes sqrt(beta_t) everywhere") {
    NoiseSchedule s = posterior_sigma_policy(cosine_schedule(100), SigmaPolicy::beta);
    for (int i = 0; i < 100; ++i) {
        CHECK(s.posterior_sigmas[i] == std::sqrt(s.betas[i]));
    }
}

TEST_CASE("sigma policy beta_tilde uses the abar_0 := 1 convention at t = 1") {
    NoiseSchedule s = posterior_sigma_policy(cosine_schedule(100), SigmaPolicy::beta_tilde);
    CHECK(s.posterior_sigmas[0] == 0.0);  // (1 - abar_0) = 0: the noiseless last reverse step
    for (int i = 1; i < 100; ++i) {
        const double expected =
            std::sqrt(s.betas[i] * (1.0 - s.alpha_bars[i - 1]) / (1.0 - s.alpha_bars[i]));
        CHECK(s.posterior_sigmas[i] == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("sigma sweep over a T=100 cosine schedule stays in (0, 1]") {
    // beta policy: all steps; beta_tilde: t >= 2 (sigma_1 = 0 by the boundary
    // convention above).
    NoiseSchedule sb = posterior_sigma_policy(cosine_schedule(100), SigmaPolicy::beta);
    for (int i = 0; i < 100; ++i) {
        CHECK(sb.posterior_sigmas[i] > 0.0);
        CHECK(sb.posterior_sigmas[i] <= 1.0);
    }
    NoiseSchedule st = posterior_sigma_policy(cosine_schedule(100), SigmaPolicy::beta_tilde);
    for (int i = 1; i < 100; ++i) {
        CHECK(st.posterior_sigmas[i] > 0.0);
        CHECK(st.posterior_sigmas[i] <= 1.0);
    }
}

TEST_CASE("sigma policy names round-trip") {
    CHECK(sigma_policy_from_string("beta") == SigmaPolicy::beta);
    CHECK(sigma_policy_from_string("beta_tilde") == SigmaPolicy::beta_tilde);
    CHECK(to_string(SigmaPolicy::beta) == "beta");
    CHECK(to_string(SigmaPolicy::beta_tilde) == "beta_tilde");
    CHECK_THROWS_AS(sigma_policy_from_string("learned"), ConfigError);
}
