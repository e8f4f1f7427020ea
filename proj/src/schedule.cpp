#include "tsdiff/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsdiff/errors.hpp"

namespace tsdiff {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMaxBeta = 0.999;

double cosine_f(double frac, double offset) {
    const double c = std::cos((frac + offset) / (1.0 + offset) * kPi / 2.0);
    return c * c;
}

}  // namespace

NoiseSchedule cosine_schedule(int num_steps, double offset) {
    if (num_steps < 1) {
        throw ConfigError("schedule.num_steps: must be >= 1, got " + std::to_string(num_steps));
    }
    if (!(offset > 0.0)) {
        throw ConfigError("schedule.offset: must be > 0, got " + std::to_string(offset));
    }

    NoiseSchedule s;
    s.num_steps = num_steps;
    s.betas.resize(static_cast<std::size_t>(num_steps));
    s.alphas.resize(static_cast<std::size_t>(num_steps));
    s.alpha_bars.resize(static_cast<std::size_t>(num_steps));
    s.posterior_sigmas.assign(static_cast<std::size_t>(num_steps), 0.0);

    const double t_steps = static_cast<double>(num_steps);
    double abar = 1.0;
    double f_prev = cosine_f(0.0, offset);  // f(0); ratio f(t)/f(t-1) equals abar_t/abar_{t-1}
    for (int i = 0; i < num_steps; ++i) {
        const double f_cur = cosine_f(static_cast<double>(i + 1) / t_steps, offset);
        const double beta = std::min(1.0 - f_cur / f_prev, kMaxBeta);
        s.betas[static_cast<std::size_t>(i)] = beta;
        s.alphas[static_cast<std::size_t>(i)] = 1.0 - beta;
        abar *= 1.0 - beta;
        s.alpha_bars[static_cast<std::size_t>(i)] = abar;
        f_prev = f_cur;
    }
    return posterior_sigma_policy(std::move(s), SigmaPolicy::beta);
}

NoiseSchedule posterior_sigma_policy(NoiseSchedule schedule, SigmaPolicy policy) {
    const int t_count = schedule.num_steps;
    schedule.posterior_sigmas.resize(static_cast<std::size_t>(t_count));
    for (int i = 0; i < t_count; ++i) {
        const double beta = schedule.betas[static_cast<std::size_t>(i)];
        double sigma_sq = beta;
        if (policy == SigmaPolicy::beta_tilde) {
            // abar_0 := 1, which makes sigma_1 = 0 (no noise at the last reverse step).
            const double abar_prev = i == 0 ? 1.0 : schedule.alpha_bars[static_cast<std::size_t>(i - 1)];
            const double abar = schedule.alpha_bars[static_cast<std::size_t>(i)];
            sigma_sq = beta * (1.0 - abar_prev) / (1.0 - abar);
        }
        schedule.posterior_sigmas[static_cast<std::size_t>(i)] = std::sqrt(sigma_sq);
    }
    return schedule;
}

SigmaPolicy sigma_policy_from_string(const std::string& s) {
    if (s == "beta") return SigmaPolicy::beta;
    if (s == "beta_tilde") return SigmaPolicy::beta_tilde;
    throw ConfigError("schedule.sigma_policy: expected \"beta\" or \"beta_tilde\", got \"" + s + "\"");
}

std::string to_string(SigmaPolicy policy) {
    return policy == SigmaPolicy::beta ? "beta" : "beta_tilde";
}

}  // namespace tsdiff
