#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tsdiff {

enum class SigmaPolicy {
    beta,       // sigma_t = sqrt(beta_t)
    beta_tilde  // sigma_t = sqrt(beta_t * (1 - abar_{t-1}) / (1 - abar_t)), sigma_1 = 0
};

// Precomputed variance schedule for T diffusion steps. Index i holds the
// quantities for step t = i + 1. Immutable after construction; safe to share
// read-only across threads. All arithmetic is double precision.
struct NoiseSchedule {
    int num_steps = 0;
    std::vector<double> betas;             // beta_t in (0, 1)
    std::vector<double> alphas;            // 1 - beta_t
    std::vector<double> alpha_bars;        // prod_{s<=t} alpha_s, strictly decreasing
    std::vector<double> posterior_sigmas;  // reverse-step noise scale

    double beta(int t) const { return betas[static_cast<std::size_t>(t - 1)]; }
    double alpha(int t) const { return alphas[static_cast<std::size_t>(t - 1)]; }
    double alpha_bar(int t) const { return alpha_bars[static_cast<std::size_t>(t - 1)]; }
    double sigma(int t) const { return posterior_sigmas[static_cast<std::size_t>(t - 1)]; }
};

// Cosine schedule: abar_t = f(t)/f(0) with f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2),
// beta_t = 1 - abar_t/abar_{t-1} clipped to 0.999. alpha_bars are rebuilt from the
// clipped betas so the cumulative-product recurrence holds exactly.
// Throws ConfigError on num_steps < 1 or offset <= 0.
NoiseSchedule cosine_schedule(int num_steps, double offset = 0.008);

// Fills posterior_sigmas according to the policy and returns the schedule.
NoiseSchedule posterior_sigma_policy(NoiseSchedule schedule, SigmaPolicy policy);

SigmaPolicy sigma_policy_from_string(const std::string& s);
std::string to_string(SigmaPolicy policy);

}  // namespace tsdiff
