#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavytail/sampler.hpp"
#include "heavytail/targets.hpp"

namespace heavytail {

// Moment-based lower bound on R_q(rho || pi):
//   R_q >= ln( m2^(q/(q-1)) / pi(||x||^(2q/(q-1))) ).
// Negative values are floored at zero and flagged.
struct RenyiSurrogate {
    double q;
    double pi_moment;
    double value;
    double raw;
    bool clamped;
};

RenyiSurrogate renyi_lower_bound(double m2, double q, double pi_moment);

// pi(||x||^(2q/(q-1))). Throws MomentUndefined when the order reaches nu.
double surrogate_pi_moment(const PotentialSpec& spec, double q);

// Second moment below which the surrogate drops under eps.
double sigma2_eps(const PotentialSpec& spec, double q, double eps);

// z_{k+1} = g(z_k) + 2hd with g(r) = (1 - 2h f'(r))^2 r, k = 0..k_max.
// Throws AssumptionViolated if g is not convex and non-decreasing on the
// range the sequence visits.
std::vector<double> comparison_process_z(const PotentialSpec& spec, double h, double z0, std::size_t k_max);

// First recorded iteration with m2 + 2 se < threshold.
std::optional<std::uint64_t> iterations_to_threshold(const MomentTrace& trace, double threshold);

struct HistRenyi {
    double value;
    int n_bins;
    double lo, hi;
    std::vector<std::string> warnings;
};

// Plug-in histogram estimate of R_q(rho || pi) in d = 1 with exact pi bin
// masses. Two extra bins collect everything outside [lo, hi]. When lo == hi
// the range is the symmetric interval holding all but 1e-4 of pi.
HistRenyi hist_renyi_1d(const std::vector<double>& samples, const PotentialSpec& spec, double q, int n_bins = 512,
                        double lo = 0.0, double hi = 0.0);

nlohmann::json diagnostic_report(const RenyiSurrogate& s, std::optional<std::uint64_t> hit_iter, double threshold);

}  // namespace heavytail
