#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavytail/targets.hpp"

namespace heavytail {

// n_chains walkers in R^d, stored row-major. Chain i draws its noise from the
// counter-based stream keyed by (rng_root, i), starting at stream_offsets[i].
struct ChainBatch {
    int d = 1;
    std::size_t n_chains = 0;
    std::vector<double> positions;
    double h = 0.0;
    std::uint64_t k = 0;
    std::uint64_t rng_root = 0;
    std::vector<std::uint64_t> stream_offsets;
};

struct MomentTrace {
    std::vector<std::uint64_t> iters;
    std::vector<double> m2;
    std::vector<double> se;
    std::size_t n_chains = 0;
    double h = 0.0;  // time per iteration
    std::optional<std::string> warning;
};

struct DivergenceError : std::runtime_error {
    DivergenceError(std::size_t chain_, std::uint64_t iter_, MomentTrace partial_ = {});
    std::size_t chain;
    std::uint64_t iter;
    MomentTrace partial;
};

ChainBatch gaussian_init(double sigma2, int d, std::size_t n_chains, std::uint64_t seed, double h = 0.0);

// Mean of ||x||^2 over chains and its standard error (sample std / sqrt(n)).
struct MomentEstimate {
    double m2;
    double se;
};
MomentEstimate second_moment(const ChainBatch& batch);

// One LMC step for every chain; throws DivergenceError on blow-up.
void lmc_step(ChainBatch& batch, const PotentialSpec& spec);

// Advances `batch` by n_iters LMC steps, recording at k = 0, every
// record_every steps, and at the last step.
MomentTrace run_chains(const PotentialSpec& spec, ChainBatch& batch, std::uint64_t n_iters,
                       std::uint64_t record_every);

// Euler-Maruyama with micro-step 1/substeps_per_unit as a proxy for the
// continuous diffusion, recorded every record_dt time units. A coupled run at
// half the substeps is compared at time T; a relative change of 1% or more in
// the final m2 sets trace.warning.
MomentTrace reference_diffusion(const PotentialSpec& spec, const ChainBatch& init, double T,
                                std::uint64_t substeps_per_unit, double record_dt = 1.0);

void write_trace_csv(const MomentTrace& trace, std::ostream& os);

}  // namespace heavytail
