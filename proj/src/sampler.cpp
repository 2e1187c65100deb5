#include "heavytail/sampler.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>

#include "heavytail/errors.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

namespace {

constexpr std::size_t kBlock = 256;
constexpr double kBlowUp = 1e150;


// Calls body(fprime) with a family-specialized f' so the inner loop inlines it.
template <class Body>
void with_fprime(const PotentialSpec& spec, Body&& body) {
    switch (spec.family) {
        case Family::GenCauchy: {
            const double c = 0.5 * (spec.d + spec.nu);
            body([c](double s) { return c / (1.0 + s); });
            return;
        }
        case Family::Sublinear: {
            const double a = spec.alpha;
            if (a == 1.0) {
                body([](double s) { return 0.5 / std::sqrt(1.0 + s); });
            } else {
                body([a](double s) { return 0.5 * a * std::pow(1.0 + s, 0.5 * a - 1.0); });
            }
            return;
        }
        case Family::Gaussian:
            body([](double) { return 0.5; });
            return;
        case Family::RadialCustom: {
            const auto& fp = spec.radial.fprime;
            body([&fp](double s) { return fp(s); });
            return;
        }
    }
}

struct BlockResult {
    std::vector<double> sum, sumsq;
    std::uint64_t diverged_iter = std::numeric_limits<std::uint64_t>::max();
    std::size_t diverged_chain = 0;
};

std::vector<std::uint64_t> record_schedule(std::uint64_t n_steps, std::uint64_t every) {
    std::vector<std::uint64_t> rec;
    for (std::uint64_t k = 0; k <= n_steps; k += every) rec.push_back(k);
    if (rec.back() != n_steps) rec.push_back(n_steps);
    return rec;
}

// Advances every chain by n_steps steps of size `combine * h_fine`. With
// combine > 1 each step's noise is the normalized sum of `combine` fine draws,
// so the coarse path is coupled to the fine one. Iteration labels in the
// trace are in units of steps taken.
MomentTrace advance(const PotentialSpec& spec, ChainBatch& batch, std::uint64_t n_steps, std::uint64_t every,
                    double h_fine, int combine) {
    validate(spec);
    if (batch.d != spec.d) throw DomainError("batch dimension does not match spec");
    if (!(h_fine > 0.0)) throw DomainError("step size must be positive");
    if (every < 1) throw DomainError("record_every must be >= 1");
    const int d = batch.d;
    const std::size_t n = batch.n_chains;
    const auto rec = record_schedule(n_steps, every);
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    const double h = h_fine * combine;
    const double noise = std::sqrt(2.0 * h / combine);
    const std::uint64_t start_k = batch.k;

    std::vector<BlockResult> results(n_blocks);
    with_fprime(spec, [&](auto fprime) {
        parallel_for(n_blocks, [&](std::size_t b) {
            BlockResult& out = results[b];
            out.sum.assign(rec.size(), 0.0);
            out.sumsq.assign(rec.size(), 0.0);
            const std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
            std::vector<rng::Stream> streams;
            streams.reserve(hi - lo);
            for (std::size_t i = lo; i < hi; ++i)
                streams.push_back({rng::stream_key(batch.rng_root, i), batch.stream_offsets[i]});
            std::vector<double> z(d), acc(d);
            auto accumulate = [&](std::size_t r) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const double* x = batch.positions.data() + i * d;
                    double s = 0.0;
                    for (int j = 0; j < d; ++j) s += x[j] * x[j];
                    out.sum[r] += s;
                    out.sumsq[r] += s * s;
                }
            };
            std::size_t r = 0;
            accumulate(r++);
            for (std::uint64_t step = 1; step <= n_steps; ++step) {
                for (std::size_t i = lo; i < hi; ++i) {
                    double* x = batch.positions.data() + i * d;
                    double s = 0.0;
                    for (int j = 0; j < d; ++j) s += x[j] * x[j];
                    const double drift = 1.0 - 2.0 * h * fprime(s);
                    rng::Stream& st = streams[i - lo];
                    if (combine == 1) {
                        st.normals(z.data(), d);
                    } else {
                        std::fill(acc.begin(), acc.end(), 0.0);
                        for (int c = 0; c < combine; ++c) {
                            st.normals(z.data(), d);
                            for (int j = 0; j < d; ++j) acc[j] += z[j];
                        }
                        for (int j = 0; j < d; ++j) z[j] = acc[j];
                    }
                    bool bad = false;
                    for (int j = 0; j < d; ++j) {
                        x[j] = drift * x[j] + noise * z[j];
                        bad |= !(std::abs(x[j]) <= kBlowUp);
                    }
                    if (bad) {
                        out.diverged_iter = start_k + step;
                        out.diverged_chain = i;
                        return;
                    }
                }
                if (r < rec.size() && rec[r] == step) accumulate(r++);
            }
            for (std::size_t i = lo; i < hi; ++i) batch.stream_offsets[i] = streams[i - lo].counter;
        });
    });

    MomentTrace trace;
    trace.n_chains = n;
    trace.h = h;
    std::uint64_t first_bad = std::numeric_limits<std::uint64_t>::max();
    std::size_t bad_chain = 0;
    for (const auto& br : results) {
        if (br.diverged_iter < first_bad || (br.diverged_iter == first_bad && br.diverged_chain < bad_chain)) {
            first_bad = br.diverged_iter;
            bad_chain = br.diverged_chain;
        }
    }
    const double dn = static_cast<double>(n);
    for (std::size_t r = 0; r < rec.size(); ++r) {
        if (start_k + rec[r] >= first_bad) break;
        double s = 0.0, s2 = 0.0;
        for (const auto& br : results) {
            s += br.sum[r];
            s2 += br.sumsq[r];
        }
        double m = s / dn;
        double var = n > 1 ? std::max(0.0, (s2 - dn * m * m) / (dn - 1.0)) : 0.0;
        trace.iters.push_back(start_k + rec[r]);
        trace.m2.push_back(m);
        trace.se.push_back(std::sqrt(var / dn));
    }
    if (first_bad != std::numeric_limits<std::uint64_t>::max()) throw DivergenceError(bad_chain, first_bad, trace);
    batch.k = start_k + n_steps;
    return trace;
}

}  // namespace

DivergenceError::DivergenceError(std::size_t chain_, std::uint64_t iter_, MomentTrace partial_)
    : std::runtime_error("chain " + std::to_string(chain_) + " diverged at iteration " + std::to_string(iter_)),
      chain(chain_),
      iter(iter_),
      partial(std::move(partial_)) {}

ChainBatch gaussian_init(double sigma2, int d, std::size_t n_chains, std::uint64_t seed, double h) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("sigma2 must be positive");
    if (d < 1 || n_chains < 1) throw DomainError("d and n_chains must be >= 1");
    ChainBatch b;
    b.d = d;
    b.n_chains = n_chains;
    b.h = h;
    b.rng_root = seed;
    b.positions.resize(n_chains * d);
    b.stream_offsets.resize(n_chains);
    const double sd = std::sqrt(sigma2);
    for (std::size_t i = 0; i < n_chains; ++i) {
        rng::Stream st{rng::stream_key(seed, i)};
        double* x = b.positions.data() + i * d;
        st.normals(x, d);
        for (int j = 0; j < d; ++j) x[j] *= sd;
        b.stream_offsets[i] = st.counter;
    }
    return b;
}

MomentEstimate second_moment(const ChainBatch& batch) {
    const int d = batch.d;
    const std::size_t n = batch.n_chains;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r2 = 0.0;
        for (int j = 0; j < d; ++j) r2 += batch.positions[i * d + j] * batch.positions[i * d + j];
        s += r2;
        s2 += r2 * r2;
    }
    const double dn = static_cast<double>(n);
    double m = s / dn;
    double var = n > 1 ? std::max(0.0, (s2 - dn * m * m) / (dn - 1.0)) : 0.0;
    return {m, std::sqrt(var / dn)};
}

void lmc_step(ChainBatch& batch, const PotentialSpec& spec) { advance(spec, batch, 1, 1, batch.h, 1); }

MomentTrace run_chains(const PotentialSpec& spec, ChainBatch& batch, std::uint64_t n_iters,
                       std::uint64_t record_every) {
    return advance(spec, batch, n_iters, record_every, batch.h, 1);
}

MomentTrace reference_diffusion(const PotentialSpec& spec, const ChainBatch& init, double T,
                                std::uint64_t substeps_per_unit, double record_dt) {
    if (!(T >= 0.0)) throw DomainError("T must be non-negative");
    if (substeps_per_unit < 2) throw DomainError("substeps_per_unit must be >= 2");
    const double h = 1.0 / static_cast<double>(substeps_per_unit);
    auto n_steps = static_cast<std::uint64_t>(std::llround(T * substeps_per_unit));
    auto every = std::max<std::uint64_t>(1, std::llround(record_dt * substeps_per_unit));
    ChainBatch fine = init;
    fine.h = h;
    fine.k = 0;
    MomentTrace trace = advance(spec, fine, n_steps, every, h, 1);
    if (n_steps >= 2) {
        ChainBatch coarse = init;
        coarse.h = 2 * h;
        coarse.k = 0;
        std::uint64_t half = n_steps / 2;
        MomentTrace ct = advance(spec, coarse, half, std::max<std::uint64_t>(1, every / 2), h, 2);
        // Compare at the coarse end time, 2 * half fine steps.
        double a = trace.m2.back();
        if (2 * half != n_steps) {
            ChainBatch fine_mid = init;
            fine_mid.h = h;
            fine_mid.k = 0;
            a = advance(spec, fine_mid, 2 * half, 2 * half, h, 1).m2.back();
        }
        double c = ct.m2.back();
        if (std::abs(a - c) >= 0.01 * std::abs(a))
            trace.warning = "halving the substeps changes the final m2 by " +
                            std::to_string(100.0 * std::abs(a - c) / std::abs(a)) + "%";
    }
    return trace;
}

void write_trace_csv(const MomentTrace& trace, std::ostream& os) {
    os << "iter,m2,se,n_chains\n";
    char buf[128];
    for (std::size_t i = 0; i < trace.iters.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%" PRIu64 ",%.17g,%.17g,%zu\n", trace.iters[i], trace.m2[i], trace.se[i],
                      trace.n_chains);
        os << buf;
    }
}

}  // namespace heavytail
