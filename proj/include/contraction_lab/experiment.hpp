#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "contraction_lab/inference.hpp"
#include "contraction_lab/rates.hpp"

namespace clab {

enum class InferenceMethod { Pcn, Vb, Both };

// One contraction sweep: fixed truth, N-dependent rescaled prior, simulated
// data per (N, replicate) cell, posterior mass outside the m delta_N ball.
struct ExperimentPlan {
    std::vector<int> n_grid;  // strictly increasing
    int replicates = 3;
    double sigma = 0.05;

    ForwardProblem problem;
    LinkSpec link;

    double prior_alpha = 3.0;
    double prior_h = 0.05;
    int basis_modes = 32;                      // modes per axis of the shared basis
    std::optional<double> cond_radius_mult;    // M = mult * ||F0||_{H^1} when set

    double truth_beta = 1.0;
    std::uint64_t truth_seed = 101;

    double rate_b = -0.15;    // delta_N = N^b
    double m_radius = 2.0;    // ball multiplier m
    double eta_hat = 1.0;     // L2-metric radius exponent (from stability_scan)

    InferenceMethod method = InferenceMethod::Pcn;
    ChainConfig chain;
    VbConfig vb;
    double vb_jq_exponent = 0.0;  // if > 0, J_q = ceil(N^c) per cell
    int posterior_draws = 200;    // VB draws / target kept pCN states per cell
    bool pcn_warm_start = true;   // init each chain at a cheap VB mean

    std::uint64_t seed = 20240914;

    void validate() const {
        require(!n_grid.empty(), "ExperimentPlan: empty N grid");
        for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
            require(n_grid[i] < n_grid[i + 1], "ExperimentPlan: N grid must be strictly increasing");
        require(n_grid.front() >= 1, "ExperimentPlan: N must be positive");
        require(replicates >= 3, "ExperimentPlan: replicates must be >= 3");
        require(sigma > 0.0, "ExperimentPlan: sigma must be positive");
        require(rate_b < 0.0, "ExperimentPlan: rate exponent b must be negative");
        problem.validate();
        link.validate();
    }
};

struct CellResult {
    int N = 0;
    int replicate = 0;
    std::string method;  // "pcn" or "vb"
    double mass_outside_dg = 0.0;
    double mass_outside_l2 = 0.0;
    double median_l2_err = 0.0;
    double acceptance = 0.0;  // pCN only
    bool failed = false;
    std::string error;
};

struct MethodSummary {
    std::string method;
    double slope = 0.0;     // fitted slope of log median L2 error vs log N
    double slope_se = 0.0;
    double slope_ci_lo = 0.0;
    double slope_ci_hi = 0.0;
    std::vector<double> median_per_n;  // per-N median of cell medians
};

struct ExperimentResult {
    std::vector<CellResult> cells;  // sorted by (method, N, replicate)
    std::vector<MethodSummary> summaries;
    double completeness = 1.0;  // fraction of cells that finished
    SpectralField truth;
};

namespace exp_detail {

inline int thread_cap() {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("CONTRACTION_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) cap = std::min(cap, v);
    }
    return cap;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return (v.size() % 2 == 1) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double l2_coeff_distance(const SpectralField& a, const SpectralField& b) {
    double acc = 0.0;
    for (int j = 0; j < a.size(); ++j) {
        const double d =
            a.coeffs[static_cast<std::size_t>(j)] - b.coeffs[static_cast<std::size_t>(j)];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// OLS slope of y on x with the usual standard error; CI is +-2 se.
inline void fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                      MethodSummary& s) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    s.slope = (n * sxy - sx * sy) / det;
    const double icept = (sy - s.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (icept + s.slope * x[i]);
        ss += e * e;
    }
    const double dof = (n > 2) ? static_cast<double>(n - 2) : 1.0;
    s.slope_se = std::sqrt(ss / dof * (static_cast<double>(n) / det));
    s.slope_ci_lo = s.slope - 2.0 * s.slope_se;
    s.slope_ci_hi = s.slope + 2.0 * s.slope_se;
}

}  // namespace exp_detail

// Runs every (N, replicate, method) cell, concurrently up to the
// CONTRACTION_LAB_THREADS cap; results are reduced by sorted key, so reruns
// with the same plan reproduce outputs bit-identically regardless of
// scheduling. A failed cell is recorded and the sweep continues.
inline ExperimentResult run_contraction_experiment(const ExperimentPlan& plan) {
    plan.validate();

    const int J = (plan.problem.dim == 1)
                      ? plan.basis_modes
                      : plan.basis_modes * plan.basis_modes;
    SpectralField truth = synthesize_truth(plan.truth_beta, plan.problem.dim, J, plan.truth_seed);

    struct Job {
        int N;
        int rep;
        bool vb;
    };
    std::vector<Job> jobs;
    for (int N : plan.n_grid)
        for (int rep = 0; rep < plan.replicates; ++rep) {
            if (plan.method != InferenceMethod::Vb) jobs.push_back({N, rep, false});
            if (plan.method != InferenceMethod::Pcn) jobs.push_back({N, rep, true});
        }

    std::vector<CellResult> cells(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= jobs.size()) return;
            const Job& job = jobs[idx];
            CellResult& cell = cells[idx];
            cell.N = job.N;
            cell.replicate = job.rep;
            cell.method = job.vb ? "vb" : "pcn";
            try {
                PriorSpec prior;
                prior.alpha = plan.prior_alpha;
                prior.h = plan.prior_h;
                prior.N = job.N;
                prior.basis = truth.basis;
                if (plan.cond_radius_mult)
                    prior.cond_radius = *plan.cond_radius_mult * norm_hs(truth, 1.0);

                const std::uint64_t cell_seed =
                    derive_seed(plan.seed, static_cast<std::uint64_t>(job.N),
                                static_cast<std::uint64_t>(job.rep));
                const Dataset ds = simulate_data(plan.problem, plan.link, truth, job.N,
                                                 plan.sigma, derive_seed(cell_seed, 1));

                std::vector<SpectralField> samples;
                if (!job.vb) {
                    ChainConfig cc = plan.chain;
                    cc.seed = derive_seed(cell_seed, 2);
                    if (plan.pcn_warm_start) {
                        // tight posteriors put the mode far outside pCN's
                        // random-walk reach; a small variational fit lands the
                        // chain in the informative region first
                        VbConfig warm;
                        warm.J_q = std::min(8, J);
                        warm.steps = 200;
                        warm.mc_samples = 4;
                        warm.lr = 0.1;
                        warm.seed = derive_seed(cell_seed, 5);
                        const VariationalState ws =
                            vb_fit(ds, plan.problem, plan.link, prior, warm);
                        std::vector<double> init(static_cast<std::size_t>(J), 0.0);
                        for (int j = 0; j < ws.J_q; ++j)
                            init[static_cast<std::size_t>(j)] =
                                ws.mean[static_cast<std::size_t>(j)];
                        if (prior.cond_radius) {
                            // keep the warm start inside the conditioning ball
                            const double nh1 =
                                norm_hs(SpectralField(prior.basis, init), 1.0);
                            if (nh1 > *prior.cond_radius)
                                for (double& v : init) v *= 0.95 * *prior.cond_radius / nh1;
                        }
                        cc.init_coeffs = std::move(init);
                    }
                    PcnResult res = pcn_sample(ds, plan.problem, plan.link, prior, cc);
                    samples = std::move(res.samples);
                    cell.acceptance = res.acceptance_rate;
                } else {
                    VbConfig vc = plan.vb;
                    vc.seed = derive_seed(cell_seed, 3);
                    if (plan.vb_jq_exponent > 0.0)
                        vc.J_q = std::min<int>(
                            J, static_cast<int>(std::ceil(
                                   std::pow(static_cast<double>(job.N), plan.vb_jq_exponent))));
                    VariationalState st = vb_fit(ds, plan.problem, plan.link, prior, vc);
                    samples = vb_sample(st, plan.posterior_draws, derive_seed(cell_seed, 4));
                }

                const double delta_n = std::pow(static_cast<double>(job.N), plan.rate_b);
                cell.mass_outside_dg =
                    posterior_mass_outside(samples, plan.problem, plan.link, truth,
                                           plan.m_radius * delta_n, DistanceMetric::dG);
                cell.mass_outside_l2 = posterior_mass_outside(
                    samples, plan.problem, plan.link, truth,
                    std::pow(plan.m_radius * delta_n, plan.eta_hat), DistanceMetric::L2);
                std::vector<double> errs;
                errs.reserve(samples.size());
                for (const auto& s : samples)
                    errs.push_back(exp_detail::l2_coeff_distance(s, truth));
                cell.median_l2_err = exp_detail::median(std::move(errs));
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
        }
    };

    const int nthreads = std::min<int>(exp_detail::thread_cap(), static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    ExperimentResult out;
    out.truth = truth;
    out.cells = std::move(cells);
    std::sort(out.cells.begin(), out.cells.end(), [](const CellResult& a, const CellResult& b) {
        if (a.method != b.method) return a.method < b.method;
        if (a.N != b.N) return a.N < b.N;
        return a.replicate < b.replicate;
    });

    long ok = 0;
    for (const auto& c : out.cells)
        if (!c.failed) ++ok;
    out.completeness =
        out.cells.empty() ? 1.0 : static_cast<double>(ok) / static_cast<double>(out.cells.size());

    for (const std::string& method : {std::string("pcn"), std::string("vb")}) {
        bool any = false;
        std::vector<double> lx, ly;
        MethodSummary s;
        s.method = method;
        for (int N : plan.n_grid) {
            std::vector<double> meds;
            for (const auto& c : out.cells)
                if (c.method == method && c.N == N && !c.failed) meds.push_back(c.median_l2_err);
            if (meds.empty()) continue;
            any = true;
            const double med = exp_detail::median(std::move(meds));
            s.median_per_n.push_back(med);
            lx.push_back(std::log(static_cast<double>(N)));
            ly.push_back(std::log(std::max(med, 1e-300)));
        }
        if (any && lx.size() >= 2) {
            exp_detail::fit_slope(lx, ly, s);
            out.summaries.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace clab
