#include "orbits/perturb.hpp"

#include "orbits/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <thread>

namespace orbits {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Composite Simpson over one arc's equally spaced samples (even step count).
double simpson_arc(const ReducedSystem& rs, const SubArcResult& arc,
                   const FourierSeries& p,
                   const std::function<double(double, double, double)>* weight) {
    const size_t n = arc.xs.size();
    if (n < 3 || n % 2 == 0)
        raise(Err::Internal, "Simpson needs an even sample count per arc");
    const double h = (arc.tau1 - arc.tau0) / (double)(n - 1);
    auto f = [&](size_t i) {
        double tau = arc.tau0 + h * (double)i;
        double x1 = arc.xs[i], y1 = arc.ys[i];
        double w = weight ? (*weight)(x1, y1, tau) : rs.g_factor(x1, y1, tau);
        return w * p.eval(x1, rs.torus_x2(tau));
    };
    double acc = f(0) + f(n - 1);
    for (size_t i = 1; i + 1 < n; ++i)
        acc += (i % 2 == 1 ? 4.0 : 2.0) * f(i);
    return acc * h / 3.0;
}

double wilson_lo(double phat, int n, double z) {
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double center = (phat + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return center - half;
}

double wilson_hi(double phat, int n, double z) {
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double center = (phat + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return center + half;
}

std::uint64_t mix_seed(std::uint64_t seed, int index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t)(index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

FourierSeries FourierPerturbation::as_potential() const {
    return FourierSeries({{1, 0, a1, b1}, {2, 0, a2, b2}});
}

bool FourierPerturbation::in_cuboid() const {
    for (double v : {a1, b1, a2, b2})
        if (!(v >= 1.0 && v <= 2.0))
            return false;
    return true;
}

double kernel_k(const ReducedSystem& rs, double x0, const FourierSeries& p,
                const SolveOptions& opt, KernelDiag* diag,
                const std::function<double(double, double, double)>* weight_override) {
    SolveOptions local = opt;
    local.auto_m = false;
    local.subarc.keep_samples = true;
    if (local.subarc.steps % 2 != 0)
        ++local.subarc.steps;

    InnerSolveResult s = inner_solve(rs, x0, local);
    double coarse = 0.0;
    for (const auto& arc : s.arcs)
        coarse += simpson_arc(rs, arc, p, weight_override);

    // re-shoot every arc at doubled resolution for the refinement pass
    SubArcOptions fine_opt = local.subarc;
    fine_opt.steps *= 2;
    double fine = 0.0;
    for (const auto& arc : s.arcs) {
        SubArcResult refined = solve_subarc(rs, arc.tau0, arc.tau1, arc.x0, arc.x1,
                                            fine_opt, arc.y_start);
        fine += simpson_arc(rs, refined, p, weight_override);
    }
    double rich = (16.0 * fine - coarse) / 15.0;
    if (diag) {
        diag->coarse = coarse;
        diag->fine = fine;
        diag->richardson = rich;
    }
    return rich;
}

FirstOrderCheck first_order_check(const ModelSpec& model_with_p, double e,
                                  double x0, const std::vector<double>& eps,
                                  const SolveOptions& opt) {
    SolveOptions local = opt;
    local.auto_m = false;

    ModelSpec base = model_with_p.with_epsilon(0.0);
    ReducedSystem rs0(base, e);
    InnerSolveResult s0 = inner_solve(rs0, x0, local);
    double k = kernel_k(rs0, x0, model_with_p.perturbation, local);

    FirstOrderCheck out;
    for (double ep : eps) {
        ModelSpec pert = model_with_p.with_epsilon(ep);
        ReducedSystem rse(pert, e);
        InnerSolveResult se = inner_solve(rse, x0, local, &s0.config, &s0.warm_y);
        double df = se.value - s0.value;
        double pred = ep * k;
        out.eps.push_back(ep);
        out.delta_f.push_back(df);
        out.predicted.push_back(pred);
        out.residual.push_back(std::abs(df - pred));
    }
    const size_t n = out.eps.size();
    if (n >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        size_t used = 0;
        for (size_t i = 0; i < n; ++i) {
            if (!(out.residual[i] > 0))
                continue;
            double lx = std::log(out.eps[i]);
            double ly = std::log(out.residual[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++used;
        }
        double denom = (double)used * sxx - sx * sx;
        out.slope = (used >= 2 && denom != 0)
                        ? ((double)used * sxy - sx * sy) / denom
                        : 0.0;
    }
    return out;
}

FourierResponse fourier_response(const ReducedSystem& rs, int ell,
                                 const std::vector<double>& xs,
                                 const SolveOptions& opt) {
    FourierResponse out;
    out.ell = ell;
    FourierSeries pc({{ell, 0, 1.0, 0.0}});
    FourierSeries ps({{ell, 0, 0.0, 1.0}});
    for (double x : xs) {
        double kc = kernel_k(rs, x, pc, opt);
        double ks = kernel_k(rs, x, ps, opt);
        double c = std::cos(ell * x), s = std::sin(ell * x);
        out.x.push_back(x);
        out.u.push_back(c * kc + s * ks);
        out.v.push_back(-s * kc + c * ks);
    }
    if (!out.u.empty()) {
        double lo = out.u[0], hi = out.u[0], sum = 0;
        for (double u : out.u) {
            lo = std::min(lo, u);
            hi = std::max(hi, u);
            sum += u;
        }
        out.u_mean = sum / (double)out.u.size();
        out.u_rel_variation =
            std::abs(out.u_mean) > 0 ? (hi - lo) / std::abs(out.u_mean) : 0.0;
    }
    return out;
}

OscResult osc_criterion(const ActionProfile& profile, double lo, double hi,
                        std::optional<double> m_const) {
    OscResult out;
    const int n = (int)profile.x0.size();
    if (n < 5)
        raise(Err::Config, "profile too coarse for the oscillation bound");

    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
        if (profile.valid[(size_t)i] && profile.x0[(size_t)i] >= lo &&
            profile.x0[(size_t)i] <= hi)
            idx.push_back(i);
    if (idx.size() < 5)
        raise(Err::Config, "oscillation interval holds fewer than 5 grid points");

    double vmin = profile.value[(size_t)idx[0]], vmax = vmin;
    for (int i : idx) {
        vmin = std::min(vmin, profile.value[(size_t)i]);
        vmax = std::max(vmax, profile.value[(size_t)i]);
    }
    out.osc = vmax - vmin;

    if (m_const) {
        out.m_const = *m_const;
    } else {
        // five-point fourth difference on the uniform profile grid
        const double h = kTwoPi / n;
        auto ok = [&](int i) { return profile.valid[(size_t)((i % n + n) % n)]; };
        auto val = [&](int i) { return profile.value[(size_t)((i % n + n) % n)]; };
        double worst = 0.0;
        for (int i : idx) {
            if (!(ok(i - 2) && ok(i - 1) && ok(i + 1) && ok(i + 2)))
                continue;
            double d4 = (val(i - 2) - 4 * val(i - 1) + 6 * val(i) - 4 * val(i + 1) +
                         val(i + 2)) /
                        (h * h * h * h);
            worst = std::max(worst, std::abs(d4));
        }
        out.m_const = worst / 12.0;
    }
    double len = hi - lo;
    out.bound = out.m_const * len * len * len * len;
    out.holds = out.osc >= out.bound;
    return out;
}

double MonteCarloReport::fraction_at(double thr) const {
    if (samples.empty())
        return 0.0;
    int ok = 0;
    for (const auto& s : samples)
        if (s.failure.empty() && s.min_lambda_ratio > thr)
            ++ok;
    return (double)ok / (double)samples.size();
}

MonteCarloReport monte_carlo_nondegeneracy(const ModelSpec& base, double eps,
                                           int n, std::uint64_t seed,
                                           const ContinuationOptions& opt,
                                           double threshold, int jobs) {
    MonteCarloReport rep;
    rep.seed = seed;
    rep.epsilon = eps;
    rep.threshold = threshold;
    rep.n = n;
    rep.samples.resize((size_t)n);

    auto run_one = [&](int i) {
        MonteCarloSample& smp = rep.samples[(size_t)i];
        smp.index = i;
        std::mt19937_64 rng(mix_seed(seed, i));
        std::uniform_real_distribution<double> u(1.0, 2.0);
        FourierPerturbation fp;
        fp.a1 = u(rng);
        fp.b1 = u(rng);
        fp.a2 = u(rng);
        fp.b2 = u(rng);
        smp.params[0] = fp.a1;
        smp.params[1] = fp.b1;
        smp.params[2] = fp.a2;
        smp.params[3] = fp.b2;

        ModelSpec model = base;
        model.perturbation = fp.as_potential();
        model.epsilon = eps;
        try {
            GlobalStructure gs = global_structure(model, opt);
            double worst = std::numeric_limits<double>::infinity();
            bool any = false;
            for (const auto& br : gs.branches) {
                for (const auto& pt : br.points) {
                    any = true;
                    double ratio = pt.lambda1 > 0 ? pt.lambda0 / pt.lambda1 : 0.0;
                    worst = std::min(worst, ratio);
                }
                if (br.end_reason == "degenerate" || br.end_reason == "step-failure")
                    worst = std::min(worst, 0.0);
            }
            if (!any) {
                smp.failure = "empty-sweep";
                smp.min_lambda_ratio = 0.0;
            } else {
                smp.min_lambda_ratio = worst;
                smp.pass = worst > threshold;
            }
        } catch (const OrbitsError& err) {
            smp.failure = err_name(err.code());
            smp.min_lambda_ratio = 0.0;
        } catch (const std::exception&) {
            smp.failure = "unexpected";
            smp.min_lambda_ratio = 0.0;
        }
    };

    int workers = std::max(1, jobs);
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            run_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> cursor{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (int i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1))
                    run_one(i);
            });
        for (auto& t : pool)
            t.join();
    }

    for (const auto& s : rep.samples) {
        if (s.pass)
            ++rep.passed;
        else
            rep.failures.push_back(s.index);
    }
    rep.fraction = n > 0 ? (double)rep.passed / n : 0.0;
    const double z = 1.96;
    if (n > 0) {
        rep.ci_lo = std::max(0.0, wilson_lo(rep.fraction, n, z));
        rep.ci_hi = std::min(1.0, wilson_hi(rep.fraction, n, z));
    }
    return rep;
}

} // namespace orbits
