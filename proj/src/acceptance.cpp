/*
   Copyright 2026 The ldlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "ldlab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "ldlab/errors.hpp"
#include "ldlab/fit.hpp"
#include "ldlab/gordin.hpp"
#include "ldlab/pipeline.hpp"
#include "ldlab/rng.hpp"
#include "ldlab/theory.hpp"
#include "ldlab/ulam.hpp"

namespace ldlab::cli {

namespace {

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

bool within_ulp(double a, double b) {
    return a == b || std::nextafter(a, b) == b;
}

using Criteria = std::vector<CriterionResult>;

void p1(Criteria& out, int) {
    const double third = theory::predicted_exponent(0.5);
    out.push_back({"P1.1", "predicted_exponent(1/2) = 1/3", third == 1.0 / 3.0,
                   fmt(third, 17)});
    const double gammas[] = {0.25, 0.5, 0.75};
    const double exact[] = {1.0 / 5.0, 1.0 / 3.0, 3.0 / 7.0};
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        const double v = theory::predicted_exponent(gammas[i]);
        ok = ok && within_ulp(v, exact[i]);
        detail += (i ? ", " : "") + fmt(v, 17);
    }
    out.push_back({"P1.2", "predicted_exponent(gamma) = gamma/(gamma+1), gamma in {1/4,1/2,3/4}", ok,
                   detail + " vs 1/5, 1/3, 3/7"});
    const double old = theory::predicted_exponent_old(0.5);
    out.push_back({"P1.3", "predicted_exponent_old(1/2) = 1/5", within_ulp(old, 1.0 / 5.0),
                   fmt(old, 17)});
}

void p2(Criteria& out, int workers) {
    const auto f1 = maps::MapSystem::intermittent(1.0);
    const auto dbl = maps::MapSystem::doubling();
    SampleStream stream(42, 0);
    std::size_t mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        const maps::Point p{stream.next_uniform(), 0.0};
        if (!(f1.apply(p) == dbl.apply(p))) ++mismatches;
    }
    out.push_back({"P2.1", "f_1 equals the doubling map on 10^4 random points", mismatches == 0,
                   std::to_string(mismatches) + " mismatches"});
    const auto op = ulam::build_ulam(dbl, 1024, workers);
    double dev = 0.0;
    for (double h : op.density()) dev = std::max(dev, std::abs(h - 1.0));
    out.push_back({"P2.2", "doubling Ulam density at k=1024 uniform within 1e-9", dev <= 1e-9,
                   "sup |h - 1| = " + fmt(dev)});
}

void p3(Criteria& out, int) {
    std::vector<double> ns(200);
    for (std::size_t i = 0; i < ns.size(); ++i) ns[i] = static_cast<double>(i + 1);
    double worst = 0.0;
    std::string worst_at;
    for (double C : {0.5, 3.0}) {
        for (double tau : {0.1, 1.0}) {
            for (double theta : {0.3, 0.5, 1.0}) {
                std::vector<double> a(ns.size());
                for (std::size_t i = 0; i < ns.size(); ++i) a[i] = C * std::exp(-tau * std::pow(ns[i], theta));
                const auto f = fit::fit_points(ns, a);
                const double err = std::max({std::abs(f.C - C) / C, std::abs(f.tau - tau) / tau,
                                             std::abs(f.theta - theta) / theta});
                if (err >= worst) {
                    worst = err;
                    worst_at = "(C,tau,theta)=(" + fmt(C) + "," + fmt(tau) + "," + fmt(theta) + ")";
                }
            }
        }
    }
    out.push_back({"P3.1", "noiseless 12-point grid recovered within 1% relative", worst <= 0.01,
                   "max relative error " + fmt(worst) + " at " + worst_at});
    std::vector<double> a(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) a[i] = 2.0 * std::exp(-0.2 * ns[i]);
    const auto f = fit::fit_points(ns, a);
    out.push_back({"P3.2", "pure exponential input gives theta_hat >= 0.95", f.theta >= 0.95,
                   "theta_hat = " + fmt(f.theta)});
}

void p4(Criteria& out, int workers) {
    auto cfg = doubling_cosine_config();
    cfg.run.workers = workers;
    cfg.ld.n = {16, 64, 256, 1024, 4096};
    cfg.ld.epsilon = {0.05, 0.1, 0.2};
    cfg.ld.samples = 1000000;
    RunContext ctx(cfg);
    const auto decay = run_decay(ctx);
    const auto v = run_verify(ctx, &decay);
    bool dominated = true, markov = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < v.cells.size(); ++i) {
        dominated = dominated && v.cells[i].ci_high < v.bounds[i];
        markov = markov && v.markov[i].holds;
        worst = std::max(worst, v.cells[i].ci_high / v.bounds[i]);
    }
    const auto& k = v.calibration.constants;
    out.push_back({"P4.1", "theorem_bound dominates every ci_high (15 cells, 10^6 samples)",
                   dominated && v.cells.size() == 15,
                   "K=" + fmt(k.K) + " tau'=" + fmt(k.tau_prime) + " max ci_high/bound=" + fmt(worst)});
    out.push_back({"P4.2", "pathwise Markov inequality holds on every sample set", markov,
                   std::to_string(v.markov.size()) + " cells"});
}

void p5(Criteria& out, int workers) {
    auto cfg = doubling_cosine_config();
    cfg.run.workers = workers;
    RunContext ctx(cfg);
    const auto decay = run_decay(ctx);
    const DecayHypothesis hyp{decay.envelope, decay.C_phi, "decay"};
    const auto map = make_map(cfg.map);
    const auto cal = calibrate(map, decay.obs, hyp, cfg);
    const auto& k = cal.constants;
    mc::SampleSpec spec = ld_sample_spec(cfg);
    spec.samples = 100000;
    bool ok = true;
    std::string detail;
    for (std::size_t n : {10, 100, 1000}) {
        const auto m = mc::exp_moment(map, decay.obs, n, k.tau_prime, k.theta_prime, spec);
        ok = ok && m.value <= 2.0 + 3.0 * m.std_error;
        detail += (detail.empty() ? "" : ", ") + ("n=" + std::to_string(n) + ": " + fmt(m.value) +
                                                  " +- " + fmt(m.std_error));
    }
    out.push_back({"P5.1", "exp_moment <= 2 + 3 se for n in {10,100,1000} at calibrated tau'", ok,
                   detail});
    double bound = std::numeric_limits<double>::quiet_NaN();
    std::string err;
    try {
        bound = theory::exp_series_bound(k.theta_prime, k.K, k.C_tilde, k.tau_prime);
    } catch (const DivergentSeriesError& e) {
        err = e.what();
    }
    out.push_back({"P5.2", "exp_series_bound at calibrated tau' is exactly 2", bound == 2.0,
                   err.empty() ? fmt(bound, 17) : err});
}

void p6(Criteria& out, int workers) {
    {
        auto cfg = doubling_cosine_config();
        cfg.run.workers = workers;
        RunContext ctx(cfg);
        const auto decay = run_decay(ctx);
        const std::size_t N = gordin::auto_truncation(decay.envelope);
        const auto dec = gordin::decompose(*decay.op, decay.obs, N, decay.envelope);
        const double chi1 = gordin::chi_norm(dec, 1.0, *decay.op);
        out.push_back({"P6.1", "doubling + cosine: ||chi_N||_1 < 1e-8", chi1 < 1e-8,
                       "N=" + std::to_string(N) + " ||chi||_1=" + fmt(chi1)});
    }
    {
        ExperimentConfig cfg;
        cfg.run.workers = workers;
        cfg.map.kind = "intermittent";
        cfg.map.gamma = 0.5;
        cfg.observable.kind = "bump";
        cfg.ulam.bins = 2048;
        cfg.ulam.refine = false;
        RunContext ctx(cfg);
        const auto decay = run_decay(ctx);
        const std::size_t N = gordin::auto_truncation(decay.envelope);
        const auto dec = gordin::decompose(*decay.op, decay.obs, N, decay.envelope);
        const auto rep = gordin::summarize(dec, *decay.op);
        out.push_back({"P6.2", "f_gamma (gamma=1/2, k=2048): ||L phi_hat||_1 <= tail + 10/k, tail < 1e-6",
                       rep.passed && rep.tail_bound < 1e-6,
                       "N=" + std::to_string(rep.N) + " tail=" + fmt(rep.tail_bound) +
                           " residual=" + fmt(rep.residual) + " allowance=" + fmt(rep.allowance)});
    }
}

void p7(Criteria& out, int workers) {
    auto cfg = doubling_cosine_config();
    cfg.run.workers = workers;
    cfg.verify.calibration_n = {100, 1000, 10000};
    RunContext ctx(cfg);
    const auto decay = run_decay(ctx);
    const DecayHypothesis hyp{decay.envelope, decay.C_phi, "decay"};
    const auto map = make_map(cfg.map);
    const auto cal = calibrate(map, decay.obs, hyp, cfg);
    const auto& grid = cal.grid;
    const auto q2 = std::find(grid.qs.begin(), grid.qs.end(), 2.0) - grid.qs.begin();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    std::string detail;
    for (std::size_t ni = 0; ni < grid.ns.size(); ++ni) {
        const double r = grid.at(q2, ni).value / std::sqrt(static_cast<double>(grid.ns[ni]));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        detail += (ni ? ", " : "") + fmt(r);
    }
    out.push_back({"P7.1", "||phi_n||_2 / sqrt(n), n in {1e2,1e3,1e4}: max/min <= 2", hi / lo <= 2.0,
                   detail + " (ratio " + fmt(hi / lo) + ")"});
    mc::SampleSpec spec = ld_sample_spec(cfg);
    spec.samples = cfg.verify.calibration_samples;
    spec.seed = cfg.run.seed + 1;
    const auto m = mc::empirical_moment(map, decay.obs, 3000, 6.0, spec);
    const auto& k = cal.constants;
    const double b = theory::moment_bound(k.K, k.C_tilde, 6.0, k.theta, 3000);
    out.push_back({"P7.2", "moment_bound with calibrated K dominates held-out (q,n)=(6,3000)",
                   m.value <= b, "measured " + fmt(m.value) + " vs bound " + fmt(b) + " (K=" + fmt(k.K) + ")"});
}

struct Profile {
    const char* name;
    double budget;
    void (*run)(Criteria&, int);
};

constexpr Profile kProfiles[] = {
    {"p1", 1.0, p1},   {"p2", 10.0, p2},  {"p3", 30.0, p3},  {"p4", 600.0, p4},
    {"p5", 120.0, p5}, {"p6", 300.0, p6}, {"p7", 300.0, p7},
};

}  // namespace

bool ProfileResult::passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

std::vector<std::string> profile_names() {
    std::vector<std::string> out;
    for (const auto& p : kProfiles) out.emplace_back(p.name);
    return out;
}

ExperimentConfig doubling_cosine_config() {
    ExperimentConfig cfg;
    cfg.run.seed = 42;
    cfg.map.kind = "doubling";
    cfg.observable.kind = "cosine";
    cfg.ulam.refine = false;
    return cfg;
}

ProfileResult run_profile(const std::string& name, int workers) {
    for (const auto& p : kProfiles) {
        if (name != p.name) continue;
        ProfileResult res;
        res.profile = name;
        const auto t0 = std::chrono::steady_clock::now();
        p.run(res.criteria, workers);
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string id = name;
        id[0] = 'P';
        res.criteria.push_back({id + ".t", "runtime < " + fmt(p.budget) + " s", res.seconds < p.budget,
                                fmt(res.seconds, 4) + " s"});
        return res;
    }
    throw ConfigError("--profile " + name, "unknown profile (expected p1 .. p7)");
}

std::string format_line(const CriterionResult& c) {
    return std::string(c.passed ? "PASS " : "FAIL ") + c.id + " " + c.description + ": " + c.detail;
}

}  // namespace ldlab::cli
