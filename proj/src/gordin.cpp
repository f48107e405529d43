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

#include "ldlab/gordin.hpp"

#include <cmath>
#include <ostream>

#include "ldlab/errors.hpp"
#include "ldlab/theory.hpp"

namespace ldlab::gordin {

std::size_t auto_truncation(const Envelope& env, double target, std::size_t cap) {
    for (std::size_t N = 1; N < cap; ++N) {
        if (theory::envelope_tail(env.C, env.tau, env.theta, N) < target) return N;
    }
    return cap;
}

GordinDecomposition decompose(const ulam::UlamOperator& op, const maps::Observable& obs,
                              std::size_t N, const Envelope& envelope) {
    if (!(envelope.tau > 0.0) || !(envelope.theta > 0.0)) {
        throw DomainError("decompose: envelope needs tau > 0 and theta > 0");
    }
    if (N < 1) throw DomainError("decompose: N must be >= 1");

    GordinDecomposition dec;
    dec.truncation_N = N;
    dec.envelope = envelope;
    dec.tail_bound = theory::envelope_tail(envelope.C, envelope.tau, envelope.theta, N);

    auto f = ulam::discretize(obs, op.bins());
    const double mean = ulam::mu_mean(op, f);
    const double fsup = ulam::sup_norm(f);
    if (std::abs(mean) > 1e-2 * fsup) throw DomainError("decompose: observable is not centred");
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = op.masked(i) ? 0.0 : f[i] - mean;
    dec.phi_bar = f;

    dec.chi.assign(op.bins(), 0.0);
    auto term = f;
    for (std::size_t n = 1; n <= N; ++n) {
        term = ulam::transfer_apply_mu(op, term, 1);
        for (std::size_t i = 0; i < term.size(); ++i) dec.chi[i] += term[i];
    }
    const auto chi_T = op.compose_lookup(dec.chi);
    dec.phi_hat.resize(op.bins());
    for (std::size_t i = 0; i < f.size(); ++i) {
        dec.phi_hat[i] = op.masked(i) ? 0.0 : f[i] + dec.chi[i] - chi_T[i];
    }
    return dec;
}

double chi_norm(const GordinDecomposition& dec, double q, const ulam::UlamOperator& op) {
    if (!(q >= 1.0)) throw DomainError("chi_norm: q must be >= 1");
    return ulam::lq_mu(op, dec.chi, q);
}

double martingale_residual(const GordinDecomposition& dec, const ulam::UlamOperator& op) {
    return ulam::l1_mu(op, ulam::transfer_apply_mu(op, dec.phi_hat, 1));
}

GordinReport summarize(const GordinDecomposition& dec, const ulam::UlamOperator& op) {
    GordinReport rep;
    rep.N = dec.truncation_N;
    rep.tail_bound = dec.tail_bound;
    const double qs[4] = {1.0, 2.0, 4.0, 8.0};
    for (int i = 0; i < 4; ++i) rep.chi_norms[i] = chi_norm(dec, qs[i], op);
    rep.residual = martingale_residual(dec, op);
    rep.allowance = dec.tail_bound + 10.0 / static_cast<double>(op.bins());
    rep.passed = rep.residual <= rep.allowance;
    return rep;
}

void write_report(std::ostream& os, const GordinReport& rep) {
    os.precision(6);
    os << "N = " << rep.N << "\n"
       << "tail_bound = " << rep.tail_bound << "\n"
       << "chi_norm q=1 = " << rep.chi_norms[0] << "\n"
       << "chi_norm q=2 = " << rep.chi_norms[1] << "\n"
       << "chi_norm q=4 = " << rep.chi_norms[2] << "\n"
       << "chi_norm q=8 = " << rep.chi_norms[3] << "\n"
       << "residual ||L phi_hat||_1 = " << rep.residual << "\n"
       << "allowance = " << rep.allowance << "\n"
       << "status = " << (rep.passed ? "pass" : "fail") << "\n";
}

void write_grid_csv(std::ostream& os, const GordinDecomposition& dec,
                    const ulam::UlamOperator& op) {
    os << "bin,center,phi_bar,chi,phi_hat\n";
    os.precision(17);
    for (std::size_t i = 0; i < op.bins(); ++i) {
        os << i << ',' << op.bin_center(i) << ',' << dec.phi_bar[i] << ',' << dec.chi[i] << ','
           << dec.phi_hat[i] << '\n';
    }
}

}  // namespace ldlab::gordin
