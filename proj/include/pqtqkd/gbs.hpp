// gbs.hpp
// Generalized Bell states, partially entangled channels, and the
// probabilistic quantum teleportation (PQT) primitive together with the
// closed-form probabilities that govern it.

#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "pqtqkd/rng.hpp"
#include "pqtqkd/state.hpp"

namespace pqtqkd {

// Real entanglement parameter in (0, 1]. Protocol channels use n < 1;
// n = 1 is allowed for repeater links and degenerate checks.
class ChannelParam {
public:
    explicit ChannelParam(double n) : n_(n) {
        if (!(n > 0.0) || n > 1.0)
            throw std::invalid_argument("channel parameter out of range");
    }
    double value() const { return n_; }
    double normalization() const { return 1.0 / std::sqrt(1.0 + n_ * n_); }
    friend bool operator==(const ChannelParam&, const ChannelParam&) = default;

private:
    double n_;
};

enum class GbsOutcome : int { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

inline constexpr std::array<const char*, 4> kGbsOutcomeNames = {
    "Phi+", "Phi-", "Psi+", "Psi-"};

inline const char* to_string(GbsOutcome o) {
    return kGbsOutcomeNames[static_cast<int>(o)];
}

// Key bits ride on the X basis: |+> encodes 0, |-> encodes 1.
struct KeyBit {
    int bit;

    StateVector state() const {
        const double s = bit == 0 ? 1.0 : -1.0;
        return make_state(1, {1.0, s});
    }
};

// |Phi+_m>, |Phi-_m>, |Psi+_m>, |Psi-_m> in that fixed order.
inline BasisFour gbs_basis(ChannelParam m) {
    const double v = m.value();
    return {make_state(2, {1, 0, 0, v}), make_state(2, {v, 0, 0, -1}),
            make_state(2, {0, 1, v, 0}), make_state(2, {0, v, -1, 0})};
}

// The shared channel |Phi+_n> = (|00> + n|11>)/sqrt(1+n^2).
inline StateVector channel_state(ChannelParam n) {
    return make_state(2, {1, 0, 0, n.value()});
}

// GBM outcome probabilities for teleporting alpha|0> + beta|1> across a
// channel of parameter n with measurement basis parameter m.
inline std::array<double, 4> gbm_probabilities(Amplitude alpha, Amplitude beta,
                                               ChannelParam n, ChannelParam m) {
    const double a2 = std::norm(alpha);
    const double b2 = std::norm(beta);
    if (std::abs(a2 + b2 - 1.0) > kAlgebraicTol)
        throw std::invalid_argument("input state not normalized");
    const double mv = m.value(), nv = n.value();
    const double m2 = mv * mv, n2 = nv * nv;
    const double den = (1.0 + m2) * (1.0 + n2);
    return {(a2 + m2 * n2 * b2) / den, (m2 * a2 + n2 * b2) / den,
            (n2 * a2 + m2 * b2) / den, (m2 * n2 * a2 + b2) / den};
}

inline SingleQubitUnitary correction_for(GbsOutcome outcome) {
    switch (outcome) {
        case GbsOutcome::PhiPlus: return SingleQubitUnitary::identity();
        case GbsOutcome::PhiMinus: return SingleQubitUnitary::pauli_z();
        case GbsOutcome::PsiPlus: return SingleQubitUnitary::pauli_x();
        case GbsOutcome::PsiMinus: return SingleQubitUnitary::pauli_zx();
    }
    throw std::invalid_argument("unknown outcome");
}

// Bob's post-correction qubit for each GBM outcome (real n, m).
inline StateVector bob_conditional_state(Amplitude alpha, Amplitude beta,
                                         ChannelParam n, ChannelParam m,
                                         GbsOutcome outcome) {
    const double mv = m.value(), nv = n.value();
    Amplitude c0, c1;
    switch (outcome) {
        case GbsOutcome::PhiPlus: c0 = alpha; c1 = nv * mv * beta; break;
        case GbsOutcome::PhiMinus: c0 = mv * alpha; c1 = nv * beta; break;
        case GbsOutcome::PsiPlus: c0 = nv * alpha; c1 = mv * beta; break;
        case GbsOutcome::PsiMinus: c0 = mv * nv * alpha; c1 = beta; break;
    }
    if (std::norm(c0) + std::norm(c1) < kNullProbability)
        throw std::invalid_argument("outcome probability zero");
    return make_state(1, {c0, c1});
}

struct PqtRecord {
    ChannelParam n;
    ChannelParam m;
    GbsOutcome outcome;
    StateVector bob_state;  // post-correction
    bool succeeded;
};

// One full PQT run: assemble key (x) channel, sample the GBM, apply the
// correction. Success requires m = n and outcome Phi- or Psi+.
inline PqtRecord simulate_pqt(KeyBit key, ChannelParam n, ChannelParam m,
                              RandomStream& draws) {
    const StateVector reg = tensor(key.state(), channel_state(n));
    const auto meas =
        project_pair_remove(reg, 0, 1, gbs_basis(m), draws.next_double());
    const auto outcome = static_cast<GbsOutcome>(meas.outcome);
    const StateVector bob =
        apply_single_qubit(meas.collapsed, 0, correction_for(outcome));
    const bool matched = m.value() == n.value();
    const bool succeeded = matched && (outcome == GbsOutcome::PhiMinus ||
                                       outcome == GbsOutcome::PsiPlus);
    return {n, m, outcome, bob, succeeded};
}

// P_suc = 2n^2 / (1 + n^2)^2.
inline double p_suc(ChannelParam n) {
    const double n2 = n.value() * n.value();
    return 2.0 * n2 / ((1.0 + n2) * (1.0 + n2));
}

// Final key rate over N channel parameters. For two parameters this is
// n1^2/(2(1+n1^2)^2) + n2^2/(2(1+n2^2)^2); the N-term form keeps the same
// per-parameter accounting, sum_j p_suc(n_j) / (2N).
inline double p_final_rate(std::span<const ChannelParam> params) {
    if (params.empty()) throw std::invalid_argument("empty parameter list");
    double acc = 0.0;
    for (const auto& p : params) acc += p_suc(p);
    return acc / (2.0 * static_cast<double>(params.size()));
}

inline double p_final_rate(std::initializer_list<ChannelParam> params) {
    return p_final_rate(std::span<const ChannelParam>(params.begin(), params.size()));
}

// P_wrong = (m - n)^2 / (2(m^2 + n^2)) = 1/2 - mn/(m^2 + n^2).
inline double p_wrong(ChannelParam m, ChannelParam n) {
    const double mv = m.value(), nv = n.value();
    return 0.5 - mv * nv / (mv * mv + nv * nv);
}

}  // namespace pqtqkd
