// state.hpp
// Dense pure-state simulation of small qubit registers (up to 4 qubits).
// Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of
// the computational basis label.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace pqtqkd {

using Amplitude = std::complex<double>;

inline constexpr double kAlgebraicTol = 1e-12;
inline constexpr double kNullProbability = 1e-15;

class StateVector {
public:
    StateVector() = default;

    // Normalizes the input; throws on a zero vector or wrong length.
    StateVector(int num_qubits, std::vector<Amplitude> amplitudes)
        : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
        if (num_qubits_ < 1 || num_qubits_ > 4)
            throw std::invalid_argument("register too large");
        if (amps_.size() != (std::size_t{1} << num_qubits_))
            throw std::invalid_argument("dimension mismatch");
        for (const auto& a : amps_)
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
                throw std::invalid_argument("non-finite amplitude");
        const double nrm = norm();
        if (nrm < kNullProbability)
            throw std::invalid_argument("degenerate state");
        for (auto& a : amps_) a /= nrm;
    }

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    const Amplitude& operator[](std::size_t i) const { return amps_[i]; }
    std::span<const Amplitude> amplitudes() const { return amps_; }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return std::sqrt(s);
    }

    // Bit of qubit q in basis label idx (qubit 0 = MSB).
    int bit_of(std::size_t idx, int q) const {
        return static_cast<int>((idx >> (num_qubits_ - 1 - q)) & 1u);
    }

private:
    friend StateVector tensor(const StateVector&, const StateVector&);
    friend StateVector apply_single_qubit(const StateVector&, int,
                                          const struct SingleQubitUnitary&);
    friend struct PairProjector;
    friend struct XProjector;

    int num_qubits_ = 0;
    std::vector<Amplitude> amps_;
};

inline StateVector make_state(int num_qubits, std::vector<Amplitude> amplitudes) {
    return StateVector(num_qubits, std::move(amplitudes));
}

struct SingleQubitUnitary {
    // Row-major: {u00, u01, u10, u11}.
    std::array<Amplitude, 4> u;

    bool is_unitary(double tol = kAlgebraicTol) const {
        const Amplitude c00 = std::conj(u[0]) * u[0] + std::conj(u[2]) * u[2];
        const Amplitude c01 = std::conj(u[0]) * u[1] + std::conj(u[2]) * u[3];
        const Amplitude c11 = std::conj(u[1]) * u[1] + std::conj(u[3]) * u[3];
        return std::abs(c00 - 1.0) < tol && std::abs(c01) < tol &&
               std::abs(c11 - 1.0) < tol;
    }

    SingleQubitUnitary adjoint() const {
        return {{std::conj(u[0]), std::conj(u[2]), std::conj(u[1]),
                 std::conj(u[3])}};
    }

    static SingleQubitUnitary identity() { return {{1, 0, 0, 1}}; }
    static SingleQubitUnitary pauli_x() { return {{0, 1, 1, 0}}; }
    static SingleQubitUnitary pauli_z() { return {{1, 0, 0, -1}}; }
    // sigma_z * sigma_x
    static SingleQubitUnitary pauli_zx() { return {{0, 1, -1, 0}}; }
};

using BasisFour = std::array<StateVector, 4>;

inline StateVector tensor(const StateVector& a, const StateVector& b) {
    if (a.num_qubits() + b.num_qubits() > 4)
        throw std::invalid_argument("register too large");
    StateVector out;
    out.num_qubits_ = a.num_qubits() + b.num_qubits();
    out.amps_.resize(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j)
            out.amps_[i * b.dim() + j] = a[i] * b[j];
    return out;
}

inline StateVector apply_single_qubit(const StateVector& s, int qubit_index,
                                      const SingleQubitUnitary& u) {
    if (qubit_index < 0 || qubit_index >= s.num_qubits())
        throw std::out_of_range("qubit index out of range");
    StateVector out = s;
    const std::size_t stride = std::size_t{1}
                               << (s.num_qubits() - 1 - qubit_index);
    for (std::size_t idx = 0; idx < s.dim(); ++idx) {
        if (idx & stride) continue;
        const Amplitude a0 = s[idx];
        const Amplitude a1 = s[idx | stride];
        out.amps_[idx] = u.u[0] * a0 + u.u[1] * a1;
        out.amps_[idx | stride] = u.u[2] * a0 + u.u[3] * a1;
    }
    return out;
}

// Shared machinery for projecting a qubit pair onto a two-qubit basis element.
struct PairProjector {
    const StateVector& s;
    int qi, qj;

    PairProjector(const StateVector& sv, int i, int j) : s(sv), qi(i), qj(j) {
        if (s.num_qubits() < 2) throw std::invalid_argument("dimension mismatch");
        if (i == j || i < 0 || j < 0 || i >= s.num_qubits() ||
            j >= s.num_qubits())
            throw std::out_of_range("qubit index out of range");
    }

    std::size_t rest_dim() const { return s.dim() >> 2; }

    // Full register index for pair values (bi, bj) and residual label r.
    std::size_t assemble(int bi, int bj, std::size_t r) const {
        std::size_t idx = 0;
        std::size_t rbit = rest_dim() >> 1;
        for (int q = 0; q < s.num_qubits(); ++q) {
            int b;
            if (q == qi) {
                b = bi;
            } else if (q == qj) {
                b = bj;
            } else {
                b = (r & rbit) ? 1 : 0;
                rbit >>= 1;
            }
            idx = (idx << 1) | static_cast<std::size_t>(b);
        }
        return idx;
    }

    // <basis_elem (x) r | s> for every residual label r.
    std::vector<Amplitude> overlap(const StateVector& elem) const {
        std::vector<Amplitude> c(rest_dim());
        for (std::size_t r = 0; r < c.size(); ++r) {
            Amplitude acc = 0;
            for (int x = 0; x < 4; ++x)
                acc += std::conj(elem[x]) * s[assemble(x >> 1, x & 1, r)];
            c[r] = acc;
        }
        return c;
    }
};

inline std::array<double, 4> outcome_probabilities(const StateVector& s,
                                                   int qubit_i, int qubit_j,
                                                   const BasisFour& basis) {
    PairProjector proj(s, qubit_i, qubit_j);
    std::array<double, 4> p{};
    for (int k = 0; k < 4; ++k) {
        double acc = 0.0;
        for (const auto& c : proj.overlap(basis[k])) acc += std::norm(c);
        p[k] = acc;
    }
    return p;
}

struct PairMeasurement {
    int outcome;
    StateVector collapsed;
    double probability;
};

namespace detail {

inline int sample_outcome(const std::array<double, 4>& p, double random_draw) {
    // Cumulative walk in fixed label order; near-null outcomes are skipped.
    double cum = 0.0;
    int last_live = -1;
    for (int k = 0; k < 4; ++k) {
        if (p[k] < kNullProbability) continue;
        last_live = k;
        cum += p[k];
        if (random_draw < cum) return k;
    }
    if (last_live < 0) throw std::runtime_error("impossible outcome");
    return last_live;
}

}  // namespace detail

// Collapses qubits (i, j) onto the sampled basis element, keeping them in
// the register.
inline PairMeasurement project_pair(const StateVector& s, int qubit_i,
                                    int qubit_j, const BasisFour& basis,
                                    double random_draw) {
    PairProjector proj(s, qubit_i, qubit_j);
    const auto p = outcome_probabilities(s, qubit_i, qubit_j, basis);
    const int k = detail::sample_outcome(p, random_draw);
    if (p[k] < kNullProbability) throw std::runtime_error("impossible outcome");
    const auto c = proj.overlap(basis[k]);
    const double scale = 1.0 / std::sqrt(p[k]);
    std::vector<Amplitude> amps(s.dim(), Amplitude{0, 0});
    for (std::size_t r = 0; r < c.size(); ++r)
        for (int x = 0; x < 4; ++x)
            amps[proj.assemble(x >> 1, x & 1, r)] = basis[k][x] * c[r] * scale;
    return {k, StateVector(s.num_qubits(), std::move(amps)), p[k]};
}

// As project_pair, but removes the measured qubits from the register.
// Requires at least one qubit left over.
inline PairMeasurement project_pair_remove(const StateVector& s, int qubit_i,
                                           int qubit_j, const BasisFour& basis,
                                           double random_draw) {
    if (s.num_qubits() < 3) throw std::invalid_argument("dimension mismatch");
    PairProjector proj(s, qubit_i, qubit_j);
    const auto p = outcome_probabilities(s, qubit_i, qubit_j, basis);
    const int k = detail::sample_outcome(p, random_draw);
    if (p[k] < kNullProbability) throw std::runtime_error("impossible outcome");
    auto c = proj.overlap(basis[k]);
    const double scale = 1.0 / std::sqrt(p[k]);
    for (auto& a : c) a *= scale;
    return {k, StateVector(s.num_qubits() - 2, std::move(c)), p[k]};
}

// Deterministic variant: projects onto the requested basis element and
// removes the measured qubits. Used by exhaustive enumeration.
inline PairMeasurement project_pair_outcome(const StateVector& s, int qubit_i,
                                            int qubit_j, const BasisFour& basis,
                                            int outcome) {
    if (s.num_qubits() < 3) throw std::invalid_argument("dimension mismatch");
    PairProjector proj(s, qubit_i, qubit_j);
    auto c = proj.overlap(basis[outcome]);
    double p = 0.0;
    for (const auto& a : c) p += std::norm(a);
    if (p < kNullProbability) throw std::runtime_error("impossible outcome");
    const double scale = 1.0 / std::sqrt(p);
    for (auto& a : c) a *= scale;
    return {outcome, StateVector(s.num_qubits() - 2, std::move(c)), p};
}

struct XMeasurement {
    int bit;  // 0 for |+>, 1 for |->
    StateVector collapsed;
};

inline XMeasurement measure_x(const StateVector& s, int qubit_index,
                              double random_draw) {
    if (qubit_index < 0 || qubit_index >= s.num_qubits())
        throw std::out_of_range("qubit index out of range");
    const std::size_t stride = std::size_t{1}
                               << (s.num_qubits() - 1 - qubit_index);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    double p_plus = 0.0;
    for (std::size_t idx = 0; idx < s.dim(); ++idx) {
        if (idx & stride) continue;
        p_plus += std::norm((s[idx] + s[idx | stride]) * inv_sqrt2);
    }
    const int bit = (random_draw < p_plus) ? 0 : 1;
    const double sign = bit == 0 ? 1.0 : -1.0;
    const double p = bit == 0 ? p_plus : 1.0 - p_plus;
    std::vector<Amplitude> amps(s.dim());
    const double scale = 1.0 / std::sqrt(std::max(p, kNullProbability));
    for (std::size_t idx = 0; idx < s.dim(); ++idx) {
        if (idx & stride) continue;
        const Amplitude c = (s[idx] + sign * s[idx | stride]) * inv_sqrt2 * scale;
        amps[idx] = c * inv_sqrt2;
        amps[idx | stride] = sign * c * inv_sqrt2;
    }
    return {bit, StateVector(s.num_qubits(), std::move(amps))};
}

inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.num_qubits() != b.num_qubits())
        throw std::invalid_argument("dimension mismatch");
    Amplitude ip = 0;
    for (std::size_t i = 0; i < a.dim(); ++i) ip += std::conj(a[i]) * b[i];
    return std::min(1.0, std::norm(ip));
}

}  // namespace pqtqkd
