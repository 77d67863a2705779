// analysis.hpp
// Validation machinery: an exhaustive exact oracle over every discrete
// protocol branch, a Monte Carlo harness with z-score tracking, the
// analytic-vs-empirical comparison report, and the (n1, n2) rate-security
// scan.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqtqkd/adversary.hpp"
#include "pqtqkd/gbs.hpp"
#include "pqtqkd/protocol.hpp"
#include "pqtqkd/state.hpp"

namespace pqtqkd {

inline constexpr double kSigmaPolicy = 5.0;

// ---------------------------------------------------------------------------
// Exhaustive oracle

struct OracleLeaf {
    std::size_t n_index;
    std::size_t m_index;
    int alice_bit;
    int outcome;
    int bob_bit;
    std::size_t eve_index;  // kUnrevealed for the passive case
    int eve_bit;            // -1 when Eve measured nothing
    double weight;
    bool sifted;
};

struct OracleResult {
    std::vector<ChannelParam> channel_params;
    AttackModel::Kind kind;
    std::vector<ChannelParam> guess_pool;
    std::vector<OracleLeaf> leaves;

    double total_mass() const {
        double s = 0.0;
        for (const auto& l : leaves) s += l.weight;
        return s;
    }

    double p_sifted() const {
        double s = 0.0;
        for (const auto& l : leaves)
            if (l.sifted) s += l.weight;
        return s;
    }

    // P(bob bit != alice bit | sifted). Disclosure picks a uniform subset
    // of sifted rounds, so this is also the expected disclosed QBER.
    double qber() const {
        double sift = 0.0, bad = 0.0;
        for (const auto& l : leaves) {
            if (!l.sifted) continue;
            sift += l.weight;
            if (l.bob_bit != l.alice_bit) bad += l.weight;
        }
        return sift > 0.0 ? bad / sift : 0.0;
    }

    std::optional<double> eve_information() const {
        if (kind == AttackModel::Kind::Passive) return std::nullopt;
        double sift = 0.0, known = 0.0;
        for (const auto& l : leaves) {
            if (!l.sifted) continue;
            sift += l.weight;
            if (l.eve_bit == l.alice_bit) known += l.weight;
        }
        if (sift <= 0.0) return std::nullopt;
        return known / sift;
    }

    // P(eve guess index == alice basis index | sifted).
    std::optional<double> eve_match_rate() const {
        if (kind == AttackModel::Kind::Passive) return std::nullopt;
        double sift = 0.0, match = 0.0;
        for (const auto& l : leaves) {
            if (!l.sifted) continue;
            sift += l.weight;
            if (l.eve_index == l.m_index) match += l.weight;
        }
        if (sift <= 0.0) return std::nullopt;
        return match / sift;
    }

    double p_basis_match() const {
        double s = 0.0;
        for (const auto& l : leaves)
            if (l.n_index == l.m_index) s += l.weight;
        return s;
    }

    // Conditional GBM outcome distribution given the (n, m) index pair.
    std::array<double, 4> outcome_distribution(std::size_t n_index,
                                               std::size_t m_index) const {
        std::array<double, 4> p{};
        double mass = 0.0;
        for (const auto& l : leaves) {
            if (l.n_index != n_index || l.m_index != m_index) continue;
            p[static_cast<std::size_t>(l.outcome)] += l.weight;
            mass += l.weight;
        }
        if (mass > 0.0)
            for (auto& v : p) v /= mass;
        return p;
    }

    // P(success outcome | basis match at index j).
    double success_given_match(std::size_t j) const {
        double mass = 0.0, suc = 0.0;
        for (const auto& l : leaves) {
            if (l.n_index != j || l.m_index != j) continue;
            mass += l.weight;
            if (l.outcome == static_cast<int>(GbsOutcome::PhiMinus) ||
                l.outcome == static_cast<int>(GbsOutcome::PsiPlus))
                suc += l.weight;
        }
        return mass > 0.0 ? suc / mass : 0.0;
    }

    // P(eve bit wrong | sifted, alice basis index, eve guess index).
    std::optional<double> eve_wrong_given(std::size_t m_index,
                                          std::size_t eve_index) const {
        if (kind == AttackModel::Kind::Passive) return std::nullopt;
        double mass = 0.0, wrong = 0.0;
        for (const auto& l : leaves) {
            if (!l.sifted || l.m_index != m_index || l.eve_index != eve_index)
                continue;
            mass += l.weight;
            if (l.eve_bit != l.alice_bit) wrong += l.weight;
        }
        if (mass <= 0.0) return std::nullopt;
        return wrong / mass;
    }
};

namespace detail {

inline double x_plus_probability(const StateVector& qubit) {
    return fidelity(qubit, make_state(1, {1, 1}));
}

}  // namespace detail

// Enumerates every discrete branch (uniform choices x measurement
// outcomes) with exact Born weights computed from state vectors. This is
// the independent check for every closed form and every Monte Carlo run;
// all probabilities here come from brute-force inner products, never from
// the analytic formulas under test.
inline OracleResult exhaustive_oracle(
    std::span<const ChannelParam> channel_params, AttackModel::Kind kind,
    std::span<const ChannelParam> guess_pool = {}) {
    if (channel_params.size() > 4 || guess_pool.size() > 4)
        throw std::invalid_argument("branch-space overflow");
    OracleResult result;
    result.channel_params.assign(channel_params.begin(), channel_params.end());
    result.kind = kind;
    result.guess_pool.assign(guess_pool.begin(), guess_pool.end());
    if (kind != AttackModel::Kind::Passive && result.guess_pool.empty())
        throw std::invalid_argument("active attack requires a guess pool");

    const std::size_t n_count = channel_params.size();
    const std::size_t pool = result.guess_pool.size();
    const double p_choice = 1.0 / static_cast<double>(n_count);

    auto is_success = [](int outcome) {
        return outcome == static_cast<int>(GbsOutcome::PhiMinus) ||
               outcome == static_cast<int>(GbsOutcome::PsiPlus);
    };

    for (std::size_t ni = 0; ni < n_count; ++ni) {
        for (std::size_t mi = 0; mi < n_count; ++mi) {
            const BasisFour basis_m = gbs_basis(channel_params[mi]);
            const bool matched = ni == mi;
            for (int bit = 0; bit < 2; ++bit) {
                const StateVector key = KeyBit{bit}.state();
                const double base = p_choice * p_choice * 0.5;

                if (kind == AttackModel::Kind::Passive) {
                    const StateVector reg =
                        tensor(key, channel_state(channel_params[ni]));
                    const auto probs = outcome_probabilities(reg, 0, 1, basis_m);
                    for (int k = 0; k < 4; ++k) {
                        if (probs[k] < kNullProbability) continue;
                        const auto meas =
                            project_pair_outcome(reg, 0, 1, basis_m, k);
                        const StateVector bob = apply_single_qubit(
                            meas.collapsed, 0,
                            correction_for(static_cast<GbsOutcome>(k)));
                        const double pp = detail::x_plus_probability(bob);
                        const bool sifted = matched && is_success(k);
                        for (int bb = 0; bb < 2; ++bb) {
                            const double pb = bb == 0 ? pp : 1.0 - pp;
                            if (pb < kNullProbability) continue;
                            result.leaves.push_back(
                                {ni, mi, bit, k, bb, kUnrevealed, -1,
                                 base * probs[k] * pb, sifted});
                        }
                    }
                    continue;
                }

                for (std::size_t ei = 0; ei < pool; ++ei) {
                    const ChannelParam e = result.guess_pool[ei];
                    const double base_e = base / static_cast<double>(pool);
                    // Alice measures on Eve's substitute pair.
                    const StateVector regA = tensor(key, channel_state(e));
                    const auto probsA =
                        outcome_probabilities(regA, 0, 1, basis_m);
                    for (int k = 0; k < 4; ++k) {
                        if (probsA[k] < kNullProbability) continue;
                        const auto measA =
                            project_pair_outcome(regA, 0, 1, basis_m, k);
                        const auto gbs_k = static_cast<GbsOutcome>(k);
                        const StateVector held = apply_single_qubit(
                            measA.collapsed, 0, correction_for(gbs_k));
                        const double p_eplus = detail::x_plus_probability(held);
                        const bool sifted = matched && is_success(k);
                        for (int eb = 0; eb < 2; ++eb) {
                            const double pe = eb == 0 ? p_eplus : 1.0 - p_eplus;
                            if (pe < kNullProbability) continue;
                            const double w_eb = base_e * probsA[k] * pe;

                            if (kind == AttackModel::Kind::FakeSource) {
                                // Bob receives Eve's measured, re-encoded
                                // qubit: his bit equals hers.
                                result.leaves.push_back(
                                    {ni, mi, bit, k, eb, ei, eb, w_eb, sifted});
                                continue;
                            }

                            // Intercept-reteleport: Eve re-teleports her
                            // guess over the captured pair with basis e,
                            // corrects for her own outcome and pre-applies
                            // the adjoint of Bob's upcoming correction, so
                            // Bob nets the teleported (distorted) guess.
                            const StateVector regB =
                                tensor(KeyBit{eb}.state(),
                                       channel_state(channel_params[ni]));
                            const BasisFour basis_e = gbs_basis(e);
                            const auto probsB =
                                outcome_probabilities(regB, 0, 1, basis_e);
                            for (int l = 0; l < 4; ++l) {
                                if (probsB[l] < kNullProbability) continue;
                                const auto measB = project_pair_outcome(
                                    regB, 0, 1, basis_e, l);
                                const StateVector bob = apply_single_qubit(
                                    measB.collapsed, 0,
                                    correction_for(static_cast<GbsOutcome>(l)));
                                const double pp =
                                    detail::x_plus_probability(bob);
                                for (int bb = 0; bb < 2; ++bb) {
                                    const double pb = bb == 0 ? pp : 1.0 - pp;
                                    if (pb < kNullProbability) continue;
                                    result.leaves.push_back(
                                        {ni, mi, bit, k, bb, ei, eb,
                                         w_eb * probsB[l] * pb, sifted});
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Monte Carlo harness

struct TrialStats {
    std::uint64_t trials = 0;
    std::size_t sifted_count = 0;
    std::vector<std::size_t> match_counts;    // rounds with n = m = j
    std::vector<std::size_t> success_counts;  // of those, sifted
    double qber = 0.0;
    double key_rate_pre_disclosure = 0.0;
    double key_rate_post_disclosure = 0.0;
    std::optional<double> eve_info;
    std::map<std::string, double> z_scores;
    Transcript transcript;
};

namespace detail {

inline double binomial_z(double count, double total, double p) {
    if (total <= 0.0) return 0.0;
    const double var = total * p * (1.0 - p);
    if (var <= 0.0) return count == total * p ? 0.0 : 1e9;
    return (count - total * p) / std::sqrt(var);
}

}  // namespace detail

inline TrialStats monte_carlo(ProtocolConfig config, const AttackModel& attack,
                              std::uint64_t trials) {
    if (trials < 1000) throw std::invalid_argument("too few trials");
    config.num_rounds = trials;
    TrialStats stats;
    stats.trials = trials;
    stats.transcript = run_protocol(config, attack);
    const Transcript& t = stats.transcript;

    const std::size_t n_count = config.channel_params.size();
    stats.match_counts.assign(n_count, 0);
    stats.success_counts.assign(n_count, 0);
    std::vector<std::array<std::size_t, 4>> outcome_counts(n_count * n_count,
                                                           {0, 0, 0, 0});
    std::vector<std::size_t> pair_counts(n_count * n_count, 0);
    std::size_t matches = 0;
    for (const auto& rec : t.records) {
        const std::size_t pair = rec.bob_n_index * n_count + rec.alice_m_index;
        ++pair_counts[pair];
        ++outcome_counts[pair][static_cast<std::size_t>(rec.gbm_outcome)];
        if (rec.bob_n_index != rec.alice_m_index) continue;
        ++matches;
        ++stats.match_counts[rec.bob_n_index];
        if (rec.verdict == Verdict::SiftedKept ||
            rec.verdict == Verdict::SiftedDisclosed)
            ++stats.success_counts[rec.bob_n_index];
    }
    stats.sifted_count = t.sifted_count;
    stats.qber = t.qber;
    stats.key_rate_pre_disclosure =
        static_cast<double>(t.sifted_count) / static_cast<double>(trials);
    stats.key_rate_post_disclosure =
        static_cast<double>(t.alice_key.size()) / static_cast<double>(trials);
    stats.eve_info = eve_information(t);

    stats.z_scores["match_frequency"] = detail::binomial_z(
        static_cast<double>(matches), static_cast<double>(trials),
        1.0 / static_cast<double>(n_count));

    if (attack.kind == AttackModel::Kind::Passive) {
        // Analytic expectations only hold when the real channel is honest.
        double expected_sift = 0.0;
        for (std::size_t j = 0; j < n_count; ++j) {
            expected_sift += p_suc(config.channel_params[j]) /
                             static_cast<double>(n_count * n_count);
            stats.z_scores["success|match=" + std::to_string(j)] =
                detail::binomial_z(
                    static_cast<double>(stats.success_counts[j]),
                    static_cast<double>(stats.match_counts[j]),
                    p_suc(config.channel_params[j]));
        }
        stats.z_scores["sifted_rate"] = detail::binomial_z(
            static_cast<double>(t.sifted_count), static_cast<double>(trials),
            expected_sift);
        for (std::size_t ni = 0; ni < n_count; ++ni) {
            for (std::size_t mi = 0; mi < n_count; ++mi) {
                const auto expected = gbm_probabilities(
                    Amplitude{1 / std::sqrt(2.0)}, Amplitude{1 / std::sqrt(2.0)},
                    config.channel_params[ni], config.channel_params[mi]);
                const auto& counts = outcome_counts[ni * n_count + mi];
                const double total =
                    static_cast<double>(pair_counts[ni * n_count + mi]);
                for (int k = 0; k < 4; ++k) {
                    const std::string name = "outcome[" + std::to_string(ni) +
                                             "," + std::to_string(mi) + "," +
                                             kGbsOutcomeNames[k] + "]";
                    stats.z_scores[name] = detail::binomial_z(
                        static_cast<double>(counts[k]), total, expected[k]);
                }
            }
        }
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Comparison report

struct ComparisonRow {
    std::string name;
    double empirical;
    double expected;
    double abs_deviation;
    double z;
    bool pass;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool all_pass = true;

    void add(std::string name, double empirical, double expected,
             double sample_size) {
        const double z =
            detail::binomial_z(empirical * sample_size, sample_size, expected);
        const bool ok = std::abs(z) < kSigmaPolicy;
        rows.push_back({std::move(name), empirical, expected,
                        std::abs(empirical - expected), z, ok});
        all_pass = all_pass && ok;
    }
};

inline ComparisonReport compare_report(const TrialStats& stats,
                                       const OracleResult& oracle) {
    if (stats.transcript.config.channel_params != oracle.channel_params ||
        stats.transcript.attack_kind != oracle.kind)
        throw std::invalid_argument("mismatched parameter points");
    ComparisonReport report;
    const double trials = static_cast<double>(stats.trials);
    report.add("sifted_rate", stats.key_rate_pre_disclosure, oracle.p_sifted(),
               trials);
    report.add("qber", stats.qber, oracle.qber(),
               static_cast<double>(stats.transcript.disclosed.size()));
    double matches = 0.0;
    for (auto c : stats.match_counts) matches += static_cast<double>(c);
    report.add("match_frequency", matches / trials, oracle.p_basis_match(),
               trials);
    if (stats.eve_info && oracle.eve_information())
        report.add("eve_information", *stats.eve_info,
                   *oracle.eve_information(),
                   static_cast<double>(stats.sifted_count));
    return report;
}

// ---------------------------------------------------------------------------
// (n1, n2) scan of F = P_wrong * P_final

struct GridSpec {
    double min = 0.05;
    double max = 0.95;
    double step = 0.05;

    std::size_t points_per_axis() const {
        if (!(min > 0.0) || !(max < 1.0) || !(step > 0.0) || max < min)
            throw std::invalid_argument("invalid grid");
        const auto count = static_cast<std::size_t>(
            std::floor((max - min) / step + 1e-9)) + 1;
        if (count < 2) throw std::invalid_argument("empty grid");
        return count;
    }
};

struct ScanPoint {
    double n1, n2;
    double wrong;
    double rate;
    double objective;
};

struct ScanResult {
    GridSpec grid;
    std::vector<ScanPoint> surface;
    ScanPoint argmax;
    ScanPoint argmin_off_diagonal;
};

inline ScanResult scan(const GridSpec& grid) {
    const std::size_t count = grid.points_per_axis();
    ScanResult result;
    result.grid = grid;
    bool have_max = false, have_min = false;
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
            const double n1 = grid.min + static_cast<double>(i) * grid.step;
            const double n2 = grid.min + static_cast<double>(j) * grid.step;
            const ChannelParam c1(n1), c2(n2);
            const double w = p_wrong(c1, c2);
            const double rate = p_final_rate({c1, c2});
            const ScanPoint pt{n1, n2, w, rate, w * rate};
            result.surface.push_back(pt);
            if (!have_max || pt.objective > result.argmax.objective) {
                result.argmax = pt;
                have_max = true;
            }
            if (i != j &&
                (!have_min ||
                 pt.objective < result.argmin_off_diagonal.objective)) {
                result.argmin_off_diagonal = pt;
                have_min = true;
            }
        }
    }
    return result;
}

}  // namespace pqtqkd
