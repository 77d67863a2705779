// protocol.hpp
// Full protocol orchestration: Alice, Bob, and optionally Charlie or a
// chain of repeater stations exchange messages over a simulated broadcast
// channel. The security-critical ordering -- parameter reveals strictly
// after Bob's measurement acknowledgment -- is enforced structurally by
// the message log.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pqtqkd/adversary.hpp"
#include "pqtqkd/gbs.hpp"
#include "pqtqkd/rng.hpp"
#include "pqtqkd/state.hpp"

namespace pqtqkd {

inline constexpr std::uint64_t kDefaultSeed = 0x1d5a4e9fULL;
inline constexpr std::size_t kUnrevealed = static_cast<std::size_t>(-1);

struct ProtocolConfig {
    enum class Mode { Standard, Controlled, Repeater };

    std::vector<ChannelParam> channel_params;  // N >= 2 distinct, each < 1
    std::uint64_t num_rounds = 0;
    double disclosure_fraction = 0.5;
    Mode mode = Mode::Standard;
    // Repeater mode: one inner link per intermediate station; empty list
    // is the degenerate single-station chain.
    std::vector<ChannelParam> repeater_links;
    std::uint64_t seed = kDefaultSeed;
    // Repeater mode: station index refusing to reveal (-1: everyone reveals).
    int withholding_station = -1;

    void validate() const {
        if (channel_params.size() < 2)
            throw std::invalid_argument("need at least two channel parameters");
        for (std::size_t i = 0; i < channel_params.size(); ++i) {
            if (channel_params[i].value() >= 1.0)
                throw std::invalid_argument(
                    "protocol channels require n < 1");
            for (std::size_t j = i + 1; j < channel_params.size(); ++j)
                if (channel_params[i] == channel_params[j])
                    throw std::invalid_argument(
                        "channel parameters must be distinct");
        }
        if (num_rounds == 0)
            throw std::invalid_argument("num_rounds must be positive");
        if (!(disclosure_fraction > 0.0) || !(disclosure_fraction < 1.0))
            throw std::invalid_argument("disclosure_fraction out of (0,1)");
    }
};

struct PartyId {
    enum class Role { Alice, Bob, Charlie, Station };
    Role role;
    int station = 0;  // Station role only

    friend bool operator==(const PartyId&, const PartyId&) = default;
};

struct ClassicalMessage {
    enum class Kind {
        GbmOutcome,
        BobMeasuredAck,
        RevealN,
        RevealM,
        DiscloseBit,
        CharlieReveal,
        Abort
    };

    std::uint64_t round_id;
    PartyId sender;
    Kind kind;
    int payload;  // outcome label, parameter index, or bit
};

enum class Verdict {
    DiscardMismatch,
    DiscardOutcome,
    SiftedKept,
    SiftedDisclosed,
    Unresolved  // aborted transcripts only: reveals never happened
};

struct RunRecord {
    std::uint64_t round_id;
    std::size_t bob_n_index;   // kUnrevealed until the reveal phase
    std::size_t alice_m_index;
    int alice_key_bit;
    GbsOutcome gbm_outcome;
    int bob_bit;
    Verdict verdict;
};

struct Transcript {
    ProtocolConfig config;
    AttackModel::Kind attack_kind;
    std::vector<RunRecord> records;
    std::vector<ClassicalMessage> messages;
    std::vector<EveRecord> eve_records;  // audit only, empty for Passive
    std::vector<int> alice_key;
    std::vector<int> bob_key;
    std::vector<std::pair<int, int>> disclosed;  // (alice bit, bob bit)
    double qber = 0.0;
    bool aborted = false;
    // Controlled mode: everything Charlie ever holds -- the parameter
    // indices of the pairs he prepared. Never any key material.
    std::vector<std::size_t> charlie_view;
    std::size_t sifted_count = 0;
};

inline double estimate_qber(std::span<const std::pair<int, int>> disclosed) {
    if (disclosed.empty()) return 0.0;
    std::size_t mismatches = 0;
    for (const auto& [a, b] : disclosed) mismatches += (a != b) ? 1 : 0;
    return static_cast<double>(mismatches) /
           static_cast<double>(disclosed.size());
}

// Partitions revealed records into sifted (kept) and discarded indices.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> sift(
    std::span<const RunRecord> records) {
    std::vector<std::size_t> kept, discarded;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.bob_n_index == kUnrevealed || r.alice_m_index == kUnrevealed)
            throw std::logic_error("premature sift");
        const bool matched = r.bob_n_index == r.alice_m_index;
        const bool success = r.gbm_outcome == GbsOutcome::PhiMinus ||
                             r.gbm_outcome == GbsOutcome::PsiPlus;
        if (matched && success)
            kept.push_back(i);
        else
            discarded.push_back(i);
    }
    return {std::move(kept), std::move(discarded)};
}

namespace detail {

struct RoundOutput {
    RunRecord record;
    std::optional<EveRecord> eve;
    std::vector<ClassicalMessage> messages;
    bool hop_failed = false;  // a partial repeater link missed Phi-/Psi+
};

// Per-party round state machines. Their transitions assert the protocol
// ordering: the orchestrator cannot extract a reveal before the
// measurement acknowledgment exists.
struct AliceMachine {
    enum class Stage { Idle, PairReceived, Measured, Revealed } stage =
        Stage::Idle;
    std::size_t m_index = kUnrevealed;
    int key_bit = -1;

    void receive_pair() { stage = Stage::PairReceived; }
    void measured() {
        if (stage != Stage::PairReceived)
            throw std::logic_error("alice measured before receiving a qubit");
        stage = Stage::Measured;
    }
    std::size_t reveal(bool ack_seen) {
        if (stage != Stage::Measured || !ack_seen)
            throw std::logic_error("reveal before measurement acknowledgment");
        stage = Stage::Revealed;
        return m_index;
    }
};

struct BobMachine {
    enum class Stage { Idle, PairSent, OutcomeReceived, Measured, Revealed }
        stage = Stage::Idle;
    std::size_t n_index = kUnrevealed;
    int bit = -1;

    void pair_sent() { stage = Stage::PairSent; }
    void outcome_received() {
        if (stage != Stage::PairSent)
            throw std::logic_error("outcome before pair distribution");
        stage = Stage::OutcomeReceived;
    }
    void measured() {
        if (stage != Stage::OutcomeReceived)
            throw std::logic_error("bob measured before outcome broadcast");
        stage = Stage::Measured;
    }
    std::size_t reveal() {
        if (stage != Stage::Measured)
            throw std::logic_error("reveal before measurement");
        stage = Stage::Revealed;
        return n_index;
    }
};

// Routes the Bob-bound half of the source pair through the repeater chain.
// Each hop teleports the in-flight qubit across one link with a publicly
// announced Bell-type outcome and a per-hop correction on the far half.
inline StateVector route_through_chain(StateVector channel_pair,
                                       const ProtocolConfig& config,
                                       std::uint64_t round_id,
                                       RandomStream& stream,
                                       RoundOutput& out) {
    for (std::size_t h = 0; h < config.repeater_links.size(); ++h) {
        const ChannelParam link = config.repeater_links[h];
        const StateVector reg = tensor(channel_pair, channel_state(link));
        const auto meas =
            project_pair_remove(reg, 1, 2, gbs_basis(link), stream.next_double());
        const auto hop_outcome = static_cast<GbsOutcome>(meas.outcome);
        out.messages.push_back(
            {round_id,
             {PartyId::Role::Station, static_cast<int>(h + 1)},
             ClassicalMessage::Kind::GbmOutcome,
             meas.outcome});
        channel_pair =
            apply_single_qubit(meas.collapsed, 1, correction_for(hop_outcome));
        if (link.value() < 1.0 && hop_outcome != GbsOutcome::PhiMinus &&
            hop_outcome != GbsOutcome::PsiPlus)
            out.hop_failed = true;
    }
    return channel_pair;
}

inline RoundOutput run_round(const ProtocolConfig& config,
                             const AttackModel& attack,
                             std::uint64_t round_id) {
    RoundOutput out;
    RandomStream main = RandomStream::substream(config.seed, round_id + 1);
    RandomStream eve = RandomStream::substream(attack.eve_seed, round_id + 1);

    AliceMachine alice;
    BobMachine bob;

    const std::size_t n_count = config.channel_params.size();
    bob.n_index = main.next_index(n_count);
    alice.key_bit = main.next_bit();
    alice.m_index = main.next_index(n_count);
    const ChannelParam n = config.channel_params[bob.n_index];
    const ChannelParam m = config.channel_params[alice.m_index];

    StateVector channel = channel_state(n);  // (Alice-bound, Bob-bound)
    if (config.mode == ProtocolConfig::Mode::Repeater)
        channel = route_through_chain(channel, config, round_id, main, out);
    bob.pair_sent();

    GbsOutcome outcome{};
    std::optional<EveRecord> eve_record;
    StateVector bob_qubit = make_state(1, {1, 0});

    switch (attack.kind) {
        case AttackModel::Kind::Passive: {
            alice.receive_pair();
            const StateVector reg = tensor(KeyBit{alice.key_bit}.state(), channel);
            const auto meas = project_pair_remove(reg, 0, 1, gbs_basis(m),
                                                  main.next_double());
            outcome = static_cast<GbsOutcome>(meas.outcome);
            alice.measured();
            bob_qubit = meas.collapsed;
            break;
        }
        case AttackModel::Kind::InterceptReteleport: {
            // Eve captures the Alice-bound qubit and substitutes half of
            // her own pair.
            const auto sub = adversary::draw_substitution(attack, eve);
            alice.receive_pair();
            const StateVector reg =
                tensor(KeyBit{alice.key_bit}.state(), sub.pair);
            const auto meas = project_pair_remove(reg, 0, 1, gbs_basis(m),
                                                  main.next_double());
            outcome = static_cast<GbsOutcome>(meas.outcome);
            alice.measured();
            // Eve hears the broadcast, reads her retained half, then
            // re-teleports the guessed state onto the captured channel.
            const int eve_bit = adversary::extract_bit(meas.collapsed, outcome, eve);
            const auto rein =
                adversary::reinject(eve_bit, channel, sub.e, outcome, eve);
            bob_qubit = rein.bob_qubit;
            eve_record = EveRecord{round_id, sub.guess_index, eve_bit,
                                   static_cast<int>(rein.eve_outcome),
                                   eve_bit == alice.key_bit};
            break;
        }
        case AttackModel::Kind::FakeSource: {
            if (config.mode != ProtocolConfig::Mode::Controlled)
                throw std::invalid_argument(
                    "fake-source attack requires controlled mode");
            // Eve replaces Charlie's pair and holds the Bob-bound half
            // until after Alice's broadcast.
            const auto sub = adversary::draw_substitution(attack, eve);
            alice.receive_pair();
            const StateVector reg =
                tensor(KeyBit{alice.key_bit}.state(), sub.pair);
            const auto meas = project_pair_remove(reg, 0, 1, gbs_basis(m),
                                                  main.next_double());
            outcome = static_cast<GbsOutcome>(meas.outcome);
            alice.measured();
            const StateVector corrected = apply_single_qubit(
                meas.collapsed, 0, correction_for(outcome));
            const auto xm = measure_x(corrected, 0, eve.next_double());
            bob_qubit = adversary::forward_measured(xm.collapsed, outcome);
            eve_record = EveRecord{round_id, sub.guess_index, xm.bit, -1,
                                   xm.bit == alice.key_bit};
            break;
        }
    }

    out.messages.push_back({round_id,
                            {PartyId::Role::Alice},
                            ClassicalMessage::Kind::GbmOutcome,
                            static_cast<int>(outcome)});
    bob.outcome_received();
    const StateVector corrected =
        apply_single_qubit(bob_qubit, 0, correction_for(outcome));
    bob.bit = measure_x(corrected, 0, main.next_double()).bit;
    bob.measured();
    out.messages.push_back({round_id,
                            {PartyId::Role::Bob},
                            ClassicalMessage::Kind::BobMeasuredAck,
                            0});

    out.record = {round_id,   bob.n_index, alice.m_index, alice.key_bit,
                  outcome,    bob.bit,     Verdict::Unresolved};
    out.eve = eve_record;
    return out;
}

}  // namespace detail

struct RunOptions {
    bool charlie_discloses = true;
};

inline Transcript run_protocol(const ProtocolConfig& config,
                               const AttackModel& attack,
                               RunOptions options = {}) {
    config.validate();
    attack.validate();
    if (config.mode == ProtocolConfig::Mode::Repeater &&
        config.withholding_station >=
            1 + static_cast<int>(config.repeater_links.size()))
        throw std::invalid_argument("withholding station out of range");

    Transcript t;
    t.config = config;
    t.attack_kind = attack.kind;
    const bool controlled = config.mode == ProtocolConfig::Mode::Controlled;

    std::vector<bool> hop_failed(config.num_rounds, false);
    std::vector<std::size_t> true_n(config.num_rounds);
    std::vector<std::size_t> true_m(config.num_rounds);
    for (std::uint64_t r = 0; r < config.num_rounds; ++r) {
        auto round = detail::run_round(config, attack, r);
        hop_failed[r] = round.hop_failed;
        true_n[r] = round.record.bob_n_index;
        true_m[r] = round.record.alice_m_index;
        // Parameter indices stay local until the reveal phase.
        round.record.bob_n_index = kUnrevealed;
        round.record.alice_m_index = kUnrevealed;
        t.records.push_back(round.record);
        if (round.eve) t.eve_records.push_back(*round.eve);
        for (auto& msg : round.messages) t.messages.push_back(msg);
        if (controlled) t.charlie_view.push_back(true_n[r]);
    }

    // Reveal phase. The source's disclosure can be withheld in the
    // controlled and repeater variants, which makes sifting impossible.
    const bool source_withholds =
        (controlled && !options.charlie_discloses) ||
        (config.mode == ProtocolConfig::Mode::Repeater &&
         config.withholding_station >= 0);
    if (source_withholds) {
        t.aborted = true;
        t.messages.push_back({0,
                              controlled ? PartyId{PartyId::Role::Charlie}
                                         : PartyId{PartyId::Role::Station,
                                                   config.withholding_station},
                              ClassicalMessage::Kind::Abort,
                              0});
        return t;
    }

    for (std::uint64_t r = 0; r < config.num_rounds; ++r) {
        const PartyId source =
            controlled ? PartyId{PartyId::Role::Charlie}
                       : (config.mode == ProtocolConfig::Mode::Repeater
                              ? PartyId{PartyId::Role::Station, 0}
                              : PartyId{PartyId::Role::Bob});
        t.messages.push_back({r, source,
                              controlled ? ClassicalMessage::Kind::CharlieReveal
                                         : ClassicalMessage::Kind::RevealN,
                              static_cast<int>(true_n[r])});
        t.records[r].bob_n_index = true_n[r];
    }
    for (std::uint64_t r = 0; r < config.num_rounds; ++r) {
        t.messages.push_back({r,
                              {PartyId::Role::Alice},
                              ClassicalMessage::Kind::RevealM,
                              static_cast<int>(true_m[r])});
        t.records[r].alice_m_index = true_m[r];
    }

    auto [kept, discarded] = sift(t.records);
    for (std::size_t i : discarded) {
        const auto& rec = t.records[i];
        t.records[i].verdict = rec.bob_n_index != rec.alice_m_index
                                   ? Verdict::DiscardMismatch
                                   : Verdict::DiscardOutcome;
    }
    // A failed partial-link hop is public knowledge (outcomes and link
    // parameters are announced), so those rounds are discarded too.
    std::vector<std::size_t> sifted;
    for (std::size_t i : kept) {
        if (hop_failed[i]) {
            t.records[i].verdict = Verdict::DiscardOutcome;
        } else {
            t.records[i].verdict = Verdict::SiftedKept;
            sifted.push_back(i);
        }
    }
    t.sifted_count = sifted.size();

    // Disclose a uniformly random subset of the sifted rounds.
    RandomStream dstream = RandomStream::substream(config.seed, 0);
    std::vector<std::size_t> order = sifted;
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[dstream.next_index(i)]);
    const std::size_t disclose_count = static_cast<std::size_t>(
        std::llround(config.disclosure_fraction *
                     static_cast<double>(sifted.size())));
    std::vector<std::size_t> chosen(order.begin(),
                                    order.begin() + disclose_count);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i : chosen) {
        t.records[i].verdict = Verdict::SiftedDisclosed;
        const auto& rec = t.records[i];
        t.messages.push_back({rec.round_id,
                              {PartyId::Role::Alice},
                              ClassicalMessage::Kind::DiscloseBit,
                              rec.alice_key_bit});
        t.messages.push_back({rec.round_id,
                              {PartyId::Role::Bob},
                              ClassicalMessage::Kind::DiscloseBit,
                              rec.bob_bit});
        t.disclosed.emplace_back(rec.alice_key_bit, rec.bob_bit);
    }
    for (std::size_t i : sifted) {
        if (t.records[i].verdict != Verdict::SiftedKept) continue;
        t.alice_key.push_back(t.records[i].alice_key_bit);
        t.bob_key.push_back(t.records[i].bob_bit);
    }
    t.qber = estimate_qber(t.disclosed);
    return t;
}

inline Transcript controlled_run(const ProtocolConfig& config,
                                 const AttackModel& attack,
                                 bool charlie_discloses) {
    if (config.mode != ProtocolConfig::Mode::Controlled)
        throw std::invalid_argument("controlled_run requires controlled mode");
    return run_protocol(config, attack, {.charlie_discloses = charlie_discloses});
}

inline Transcript repeater_run(const ProtocolConfig& config,
                               const AttackModel& attack) {
    if (config.mode != ProtocolConfig::Mode::Repeater)
        throw std::invalid_argument("repeater_run requires repeater mode");
    return run_protocol(config, attack);
}

// Fraction of kept key rounds where Eve's bit guess matched Alice's bit.
// Undefined for the passive adversary.
inline std::optional<double> eve_information(const Transcript& t) {
    if (t.attack_kind == AttackModel::Kind::Passive) return std::nullopt;
    std::size_t kept = 0, known = 0;
    std::size_t eve_cursor = 0;
    for (const auto& rec : t.records) {
        while (eve_cursor < t.eve_records.size() &&
               t.eve_records[eve_cursor].round_id < rec.round_id)
            ++eve_cursor;
        if (rec.verdict != Verdict::SiftedKept) continue;
        ++kept;
        if (eve_cursor < t.eve_records.size() &&
            t.eve_records[eve_cursor].round_id == rec.round_id &&
            t.eve_records[eve_cursor].knew_bit)
            ++known;
    }
    if (kept == 0) return std::nullopt;
    return static_cast<double>(known) / static_cast<double>(kept);
}

}  // namespace pqtqkd
