// adversary.hpp
// Eavesdropper strategies as pure hooks on the quantum channel. Eve hears
// every broadcast but her own measurement results can never reach Bob, so
// any active strategy leaves a detectable trace on mismatched guesses.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pqtqkd/gbs.hpp"
#include "pqtqkd/rng.hpp"
#include "pqtqkd/state.hpp"

namespace pqtqkd {

struct AttackModel {
    enum class Kind { Passive, InterceptReteleport, FakeSource };

    Kind kind = Kind::Passive;
    // Eve's assumed parameter set, normally the public channel_params.
    std::vector<ChannelParam> guess_pool;
    std::uint64_t eve_seed = 0xe5e5e5e5ULL;

    static AttackModel passive() { return {}; }

    void validate() const {
        if (kind != Kind::Passive && guess_pool.empty())
            throw std::invalid_argument("active attack requires a guess pool");
    }
};

// Audit metadata only; never visible to the party state machines.
struct EveRecord {
    std::uint64_t round_id;
    std::size_t guess_index;
    int eve_bit_guess;     // -1 when Eve measured nothing
    int eve_gbm_outcome;   // -1 when no reinjection GBM happened
    bool knew_bit;         // set post-hoc against Alice's true bit
};

namespace adversary {

// Step 2 of the intercept attack: Eve's substitute pair for Alice.
struct Substitution {
    std::size_t guess_index;
    ChannelParam e;
    StateVector pair;
};

inline Substitution draw_substitution(const AttackModel& model,
                                      RandomStream& eve_stream) {
    const std::size_t idx = eve_stream.next_index(model.guess_pool.size());
    const ChannelParam e = model.guess_pool[idx];
    return {idx, e, channel_state(e)};
}

// Steps 3: after Alice's public outcome, Eve corrects her retained qubit
// and reads it in the X basis.
inline int extract_bit(const StateVector& retained_qubit, GbsOutcome announced,
                       RandomStream& eve_stream) {
    const StateVector corrected =
        apply_single_qubit(retained_qubit, 0, correction_for(announced));
    return measure_x(corrected, 0, eve_stream.next_double()).bit;
}

// Step 4: re-teleport the guessed X state onto Bob's line using basis e.
// Eve cannot broadcast her own outcome, but she does not need to: she knows
// both it and Alice's public announcement, so before forwarding she applies
// her own correction and then the adjoint of the correction Bob is about to
// apply. Bob therefore ends up measuring her guess state, degraded only by
// the distortion of teleporting over the captured (possibly mismatched)
// channel. Skipping this compensation would randomize Bob's bit completely
// and gain Eve nothing, so the compensated forwarding is the strongest
// strategy available to her.
struct Reinjection {
    GbsOutcome eve_outcome;
    StateVector bob_qubit;
};

inline Reinjection reinject(int guessed_bit, const StateVector& captured_pair,
                            ChannelParam e, GbsOutcome announced,
                            RandomStream& eve_stream) {
    const StateVector reg = tensor(KeyBit{guessed_bit}.state(), captured_pair);
    const auto meas =
        project_pair_remove(reg, 0, 1, gbs_basis(e), eve_stream.next_double());
    const auto outcome = static_cast<GbsOutcome>(meas.outcome);
    StateVector forwarded =
        apply_single_qubit(meas.collapsed, 0, correction_for(outcome));
    forwarded = apply_single_qubit(forwarded, 0,
                                   correction_for(announced).adjoint());
    return {outcome, forwarded};
}

// Fake-source forwarding: Eve held Bob's half through Alice's broadcast,
// corrected and measured it, and now re-encodes the post-measurement state
// so that Bob's own correction lands him on her measured bit.
inline StateVector forward_measured(const StateVector& post_measurement,
                                    GbsOutcome announced) {
    return apply_single_qubit(post_measurement, 0,
                              correction_for(announced).adjoint());
}

}  // namespace adversary

}  // namespace pqtqkd
