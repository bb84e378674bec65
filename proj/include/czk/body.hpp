#ifndef CZK_BODY_HPP_
#define CZK_BODY_HPP_

#include <optional>
#include <vector>

#include "czk/commitments.hpp"
#include "czk/compound.hpp"
#include "czk/graph.hpp"
#include "czk/messages.hpp"
#include "czk/statement_compiler.hpp"

namespace czk {

struct SessionSetup;  // preamble.hpp

// Batched 3-coloring proof body. The verifier commits to its challenge
// edges first, the prover commits to independently permuted colorings,
// then both sides open. In admissible mode the challenges were already
// committed inside the determining message as vertex pairs; pairs that
// are not edges of the instance are discarded at open time.

struct BodyProverState {
    enum class Phase { AwaitChallengeCommit, AwaitChallengeOpen, AwaitVerdict, Done };
    Phase phase = Phase::AwaitChallengeCommit;
    bool admissible = false;
    ColoringInstance instance;
    Coloring coloring;  // proper coloring of instance
    int reps = 0;       // committed coloring repetitions
    std::vector<Commitment> challenge_commitments;  // plain: R; admissible: pairs
    std::vector<std::vector<Commitment>> color_commitments;  // [rep][vertex]
    std::vector<std::vector<Opening>> color_openings;
};

struct BodyVerifierState {
    enum class Phase { AwaitColoringCommit, AwaitEndpointOpen, VerdictReady, Done };
    Phase phase = Phase::AwaitColoringCommit;
    bool admissible = false;
    ColoringInstance instance;
    int reps = 0;
    std::vector<std::uint32_t> challenge_values;  // plain: edge ids; admissible: pair codes
    std::vector<Opening> challenge_openings;
    std::vector<Commitment> challenge_commitments;
    std::vector<Bits> color_commitment_payloads;  // one per rep
    bool accept = false;
};

// --- prover side ---

BodyProverState body_prover_init(const SessionSetup& setup, ColoringInstance instance,
                                 Coloring coloring, bool admissible,
                                 std::vector<Commitment> precommitted_pairs);

// Prover message for the admissible flow (colorings go out immediately
// after the preamble closes).
ProtocolMessage body_prover_open_colorings(BodyProverState& st, const SessionSetup& setup,
                                           int session_id, Stream& rng);

struct BodyProverResult {
    std::optional<ProtocolMessage> response;
    bool abort = false;  // the verifier opened a challenge incorrectly
};

BodyProverResult body_prover_step(BodyProverState& st, const SessionSetup& setup,
                                  const ProtocolMessage& in, Stream& rng);

// --- verifier side ---

BodyVerifierState body_verifier_init(const SessionSetup& setup, ColoringInstance instance,
                                     bool admissible, std::uint64_t entropy);
ProtocolMessage body_verifier_challenge_commit(BodyVerifierState& st, const SessionSetup& setup,
                                               int session_id, std::uint64_t entropy);
// Admissible mode: challenges were drawn when the determining message was
// formed; this reconstructs verifier state from those pair values.
void body_verifier_adopt_pairs(BodyVerifierState& st, const std::vector<std::uint32_t>& pairs,
                               const std::vector<Opening>& openings,
                               const std::vector<Commitment>& commitments);
ProtocolMessage body_verifier_challenge_open(BodyVerifierState& st, const SessionSetup& setup,
                                             int session_id);
void body_verifier_deliver(BodyVerifierState& st, const SessionSetup& setup,
                           const ProtocolMessage& msg);
ProtocolMessage body_verifier_verdict(BodyVerifierState& st, int session_id);

// --- oracle test double ---

Bits encode_oracle_proof(const std::optional<CompoundWitness>& w);
std::optional<CompoundWitness> decode_oracle_proof(const Bits& payload,
                                                   const CompoundStatement& st);
bool oracle_verify(const CompoundStatement& st, const Bits& proof_payload);

// Replays the prover role of body_step over a scripted list of verifier
// messages; used to check that acting-as-prover is byte-identical.
std::vector<ProtocolMessage> simulate_body_as_prover(const SessionSetup& setup,
                                                     ColoringInstance instance,
                                                     Coloring coloring, int session_id,
                                                     const std::vector<ProtocolMessage>& verifier_msgs,
                                                     std::uint64_t randomness);

// Message shape (kind, sub-kind, payload length) used by the
// witness-indistinguishability checks.
std::vector<std::tuple<int, int, std::size_t>> message_shapes(
    const std::vector<ProtocolMessage>& msgs);

// Fixed-width opening codec shared by the wire formats.
std::size_t opening_bits(const SchemeParams& params);
Opening decode_opening_at(const SchemeParams& params, const Bits& payload, std::size_t at);

}  // namespace czk

#endif  // CZK_BODY_HPP_
