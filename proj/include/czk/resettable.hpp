#ifndef CZK_RESETTABLE_HPP_
#define CZK_RESETTABLE_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "czk/preamble.hpp"
#include "czk/scheduler.hpp"

namespace czk {

// Fixed pool of statements, witnesses and random tapes. An incarnation
// P^(i,j,k) is the prover determined by input i, gatekeeper tape j and
// logic tape k; equal indices always yield the identical prover.
struct IncarnationRegistry {
    std::uint64_t seed = 0;
    std::vector<Graph> inputs;
    std::vector<Coloring> witnesses;
    int p1_tapes = 1;
    int p2_tapes = 1;
    std::shared_ptr<const SessionSetup> setup;

    std::string to_json() const;  // {seed, inputs, tape_counts}
};

struct Incarnation {
    int input_index = 0;  // i
    int p1_tape = 0;      // j
    int p2_tape = 0;      // k
    std::uint64_t phi1 = 0;
    std::uint64_t phi2 = 0;

    bool operator==(const Incarnation& o) const {
        return input_index == o.input_index && p1_tape == o.p1_tape && p2_tape == o.p2_tape;
    }
};

Incarnation make_incarnation(const IncarnationRegistry& registry, int i, int j, int k);

// Every verifier message after the determining one splits into a main
// part (the revealed value) and an authenticator (the opening data).
struct AdmissibleMessage {
    Bits main;
    Bits authenticator;
};

struct P1Accept {
    Bits main;
};
struct P1Abort {};
using P1Decision = std::variant<P1Accept, P1Abort>;

// The gatekeeper module: supplies the receiver randomness in the
// initialization message, pins the determining message, and verifies each
// later reveal before its main part reaches the logic module.
class P1State {
public:
    P1State() = default;
    P1State(const IncarnationRegistry& registry, const Incarnation& inc);

    ProtocolMessage init_message(int session_id) const;
    void adopt_determining(const ProtocolMessage& session_open, const ProtocolMessage& init,
                           const ProtocolMessage& determining);
    bool has_determining() const { return determining_.has_value(); }
    P1Decision decide(const ProtocolMessage& reveal) const;

    const SessionSetup& setup() const { return *setup_; }
    const std::vector<Commitment>& v_commitments() const { return v_commitments_; }
    const std::vector<Commitment>& pair_commitments() const { return pair_commitments_; }

private:
    std::shared_ptr<SessionSetup> setup_;  // hiding params rebased on phi1's h
    std::uint64_t phi1 = 0;
    std::optional<Bits> determining_;
    std::uint64_t open_init_digest_ = 0;
    std::vector<Commitment> v_commitments_;
    std::vector<Commitment> pair_commitments_;
};

// Spec-facing P1 step: harness traffic before the determining message is a
// protocol-order error; afterwards each reveal is accepted or aborts.
P1Decision p1_step(const P1State& p1, const ProtocolMessage& reveal);

// Full admissible prover: P1 gatekeeping in front of the ordinary prover
// logic (P2), deterministic in (phi1, phi2, message history).
class AdmissibleProver {
public:
    AdmissibleProver(const IncarnationRegistry& registry, const Incarnation& inc);

    std::optional<ProtocolMessage> on_verifier_message(const ProtocolMessage& msg);
    const PreambleSession& session() const { return session_; }
    const P1State& p1() const { return p1_; }
    const Incarnation& incarnation() const { return inc_; }

private:
    const IncarnationRegistry* registry_;
    Incarnation inc_;
    P1State p1_;
    PreambleSession session_;
    HonestProverPolicy policy_;
    std::uint64_t history_digest_ = 0;
    bool opened_ = false;
    std::optional<ProtocolMessage> open_msg_, init_msg_;
};

// One planned session of the resetting adversary.
struct ResetSession {
    int i = 0, j = 0, k = 0;
    std::uint64_t verifier_entropy = 0;
    int tamper_round = 0;        // 0: honest; else corrupt that reveal's authenticator
    int stop_after_round = 0;    // 0: run to completion
};

struct ResettableSessionRecord {
    Incarnation incarnation;
    int reset_index = 0;  // how many earlier sessions used this incarnation
    std::vector<TranscriptRecord> records;
    SessionOutcome outcome = SessionOutcome::Unfinished;

    std::uint64_t digest() const;  // over all message bytes, order-sensitive
    std::string to_digest() const;
};

struct ResettableRunConfig {
    bool hybrid_mode = false;  // reject reuse of a logic tape across incarnations
};

struct ResettableTranscript {
    std::vector<ResettableSessionRecord> sessions;
    std::string to_jsonl() const;
};

ResettableTranscript resetting_run(const std::vector<ResetSession>& plan,
                                   const IncarnationRegistry& registry,
                                   const ResettableRunConfig& config);

// Wire helpers shared with the tests.
ProtocolMessage session_open_message(int session_id, const Incarnation& inc);
std::uint64_t determining_prefix(const ProtocolMessage& session_open,
                                 const ProtocolMessage& init);

}  // namespace czk

#endif  // CZK_RESETTABLE_HPP_
