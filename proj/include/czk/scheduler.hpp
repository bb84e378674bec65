#ifndef CZK_SCHEDULER_HPP_
#define CZK_SCHEDULER_HPP_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "czk/messages.hpp"
#include "czk/preamble.hpp"

namespace czk {

enum class SessionOutcome { Accepted, Rejected, Aborted, Unfinished };
std::string to_string(SessionOutcome o);

struct Transcript {
    SecurityConfig config;
    std::uint64_t tape_seed = 0;
    std::vector<TranscriptRecord> records;
    std::map<int, SessionOutcome> outcomes;

    std::string to_jsonl() const;
    static Transcript from_jsonl(const std::string& text);
};

// Assignment of preamble rounds to the global slot order. Slot i (1-based)
// holds one (session, round) pair; rounds increase within a session.
struct Schedule {
    int m = 0;
    int num_sessions = 0;
    std::vector<std::pair<int, int>> slots;

    std::vector<int> session_slots(int session) const;  // 1-based, ascending
    bool complete(int session) const;
    std::string serialize() const;  // lines: "slot session round"
    static Schedule parse(const std::string& text, int m, int num_sessions);
};

Schedule slotify(const Transcript& t);

struct StrategySpec {
    enum class Policy { RoundRobin, Nested, RandomInterleave, CustomScript };
    enum class AbortPolicy { None, Prob, Adaptive };
    Policy policy = Policy::RoundRobin;
    AbortPolicy abort_policy = AbortPolicy::None;
    double abort_p = 0.0;
    std::vector<std::pair<int, int>> script;  // (session, round) per slot

    // Accepted forms: round_robin | nested | random_interleave |
    // abort_prob:P | adaptive_abort | custom_script:FILE, optionally
    // composed as BASE+abort:P or BASE+adaptive.
    static StrategySpec parse(const std::string& text);
    std::string name() const;
};

struct BlackBoxAction {
    enum class Type { Message, Wait, Halt };
    Type type = Type::Halt;
    ProtocolMessage msg;
};

// Deterministic adversarial verifier over all sessions. Behavior is a
// pure function of (tape, message history); the rolling prefix hash
// stands in for the history so every decision replays identically. Copying
// the object snapshots it.
class VerifierBlackBox {
public:
    VerifierBlackBox() = default;
    VerifierBlackBox(StrategySpec spec, std::shared_ptr<const SessionSetup> setup,
                     std::shared_ptr<const Graph> base_graph, std::uint64_t tape_seed);

    BlackBoxAction step();
    void deliver(const ProtocolMessage& prover_msg);

    std::uint64_t tape_seed() const { return tape_; }
    std::uint64_t prefix_hash() const { return prefix_hash_; }
    const SessionSetup& setup() const { return *setup_; }
    const Graph& base_graph() const { return *base_; }
    const StrategySpec& spec() const { return spec_; }

private:
    int pick_next();  // session id, or 0 for none
    bool session_eligible(int id) const;
    void ensure_started(int id);

    StrategySpec spec_;
    std::shared_ptr<const SessionSetup> setup_;
    std::shared_ptr<const Graph> base_;
    std::uint64_t tape_ = 0;
    std::uint64_t prefix_hash_ = 0;
    std::vector<std::optional<HonestVerifierSession>> sessions_;
    std::vector<std::uint64_t> last_prover_digest_;
    std::size_t script_pos_ = 0;
};

VerifierBlackBox make_adversary(const std::string& strategy,
                                std::shared_ptr<const SessionSetup> setup,
                                std::shared_ptr<const Graph> base_graph,
                                std::uint64_t tape_seed);

// Drives the interaction with immediate prover responses until the
// adversary halts; logical time is the record index.
Transcript run_interaction(VerifierBlackBox blackbox, const SessionSetup& setup,
                           const Graph& base_graph, ProverPolicy& policy,
                           std::uint64_t prover_seed);
Transcript run_interaction_honest(VerifierBlackBox blackbox, const SessionSetup& setup,
                                  const Graph& base_graph, const Coloring& witness,
                                  std::uint64_t prover_seed);

struct VerifyReport {
    bool ok = true;
    int sessions_checked = 0;
    int openings_checked = 0;
    int bodies_accepted = 0;
    std::vector<std::string> issues;
};

// Offline re-verification of a transcript: every opening is checked
// against its commitment, verdicts are recomputed, and abort silence is
// enforced.
VerifyReport verify_transcript(const Transcript& t, const SessionSetup& setup,
                               const Graph& base_graph);

}  // namespace czk

#endif  // CZK_SCHEDULER_HPP_
