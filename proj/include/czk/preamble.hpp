#ifndef CZK_PREAMBLE_HPP_
#define CZK_PREAMBLE_HPP_

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "czk/body.hpp"
#include "czk/commitments.hpp"
#include "czk/compound.hpp"
#include "czk/graph.hpp"
#include "czk/messages.hpp"

namespace czk {

enum class BodyTag { Oracle, G3c };
// Which instance the 3-coloring body proves: the base graph directly, or
// the reduction of the compound statement.
enum class G3cRoute { Base, Compound };
enum class GroupTag { Toy61, Default256 };

struct SecurityConfig {
    int k = 8;
    int m = 8;
    int num_sessions = 2;
    BodyTag body_tag = BodyTag::Oracle;
    int body_repetitions = 0;  // 0: |E| * ceil(log2 k) of the body instance
    G3cRoute g3c_route = G3cRoute::Compound;
    ExpanderTag expander = ExpanderTag::Mixer;
    GroupTag group = GroupTag::Toy61;
    bool admissible = false;  // merged determining message + pre-committed pairs
    int challenge_pairs = 0;  // admissible: committed vertex pairs; 0: min(n^4, 512)

    void validate() const;
    int effective_reps(int instance_edges) const;
    int effective_pairs(int instance_vertices) const;
};

// Public per-run setup: commitment parameters shared by all sessions.
struct SessionSetup {
    SecurityConfig config;
    SchemeParams binding;        // prover p_i strings, message_bits = k
    SchemeParams binding_color;  // body color commitments, message_bits = 2
    SchemeParams hiding_v;       // verifier v_i strings, message_bits = k
    SchemeParams hiding_idx;     // verifier challenge indices, message_bits = 32

    static SessionSetup create(const SecurityConfig& config, std::uint64_t setup_seed);
};

enum class Phase { AwaitVCommit, AwaitReveal, Body, Aborted, Done };

std::string to_string(Phase p);

// Prover-side view of one session.
struct PreambleSession {
    int session_id = 0;
    Phase phase = Phase::AwaitVCommit;
    int reveal_round = 0;  // when AwaitReveal: expecting the opening of v_{reveal_round}
    std::vector<Commitment> v_commitments;
    std::vector<Commitment> pair_commitments;  // admissible mode
    std::vector<Bits> p_values;
    std::vector<Commitment> p_commitments;
    std::vector<Opening> p_openings;
    std::vector<std::optional<Bits>> revealed_v;
    std::optional<int> solved_index;  // simulator-side: i with p_i = v_i
    std::optional<BodyProverState> body;
    std::optional<CompoundWitness> used_witness;
    std::optional<bool> verdict;
};

// Hooks that differentiate the honest prover from the simulator. The
// default chooses fresh uniform p values and carries a fixed witness.
class ProverPolicy {
public:
    // An empty value means: draw a fresh uniform string. known_equal marks
    // a commitment set to a learned verifier value.
    struct PChoice {
        Bits value;
        bool known_equal = false;
    };

    virtual ~ProverPolicy() = default;
    virtual PChoice choose_p(const PreambleSession& s, int round, Stream& rng);
    virtual void on_reveal(const PreambleSession& s, int index, const Bits& value);
    virtual std::optional<CompoundWitness> body_witness(const PreambleSession& s,
                                                        const CompoundStatement& st) = 0;
};

class HonestProverPolicy : public ProverPolicy {
public:
    explicit HonestProverPolicy(Coloring witness) : witness_(std::move(witness)) {}
    std::optional<CompoundWitness> body_witness(const PreambleSession&,
                                                const CompoundStatement&) override {
        return CompoundWitness::from_coloring(witness_);
    }

private:
    Coloring witness_;
};

struct ProverStepResult {
    std::optional<ProtocolMessage> response;  // nullopt: silence
    bool entered_body_unsolved = false;       // no witness at the body gate
};

// Advances one session on an incoming verifier message. Aborted sessions
// swallow all further traffic; out-of-phase messages raise
// protocol_order_error (a harness bug, not a protocol abort).
ProverStepResult prover_process(PreambleSession& s, const SessionSetup& setup,
                                const Graph& base_graph, const ProtocolMessage& in,
                                ProverPolicy& policy, Stream& rng);

// Functional wrapper matching the spec-facing shape: value in, value out.
std::pair<PreambleSession, std::optional<ProtocolMessage>> prover_step(
    const PreambleSession& s, const SessionSetup& setup, const Graph& base_graph,
    const ProtocolMessage& in, ProverPolicy& policy, std::uint64_t prover_randomness);

CompoundStatement compound_statement(const PreambleSession& s, const Graph& base_graph,
                                     const SessionSetup& setup);

// Payload builders/parsers for the preamble wire format.
Bits encode_v_commit_payload(const std::vector<Commitment>& v_comm,
                             const std::vector<Commitment>& pair_comm);
void decode_v_commit_payload(const SessionSetup& setup, const Bits& payload,
                             std::vector<Commitment>& v_comm,
                             std::vector<Commitment>& pair_comm);
Bits encode_opening(const SessionSetup& setup, const SchemeParams& params, const Opening& o);
Opening decode_opening(const SessionSetup& setup, const SchemeParams& params, const Bits& payload);

// Honest verifier for one session: emits the commitment, the reveals in
// order, then drives the body and issues a verdict. Value semantics; a
// copy is a full snapshot.
class HonestVerifierSession {
public:
    HonestVerifierSession() = default;
    HonestVerifierSession(std::shared_ptr<const SessionSetup> setup,
                          std::shared_ptr<const Graph> base_graph, int session_id,
                          std::uint64_t entropy);

    bool wants_turn() const;  // has a message ready to emit
    bool done() const;
    ProtocolMessage emit_next();
    void deliver(const ProtocolMessage& prover_msg);

    int session_id() const { return session_id_; }
    int preamble_slots_sent() const { return preamble_slots_sent_; }
    bool preamble_slots_exhausted() const;
    std::optional<bool> verdict() const { return verdict_; }
    bool aborted() const { return aborted_; }
    const Bits& v_value(int i) const { return v_values_[static_cast<std::size_t>(i - 1)]; }

private:
    enum class Next {
        VCommit,
        Reveal,        // reveal_index_
        ChallengeCommit,
        ChallengeOpen,
        Verdict,
        DoneState,
    };

    ProtocolMessage make_reveal(int index) const;
    void prepare_body();
    CompoundStatement statement() const;
    int body_instance_vertices() const;

    std::shared_ptr<const SessionSetup> setup_;
    std::shared_ptr<const Graph> base_graph_;
    int session_id_ = 0;
    std::uint64_t entropy_ = 0;

    std::vector<Bits> v_values_;
    std::vector<Opening> v_openings_;
    std::vector<Commitment> v_commitments_;
    std::vector<std::uint32_t> pair_values_;
    std::vector<Opening> pair_openings_;
    std::vector<Commitment> pair_commitments_;

    Next next_ = Next::VCommit;
    int reveal_index_ = 1;   // next reveal to emit
    int expected_p_ = 0;     // round of the prover commitment we await, 0 = none
    bool waiting_ = false;
    bool aborted_ = false;
    int preamble_slots_sent_ = 0;

    std::vector<Commitment> p_commitments_;
    std::optional<BodyVerifierState> body_;
    std::optional<Bits> oracle_proof_;
    std::optional<bool> verdict_;
};

// Spec-facing functional wrapper for the honest verifier.
std::pair<HonestVerifierSession, std::optional<ProtocolMessage>> honest_verifier_step(
    HonestVerifierSession session, const std::optional<ProtocolMessage>& incoming);

// Vertex count of the compound-route body instance; depends only on the
// base graph shape and (m, k), never on payload contents.
int compound_instance_vertices(const SessionSetup& setup, const Graph& base_graph);

}  // namespace czk

#endif  // CZK_PREAMBLE_HPP_
