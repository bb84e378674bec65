#include "czk/preamble.hpp"

#include <algorithm>
#include <cmath>

#include "czk/statement_compiler.hpp"

namespace czk {

// --- compound statement and witness ---

std::uint64_t CompoundStatement::digest() const {
    std::uint64_t h = graph_digest(base_graph);
    h = chain(h, prover_params.receiver_randomness.digest());
    for (const auto& c : commitments) h = chain(h, c.payload.digest());
    for (const auto& v : revealed_values) h = chain(h, v.digest());
    return h;
}

CompoundWitness CompoundWitness::from_coloring(Coloring c) {
    CompoundWitness w;
    w.branch = Branch::Coloring;
    w.coloring = std::move(c);
    return w;
}

CompoundWitness CompoundWitness::from_equality(int index, Bits seeds) {
    CompoundWitness w;
    w.branch = Branch::Equality;
    w.equality_index = index;
    w.equality_seeds = std::move(seeds);
    return w;
}

Bits CompoundWitness::encode() const {
    std::vector<std::uint8_t> bytes;
    if (branch == Branch::Coloring) {
        bytes.push_back(1);
        for (int c : coloring) bytes.push_back(static_cast<std::uint8_t>(c));
        return Bits::from_bytes(bytes, bytes.size() * 8);
    }
    bytes.push_back(2);
    bytes.push_back(static_cast<std::uint8_t>(equality_index & 0xFF));
    bytes.push_back(static_cast<std::uint8_t>((equality_index >> 8) & 0xFF));
    Bits out = Bits::from_bytes(bytes, bytes.size() * 8);
    out.append(equality_seeds);
    return out;
}

CompoundWitness CompoundWitness::decode(const Bits& raw, const CompoundStatement& st) {
    if (raw.size() < 8) throw arity_error("witness: short encoding");
    const auto tag = raw.slice(0, 8).to_u64();
    if (tag == 1) {
        const int n = st.base_graph.n;
        if (raw.size() != 8 + static_cast<std::size_t>(n) * 8)
            throw arity_error("witness: coloring length");
        Coloring c(static_cast<std::size_t>(n));
        for (int v = 0; v < n; ++v)
            c[static_cast<std::size_t>(v)] =
                static_cast<int>(raw.slice(8 + static_cast<std::size_t>(v) * 8, 8).to_u64());
        return from_coloring(std::move(c));
    }
    if (tag == 2) {
        const int k = st.prover_params.k;
        const std::size_t seed_bits = static_cast<std::size_t>(k) * k;
        if (raw.size() != 24 + seed_bits) throw arity_error("witness: equality length");
        const int index = static_cast<int>(raw.slice(8, 16).to_u64());
        return from_equality(index, raw.slice(24, seed_bits));
    }
    throw arity_error("witness: unknown branch tag");
}

bool validate_witness(const CompoundStatement& st, const CompoundWitness& w) {
    if (w.branch == CompoundWitness::Branch::Coloring)
        return proper_coloring(st.base_graph, w.coloring);
    const int i = w.equality_index;
    if (i < 1 || i > st.m()) return false;
    if (w.equality_seeds.size() !=
        static_cast<std::size_t>(st.prover_params.k) * st.prover_params.message_bits)
        return false;
    Opening o{st.revealed_values[static_cast<std::size_t>(i - 1)], w.equality_seeds};
    return verify_open(st.prover_params, st.commitments[static_cast<std::size_t>(i - 1)], o);
}

// --- configuration and setup ---

namespace {

int ceil_log2(int x) {
    int h = 0;
    while ((1 << h) < x) ++h;
    return h;
}

}  // namespace

void SecurityConfig::validate() const {
    if (k < 4) throw parameter_error("config: k must be at least 4");
    if (m < 1) throw parameter_error("config: m must be at least 1");
    if (num_sessions < 1) throw parameter_error("config: num_sessions must be at least 1");
    if (body_repetitions < 0) throw parameter_error("config: negative repetitions");
    if (body_tag == BodyTag::G3c && g3c_route == G3cRoute::Compound &&
        expander != ExpanderTag::CircuitFriendly)
        throw parameter_error(
            "config: the compound body route needs the circuit_friendly expander");
}

int SecurityConfig::effective_reps(int instance_edges) const {
    if (body_repetitions > 0) return body_repetitions;
    return instance_edges * std::max(1, ceil_log2(k));
}

int SecurityConfig::effective_pairs(int instance_vertices) const {
    if (challenge_pairs > 0) return challenge_pairs;
    const long long n4 = static_cast<long long>(instance_vertices) * instance_vertices *
                         instance_vertices * instance_vertices;
    return static_cast<int>(std::min<long long>(n4, 512));
}

SessionSetup SessionSetup::create(const SecurityConfig& config, std::uint64_t setup_seed) {
    config.validate();
    SessionSetup s;
    s.config = config;
    s.binding = commit_setup(SchemeTag::Binding, config.k, config.k,
                             derive(setup_seed, "setup.binding"), config.expander);
    s.binding_color = commit_setup(SchemeTag::Binding, config.k, 2,
                                   derive(setup_seed, "setup.binding_color"), config.expander);
    const GroupParams& grp =
        config.group == GroupTag::Toy61 ? GroupParams::toy_61() : GroupParams::default_256();
    s.hiding_v = commit_setup_with_group(config.k, config.k, grp);
    s.hiding_idx = commit_setup_with_group(config.k, 32, grp);
    return s;
}

std::string to_string(Phase p) {
    switch (p) {
        case Phase::AwaitVCommit: return "awaiting_v_commitments";
        case Phase::AwaitReveal: return "round";
        case Phase::Body: return "body";
        case Phase::Aborted: return "aborted";
        case Phase::Done: return "done";
    }
    return "?";
}

// --- payload layouts ---

Bits encode_v_commit_payload(const std::vector<Commitment>& v_comm,
                             const std::vector<Commitment>& pair_comm) {
    Bits out;
    for (const auto& c : v_comm) out.append(c.payload);
    for (const auto& c : pair_comm) out.append(c.payload);
    return out;
}

void decode_v_commit_payload(const SessionSetup& setup, const Bits& payload,
                             std::vector<Commitment>& v_comm,
                             std::vector<Commitment>& pair_comm) {
    const std::size_t elem_bits =
        static_cast<std::size_t>(setup.hiding_v.group.elem_bytes()) * 8;
    const std::size_t m = static_cast<std::size_t>(setup.config.m);
    if (payload.size() < m * elem_bits || payload.size() % elem_bits != 0)
        throw arity_error("v_commit: payload arity");
    v_comm.clear();
    pair_comm.clear();
    const std::size_t total = payload.size() / elem_bits;
    for (std::size_t i = 0; i < total; ++i) {
        Commitment c{SchemeTag::Hiding, payload.slice(i * elem_bits, elem_bits)};
        if (i < m) v_comm.push_back(std::move(c));
        else pair_comm.push_back(std::move(c));
    }
}

Bits encode_opening(const SessionSetup&, const SchemeParams& params, const Opening& o) {
    Bits out = o.message;
    out.append(o.randomness);
    return out;
}

Opening decode_opening(const SessionSetup&, const SchemeParams& params, const Bits& payload) {
    Opening o;
    std::size_t rand_bits;
    if (params.scheme_tag == SchemeTag::Binding) {
        rand_bits = static_cast<std::size_t>(params.message_bits) * params.k;
    } else {
        const int q_bits = static_cast<int>(mpz_sizeinbase(params.group.q.get_mpz_t(), 2));
        rand_bits = static_cast<std::size_t>((q_bits + 7) / 8) * 8;
    }
    if (payload.size() != static_cast<std::size_t>(params.message_bits) + rand_bits)
        throw arity_error("opening: payload arity");
    o.message = payload.slice(0, static_cast<std::size_t>(params.message_bits));
    o.randomness = payload.slice(static_cast<std::size_t>(params.message_bits), rand_bits);
    return o;
}

// --- prover ---

ProverPolicy::PChoice ProverPolicy::choose_p(const PreambleSession&, int, Stream&) {
    return {};
}

void ProverPolicy::on_reveal(const PreambleSession&, int, const Bits&) {}

namespace {

ProtocolMessage abort_message(int session, int round) {
    ProtocolMessage msg;
    msg.session_id = session;
    msg.kind = MsgKind::Abort;
    msg.round_index = round;
    return msg;
}

// Commits the next p value and appends it to the session.
ProtocolMessage commit_p(PreambleSession& s, const SessionSetup& setup, int round,
                         ProverPolicy& policy, Stream& rng) {
    auto choice = policy.choose_p(s, round, rng);
    if (choice.value.empty())
        choice.value = Bits::random(static_cast<std::size_t>(setup.config.k), rng);
    if (static_cast<int>(choice.value.size()) != setup.config.k)
        throw arity_error("choose_p: wrong length");
    auto [c, o] = commit(setup.binding, choice.value, rng);
    s.p_values.push_back(std::move(choice.value));
    s.p_commitments.push_back(c);
    s.p_openings.push_back(std::move(o));
    if (choice.known_equal && !s.solved_index) s.solved_index = round;
    ProtocolMessage msg;
    msg.session_id = s.session_id;
    msg.kind = MsgKind::PCommit;
    msg.round_index = round;
    msg.payload = c.payload;
    return msg;
}

// The session just completed its preamble; build the body entry response.
ProverStepResult enter_body(PreambleSession& s, const SessionSetup& setup,
                            const Graph& base_graph, ProverPolicy& policy, Stream& rng) {
    s.phase = Phase::Body;
    const CompoundStatement st = compound_statement(s, base_graph, setup);
    auto witness = policy.body_witness(s, st);
    ProverStepResult res;
    if (!witness) {
        res.entered_body_unsolved = true;
        if (setup.config.body_tag == BodyTag::Oracle) {
            ProtocolMessage msg;
            msg.session_id = s.session_id;
            msg.kind = MsgKind::Body;
            msg.body_kind = BodyKind::OracleProof;
            msg.payload = encode_oracle_proof(std::nullopt);
            res.response = msg;
        }
        return res;
    }
    s.used_witness = witness;
    if (witness->branch == CompoundWitness::Branch::Equality)
        s.solved_index = witness->equality_index;
    if (setup.config.body_tag == BodyTag::Oracle) {
        ProtocolMessage msg;
        msg.session_id = s.session_id;
        msg.kind = MsgKind::Body;
        msg.body_kind = BodyKind::OracleProof;
        msg.payload = encode_oracle_proof(witness);
        res.response = msg;
        return res;
    }
    ColoringInstance instance;
    Coloring coloring;
    if (setup.config.g3c_route == G3cRoute::Base) {
        if (witness->branch != CompoundWitness::Branch::Coloring) {
            // An equality witness cannot color the base instance.
            res.entered_body_unsolved = true;
            s.used_witness.reset();
            return res;
        }
        instance.graph = base_graph;
        coloring = witness->coloring;
    } else {
        const Circuit circuit = compile_compound(st);
        instance = circuit_to_3col(circuit);
        coloring = map_witness(*witness, st, circuit, instance);
    }
    s.body = body_prover_init(setup, std::move(instance), std::move(coloring),
                              setup.config.admissible, s.pair_commitments);
    if (setup.config.admissible) {
        res.response = body_prover_open_colorings(*s.body, setup, s.session_id, rng);
    } else {
        ProtocolMessage msg;
        msg.session_id = s.session_id;
        msg.kind = MsgKind::Body;
        msg.body_kind = BodyKind::Ready;
        res.response = msg;
    }
    return res;
}

}  // namespace

ProverStepResult prover_process(PreambleSession& s, const SessionSetup& setup,
                                const Graph& base_graph, const ProtocolMessage& in,
                                ProverPolicy& policy, Stream& rng) {
    if (s.phase == Phase::Aborted) return {};  // silence, forever

    switch (in.kind) {
        case MsgKind::VCommit: {
            if (s.phase != Phase::AwaitVCommit)
                throw protocol_order_error("prover: unexpected v_commit");
            decode_v_commit_payload(setup, in.payload, s.v_commitments, s.pair_commitments);
            s.revealed_v.assign(static_cast<std::size_t>(setup.config.m), std::nullopt);
            s.phase = Phase::AwaitReveal;
            s.reveal_round = 1;
            ProverStepResult res;
            res.response = commit_p(s, setup, 1, policy, rng);
            return res;
        }
        case MsgKind::VReveal: {
            if (s.phase != Phase::AwaitReveal)
                throw protocol_order_error("prover: unexpected reveal");
            if (in.round_index != s.reveal_round)
                throw protocol_order_error("prover: reveal for the wrong round");
            const int i = in.round_index;
            const Opening o = decode_opening(setup, setup.hiding_v, in.payload);
            if (!verify_open(setup.hiding_v, s.v_commitments[static_cast<std::size_t>(i - 1)],
                             o)) {
                s.phase = Phase::Aborted;
                return {abort_message(s.session_id, i), false};
            }
            s.revealed_v[static_cast<std::size_t>(i - 1)] = o.message;
            // Keep the solved marker in step with reality: a claimed
            // equality is confirmed or withdrawn by the actual reveal.
            if (s.p_values[static_cast<std::size_t>(i - 1)] == o.message) {
                if (!s.solved_index) s.solved_index = i;
            } else if (s.solved_index && *s.solved_index == i) {
                s.solved_index.reset();
            }
            policy.on_reveal(s, i, o.message);
            if (i < setup.config.m) {
                s.reveal_round = i + 1;
                ProverStepResult res;
                res.response = commit_p(s, setup, i + 1, policy, rng);
                return res;
            }
            return enter_body(s, setup, base_graph, policy, rng);
        }
        case MsgKind::Body: {
            if (s.phase != Phase::Body)
                throw protocol_order_error("prover: body message outside body phase");
            if (in.body_kind == BodyKind::Verdict) {
                s.verdict = in.payload.size() >= 1 && in.payload[0] != 0;
                s.phase = Phase::Done;
                return {};
            }
            if (setup.config.body_tag == BodyTag::Oracle)
                throw protocol_order_error("prover: unexpected body traffic for oracle body");
            auto r = body_prover_step(*s.body, setup, in, rng);
            if (r.abort) {
                s.phase = Phase::Aborted;
                return {abort_message(s.session_id, in.round_index), false};
            }
            return {r.response, false};
        }
        case MsgKind::PCommit:
        case MsgKind::Abort:
            throw protocol_order_error("prover: verifier sent a prover-side kind");
    }
    throw protocol_order_error("prover: unreachable");
}

std::pair<PreambleSession, std::optional<ProtocolMessage>> prover_step(
    const PreambleSession& s, const SessionSetup& setup, const Graph& base_graph,
    const ProtocolMessage& in, ProverPolicy& policy, std::uint64_t prover_randomness) {
    PreambleSession next = s;
    Stream rng(prover_randomness);
    auto res = prover_process(next, setup, base_graph, in, policy, rng);
    return {std::move(next), res.response};
}

CompoundStatement compound_statement(const PreambleSession& s, const Graph& base_graph,
                                     const SessionSetup& setup) {
    if (s.phase != Phase::Body && s.phase != Phase::Done)
        throw state_error("compound_statement: preamble not completed");
    CompoundStatement st;
    st.base_graph = base_graph;
    st.prover_params = setup.binding;
    st.commitments = s.p_commitments;
    st.revealed_values.reserve(s.revealed_v.size());
    for (const auto& v : s.revealed_v) {
        if (!v) throw state_error("compound_statement: missing revealed value");
        st.revealed_values.push_back(*v);
    }
    return st;
}

// --- honest verifier ---

HonestVerifierSession::HonestVerifierSession(std::shared_ptr<const SessionSetup> setup,
                                             std::shared_ptr<const Graph> base_graph,
                                             int session_id, std::uint64_t entropy)
    : setup_(std::move(setup)), base_graph_(std::move(base_graph)), session_id_(session_id),
      entropy_(entropy) {
    const auto& cfg = setup_->config;
    Stream vs(derive(entropy_, "verifier.values"));
    Stream cs(derive(entropy_, "verifier.commit"));
    for (int i = 0; i < cfg.m; ++i) {
        Bits v = Bits::random(static_cast<std::size_t>(cfg.k), vs);
        auto [c, o] = commit(setup_->hiding_v, v, cs);
        v_values_.push_back(std::move(v));
        v_commitments_.push_back(std::move(c));
        v_openings_.push_back(std::move(o));
    }
    if (cfg.admissible && cfg.body_tag == BodyTag::G3c) {
        const int nv = body_instance_vertices();
        const int pairs = cfg.effective_pairs(nv);
        Stream ps(derive(entropy_, "verifier.pairs"));
        for (int i = 0; i < pairs; ++i) {
            const auto u = ps.below(static_cast<std::uint64_t>(nv));
            const auto v = ps.below(static_cast<std::uint64_t>(nv));
            const auto code = static_cast<std::uint32_t>(u * static_cast<std::uint64_t>(nv) + v);
            auto [c, o] = commit(setup_->hiding_idx, Bits::from_u64(code, 32), cs);
            pair_values_.push_back(code);
            pair_openings_.push_back(std::move(o));
            pair_commitments_.push_back(std::move(c));
        }
    }
}

bool HonestVerifierSession::wants_turn() const {
    return !waiting_ && !aborted_ && next_ != Next::DoneState;
}

bool HonestVerifierSession::done() const { return aborted_ || next_ == Next::DoneState; }

bool HonestVerifierSession::preamble_slots_exhausted() const {
    return preamble_slots_sent_ >= setup_->config.m;
}

ProtocolMessage HonestVerifierSession::make_reveal(int index) const {
    ProtocolMessage msg;
    msg.session_id = session_id_;
    msg.kind = MsgKind::VReveal;
    msg.round_index = index;
    msg.payload = encode_opening(*setup_, setup_->hiding_v,
                                 v_openings_[static_cast<std::size_t>(index - 1)]);
    return msg;
}

CompoundStatement HonestVerifierSession::statement() const {
    CompoundStatement st;
    st.base_graph = *base_graph_;
    st.prover_params = setup_->binding;
    st.commitments = p_commitments_;
    st.revealed_values = v_values_;
    return st;
}

int HonestVerifierSession::body_instance_vertices() const {
    if (setup_->config.g3c_route == G3cRoute::Base) return base_graph_->n;
    return compound_instance_vertices(*setup_, *base_graph_);
}

void HonestVerifierSession::prepare_body() {
    ColoringInstance instance;
    if (setup_->config.g3c_route == G3cRoute::Base) {
        instance.graph = *base_graph_;
    } else {
        instance = circuit_to_3col(compile_compound(statement()));
    }
    body_ = body_verifier_init(*setup_, std::move(instance), setup_->config.admissible,
                               derive(entropy_, "verifier.body"));
    if (setup_->config.admissible)
        body_verifier_adopt_pairs(*body_, pair_values_, pair_openings_, pair_commitments_);
}

ProtocolMessage HonestVerifierSession::emit_next() {
    if (!wants_turn()) throw protocol_order_error("verifier: no turn to take");
    switch (next_) {
        case Next::VCommit: {
            ProtocolMessage msg;
            msg.session_id = session_id_;
            msg.kind = MsgKind::VCommit;
            msg.round_index = 1;
            msg.payload = encode_v_commit_payload(v_commitments_, pair_commitments_);
            next_ = Next::Reveal;
            reveal_index_ = 1;
            expected_p_ = 1;
            waiting_ = true;
            preamble_slots_sent_ = 1;
            return msg;
        }
        case Next::Reveal: {
            ProtocolMessage msg = make_reveal(reveal_index_);
            if (reveal_index_ < setup_->config.m) {
                ++preamble_slots_sent_;
                expected_p_ = reveal_index_ + 1;
            } else {
                expected_p_ = 0;  // the closing reveal gets a body response
            }
            waiting_ = true;
            return msg;
        }
        case Next::ChallengeCommit: {
            ProtocolMessage msg = body_verifier_challenge_commit(
                *body_, *setup_, session_id_, derive(entropy_, "verifier.body"));
            next_ = Next::ChallengeOpen;
            waiting_ = true;
            return msg;
        }
        case Next::ChallengeOpen: {
            ProtocolMessage msg = body_verifier_challenge_open(*body_, *setup_, session_id_);
            next_ = Next::Verdict;
            waiting_ = true;
            return msg;
        }
        case Next::Verdict: {
            ProtocolMessage msg;
            if (setup_->config.body_tag == BodyTag::Oracle) {
                msg.session_id = session_id_;
                msg.kind = MsgKind::Body;
                msg.body_kind = BodyKind::Verdict;
                const bool ok = oracle_verify(statement(), *oracle_proof_);
                msg.payload = Bits{ok ? 1 : 0};
                verdict_ = ok;
            } else {
                msg = body_verifier_verdict(*body_, session_id_);
                verdict_ = body_->accept;
            }
            next_ = Next::DoneState;
            waiting_ = false;
            return msg;
        }
        case Next::DoneState: break;
    }
    throw protocol_order_error("verifier: emit in done state");
}

void HonestVerifierSession::deliver(const ProtocolMessage& prover_msg) {
    if (prover_msg.kind == MsgKind::Abort) {
        aborted_ = true;
        waiting_ = false;
        next_ = Next::DoneState;
        return;
    }
    if (!waiting_) throw protocol_order_error("verifier: unexpected prover message");
    waiting_ = false;
    const auto& cfg = setup_->config;
    switch (prover_msg.kind) {
        case MsgKind::PCommit: {
            if (expected_p_ == 0 || prover_msg.round_index != expected_p_)
                throw protocol_order_error("verifier: p_commit out of order");
            p_commitments_.push_back(Commitment{SchemeTag::Binding, prover_msg.payload});
            reveal_index_ = expected_p_;
            expected_p_ = 0;
            return;
        }
        case MsgKind::Body: {
            switch (prover_msg.body_kind) {
                case BodyKind::Ready:
                    if (cfg.body_tag != BodyTag::G3c || cfg.admissible)
                        throw protocol_order_error("verifier: unexpected ready");
                    prepare_body();
                    next_ = Next::ChallengeCommit;
                    return;
                case BodyKind::OracleProof:
                    if (cfg.body_tag != BodyTag::Oracle)
                        throw protocol_order_error("verifier: unexpected oracle proof");
                    oracle_proof_ = prover_msg.payload;
                    next_ = Next::Verdict;
                    return;
                case BodyKind::ColoringCommit:
                    if (cfg.body_tag != BodyTag::G3c)
                        throw protocol_order_error("verifier: unexpected colorings");
                    if (cfg.admissible) {
                        prepare_body();
                        next_ = Next::ChallengeOpen;
                    } else if (next_ != Next::ChallengeOpen) {
                        throw protocol_order_error("verifier: colorings out of order");
                    }
                    body_verifier_deliver(*body_, *setup_, prover_msg);
                    return;
                case BodyKind::EndpointOpen:
                    if (next_ != Next::Verdict)
                        throw protocol_order_error("verifier: endpoint openings out of order");
                    body_verifier_deliver(*body_, *setup_, prover_msg);
                    return;
                default:
                    throw protocol_order_error("verifier: unexpected body sub-kind");
            }
        }
        default:
            throw protocol_order_error("verifier: unexpected prover kind");
    }
}

std::pair<HonestVerifierSession, std::optional<ProtocolMessage>> honest_verifier_step(
    HonestVerifierSession session, const std::optional<ProtocolMessage>& incoming) {
    if (incoming) session.deliver(*incoming);
    std::optional<ProtocolMessage> out;
    if (session.wants_turn()) out = session.emit_next();
    return {std::move(session), std::move(out)};
}

int compound_instance_vertices(const SessionSetup& setup, const Graph& base_graph) {
    // The instance shape depends only on (|V|, |E|, m, k); payload bits
    // select wires but never change counts. Compile a zeroed statement.
    static thread_local std::vector<std::pair<std::uint64_t, int>> cache;
    std::uint64_t key = graph_digest(base_graph);
    key = chain(key, static_cast<std::uint64_t>(setup.config.m));
    key = chain(key, static_cast<std::uint64_t>(setup.config.k));
    for (const auto& [k2, v] : cache)
        if (k2 == key) return v;
    CompoundStatement st;
    st.base_graph = base_graph;
    st.prover_params = setup.binding;
    const int k = setup.config.k;
    for (int i = 0; i < setup.config.m; ++i) {
        st.commitments.push_back(Commitment{
            SchemeTag::Binding, Bits(static_cast<std::size_t>(k) * 3 * k)});
        st.revealed_values.push_back(Bits(static_cast<std::size_t>(k)));
    }
    const int n = circuit_to_3col(compile_compound(st)).graph.n;
    cache.emplace_back(key, n);
    return n;
}

}  // namespace czk
