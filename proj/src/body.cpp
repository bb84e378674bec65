#include "czk/body.hpp"

#include <algorithm>
#include <array>
#include <tuple>

#include "czk/errors.hpp"
#include "czk/preamble.hpp"

namespace czk {

std::size_t opening_bits(const SchemeParams& params) {
    if (params.scheme_tag == SchemeTag::Binding)
        return static_cast<std::size_t>(params.message_bits) * (1 + params.k);
    const int q_bits = static_cast<int>(mpz_sizeinbase(params.group.q.get_mpz_t(), 2));
    return static_cast<std::size_t>(params.message_bits) +
           static_cast<std::size_t>((q_bits + 7) / 8) * 8;
}

Opening decode_opening_at(const SchemeParams& params, const Bits& payload, std::size_t at) {
    Opening o;
    o.message = payload.slice(at, static_cast<std::size_t>(params.message_bits));
    o.randomness =
        payload.slice(at + static_cast<std::size_t>(params.message_bits),
                      opening_bits(params) - static_cast<std::size_t>(params.message_bits));
    return o;
}

namespace {

Bits encode_open(const SchemeParams& params, const Opening& o) {
    Bits out = o.message;
    out.append(o.randomness);
    return out;
}

std::size_t open_bits(const SchemeParams& params) { return opening_bits(params); }

Opening decode_open(const SchemeParams& params, const Bits& payload, std::size_t at) {
    return decode_opening_at(params, payload, at);
}

std::array<int, 3> permutation(Stream& rng) {
    static const std::array<std::array<int, 3>, 6> all = {{
        {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
    }};
    return all[rng.below(6)];
}

// Decode a committed pair code into the challenged edge, if any.
std::optional<std::pair<int, int>> pair_edge(const Graph& g, std::uint32_t code) {
    const int n = g.n;
    const int u = static_cast<int>(code) / n;
    const int v = static_cast<int>(code) % n;
    if (u == v || u >= n) return std::nullopt;
    if (!g.has_edge(u, v)) return std::nullopt;
    return std::make_pair(std::min(u, v), std::max(u, v));
}

}  // namespace

BodyProverState body_prover_init(const SessionSetup& setup, ColoringInstance instance,
                                 Coloring coloring, bool admissible,
                                 std::vector<Commitment> precommitted_pairs) {
    if (!proper_coloring(instance.graph, coloring))
        throw state_error("body: witness coloring is not proper");
    BodyProverState st;
    st.admissible = admissible;
    st.instance = std::move(instance);
    st.coloring = std::move(coloring);
    if (admissible) {
        st.challenge_commitments = std::move(precommitted_pairs);
        st.reps = static_cast<int>(st.challenge_commitments.size());
        st.phase = BodyProverState::Phase::AwaitChallengeOpen;
    } else {
        st.reps = setup.config.effective_reps(static_cast<int>(st.instance.graph.edges.size()));
        st.phase = BodyProverState::Phase::AwaitChallengeCommit;
    }
    return st;
}

namespace {

ProtocolMessage make_coloring_commit(BodyProverState& st, const SessionSetup& setup,
                                     int session_id, Stream& rng) {
    const int nv = st.instance.graph.n;
    ProtocolMessage msg;
    msg.session_id = session_id;
    msg.kind = MsgKind::Body;
    msg.body_kind = BodyKind::ColoringCommit;
    st.color_commitments.assign(static_cast<std::size_t>(st.reps), {});
    st.color_openings.assign(static_cast<std::size_t>(st.reps), {});
    for (int r = 0; r < st.reps; ++r) {
        const auto perm = permutation(rng);
        auto& commits = st.color_commitments[static_cast<std::size_t>(r)];
        auto& opens = st.color_openings[static_cast<std::size_t>(r)];
        for (int v = 0; v < nv; ++v) {
            const int color = perm[static_cast<std::size_t>(
                st.coloring[static_cast<std::size_t>(v)])];
            Bits bits(2);
            bits[0] = static_cast<std::uint8_t>(color & 1);
            bits[1] = static_cast<std::uint8_t>((color >> 1) & 1);
            auto [c, o] = commit(setup.binding_color, bits, rng);
            msg.payload.append(c.payload);
            commits.push_back(std::move(c));
            opens.push_back(std::move(o));
        }
    }
    return msg;
}

}  // namespace

ProtocolMessage body_prover_open_colorings(BodyProverState& st, const SessionSetup& setup,
                                           int session_id, Stream& rng) {
    if (!st.admissible || st.phase != BodyProverState::Phase::AwaitChallengeOpen)
        throw protocol_order_error("body: colorings not expected now");
    return make_coloring_commit(st, setup, session_id, rng);
}

BodyProverResult body_prover_step(BodyProverState& st, const SessionSetup& setup,
                                  const ProtocolMessage& in, Stream& rng) {
    if (in.kind != MsgKind::Body) throw protocol_order_error("body: non-body message");
    switch (in.body_kind) {
        case BodyKind::ChallengeCommit: {
            if (st.admissible || st.phase != BodyProverState::Phase::AwaitChallengeCommit)
                throw protocol_order_error("body: unexpected challenge commitment");
            const std::size_t elem_bits =
                static_cast<std::size_t>(setup.hiding_idx.group.elem_bytes()) * 8;
            if (in.payload.size() != static_cast<std::size_t>(st.reps) * elem_bits)
                throw protocol_order_error("body: challenge commitment arity");
            st.challenge_commitments.clear();
            for (int r = 0; r < st.reps; ++r)
                st.challenge_commitments.push_back(Commitment{
                    SchemeTag::Hiding,
                    in.payload.slice(static_cast<std::size_t>(r) * elem_bits, elem_bits)});
            st.phase = BodyProverState::Phase::AwaitChallengeOpen;
            BodyProverResult res;
            res.response = make_coloring_commit(st, setup, in.session_id, rng);
            return res;
        }
        case BodyKind::ChallengeOpen: {
            if (st.phase != BodyProverState::Phase::AwaitChallengeOpen)
                throw protocol_order_error("body: unexpected challenge opening");
            const std::size_t per = open_bits(setup.hiding_idx);
            if (in.payload.size() != static_cast<std::size_t>(st.reps) * per)
                throw protocol_order_error("body: challenge opening arity");
            std::vector<std::uint32_t> values;
            for (int r = 0; r < st.reps; ++r) {
                const Opening o = decode_open(setup.hiding_idx, in.payload,
                                              static_cast<std::size_t>(r) * per);
                if (!verify_open(setup.hiding_idx,
                                 st.challenge_commitments[static_cast<std::size_t>(r)], o))
                    return BodyProverResult{std::nullopt, true};
                values.push_back(static_cast<std::uint32_t>(o.message.to_u64()));
            }
            ProtocolMessage msg;
            msg.session_id = in.session_id;
            msg.kind = MsgKind::Body;
            msg.body_kind = BodyKind::EndpointOpen;
            for (int r = 0; r < st.reps; ++r) {
                std::pair<int, int> edge;
                if (st.admissible) {
                    auto e = pair_edge(st.instance.graph, values[static_cast<std::size_t>(r)]);
                    if (!e) continue;  // discarded non-edge pair
                    edge = *e;
                } else {
                    if (values[static_cast<std::size_t>(r)] >= st.instance.graph.edges.size())
                        return BodyProverResult{std::nullopt, true};
                    edge = st.instance.graph.edges[values[static_cast<std::size_t>(r)]];
                }
                for (int endpoint : {edge.first, edge.second}) {
                    const auto& o = st.color_openings[static_cast<std::size_t>(r)]
                                                     [static_cast<std::size_t>(endpoint)];
                    msg.payload.append(encode_open(setup.binding_color, o));
                }
            }
            st.phase = BodyProverState::Phase::AwaitVerdict;
            return BodyProverResult{msg, false};
        }
        default:
            throw protocol_order_error("body: unexpected sub-kind for prover");
    }
}

BodyVerifierState body_verifier_init(const SessionSetup& setup, ColoringInstance instance,
                                     bool admissible, std::uint64_t entropy) {
    BodyVerifierState st;
    st.admissible = admissible;
    st.instance = std::move(instance);
    if (!admissible) {
        st.reps = setup.config.effective_reps(static_cast<int>(st.instance.graph.edges.size()));
        Stream s(derive(entropy, "body.challenges"));
        for (int r = 0; r < st.reps; ++r)
            st.challenge_values.push_back(static_cast<std::uint32_t>(
                s.below(st.instance.graph.edges.size())));
    }
    return st;
}

ProtocolMessage body_verifier_challenge_commit(BodyVerifierState& st, const SessionSetup& setup,
                                               int session_id, std::uint64_t entropy) {
    if (st.admissible) throw protocol_order_error("body: pre-committed challenges");
    ProtocolMessage msg;
    msg.session_id = session_id;
    msg.kind = MsgKind::Body;
    msg.body_kind = BodyKind::ChallengeCommit;
    Stream s(derive(entropy, "body.challenge.commit"));
    for (auto value : st.challenge_values) {
        auto [c, o] = commit(setup.hiding_idx, Bits::from_u64(value, 32), s);
        msg.payload.append(c.payload);
        st.challenge_commitments.push_back(std::move(c));
        st.challenge_openings.push_back(std::move(o));
    }
    return msg;
}

void body_verifier_adopt_pairs(BodyVerifierState& st, const std::vector<std::uint32_t>& pairs,
                               const std::vector<Opening>& openings,
                               const std::vector<Commitment>& commitments) {
    if (!st.admissible) throw protocol_order_error("body: adopt_pairs in plain mode");
    st.challenge_values = pairs;
    st.challenge_openings = openings;
    st.challenge_commitments = commitments;
    st.reps = static_cast<int>(pairs.size());
}

ProtocolMessage body_verifier_challenge_open(BodyVerifierState& st, const SessionSetup& setup,
                                             int session_id) {
    if (st.phase != BodyVerifierState::Phase::AwaitEndpointOpen)
        throw protocol_order_error("body: challenge open before colorings");
    ProtocolMessage msg;
    msg.session_id = session_id;
    msg.kind = MsgKind::Body;
    msg.body_kind = BodyKind::ChallengeOpen;
    for (const auto& o : st.challenge_openings)
        msg.payload.append(encode_open(setup.hiding_idx, o));
    return msg;
}

void body_verifier_deliver(BodyVerifierState& st, const SessionSetup& setup,
                           const ProtocolMessage& msg) {
    if (msg.kind != MsgKind::Body) throw protocol_order_error("body: non-body message");
    if (msg.body_kind == BodyKind::ColoringCommit) {
        if (st.phase != BodyVerifierState::Phase::AwaitColoringCommit)
            throw protocol_order_error("body: unexpected colorings");
        const std::size_t per =
            static_cast<std::size_t>(st.instance.graph.n) * 2 * 3 *
            static_cast<std::size_t>(setup.binding_color.k);
        if (msg.payload.size() != static_cast<std::size_t>(st.reps) * per)
            throw protocol_order_error("body: coloring commitment arity");
        for (int r = 0; r < st.reps; ++r)
            st.color_commitment_payloads.push_back(
                msg.payload.slice(static_cast<std::size_t>(r) * per, per));
        st.phase = BodyVerifierState::Phase::AwaitEndpointOpen;
        return;
    }
    if (msg.body_kind == BodyKind::EndpointOpen) {
        if (st.phase != BodyVerifierState::Phase::AwaitEndpointOpen)
            throw protocol_order_error("body: unexpected endpoint openings");
        const std::size_t per_open = open_bits(setup.binding_color);
        const std::size_t seg = 2 * 3 * static_cast<std::size_t>(setup.binding_color.k);
        std::size_t at = 0;
        bool all_good = true;
        for (int r = 0; r < st.reps; ++r) {
            std::pair<int, int> edge;
            if (st.admissible) {
                auto e = pair_edge(st.instance.graph, st.challenge_values[static_cast<std::size_t>(r)]);
                if (!e) continue;
                edge = *e;
            } else {
                edge = st.instance.graph.edges[st.challenge_values[static_cast<std::size_t>(r)]];
            }
            int colors[2];
            int idx = 0;
            for (int endpoint : {edge.first, edge.second}) {
                if (at + per_open > msg.payload.size())
                    throw protocol_order_error("body: endpoint opening arity");
                const Opening o = decode_open(setup.binding_color, msg.payload, at);
                at += per_open;
                Commitment c{SchemeTag::Binding,
                             st.color_commitment_payloads[static_cast<std::size_t>(r)].slice(
                                 static_cast<std::size_t>(endpoint) * seg, seg)};
                if (!verify_open(setup.binding_color, c, o)) all_good = false;
                colors[idx++] = static_cast<int>(o.message.to_u64());
            }
            if (colors[0] > 2 || colors[1] > 2 || colors[0] == colors[1]) all_good = false;
        }
        if (at != msg.payload.size())
            throw protocol_order_error("body: prover opened a non-challenged vertex");
        st.accept = all_good;
        st.phase = BodyVerifierState::Phase::VerdictReady;
        return;
    }
    throw protocol_order_error("body: unexpected sub-kind for verifier");
}

ProtocolMessage body_verifier_verdict(BodyVerifierState& st, int session_id) {
    if (st.phase != BodyVerifierState::Phase::VerdictReady)
        throw protocol_order_error("body: verdict not ready");
    st.phase = BodyVerifierState::Phase::Done;
    ProtocolMessage msg;
    msg.session_id = session_id;
    msg.kind = MsgKind::Body;
    msg.body_kind = BodyKind::Verdict;
    msg.payload = Bits{st.accept ? 1 : 0};
    return msg;
}

Bits encode_oracle_proof(const std::optional<CompoundWitness>& w) {
    if (!w) {
        std::vector<std::uint8_t> bytes = {0};
        return Bits::from_bytes(bytes, 8);
    }
    return w->encode();
}

std::optional<CompoundWitness> decode_oracle_proof(const Bits& payload,
                                                   const CompoundStatement& st) {
    if (payload.size() < 8) throw protocol_order_error("oracle proof: short payload");
    if (payload.slice(0, 8).to_u64() == 0) return std::nullopt;
    return CompoundWitness::decode(payload, st);
}

bool oracle_verify(const CompoundStatement& st, const Bits& proof_payload) {
    const auto w = decode_oracle_proof(proof_payload, st);
    if (!w) return false;
    return validate_witness(st, *w);
}

std::vector<ProtocolMessage> simulate_body_as_prover(
    const SessionSetup& setup, ColoringInstance instance, Coloring coloring, int session_id,
    const std::vector<ProtocolMessage>& verifier_msgs, std::uint64_t randomness) {
    BodyProverState st = body_prover_init(setup, std::move(instance), std::move(coloring),
                                          false, {});
    Stream rng(randomness);
    std::vector<ProtocolMessage> out;
    for (const auto& msg : verifier_msgs) {
        auto res = body_prover_step(st, setup, msg, rng);
        if (res.abort) throw state_error("simulate_body_as_prover: verifier misbehaved");
        if (res.response) out.push_back(*res.response);
    }
    return out;
}

std::vector<std::tuple<int, int, std::size_t>> message_shapes(
    const std::vector<ProtocolMessage>& msgs) {
    std::vector<std::tuple<int, int, std::size_t>> shapes;
    shapes.reserve(msgs.size());
    for (const auto& m : msgs)
        shapes.emplace_back(static_cast<int>(m.kind), static_cast<int>(m.body_kind),
                            m.payload.size());
    return shapes;
}

}  // namespace czk
