#include "czk/resettable.hpp"

#include <sstream>

#include <json.hpp>

#include "czk/body.hpp"

namespace czk {

using nlohmann::json;

std::string IncarnationRegistry::to_json() const {
    json j;
    j["seed"] = seed;
    json ins = json::array();
    for (const auto& g : inputs) {
        json gi;
        gi["n"] = g.n;
        gi["edges"] = g.edges.size();
        ins.push_back(gi);
    }
    j["inputs"] = ins;
    j["tape_counts"] = {p1_tapes, p2_tapes};
    return j.dump();
}

Incarnation make_incarnation(const IncarnationRegistry& registry, int i, int j, int k) {
    if (i < 0 || i >= static_cast<int>(registry.inputs.size()))
        throw parameter_error("make_incarnation: input index out of range");
    if (j < 0 || j >= registry.p1_tapes || k < 0 || k >= registry.p2_tapes)
        throw parameter_error("make_incarnation: tape index out of range");
    Incarnation inc;
    inc.input_index = i;
    inc.p1_tape = j;
    inc.p2_tape = k;
    inc.phi1 = derive(registry.seed, "phi1", static_cast<std::uint64_t>(j));
    inc.phi2 = derive(registry.seed, "phi2", static_cast<std::uint64_t>(k));
    return inc;
}

ProtocolMessage session_open_message(int session_id, const Incarnation& inc) {
    ProtocolMessage msg;
    msg.session_id = session_id;
    msg.kind = MsgKind::Body;
    msg.body_kind = BodyKind::None;
    msg.round_index = 0;
    Bits payload = Bits::from_u64(static_cast<std::uint64_t>(inc.input_index), 16);
    payload.append(Bits::from_u64(static_cast<std::uint64_t>(inc.p1_tape), 16));
    payload.append(Bits::from_u64(static_cast<std::uint64_t>(inc.p2_tape), 16));
    msg.payload = payload;
    return msg;
}

std::uint64_t determining_prefix(const ProtocolMessage& session_open,
                                 const ProtocolMessage& init) {
    return chain(chain(0x3C6EF372FE94F82BULL, session_open.digest()), init.digest());
}

P1State::P1State(const IncarnationRegistry& registry, const Incarnation& inc)
    : phi1(inc.phi1) {
    // The initialization message carries the prover-side receiver
    // randomness for the verifier's commitments: a fresh h = g^t with t
    // drawn from phi1, so the committer cannot know dlog_g(h).
    auto setup = std::make_shared<SessionSetup>(*registry.setup);
    Stream s(derive(phi1, "receiver.h"));
    const GroupParams& base = setup->hiding_v.group;
    mpz_class t = 0;
    for (int taken = 0; taken < 192; taken += 64) {
        t <<= 64;
        std::uint64_t w = s.next();
        mpz_class limb;
        mpz_import(limb.get_mpz_t(), 1, 1, sizeof(w), 0, 0, &w);
        t |= limb;
    }
    t = t % (base.q - 1) + 1;
    GroupParams rebased = base;
    rebased.h = base.pow_g(t);
    setup->hiding_v.group = rebased;
    setup->hiding_idx.group = rebased;
    setup_ = std::move(setup);
}

ProtocolMessage P1State::init_message(int session_id) const {
    ProtocolMessage msg;
    msg.session_id = session_id;
    msg.kind = MsgKind::PCommit;
    msg.round_index = 0;
    msg.payload = setup_->hiding_v.group.elem_to_bits(setup_->hiding_v.group.h);
    return msg;
}

void P1State::adopt_determining(const ProtocolMessage& session_open,
                                const ProtocolMessage& init,
                                const ProtocolMessage& determining) {
    if (determining_.has_value())
        throw protocol_order_error("p1: determining message already fixed");
    if (determining.payload.size() < 64)
        throw protocol_order_error("p1: determining message too short");
    const std::uint64_t expect = determining_prefix(session_open, init);
    if (determining.payload.slice(0, 64).to_u64() != expect)
        throw protocol_order_error("p1: determining message does not extend the prefix");
    determining_ = determining.payload.slice(64, determining.payload.size() - 64);
    decode_v_commit_payload(*setup_, *determining_, v_commitments_, pair_commitments_);
    open_init_digest_ = expect;
}

P1Decision P1State::decide(const ProtocolMessage& reveal) const {
    if (!determining_.has_value())
        throw protocol_order_error("p1: reveal before the determining message");
    if (reveal.kind == MsgKind::VReveal) {
        const int i = reveal.round_index;
        if (i < 1 || i > static_cast<int>(v_commitments_.size())) return P1Abort{};
        Opening o;
        try {
            o = decode_opening(*setup_, setup_->hiding_v, reveal.payload);
        } catch (const error&) {
            return P1Abort{};
        }
        if (!verify_open(setup_->hiding_v, v_commitments_[static_cast<std::size_t>(i - 1)], o))
            return P1Abort{};
        return P1Accept{o.message};
    }
    if (reveal.kind == MsgKind::Body && reveal.body_kind == BodyKind::ChallengeOpen) {
        const std::size_t per = opening_bits(setup_->hiding_idx);
        if (pair_commitments_.empty() ||
            reveal.payload.size() != per * pair_commitments_.size())
            return P1Abort{};
        Bits mains;
        for (std::size_t r = 0; r < pair_commitments_.size(); ++r) {
            const Opening o = decode_opening_at(setup_->hiding_idx, reveal.payload, r * per);
            if (!verify_open(setup_->hiding_idx, pair_commitments_[r], o)) return P1Abort{};
            mains.append(o.message);
        }
        return P1Accept{mains};
    }
    throw protocol_order_error("p1: message kind outside the gatekeeper's scope");
}

P1Decision p1_step(const P1State& p1, const ProtocolMessage& reveal) {
    return p1.decide(reveal);
}

AdmissibleProver::AdmissibleProver(const IncarnationRegistry& registry, const Incarnation& inc)
    : registry_(&registry), inc_(inc), p1_(registry, inc),
      policy_(registry.witnesses[static_cast<std::size_t>(inc.input_index)]) {
    session_.session_id = 0;
    history_digest_ = derive(inc.phi2, "history");
}

std::optional<ProtocolMessage> AdmissibleProver::on_verifier_message(const ProtocolMessage& msg) {
    history_digest_ = chain(history_digest_, msg.digest());
    std::optional<ProtocolMessage> response;

    if (msg.kind == MsgKind::Body && msg.body_kind == BodyKind::None && msg.round_index == 0) {
        if (opened_) throw protocol_order_error("admissible: session reopened");
        opened_ = true;
        open_msg_ = msg;
        session_.session_id = msg.session_id;
        response = p1_.init_message(msg.session_id);
        init_msg_ = response;
    } else if (msg.kind == MsgKind::VCommit) {
        if (!opened_) throw protocol_order_error("admissible: determining before open");
        p1_.adopt_determining(*open_msg_, *init_msg_, msg);
        ProtocolMessage inner = msg;
        inner.payload = msg.payload.slice(64, msg.payload.size() - 64);
        Stream rng(derive(inc_.phi2, "step", history_digest_));
        auto res = prover_process(session_, p1_.setup(),
                                  registry_->inputs[static_cast<std::size_t>(inc_.input_index)],
                                  inner, policy_, rng);
        response = res.response;
    } else if (msg.kind == MsgKind::VReveal ||
               (msg.kind == MsgKind::Body && msg.body_kind == BodyKind::ChallengeOpen)) {
        if (session_.phase == Phase::Aborted) return std::nullopt;
        const P1Decision decision = p1_.decide(msg);
        if (std::holds_alternative<P1Abort>(decision)) {
            session_.phase = Phase::Aborted;
            ProtocolMessage abort;
            abort.session_id = msg.session_id;
            abort.kind = MsgKind::Abort;
            abort.round_index = msg.round_index;
            response = abort;
        } else {
            // P1 accepted: the main part flows to the logic module, which
            // re-derives it from the same payload.
            Stream rng(derive(inc_.phi2, "step", history_digest_));
            auto res = prover_process(session_, p1_.setup(),
                                      registry_->inputs[static_cast<std::size_t>(inc_.input_index)],
                                      msg, policy_, rng);
            response = res.response;
        }
    } else {
        if (session_.phase == Phase::Aborted) return std::nullopt;
        Stream rng(derive(inc_.phi2, "step", history_digest_));
        auto res = prover_process(session_, p1_.setup(),
                                  registry_->inputs[static_cast<std::size_t>(inc_.input_index)],
                                  msg, policy_, rng);
        response = res.response;
    }

    if (response) history_digest_ = chain(history_digest_, response->digest());
    return response;
}

namespace {

// Harness-side verifier for one resettable session; deterministic in its
// entropy and in the prover's init message.
class ResettableVerifier {
public:
    ResettableVerifier(const IncarnationRegistry& registry, const Incarnation& inc,
                       std::uint64_t entropy)
        : registry_(registry), inc_(inc), entropy_(entropy) {}

    // Returns all records of the session by driving the prover.
    ResettableSessionRecord drive(AdmissibleProver& prover, int session_id,
                                  const ResetSession& plan) {
        ResettableSessionRecord rec;
        rec.incarnation = inc_;
        auto send = [&](const ProtocolMessage& m) -> std::optional<ProtocolMessage> {
            rec.records.push_back(TranscriptRecord{static_cast<std::uint64_t>(rec.records.size()),
                                                   Direction::VerifierToProver, m});
            auto resp = prover.on_verifier_message(m);
            if (resp)
                rec.records.push_back(TranscriptRecord{
                    static_cast<std::uint64_t>(rec.records.size()),
                    Direction::ProverToVerifier, *resp});
            return resp;
        };

        const ProtocolMessage open = session_open_message(session_id, inc_);
        auto init = send(open);
        if (!init) throw state_error("resetting_run: prover sent no init message");

        // Build the determining message under the prover-supplied h.
        SessionSetup setup = *registry_.setup;
        GroupParams rebased = setup.hiding_v.group;
        rebased.h = rebased.bits_to_elem(init->payload);
        setup.hiding_v.group = rebased;
        setup.hiding_idx.group = rebased;
        const auto& cfg = setup.config;
        const Graph& base = registry_.inputs[static_cast<std::size_t>(inc_.input_index)];

        Stream vs(derive(entropy_, "values"));
        Stream cs(derive(entropy_, "commit"));
        std::vector<Bits> v_values;
        std::vector<Opening> v_openings;
        std::vector<Commitment> v_commitments;
        for (int i = 0; i < cfg.m; ++i) {
            Bits v = Bits::random(static_cast<std::size_t>(cfg.k), vs);
            auto [c, o] = commit(setup.hiding_v, v, cs);
            v_values.push_back(std::move(v));
            v_commitments.push_back(std::move(c));
            v_openings.push_back(std::move(o));
        }
        std::vector<std::uint32_t> pair_values;
        std::vector<Opening> pair_openings;
        std::vector<Commitment> pair_commitments;
        if (cfg.admissible && cfg.body_tag == BodyTag::G3c) {
            const int nv = cfg.g3c_route == G3cRoute::Base
                               ? base.n
                               : compound_instance_vertices(setup, base);
            const int pairs = cfg.effective_pairs(nv);
            Stream ps(derive(entropy_, "pairs"));
            for (int i = 0; i < pairs; ++i) {
                const auto u = ps.below(static_cast<std::uint64_t>(nv));
                const auto v2 = ps.below(static_cast<std::uint64_t>(nv));
                const auto code =
                    static_cast<std::uint32_t>(u * static_cast<std::uint64_t>(nv) + v2);
                auto [c, o] = commit(setup.hiding_idx, Bits::from_u64(code, 32), cs);
                pair_values.push_back(code);
                pair_openings.push_back(std::move(o));
                pair_commitments.push_back(std::move(c));
            }
        }

        ProtocolMessage det;
        det.session_id = session_id;
        det.kind = MsgKind::VCommit;
        det.round_index = 1;
        det.payload = Bits::from_u64(determining_prefix(open, *init), 64);
        det.payload.append(encode_v_commit_payload(v_commitments, pair_commitments));
        auto resp = send(det);
        int round_done = 1;

        auto finish = [&](SessionOutcome o) {
            rec.outcome = o;
            return rec;
        };
        if (plan.stop_after_round == round_done) return finish(SessionOutcome::Unfinished);

        for (int i = 1; i <= cfg.m; ++i) {
            ProtocolMessage reveal;
            reveal.session_id = session_id;
            reveal.kind = MsgKind::VReveal;
            reveal.round_index = i;
            reveal.payload = encode_opening(setup, setup.hiding_v,
                                            v_openings[static_cast<std::size_t>(i - 1)]);
            if (plan.tamper_round == i)
                reveal.payload[reveal.payload.size() - 1] ^= 1;
            resp = send(reveal);
            if (resp && resp->kind == MsgKind::Abort) return finish(SessionOutcome::Aborted);
            ++round_done;
            if (plan.stop_after_round == round_done) return finish(SessionOutcome::Unfinished);
        }

        // Body: oracle or admissible 3-coloring flow.
        if (cfg.body_tag == BodyTag::Oracle) {
            if (!resp || resp->body_kind != BodyKind::OracleProof)
                return finish(SessionOutcome::Unfinished);
            CompoundStatement st;
            st.base_graph = base;
            st.prover_params = setup.binding;
            for (const auto& r : rec.records)
                if (r.direction == Direction::ProverToVerifier &&
                    r.msg.kind == MsgKind::PCommit && r.msg.round_index >= 1)
                    st.commitments.push_back(Commitment{SchemeTag::Binding, r.msg.payload});
            st.revealed_values = v_values;
            const bool ok = oracle_verify(st, resp->payload);
            ProtocolMessage verdict;
            verdict.session_id = session_id;
            verdict.kind = MsgKind::Body;
            verdict.body_kind = BodyKind::Verdict;
            verdict.payload = Bits{ok ? 1 : 0};
            send(verdict);
            return finish(ok ? SessionOutcome::Accepted : SessionOutcome::Rejected);
        }

        if (!resp || resp->body_kind != BodyKind::ColoringCommit)
            return finish(SessionOutcome::Unfinished);
        ColoringInstance instance;
        if (cfg.g3c_route == G3cRoute::Base) {
            instance.graph = base;
        } else {
            CompoundStatement st;
            st.base_graph = base;
            st.prover_params = setup.binding;
            for (const auto& r : rec.records)
                if (r.direction == Direction::ProverToVerifier &&
                    r.msg.kind == MsgKind::PCommit && r.msg.round_index >= 1)
                    st.commitments.push_back(Commitment{SchemeTag::Binding, r.msg.payload});
            st.revealed_values = v_values;
            instance = circuit_to_3col(compile_compound(st));
        }
        BodyVerifierState body;
        body.admissible = true;
        body.instance = std::move(instance);
        body_verifier_adopt_pairs(body, pair_values, pair_openings, pair_commitments);
        body_verifier_deliver(body, setup, *resp);
        ProtocolMessage opens = body_verifier_challenge_open(body, setup, session_id);
        resp = send(opens);
        if (resp && resp->kind == MsgKind::Abort) return finish(SessionOutcome::Aborted);
        if (!resp || resp->body_kind != BodyKind::EndpointOpen)
            return finish(SessionOutcome::Unfinished);
        body_verifier_deliver(body, setup, *resp);
        ProtocolMessage verdict = body_verifier_verdict(body, session_id);
        send(verdict);
        return finish(body.accept ? SessionOutcome::Accepted : SessionOutcome::Rejected);
    }

private:
    const IncarnationRegistry& registry_;
    Incarnation inc_;
    std::uint64_t entropy_;
};

}  // namespace

ResettableTranscript resetting_run(const std::vector<ResetSession>& plan,
                                   const IncarnationRegistry& registry,
                                   const ResettableRunConfig& config) {
    ResettableTranscript out;
    std::map<int, std::pair<int, int>> tape_owner;  // phi2 index -> (i, j)
    std::map<std::tuple<int, int, int>, int> reset_counts;
    int session_id = 0;
    for (const auto& ps : plan) {
        ++session_id;
        if (config.hybrid_mode) {
            auto it = tape_owner.find(ps.k);
            if (it != tape_owner.end() && it->second != std::make_pair(ps.i, ps.j))
                throw hybrid_violation_error(
                    "resetting_run: logic tape reused across incarnations");
            tape_owner[ps.k] = {ps.i, ps.j};
        }
        const Incarnation inc = make_incarnation(registry, ps.i, ps.j, ps.k);
        AdmissibleProver prover(registry, inc);
        ResettableVerifier verifier(registry, inc, ps.verifier_entropy);
        ResettableSessionRecord rec = verifier.drive(prover, session_id, ps);
        rec.reset_index = reset_counts[{ps.i, ps.j, ps.k}]++;
        out.sessions.push_back(std::move(rec));
    }
    return out;
}

std::uint64_t ResettableSessionRecord::digest() const {
    std::uint64_t h = 0x9216D5D98979FB1BULL;
    for (const auto& r : records) {
        h = chain(h, r.direction == Direction::VerifierToProver ? 1 : 2);
        h = chain(h, r.msg.digest());
    }
    return h;
}

std::string ResettableSessionRecord::to_digest() const {
    std::ostringstream out;
    out << std::hex << digest();
    return out.str();
}

std::string ResettableTranscript::to_jsonl() const {
    std::ostringstream out;
    for (const auto& s : sessions) {
        for (const auto& r : s.records) {
            json j = json::parse(to_json_line(r));
            j["incarnation"] = {s.incarnation.input_index, s.incarnation.p1_tape,
                                s.incarnation.p2_tape};
            j["reset_index"] = s.reset_index;
            out << j.dump() << '\n';
        }
    }
    return out.str();
}

}  // namespace czk
