#include "czk/scheduler.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "czk/body.hpp"

namespace czk {

using nlohmann::json;

std::string to_string(SessionOutcome o) {
    switch (o) {
        case SessionOutcome::Accepted: return "accepted";
        case SessionOutcome::Rejected: return "rejected";
        case SessionOutcome::Aborted: return "aborted";
        case SessionOutcome::Unfinished: return "unfinished";
    }
    return "?";
}

std::string Transcript::to_jsonl() const {
    std::ostringstream out;
    json meta;
    meta["meta"] = 1;
    meta["tape_seed"] = tape_seed;
    meta["k"] = config.k;
    meta["m"] = config.m;
    meta["num_sessions"] = config.num_sessions;
    meta["body_tag"] = config.body_tag == BodyTag::Oracle ? "oracle" : "g3c";
    json oc;
    for (const auto& [sid, o] : outcomes) oc[std::to_string(sid)] = to_string(o);
    meta["outcomes"] = oc;
    out << meta.dump() << '\n';
    for (const auto& r : records) out << to_json_line(r) << '\n';
    return out.str();
}

Transcript Transcript::from_jsonl(const std::string& text) {
    Transcript t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            const json meta = json::parse(line);
            if (meta.contains("meta")) {
                t.tape_seed = meta.at("tape_seed").get<std::uint64_t>();
                t.config.k = meta.at("k").get<int>();
                t.config.m = meta.at("m").get<int>();
                t.config.num_sessions = meta.at("num_sessions").get<int>();
                t.config.body_tag = meta.at("body_tag").get<std::string>() == "oracle"
                                        ? BodyTag::Oracle
                                        : BodyTag::G3c;
                for (const auto& [key, val] : meta.at("outcomes").items()) {
                    const std::string s = val.get<std::string>();
                    SessionOutcome o = SessionOutcome::Unfinished;
                    if (s == "accepted") o = SessionOutcome::Accepted;
                    else if (s == "rejected") o = SessionOutcome::Rejected;
                    else if (s == "aborted") o = SessionOutcome::Aborted;
                    t.outcomes[std::stoi(key)] = o;
                }
                continue;
            }
        }
        t.records.push_back(record_from_json_line(line));
    }
    return t;
}

std::vector<int> Schedule::session_slots(int session) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (slots[i].first == session) out.push_back(static_cast<int>(i) + 1);
    return out;
}

bool Schedule::complete(int session) const {
    int count = 0;
    for (const auto& [sid, round] : slots)
        if (sid == session) ++count;
    return count == m;
}

std::string Schedule::serialize() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < slots.size(); ++i)
        out << (i + 1) << ' ' << slots[i].first << ' ' << slots[i].second << '\n';
    return out.str();
}

Schedule Schedule::parse(const std::string& text, int m, int num_sessions) {
    Schedule s;
    s.m = m;
    s.num_sessions = num_sessions;
    std::istringstream in(text);
    std::string line;
    std::vector<int> last_round(static_cast<std::size_t>(num_sessions) + 1, 0);
    int expect_slot = 1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int slot = 0, sid = 0, round = 0;
        if (!(ls >> slot >> sid >> round)) throw io_error("schedule: bad line: " + line);
        if (slot != expect_slot) throw io_error("schedule: slots must be sequential");
        ++expect_slot;
        if (sid < 1 || sid > num_sessions) throw io_error("schedule: session out of range");
        if (round != last_round[static_cast<std::size_t>(sid)] + 1)
            throw io_error("schedule: rounds must increase by one within a session");
        if (round > m) throw io_error("schedule: more than m rounds for a session");
        last_round[static_cast<std::size_t>(sid)] = round;
        s.slots.emplace_back(sid, round);
    }
    return s;
}

Schedule slotify(const Transcript& t) {
    Schedule s;
    s.m = t.config.m;
    s.num_sessions = t.config.num_sessions;
    std::map<int, int> rounds_seen;
    for (const auto& r : t.records) {
        if (r.direction != Direction::VerifierToProver) continue;
        if (r.msg.kind == MsgKind::VCommit) {
            s.slots.emplace_back(r.msg.session_id, 1);
            rounds_seen[r.msg.session_id] = 1;
        } else if (r.msg.kind == MsgKind::VReveal && r.msg.round_index < t.config.m) {
            s.slots.emplace_back(r.msg.session_id, r.msg.round_index + 1);
            rounds_seen[r.msg.session_id] = r.msg.round_index + 1;
        }
    }
    return s;
}

StrategySpec StrategySpec::parse(const std::string& text) {
    StrategySpec spec;
    std::string base = text;
    std::string extra;
    const auto plus = text.find('+');
    if (plus != std::string::npos) {
        base = text.substr(0, plus);
        extra = text.substr(plus + 1);
    }
    auto parse_abort = [&spec](const std::string& s) {
        if (s == "adaptive" || s == "adaptive_abort") {
            spec.abort_policy = AbortPolicy::Adaptive;
            spec.abort_p = 0.25;
            return true;
        }
        if (s.rfind("abort:", 0) == 0 || s.rfind("abort_prob:", 0) == 0) {
            spec.abort_policy = AbortPolicy::Prob;
            spec.abort_p = std::stod(s.substr(s.find(':') + 1));
            return true;
        }
        return false;
    };
    if (base == "round_robin") spec.policy = Policy::RoundRobin;
    else if (base == "nested") spec.policy = Policy::Nested;
    else if (base == "random_interleave") spec.policy = Policy::RandomInterleave;
    else if (base.rfind("abort_prob", 0) == 0) {
        spec.policy = Policy::RoundRobin;
        std::string arg = base;
        // accept abort_prob:P and abort_prob(P)
        const auto open = arg.find('(');
        if (open != std::string::npos) {
            arg = "abort_prob:" + arg.substr(open + 1, arg.find(')') - open - 1);
        }
        if (!parse_abort(arg)) throw parameter_error("unknown strategy: " + text);
        return spec;
    } else if (base == "adaptive_abort") {
        spec.policy = Policy::RoundRobin;
        spec.abort_policy = AbortPolicy::Adaptive;
        spec.abort_p = 0.25;
        return spec;
    } else if (base.rfind("custom_script:", 0) == 0) {
        spec.policy = Policy::CustomScript;
        // The script text is loaded by the caller; keep the path in name form.
        throw parameter_error("custom_script requires a loaded schedule; use make_scripted");
    } else {
        throw parameter_error("unknown strategy: " + text);
    }
    if (!extra.empty() && !parse_abort(extra))
        throw parameter_error("unknown strategy suffix: " + extra);
    return spec;
}

std::string StrategySpec::name() const {
    std::string base;
    switch (policy) {
        case Policy::RoundRobin: base = "round_robin"; break;
        case Policy::Nested: base = "nested"; break;
        case Policy::RandomInterleave: base = "random_interleave"; break;
        case Policy::CustomScript: base = "custom_script"; break;
    }
    if (abort_policy == AbortPolicy::Prob)
        base += "+abort:" + std::to_string(abort_p);
    if (abort_policy == AbortPolicy::Adaptive) base += "+adaptive";
    return base;
}

VerifierBlackBox::VerifierBlackBox(StrategySpec spec, std::shared_ptr<const SessionSetup> setup,
                                   std::shared_ptr<const Graph> base_graph,
                                   std::uint64_t tape_seed)
    : spec_(std::move(spec)), setup_(std::move(setup)), base_(std::move(base_graph)),
      tape_(tape_seed) {
    prefix_hash_ = derive(tape_, "history");
    sessions_.resize(static_cast<std::size_t>(setup_->config.num_sessions));
    last_prover_digest_.assign(sessions_.size(), 0);
}

bool VerifierBlackBox::session_eligible(int id) const {
    const auto& slot = sessions_[static_cast<std::size_t>(id - 1)];
    if (!slot) return true;  // not yet started
    return slot->wants_turn();
}

void VerifierBlackBox::ensure_started(int id) {
    auto& slot = sessions_[static_cast<std::size_t>(id - 1)];
    if (!slot) {
        // Session randomness binds the history prefix at its first
        // message, so replaying past this point redraws the values.
        const std::uint64_t entropy =
            derive(tape_, "session", static_cast<std::uint64_t>(id), prefix_hash_);
        slot.emplace(setup_, base_, id, entropy);
    }
}

int VerifierBlackBox::pick_next() {
    const int k = setup_->config.num_sessions;
    switch (spec_.policy) {
        case StrategySpec::Policy::RoundRobin: {
            // Preamble grid first: the eligible session with the fewest
            // slot messages sent; afterwards closings and bodies by id.
            int best = 0, best_sent = -1;
            for (int id = 1; id <= k; ++id) {
                if (!session_eligible(id)) continue;
                const auto& s = sessions_[static_cast<std::size_t>(id - 1)];
                const int sent = s ? s->preamble_slots_sent() : 0;
                const bool in_grid = !s || !s->preamble_slots_exhausted();
                if (in_grid && (best == 0 || sent < best_sent)) {
                    best = id;
                    best_sent = sent;
                }
            }
            if (best) return best;
            for (int id = 1; id <= k; ++id)
                if (session_eligible(id)) return id;
            return 0;
        }
        case StrategySpec::Policy::Nested: {
            for (int id = 1; id <= k; ++id)
                if (!sessions_[static_cast<std::size_t>(id - 1)]) return id;
            for (int id = k; id >= 1; --id)
                if (session_eligible(id)) return id;
            return 0;
        }
        case StrategySpec::Policy::RandomInterleave: {
            std::vector<int> pool;
            for (int id = 1; id <= k; ++id)
                if (session_eligible(id)) pool.push_back(id);
            if (pool.empty()) return 0;
            const std::uint64_t coin = chain(derive(tape_, "pick"), prefix_hash_);
            return pool[coin % pool.size()];
        }
        case StrategySpec::Policy::CustomScript: {
            if (script_pos_ < spec_.script.size()) {
                const auto [sid, round] = spec_.script[script_pos_];
                const auto& s = sessions_[static_cast<std::size_t>(sid - 1)];
                const int sent = s ? s->preamble_slots_sent() : 0;
                if (sent + 1 != round)
                    throw io_error("custom script is infeasible at slot " +
                                   std::to_string(script_pos_ + 1));
                if (s && !s->wants_turn())
                    throw io_error("custom script addresses a finished session");
                ++script_pos_;
                return sid;
            }
            for (int id = 1; id <= k; ++id)
                if (session_eligible(id)) return id;
            return 0;
        }
    }
    return 0;
}

BlackBoxAction VerifierBlackBox::step() {
    const int id = pick_next();
    if (id == 0) return BlackBoxAction{BlackBoxAction::Type::Halt, {}};
    ensure_started(id);
    auto& session = *sessions_[static_cast<std::size_t>(id - 1)];
    ProtocolMessage msg = session.emit_next();

    if (msg.kind == MsgKind::VReveal && spec_.abort_policy != StrategySpec::AbortPolicy::None) {
        bool refuse = false;
        if (spec_.abort_policy == StrategySpec::AbortPolicy::Prob) {
            const std::uint64_t coin =
                chain(chain(derive(tape_, "refuse"), static_cast<std::uint64_t>(id)),
                      prefix_hash_);
            refuse = coin < static_cast<std::uint64_t>(
                                spec_.abort_p * 18446744073709551616.0);
        } else {
            // Keyed on the prover's latest message for this session: an
            // adversary trying to adapt its aborts to prover behavior.
            const std::uint64_t coin =
                chain(derive(tape_, "adaptive"),
                      last_prover_digest_[static_cast<std::size_t>(id - 1)]);
            refuse = coin < static_cast<std::uint64_t>(
                                spec_.abort_p * 18446744073709551616.0);
        }
        if (refuse) {
            // Corrupt the opening so the prover's verification fails.
            msg.payload[msg.payload.size() - 1] ^= 1;
        }
    }

    prefix_hash_ = chain(prefix_hash_, msg.digest());
    return BlackBoxAction{BlackBoxAction::Type::Message, std::move(msg)};
}

void VerifierBlackBox::deliver(const ProtocolMessage& prover_msg) {
    prefix_hash_ = chain(prefix_hash_, prover_msg.digest());
    const std::size_t idx = static_cast<std::size_t>(prover_msg.session_id - 1);
    last_prover_digest_[idx] = prover_msg.digest();
    sessions_[idx]->deliver(prover_msg);
}

VerifierBlackBox make_adversary(const std::string& strategy,
                                std::shared_ptr<const SessionSetup> setup,
                                std::shared_ptr<const Graph> base_graph,
                                std::uint64_t tape_seed) {
    return VerifierBlackBox(StrategySpec::parse(strategy), std::move(setup),
                            std::move(base_graph), tape_seed);
}

Transcript run_interaction(VerifierBlackBox blackbox, const SessionSetup& setup,
                           const Graph& base_graph, ProverPolicy& policy,
                           std::uint64_t prover_seed) {
    Transcript t;
    t.config = setup.config;
    t.tape_seed = blackbox.tape_seed();
    std::map<int, PreambleSession> sessions;
    Stream rng(derive(prover_seed, "prover"));
    int consecutive_waits = 0;
    for (;;) {
        BlackBoxAction act = blackbox.step();
        if (act.type == BlackBoxAction::Type::Halt) break;
        if (act.type == BlackBoxAction::Type::Wait) {
            if (++consecutive_waits > 1)
                throw protocol_order_error("adversary waits with nothing pending");
            continue;
        }
        consecutive_waits = 0;
        const int sid = act.msg.session_id;
        auto [it, fresh] = sessions.try_emplace(sid);
        if (fresh) it->second.session_id = sid;
        t.records.push_back(TranscriptRecord{static_cast<std::uint64_t>(t.records.size()),
                                             Direction::VerifierToProver, act.msg});
        auto res = prover_process(it->second, setup, base_graph, act.msg, policy, rng);
        if (res.response) {
            t.records.push_back(TranscriptRecord{static_cast<std::uint64_t>(t.records.size()),
                                                 Direction::ProverToVerifier, *res.response});
            blackbox.deliver(*res.response);
        }
    }
    for (const auto& [sid, s] : sessions) {
        SessionOutcome o = SessionOutcome::Unfinished;
        if (s.phase == Phase::Aborted) o = SessionOutcome::Aborted;
        else if (s.phase == Phase::Done)
            o = s.verdict.value_or(false) ? SessionOutcome::Accepted : SessionOutcome::Rejected;
        t.outcomes[sid] = o;
    }
    return t;
}

Transcript run_interaction_honest(VerifierBlackBox blackbox, const SessionSetup& setup,
                                  const Graph& base_graph, const Coloring& witness,
                                  std::uint64_t prover_seed) {
    HonestProverPolicy policy(witness);
    return run_interaction(std::move(blackbox), setup, base_graph, policy, prover_seed);
}

namespace {

struct VerifySession {
    std::vector<Commitment> v_commitments;
    std::vector<Commitment> pair_commitments;
    std::vector<Commitment> p_commitments;
    std::vector<std::optional<Bits>> revealed;
    std::optional<Bits> oracle_proof;
    std::vector<Commitment> challenge_commitments;
    std::optional<Bits> body_challenge_open;
    std::optional<Bits> body_colorings;
    std::optional<Bits> body_endpoints;
    bool aborted = false;
    bool done = false;
    std::optional<bool> verdict;
};

// Recomputes a 3-coloring body verdict from the raw transcript payloads.
bool reverify_g3c_body(const SessionSetup& setup, const Graph& base_graph,
                       const CompoundStatement& st, const VerifySession& vs,
                       std::string* issue) {
    if (!vs.body_challenge_open || !vs.body_colorings || !vs.body_endpoints) {
        *issue = "missing body messages";
        return false;
    }
    ColoringInstance instance;
    if (setup.config.g3c_route == G3cRoute::Base) instance.graph = base_graph;
    else instance = circuit_to_3col(compile_compound(st));

    const bool adm = setup.config.admissible;
    const auto& commitments = adm ? vs.pair_commitments : vs.challenge_commitments;
    const int reps = adm ? static_cast<int>(vs.pair_commitments.size())
                         : setup.config.effective_reps(
                               static_cast<int>(instance.graph.edges.size()));
    if (static_cast<int>(commitments.size()) != reps) {
        *issue = "challenge commitment count mismatch";
        return false;
    }
    const std::size_t per = opening_bits(setup.hiding_idx);
    if (vs.body_challenge_open->size() != static_cast<std::size_t>(reps) * per) {
        *issue = "challenge opening arity";
        return false;
    }
    BodyVerifierState b;
    b.admissible = adm;
    b.instance = std::move(instance);
    b.reps = reps;
    for (int r = 0; r < reps; ++r) {
        const Opening o = decode_opening_at(setup.hiding_idx, *vs.body_challenge_open,
                                            static_cast<std::size_t>(r) * per);
        if (!verify_open(setup.hiding_idx, commitments[static_cast<std::size_t>(r)], o)) {
            *issue = "challenge opening does not verify";
            return false;
        }
        b.challenge_values.push_back(static_cast<std::uint32_t>(o.message.to_u64()));
    }
    ProtocolMessage colors;
    colors.kind = MsgKind::Body;
    colors.body_kind = BodyKind::ColoringCommit;
    colors.payload = *vs.body_colorings;
    ProtocolMessage ends;
    ends.kind = MsgKind::Body;
    ends.body_kind = BodyKind::EndpointOpen;
    ends.payload = *vs.body_endpoints;
    try {
        body_verifier_deliver(b, setup, colors);
        body_verifier_deliver(b, setup, ends);
    } catch (const error& e) {
        *issue = e.what();
        return false;
    }
    return b.accept;
}

}  // namespace

VerifyReport verify_transcript(const Transcript& t, const SessionSetup& setup,
                               const Graph& base_graph) {
    VerifyReport report;
    std::map<int, VerifySession> sessions;
    auto fail = [&report](const std::string& what) {
        report.ok = false;
        report.issues.push_back(what);
    };
    const int m = setup.config.m;

    for (const auto& r : t.records) {
        const auto& msg = r.msg;
        auto& vs = sessions[msg.session_id];
        const std::string where =
            "t=" + std::to_string(r.t) + " session " + std::to_string(msg.session_id);
        if (vs.aborted && r.direction == Direction::ProverToVerifier) {
            fail(where + ": prover spoke after abort");
            continue;
        }
        if (r.direction == Direction::VerifierToProver) {
            switch (msg.kind) {
                case MsgKind::VCommit:
                    decode_v_commit_payload(setup, msg.payload, vs.v_commitments,
                                            vs.pair_commitments);
                    vs.revealed.assign(static_cast<std::size_t>(m), std::nullopt);
                    break;
                case MsgKind::VReveal: {
                    const int i = msg.round_index;
                    if (i < 1 || i > m || vs.v_commitments.empty()) {
                        fail(where + ": reveal out of range");
                        break;
                    }
                    const Opening o = decode_opening(setup, setup.hiding_v, msg.payload);
                    ++report.openings_checked;
                    const bool ok = verify_open(
                        setup.hiding_v, vs.v_commitments[static_cast<std::size_t>(i - 1)], o);
                    if (ok) vs.revealed[static_cast<std::size_t>(i - 1)] = o.message;
                    else vs.aborted = true;  // next prover record must be the abort
                    break;
                }
                case MsgKind::Body:
                    if (msg.body_kind == BodyKind::ChallengeCommit) {
                        const std::size_t elem_bits =
                            static_cast<std::size_t>(setup.hiding_idx.group.elem_bytes()) * 8;
                        vs.challenge_commitments.clear();
                        for (std::size_t at = 0; at + elem_bits <= msg.payload.size();
                             at += elem_bits)
                            vs.challenge_commitments.push_back(Commitment{
                                SchemeTag::Hiding, msg.payload.slice(at, elem_bits)});
                    } else if (msg.body_kind == BodyKind::ChallengeOpen) {
                        vs.body_challenge_open = msg.payload;
                    } else if (msg.body_kind == BodyKind::Verdict) {
                        vs.verdict = msg.payload.size() >= 1 && msg.payload[0] != 0;
                        vs.done = true;
                    }
                    break;
                default:
                    fail(where + ": verifier sent a prover kind");
            }
        } else {
            switch (msg.kind) {
                case MsgKind::PCommit:
                    vs.p_commitments.push_back(Commitment{SchemeTag::Binding, msg.payload});
                    break;
                case MsgKind::Abort:
                    if (!vs.aborted) fail(where + ": abort without a failed reveal");
                    vs.aborted = true;
                    break;
                case MsgKind::Body:
                    if (msg.body_kind == BodyKind::OracleProof) vs.oracle_proof = msg.payload;
                    else if (msg.body_kind == BodyKind::ColoringCommit)
                        vs.body_colorings = msg.payload;
                    else if (msg.body_kind == BodyKind::EndpointOpen)
                        vs.body_endpoints = msg.payload;
                    break;
                default:
                    fail(where + ": prover sent a verifier kind");
            }
        }
    }

    for (auto& [sid, vs] : sessions) {
        ++report.sessions_checked;
        if (!vs.done || vs.aborted) continue;
        // Rebuild the statement and recheck the verdict.
        CompoundStatement st;
        st.base_graph = base_graph;
        st.prover_params = setup.binding;
        st.commitments.assign(vs.p_commitments.begin(),
                              vs.p_commitments.begin() + std::min<std::size_t>(
                                  vs.p_commitments.size(), static_cast<std::size_t>(m)));
        bool complete = static_cast<int>(st.commitments.size()) == m;
        for (const auto& rv : vs.revealed) {
            if (!rv) { complete = false; break; }
            st.revealed_values.push_back(*rv);
        }
        if (!complete) {
            report.ok = false;
            report.issues.push_back("session " + std::to_string(sid) +
                                    ": finished body with incomplete preamble");
            continue;
        }
        bool recomputed = false;
        std::string issue;
        if (setup.config.body_tag == BodyTag::Oracle) {
            recomputed = vs.oracle_proof && oracle_verify(st, *vs.oracle_proof);
        } else {
            recomputed = reverify_g3c_body(setup, base_graph, st, vs, &issue);
            if (!issue.empty())
                report.issues.push_back("session " + std::to_string(sid) + ": " + issue);
        }
        if (vs.verdict.value_or(false) != recomputed) {
            report.ok = false;
            report.issues.push_back("session " + std::to_string(sid) +
                                    ": verdict does not re-verify");
        }
        if (recomputed) ++report.bodies_accepted;
    }
    return report;
}

}  // namespace czk
