#include "czk/messages.hpp"

#include <json.hpp>

#include "czk/errors.hpp"
#include "czk/rng.hpp"

namespace czk {

using nlohmann::json;

std::string to_string(MsgKind k) {
    switch (k) {
        case MsgKind::VCommit: return "v_commit";
        case MsgKind::PCommit: return "p_commit";
        case MsgKind::VReveal: return "v_reveal";
        case MsgKind::Body: return "body";
        case MsgKind::Abort: return "abort";
    }
    return "?";
}

std::string to_string(BodyKind k) {
    switch (k) {
        case BodyKind::None: return "none";
        case BodyKind::Ready: return "ready";
        case BodyKind::OracleProof: return "oracle_proof";
        case BodyKind::ChallengeCommit: return "challenge_commit";
        case BodyKind::ColoringCommit: return "coloring_commit";
        case BodyKind::ChallengeOpen: return "challenge_open";
        case BodyKind::EndpointOpen: return "endpoint_open";
        case BodyKind::Verdict: return "verdict";
    }
    return "?";
}

MsgKind msg_kind_from_string(const std::string& s) {
    if (s == "v_commit") return MsgKind::VCommit;
    if (s == "p_commit") return MsgKind::PCommit;
    if (s == "v_reveal") return MsgKind::VReveal;
    if (s == "body") return MsgKind::Body;
    if (s == "abort") return MsgKind::Abort;
    throw io_error("unknown message kind: " + s);
}

BodyKind body_kind_from_string(const std::string& s) {
    for (auto k : {BodyKind::None, BodyKind::Ready, BodyKind::OracleProof,
                   BodyKind::ChallengeCommit, BodyKind::ColoringCommit,
                   BodyKind::ChallengeOpen, BodyKind::EndpointOpen, BodyKind::Verdict})
        if (to_string(k) == s) return k;
    throw io_error("unknown body kind: " + s);
}

std::uint64_t ProtocolMessage::digest() const {
    std::uint64_t h = 0x082EFA98EC4E6C89ULL;
    h = chain(h, static_cast<std::uint64_t>(session_id));
    h = chain(h, static_cast<std::uint64_t>(kind));
    h = chain(h, static_cast<std::uint64_t>(body_kind));
    h = chain(h, static_cast<std::uint64_t>(round_index));
    h = chain(h, payload.digest());
    return h;
}

namespace {

json message_to_json(const ProtocolMessage& m) {
    json j;
    j["session_id"] = m.session_id;
    j["kind"] = to_string(m.kind);
    if (m.kind == MsgKind::Body) j["sub_kind"] = to_string(m.body_kind);
    j["round_index"] = m.round_index;
    j["payload"] = m.payload.to_hex();
    j["payload_bits"] = m.payload.size();
    return j;
}

ProtocolMessage message_from_json(const json& j) {
    ProtocolMessage m;
    m.session_id = j.at("session_id").get<int>();
    m.kind = msg_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("sub_kind"))
        m.body_kind = body_kind_from_string(j.at("sub_kind").get<std::string>());
    m.round_index = j.at("round_index").get<int>();
    m.payload = Bits::from_hex(j.at("payload").get<std::string>(),
                               j.at("payload_bits").get<std::size_t>());
    return m;
}

}  // namespace

std::string to_json_line(const TranscriptRecord& r) {
    json j = message_to_json(r.msg);
    j["t"] = r.t;
    j["direction"] = r.direction == Direction::VerifierToProver ? "v->p" : "p->v";
    return j.dump();
}

TranscriptRecord record_from_json_line(const std::string& line) {
    const json j = json::parse(line);
    TranscriptRecord r;
    r.t = j.at("t").get<std::uint64_t>();
    const auto dir = j.at("direction").get<std::string>();
    if (dir == "v->p") r.direction = Direction::VerifierToProver;
    else if (dir == "p->v") r.direction = Direction::ProverToVerifier;
    else throw io_error("bad direction: " + dir);
    r.msg = message_from_json(j);
    return r;
}

std::string message_to_json_line(const ProtocolMessage& m) {
    return message_to_json(m).dump();
}

ProtocolMessage message_from_json_line(const std::string& line) {
    return message_from_json(json::parse(line));
}

}  // namespace czk
