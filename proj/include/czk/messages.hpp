#ifndef CZK_MESSAGES_HPP_
#define CZK_MESSAGES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "czk/bits.hpp"

namespace czk {

enum class MsgKind { VCommit, PCommit, VReveal, Body, Abort };

enum class BodyKind {
    None,
    Ready,
    OracleProof,
    ChallengeCommit,
    ColoringCommit,
    ChallengeOpen,
    EndpointOpen,
    Verdict,
};

std::string to_string(MsgKind k);
std::string to_string(BodyKind k);
MsgKind msg_kind_from_string(const std::string& s);
BodyKind body_kind_from_string(const std::string& s);

struct ProtocolMessage {
    int session_id = 0;
    MsgKind kind = MsgKind::VCommit;
    BodyKind body_kind = BodyKind::None;
    int round_index = 0;
    Bits payload;

    std::uint64_t digest() const;
};

enum class Direction { VerifierToProver, ProverToVerifier };

// One transcript line: a scheduled message with its logical time.
struct TranscriptRecord {
    std::uint64_t t = 0;
    Direction direction = Direction::VerifierToProver;
    ProtocolMessage msg;
};

std::string to_json_line(const TranscriptRecord& r);
TranscriptRecord record_from_json_line(const std::string& line);

// Session-framed encoding used by the preamble module's interface
// (one JSON object per line, no transcript timing fields).
std::string message_to_json_line(const ProtocolMessage& m);
ProtocolMessage message_from_json_line(const std::string& line);

}  // namespace czk

#endif  // CZK_MESSAGES_HPP_
