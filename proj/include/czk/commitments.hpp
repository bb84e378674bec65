#ifndef CZK_COMMITMENTS_HPP_
#define CZK_COMMITMENTS_HPP_

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

#include "czk/bits.hpp"
#include "czk/errors.hpp"
#include "czk/rng.hpp"

namespace czk {

enum class SchemeTag { Binding, Hiding };
enum class ExpanderTag { Mixer, CircuitFriendly };

std::string to_string(SchemeTag t);
std::string to_string(ExpanderTag t);

// Seed expansion network for the circuit-friendly binding scheme: output
// bit j = s[a(j)] xor (s[b(j)] and s[c(j)]). The same pattern serves every
// committed bit position; only the receiver string rho differs.
struct ExpanderPattern {
    struct Row { int a, b, c; };
    int k = 0;
    std::vector<Row> rows;  // 3k rows

    static ExpanderPattern generate(int k);
    static ExpanderPattern parse(const std::string& text, int k);
    std::string serialize() const;  // one line per output bit: "a b c"
    bool operator==(const ExpanderPattern& o) const;
};

// Prime-order subgroup of Z_p^* used by the hiding scheme.
// p = 2q + 1 with p, q prime; g and h generate the order-q subgroup.
struct GroupParams {
    mpz_class p, q, g, h;

    static GroupParams generate(int q_bits, const std::string& label);
    static const GroupParams& default_256();
    static const GroupParams& toy_61();
    static GroupParams parse(const std::string& text);
    std::string serialize(const std::string& header_label) const;
    void validate() const;

    int elem_bytes() const;
    Bits elem_to_bits(const mpz_class& x) const;
    mpz_class bits_to_elem(const Bits& b) const;
    mpz_class pow_g(const mpz_class& e) const;
    mpz_class pow_h(const mpz_class& e) const;
    mpz_class mul(const mpz_class& a, const mpz_class& b) const;
    bool operator==(const GroupParams& o) const;
};

// Receiver-side setup for either scheme, fixed once and reused for
// polynomially many commitments.
struct SchemeParams {
    SchemeTag scheme_tag = SchemeTag::Binding;
    int k = 0;              // security parameter, bits
    int message_bits = 0;   // arity of each committed string
    ExpanderTag expander_tag = ExpanderTag::Mixer;
    Bits receiver_randomness;  // binding: rho, message_bits segments of 3k bits
    ExpanderPattern pattern;   // circuit-friendly expander network
    GroupParams group;         // hiding

    int rho_segment(int bit_index, int out_bit) const {
        return receiver_randomness[static_cast<std::size_t>(bit_index) * 3 * k + out_bit];
    }
};

struct Commitment {
    SchemeTag scheme_tag = SchemeTag::Binding;
    Bits payload;  // binding: message_bits * 3k bits; hiding: one group element

    bool operator==(const Commitment& o) const {
        return scheme_tag == o.scheme_tag && payload == o.payload;
    }
};

struct Opening {
    Bits message;
    Bits randomness;  // binding: one k-bit seed per message bit; hiding: exponent r
};

// Expand a k-bit seed to 3k bits.
Bits expand_mixer(const Bits& seed);
Bits expand_circuit(const ExpanderPattern& pattern, const Bits& seed);
Bits expand(const SchemeParams& params, const Bits& seed);

SchemeParams commit_setup(SchemeTag tag, int k, int message_bits, std::uint64_t rng_seed,
                          ExpanderTag expander = ExpanderTag::Mixer);
SchemeParams commit_setup_with_group(int k, int message_bits, const GroupParams& group);

std::pair<Commitment, Opening> commit(const SchemeParams& params, const Bits& message,
                                      std::uint64_t rng_seed);
std::pair<Commitment, Opening> commit(const SchemeParams& params, const Bits& message,
                                      Stream& stream);

bool verify_open(const SchemeParams& params, const Commitment& commitment,
                 const Opening& opening);

}  // namespace czk

#endif  // CZK_COMMITMENTS_HPP_
