#include "czk/commitments.hpp"

#include <sstream>

namespace czk {

std::string to_string(SchemeTag t) {
    return t == SchemeTag::Binding ? "binding" : "hiding";
}
std::string to_string(ExpanderTag t) {
    return t == ExpanderTag::Mixer ? "mixer" : "circuit_friendly";
}

ExpanderPattern ExpanderPattern::generate(int k) {
    ExpanderPattern pat;
    pat.k = k;
    Stream s(derive(0, "czk.expander", static_cast<std::uint64_t>(k)));
    pat.rows.reserve(static_cast<std::size_t>(3 * k));
    for (int j = 0; j < 3 * k; ++j) {
        Row r;
        r.a = j % k;  // every input bit appears linearly
        r.b = static_cast<int>(s.below(static_cast<std::uint64_t>(k)));
        r.c = static_cast<int>(s.below(static_cast<std::uint64_t>(k)));
        while (r.c == r.b) r.c = static_cast<int>(s.below(static_cast<std::uint64_t>(k)));
        pat.rows.push_back(r);
    }
    return pat;
}

ExpanderPattern ExpanderPattern::parse(const std::string& text, int k) {
    ExpanderPattern pat;
    pat.k = k;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Row r;
        if (!(ls >> r.a >> r.b >> r.c)) throw io_error("expander pattern: bad line: " + line);
        if (r.a < 0 || r.a >= k || r.b < 0 || r.b >= k || r.c < 0 || r.c >= k)
            throw io_error("expander pattern: index out of range");
        pat.rows.push_back(r);
    }
    if (static_cast<int>(pat.rows.size()) != 3 * k)
        throw io_error("expander pattern: expected 3k lines");
    return pat;
}

std::string ExpanderPattern::serialize() const {
    std::ostringstream out;
    for (const auto& r : rows) out << r.a << ' ' << r.b << ' ' << r.c << '\n';
    return out.str();
}

bool ExpanderPattern::operator==(const ExpanderPattern& o) const {
    if (k != o.k || rows.size() != o.rows.size()) return false;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].a != o.rows[i].a || rows[i].b != o.rows[i].b || rows[i].c != o.rows[i].c)
            return false;
    return true;
}

namespace {

mpz_class stream_mpz(Stream& s, int bits) {
    mpz_class x = 0;
    for (int taken = 0; taken < bits; taken += 64) {
        x <<= 64;
        std::uint64_t w = s.next();
        if (bits - taken < 64) w >>= (64 - (bits - taken));
        mpz_class limb;
        mpz_import(limb.get_mpz_t(), 1, 1, sizeof(w), 0, 0, &w);
        x |= limb;
    }
    return x;
}

// Exponent below q; draws q_bits + 128 bits and reduces, so the bias is
// far below anything observable at desk scale.
mpz_class stream_exponent(Stream& s, const mpz_class& q) {
    int bits = static_cast<int>(mpz_sizeinbase(q.get_mpz_t(), 2)) + 128;
    return stream_mpz(s, bits) % q;
}

bool probably_prime(const mpz_class& n) {
    return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
}

}  // namespace

// Nothing-up-my-sleeve generation: walk a labelled deterministic stream
// until q and p = 2q + 1 are both prime; g = 4 (a square, hence of order
// q); h is the square of a stream value, so its discrete log base g is
// not known to anyone.
GroupParams GroupParams::generate(int q_bits, const std::string& label) {
    Stream s(chain_str(derive(0, "czk.group", static_cast<std::uint64_t>(q_bits)), label));
    GroupParams gp;
    for (;;) {
        mpz_class q = stream_mpz(s, q_bits);
        mpz_setbit(q.get_mpz_t(), static_cast<mp_bitcnt_t>(q_bits - 1));
        mpz_setbit(q.get_mpz_t(), 0);
        if (!probably_prime(q)) continue;
        mpz_class p = 2 * q + 1;
        if (!probably_prime(p)) continue;
        gp.q = q;
        gp.p = p;
        break;
    }
    gp.g = 4;
    for (;;) {
        mpz_class z = stream_mpz(s, q_bits + 64) % (gp.p - 3) + 2;
        mpz_class h;
        mpz_powm_ui(h.get_mpz_t(), z.get_mpz_t(), 2, gp.p.get_mpz_t());
        if (h != 1 && h != gp.g) {
            gp.h = h;
            break;
        }
    }
    return gp;
}

namespace {

// Shipped parameter sets; see params/*.txt for the same values with the
// generation procedure in the header comments. Regenerable via
// GroupParams::generate(255, "default") and generate(60, "toy").
const char* kDefault256 =
    "p c9a3a29ea29e945735bacedaec8a19190f2c70b394b62e0e0f18b50f5dccbc53\n"
    "q 64d1d14f514f4a2b9add676d76450c8c87963859ca5b1707078c5a87aee65e29\n"
    "g 4\n"
    "h 71bb787a37d9df145264f0376c45c783bcde6f610c8340f258ef4e26ef2ad392\n";

const char* kToy61 =
    "p 144257cdd67f54c3\n"
    "q a212be6eb3faa61\n"
    "g 4\n"
    "h 47420cef56a8e87\n";

}  // namespace

const GroupParams& GroupParams::default_256() {
    static const GroupParams gp = GroupParams::parse(kDefault256);
    return gp;
}

const GroupParams& GroupParams::toy_61() {
    static const GroupParams gp = GroupParams::parse(kToy61);
    return gp;
}

GroupParams GroupParams::parse(const std::string& text) {
    GroupParams gp;
    std::istringstream in(text);
    std::string line;
    int seen = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string name, hex;
        if (!(ls >> name >> hex)) throw io_error("group params: bad line: " + line);
        mpz_class v;
        if (v.set_str(hex, 16) != 0) throw io_error("group params: bad hex: " + hex);
        if (name == "p") gp.p = v;
        else if (name == "q") gp.q = v;
        else if (name == "g") gp.g = v;
        else if (name == "h") gp.h = v;
        else throw io_error("group params: unknown field: " + name);
        ++seen;
    }
    if (seen != 4) throw io_error("group params: expected fields p q g h");
    gp.validate();
    return gp;
}

std::string GroupParams::serialize(const std::string& header_label) const {
    std::ostringstream out;
    out << "# czk group parameters (" << header_label << ")\n"
        << "# safe prime p = 2q + 1; g = 4 generates the order-q subgroup of squares;\n"
        << "# h is the square of a deterministic stream value (dlog_g(h) unknown).\n"
        << "# regenerate with GroupParams::generate(q_bits, label).\n"
        << "p " << p.get_str(16) << "\n"
        << "q " << q.get_str(16) << "\n"
        << "g " << g.get_str(16) << "\n"
        << "h " << h.get_str(16) << "\n";
    return out.str();
}

void GroupParams::validate() const {
    if (p != 2 * q + 1) throw parameter_error("group params: p != 2q + 1");
    if (!probably_prime(p) || !probably_prime(q))
        throw parameter_error("group params: p and q must be prime");
    auto order_q = [&](const mpz_class& x) {
        if (x <= 1 || x >= p) return false;
        mpz_class t;
        mpz_powm(t.get_mpz_t(), x.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
        return t == 1;
    };
    if (!order_q(g) || !order_q(h)) throw parameter_error("group params: g, h must have order q");
}

int GroupParams::elem_bytes() const {
    return static_cast<int>((mpz_sizeinbase(p.get_mpz_t(), 2) + 7) / 8);
}

Bits GroupParams::elem_to_bits(const mpz_class& x) const {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(elem_bytes()), 0);
    std::size_t written = 0;
    mpz_export(bytes.data(), &written, -1, 1, 0, 0, x.get_mpz_t());
    return Bits::from_bytes(bytes, bytes.size() * 8);
}

mpz_class GroupParams::bits_to_elem(const Bits& b) const {
    auto bytes = b.to_bytes();
    mpz_class x;
    mpz_import(x.get_mpz_t(), bytes.size(), -1, 1, 0, 0, bytes.data());
    return x;
}

mpz_class GroupParams::pow_g(const mpz_class& e) const {
    mpz_class r;
    mpz_powm(r.get_mpz_t(), g.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
    return r;
}

mpz_class GroupParams::pow_h(const mpz_class& e) const {
    mpz_class r;
    mpz_powm(r.get_mpz_t(), h.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
    return r;
}

mpz_class GroupParams::mul(const mpz_class& a, const mpz_class& b) const {
    return mpz_class((a * b) % p);
}

bool GroupParams::operator==(const GroupParams& o) const {
    return p == o.p && q == o.q && g == o.g && h == o.h;
}

Bits expand_mixer(const Bits& seed) {
    const int k = static_cast<int>(seed.size());
    // Input block: seed in the low k bits, the counter just above, the
    // rest zero. Output is the concatenation of the three finalizer
    // words, bit 0 of word 0 first, truncated to 3k bits.
    const std::uint64_t s = seed.to_u64();
    Bits out(static_cast<std::size_t>(3 * k));
    for (int t = 0; t < 3 * k; ++t) {
        const int block = t / 64;
        const std::uint64_t word =
            mix64(s | (static_cast<std::uint64_t>(block) << k));
        out[static_cast<std::size_t>(t)] =
            static_cast<std::uint8_t>((word >> (t % 64)) & 1);
    }
    return out;
}

Bits expand_circuit(const ExpanderPattern& pattern, const Bits& seed) {
    if (static_cast<int>(seed.size()) != pattern.k)
        throw arity_error("expand_circuit: seed length != pattern k");
    Bits out(pattern.rows.size());
    for (std::size_t j = 0; j < pattern.rows.size(); ++j) {
        const auto& r = pattern.rows[j];
        out[j] = seed[static_cast<std::size_t>(r.a)] ^
                 (seed[static_cast<std::size_t>(r.b)] & seed[static_cast<std::size_t>(r.c)]);
    }
    return out;
}

Bits expand(const SchemeParams& params, const Bits& seed) {
    return params.expander_tag == ExpanderTag::Mixer ? expand_mixer(seed)
                                                     : expand_circuit(params.pattern, seed);
}

SchemeParams commit_setup(SchemeTag tag, int k, int message_bits, std::uint64_t rng_seed,
                          ExpanderTag expander) {
    if (k < 4) throw parameter_error("commit_setup: k must be at least 4");
    if (k > 32) throw parameter_error("commit_setup: k above desk-scale range (32)");
    if (message_bits < 1) throw parameter_error("commit_setup: message_bits must be positive");
    SchemeParams params;
    params.scheme_tag = tag;
    params.k = k;
    params.message_bits = message_bits;
    params.expander_tag = expander;
    if (tag == SchemeTag::Binding) {
        Stream s(derive(rng_seed, "czk.setup.rho"));
        params.receiver_randomness =
            Bits::random(static_cast<std::size_t>(message_bits) * 3 * k, s);
        if (expander == ExpanderTag::CircuitFriendly)
            params.pattern = ExpanderPattern::generate(k);
    } else {
        params.group = GroupParams::default_256();
        if (message_bits > static_cast<int>(mpz_sizeinbase(params.group.q.get_mpz_t(), 2)) - 1)
            throw parameter_error("commit_setup: message does not fit below q");
    }
    return params;
}

SchemeParams commit_setup_with_group(int k, int message_bits, const GroupParams& group) {
    if (k < 4) throw parameter_error("commit_setup: k must be at least 4");
    if (message_bits < 1) throw parameter_error("commit_setup: message_bits must be positive");
    if (message_bits > static_cast<int>(mpz_sizeinbase(group.q.get_mpz_t(), 2)) - 1)
        throw parameter_error("commit_setup: message does not fit below q");
    SchemeParams params;
    params.scheme_tag = SchemeTag::Hiding;
    params.k = k;
    params.message_bits = message_bits;
    params.group = group;
    return params;
}

std::pair<Commitment, Opening> commit(const SchemeParams& params, const Bits& message,
                                      Stream& stream) {
    if (static_cast<int>(message.size()) != params.message_bits)
        throw arity_error("commit: message length does not match params");
    Commitment c;
    c.scheme_tag = params.scheme_tag;
    Opening o;
    o.message = message;
    if (params.scheme_tag == SchemeTag::Binding) {
        // Per committed bit b with fresh seed s:
        //   payload = Expand(s)            if b = 0
        //   payload = Expand(s) xor rho    if b = 1
        for (int i = 0; i < params.message_bits; ++i) {
            Bits seed = Bits::random(static_cast<std::size_t>(params.k), stream);
            Bits block = expand(params, seed);
            if (message[static_cast<std::size_t>(i)]) {
                const Bits rho = params.receiver_randomness.slice(
                    static_cast<std::size_t>(i) * 3 * params.k, static_cast<std::size_t>(3 * params.k));
                block = block ^ rho;
            }
            c.payload.append(block);
            o.randomness.append(seed);
        }
    } else {
        const auto& grp = params.group;
        const mpz_class x = grp.bits_to_elem(message);
        const mpz_class r = stream_exponent(stream, grp.q);
        const mpz_class payload = grp.mul(grp.pow_g(x), grp.pow_h(r));
        c.payload = grp.elem_to_bits(payload);
        const int q_bits = static_cast<int>(mpz_sizeinbase(grp.q.get_mpz_t(), 2));
        std::vector<std::uint8_t> rbytes(static_cast<std::size_t>((q_bits + 7) / 8), 0);
        std::size_t written = 0;
        mpz_export(rbytes.data(), &written, -1, 1, 0, 0, r.get_mpz_t());
        o.randomness = Bits::from_bytes(rbytes, rbytes.size() * 8);
    }
    return {c, o};
}

std::pair<Commitment, Opening> commit(const SchemeParams& params, const Bits& message,
                                      std::uint64_t rng_seed) {
    Stream s(rng_seed);
    return commit(params, message, s);
}

bool verify_open(const SchemeParams& params, const Commitment& commitment,
                 const Opening& opening) {
    if (commitment.scheme_tag != params.scheme_tag) return false;
    if (static_cast<int>(opening.message.size()) != params.message_bits) return false;
    if (params.scheme_tag == SchemeTag::Binding) {
        const std::size_t seg = static_cast<std::size_t>(3 * params.k);
        if (opening.randomness.size() !=
            static_cast<std::size_t>(params.message_bits) * params.k)
            return false;
        if (commitment.payload.size() != static_cast<std::size_t>(params.message_bits) * seg)
            return false;
        for (int i = 0; i < params.message_bits; ++i) {
            const Bits seed = opening.randomness.slice(
                static_cast<std::size_t>(i) * params.k, static_cast<std::size_t>(params.k));
            Bits block = expand(params, seed);
            if (opening.message[static_cast<std::size_t>(i)])
                block = block ^ params.receiver_randomness.slice(
                                    static_cast<std::size_t>(i) * seg, seg);
            if (block != commitment.payload.slice(static_cast<std::size_t>(i) * seg, seg))
                return false;
        }
        return true;
    }
    const auto& grp = params.group;
    if (commitment.payload.size() != static_cast<std::size_t>(grp.elem_bytes()) * 8) return false;
    const mpz_class x = grp.bits_to_elem(opening.message);
    const mpz_class r = grp.bits_to_elem(opening.randomness);
    if (r >= grp.q) return false;
    const mpz_class expect = grp.mul(grp.pow_g(x), grp.pow_h(r));
    return grp.elem_to_bits(expect) == commitment.payload;
}

}  // namespace czk
