#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "czk/commitments.hpp"
#include "oracles.hpp"

using namespace czk;

TEST_SUITE_BEGIN("commitments");

TEST_CASE("binding setup sizes receiver randomness as 3k per bit") {
    const auto p1 = commit_setup(SchemeTag::Binding, 4, 1, 0);
    CHECK(p1.receiver_randomness.size() == 12);
    const auto p8 = commit_setup(SchemeTag::Binding, 4, 8, 0);
    CHECK(p8.receiver_randomness.size() == 96);
    CHECK_THROWS_AS(commit_setup(SchemeTag::Binding, 3, 1, 0), parameter_error);
}

TEST_CASE("setup is deterministic in the seed") {
    const auto a = commit_setup(SchemeTag::Binding, 8, 4, 42);
    const auto b = commit_setup(SchemeTag::Binding, 8, 4, 42);
    const auto c = commit_setup(SchemeTag::Binding, 8, 4, 43);
    CHECK(a.receiver_randomness == b.receiver_randomness);
    CHECK(a.receiver_randomness != c.receiver_randomness);
}

TEST_CASE("hiding setup echoes the shipped default group") {
    const auto p = commit_setup(SchemeTag::Hiding, 8, 8, 7);
    CHECK(p.group == GroupParams::default_256());
    std::ifstream in("params/group_default_256.txt");
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(GroupParams::parse(buf.str()) == p.group);
}

TEST_CASE("shipped groups regenerate from their documented procedure") {
    CHECK(GroupParams::generate(255, "default") == GroupParams::default_256());
    CHECK(GroupParams::generate(60, "toy") == GroupParams::toy_61());
    GroupParams::default_256().validate();
    GroupParams::toy_61().validate();
}

TEST_CASE("shipped expander pattern file matches the generator") {
    std::ifstream in("params/expander_k4.txt");
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(ExpanderPattern::parse(buf.str(), 4) == ExpanderPattern::generate(4));
}

TEST_CASE("binding bit commitment follows the expand-and-mask rule") {
    for (auto tag : {ExpanderTag::Mixer, ExpanderTag::CircuitFriendly}) {
        const auto params = commit_setup(SchemeTag::Binding, 4, 1, 5, tag);
        auto [c0, o0] = commit(params, Bits{0}, 99);
        CHECK(c0.payload == expand(params, o0.randomness));
        auto [c1, o1] = commit(params, Bits{1}, 99);
        CHECK((c1.payload ^ params.receiver_randomness) == expand(params, o1.randomness));
    }
}

TEST_CASE("hiding commitment of zero with zero randomness is the identity") {
    auto params = commit_setup_with_group(8, 8, GroupParams::toy_61());
    const mpz_class one =
        params.group.mul(params.group.pow_g(0), params.group.pow_h(0));
    CHECK(one == 1);
    // A forced (x=0, r=0) opening verifies against the identity payload.
    Commitment c{SchemeTag::Hiding, params.group.elem_to_bits(1)};
    Opening o;
    o.message = Bits(8);
    o.randomness = Bits(64);
    CHECK(verify_open(params, c, o));
}

TEST_CASE("commit then verify round-trips and tampering rejects") {
    Stream seeds(2024);
    for (int iter = 0; iter < 200; ++iter) {
        const bool binding = iter % 2 == 0;
        const int k = 4 + (iter % 3) * 4;
        const int bits = 1 + iter % 8;
        SchemeParams params =
            binding ? commit_setup(SchemeTag::Binding, k, bits, seeds.next(),
                                   iter % 4 ? ExpanderTag::Mixer : ExpanderTag::CircuitFriendly)
                    : commit_setup_with_group(k, bits, GroupParams::toy_61());
        Stream rng(seeds.next());
        const Bits msg = Bits::random(static_cast<std::size_t>(bits), rng);
        auto [c, o] = commit(params, msg, rng.next());
        CHECK(verify_open(params, c, o));

        Commitment tampered = c;
        tampered.payload[seeds.below(tampered.payload.size())] ^= 1;
        CHECK_FALSE(verify_open(params, tampered, o));

        Opening flipped = o;
        flipped.message[seeds.below(flipped.message.size())] ^= 1;
        CHECK_FALSE(verify_open(params, c, flipped));
    }
}

TEST_CASE("message length must match params") {
    const auto params = commit_setup(SchemeTag::Binding, 4, 4, 0);
    CHECK_THROWS_AS(commit(params, Bits{0, 1}, 1), arity_error);
}

TEST_CASE("exhaustive binding at k=4: equivocable rho fraction at most 1/16") {
    const auto pattern = ExpanderPattern::generate(4);
    // Collect every achievable pairwise difference of expansions; a rho
    // value admits an equivocating seed pair exactly when it lies in the
    // difference set.
    std::set<std::uint64_t> diffs;
    std::vector<std::uint64_t> expansions(16);
    for (std::uint64_t s = 0; s < 16; ++s)
        expansions[s] = expand_circuit(pattern, Bits::from_u64(s, 4)).to_u64();
    for (std::uint64_t s1 = 0; s1 < 16; ++s1)
        for (std::uint64_t s2 = s1 + 1; s2 < 16; ++s2)
            diffs.insert(expansions[s1] ^ expansions[s2]);

    int bad = 0;
    for (std::uint64_t rho = 0; rho < 4096; ++rho)
        if (diffs.count(rho)) ++bad;
    CHECK(bad <= 4096 / 16);

    // The same certificate via the verify_open route on one sampled rho.
    SchemeParams params = commit_setup(SchemeTag::Binding, 4, 1, 3,
                                       ExpanderTag::CircuitFriendly);
    const std::uint64_t rho = params.receiver_randomness.to_u64();
    bool equivocable = diffs.count(rho) > 0;
    bool found = false;
    for (std::uint64_t s1 = 0; s1 < 16 && !found; ++s1)
        for (std::uint64_t s2 = 0; s2 < 16 && !found; ++s2) {
            if ((expansions[s1] ^ expansions[s2]) != rho || s1 == s2) continue;
            Commitment c{SchemeTag::Binding,
                         expand_circuit(pattern, Bits::from_u64(s1, 4))};
            Opening as_zero{Bits{0}, Bits::from_u64(s1, 4)};
            Opening as_one{Bits{1}, Bits::from_u64(s2, 4)};
            found = verify_open(params, c, as_zero) && verify_open(params, c, as_one);
        }
    CHECK(found == equivocable);
}

TEST_CASE("statistical binding scales to k=8 circuit-friendly") {
    const auto pattern = ExpanderPattern::generate(8);
    std::set<std::uint64_t> diffs;
    std::vector<std::uint64_t> expansions(256);
    for (std::uint64_t s = 0; s < 256; ++s)
        expansions[s] = expand_circuit(pattern, Bits::from_u64(s, 8)).to_u64();
    for (std::uint64_t s1 = 0; s1 < 256; ++s1)
        for (std::uint64_t s2 = s1 + 1; s2 < 256; ++s2)
            diffs.insert(expansions[s1] ^ expansions[s2]);
    // Bad fraction at most 2^(2k) / 2^(3k) = 2^-8.
    CHECK(static_cast<double>(diffs.size()) / std::pow(2.0, 24) <= 1.0 / 256);
}

TEST_CASE("pedersen payloads hide the message exactly") {
    // Exhaustive over a tiny safe-prime group: the payload multiset over
    // all randomness values is the whole subgroup for every message.
    GroupParams tiny;
    tiny.p = 2039;
    tiny.q = 1019;
    tiny.g = 4;
    tiny.h = 9;
    tiny.validate();
    auto params = commit_setup_with_group(4, 4, tiny);
    for (std::uint64_t x : {0ULL, 5ULL, 9ULL}) {
        std::set<std::uint64_t> payloads;
        for (std::uint64_t r = 0; r < 1019; ++r) {
            const mpz_class payload =
                tiny.mul(tiny.pow_g(static_cast<long>(x)), tiny.pow_h(static_cast<long>(r)));
            payloads.insert(payload.get_ui());
        }
        CHECK(payloads.size() == 1019);
    }

    // Chi-square proxy on sampled randomness for two fixed messages.
    Stream rng(7);
    std::vector<long long> bucket0(1019, 0), bucket1(1019, 0);
    std::map<std::uint64_t, int> index;
    int next = 0;
    for (int i = 0; i < 60000; ++i) {
        for (int msg = 0; msg < 2; ++msg) {
            const std::uint64_t r = rng.below(1019);
            const mpz_class payload = tiny.mul(tiny.pow_g(msg == 0 ? 1 : 13),
                                               tiny.pow_h(static_cast<long>(r)));
            auto [it, fresh] = index.try_emplace(payload.get_ui(), next);
            if (fresh) ++next;
            (msg == 0 ? bucket0 : bucket1)[static_cast<std::size_t>(it->second)]++;
        }
    }
    const double stat = test::chi_square_two_sample(bucket0, bucket1);
    // df = 1018; mean df, sd sqrt(2 df). Accept within 5 sd.
    CHECK(stat < 1018 + 5 * std::sqrt(2.0 * 1018));
}

TEST_CASE("a single params value supports many commitments without mutation") {
    const auto params = commit_setup(SchemeTag::Binding, 8, 8, 11);
    const Bits rho_before = params.receiver_randomness;
    Stream rng(123);
    std::vector<std::pair<Commitment, Opening>> all;
    for (int i = 0; i < 64; ++i) {
        const Bits msg = Bits::random(8, rng);
        all.push_back(commit(params, msg, rng));
    }
    for (const auto& [c, o] : all) CHECK(verify_open(params, c, o));
    CHECK(params.receiver_randomness == rho_before);
}

TEST_CASE("group params file round-trips") {
    const auto& g = GroupParams::toy_61();
    CHECK(GroupParams::parse(g.serialize("x")) == g);
}

TEST_SUITE_END();
