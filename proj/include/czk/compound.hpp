#ifndef CZK_COMPOUND_HPP_
#define CZK_COMPOUND_HPP_

#include <optional>
#include <vector>

#include "czk/commitments.hpp"
#include "czk/graph.hpp"

namespace czk {

// Public statement proven in the body: the base graph is 3-colorable, or
// some prover commitment c_i opens to the revealed value v_i. Everything
// here is determined by the public transcript of a completed preamble.
struct CompoundStatement {
    Graph base_graph;
    SchemeParams prover_params;            // binding scheme, message_bits = k
    std::vector<Commitment> commitments;   // c_1 .. c_m
    std::vector<Bits> revealed_values;     // v_1 .. v_m

    int m() const { return static_cast<int>(commitments.size()); }
    std::uint64_t digest() const;
};

struct CompoundWitness {
    enum class Branch { Coloring, Equality };
    Branch branch = Branch::Coloring;
    Coloring coloring;       // Branch::Coloring
    int equality_index = 0;  // Branch::Equality, 1-based round index
    Bits equality_seeds;     // seeds opening c_i to v_i

    static CompoundWitness from_coloring(Coloring c);
    static CompoundWitness from_equality(int index, Bits seeds);

    Bits encode() const;
    static CompoundWitness decode(const Bits& raw, const CompoundStatement& st);
};

bool validate_witness(const CompoundStatement& st, const CompoundWitness& w);

}  // namespace czk

#endif  // CZK_COMPOUND_HPP_
