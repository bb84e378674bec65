#ifndef CZK_STATEMENT_COMPILER_HPP_
#define CZK_STATEMENT_COMPILER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "czk/compound.hpp"
#include "czk/graph.hpp"

namespace czk {

enum class GateOp { And, Or, Xor, Not };

struct Gate {
    GateOp op;
    int in1 = 0;
    int in2 = 0;  // ignored for Not
};

// Boolean circuit over input wires 0..n_inputs-1; gate g writes wire
// n_inputs + g. Gate inputs must reference earlier wires, so the circuit
// is acyclic by construction.
class Circuit {
public:
    explicit Circuit(int n_inputs) : n_inputs_(n_inputs) {}

    int add_gate(GateOp op, int in1, int in2 = 0);
    int and_tree(const std::vector<int>& wires);
    int or_tree(const std::vector<int>& wires);
    int constant_false();  // encoded as x and not x over wire 0

    int n_inputs() const { return n_inputs_; }
    int n_wires() const { return n_inputs_ + static_cast<int>(gates_.size()); }
    int gate_count() const { return static_cast<int>(gates_.size()); }
    const std::vector<Gate>& gates() const { return gates_; }
    int output_wire() const { return output_; }
    void set_output(int wire);

    bool eval(const std::vector<std::uint8_t>& inputs) const;
    std::vector<std::uint8_t> eval_all(const std::vector<std::uint8_t>& inputs) const;

private:
    int check_wire(int w) const;
    int n_inputs_;
    std::vector<Gate> gates_;
    int output_ = -1;
};

struct CnfFormula {
    int n_vars = 0;
    std::vector<std::vector<int>> clauses;  // signed 1-based literals

    // Fresh variables introduced by clause width reduction; each is
    // defined as the OR of a suffix of original literals.
    struct SplitVar {
        int var;
        std::vector<int> or_of;
    };
    std::vector<SplitVar> split_vars;

    bool satisfied_by(const std::vector<std::uint8_t>& assignment) const;  // 1-based
};

struct ColoringInstance {
    Graph graph;
    int palette_t = 0, palette_f = 1, palette_b = 2;
    // CNF variable x (1-based) -> (positive vertex, negated vertex).
    std::vector<std::pair<int, int>> var_vertices;

    struct Or2Gadget {
        int in1 = 0, in2 = 0;  // input vertex ids
        int g1 = 0, g2 = 0, g3 = 0;
    };
    struct ClauseGadget {
        std::vector<int> lits;       // width <= 3, signed
        std::vector<Or2Gadget> ors;  // 0, 1 or 2 gadgets
    };
    std::vector<ClauseGadget> clause_gadgets;

    std::string to_dimacs() const;
    std::string sidecar_json() const;
};

// Wire layout of the compound circuit; derived from (|V(G)|, m, k).
struct CompoundLayout {
    int n_vertices = 0, m = 0, k = 0;
    int color_wire(int vertex, int bit) const { return vertex * 2 + bit; }
    int seed_wire(int round, int msg_bit, int seed_bit) const {
        return n_vertices * 2 + ((round - 1) * k + msg_bit) * k + seed_bit;
    }
    int n_inputs() const { return n_vertices * 2 + m * k * k; }
};

Circuit compile_graph_circuit(const Graph& g);  // the coloring disjunct alone
Circuit compile_compound(const CompoundStatement& st);
CompoundLayout compound_layout(const CompoundStatement& st);

CnfFormula tseitin(const Circuit& c);
ColoringInstance cnf_to_3col(const CnfFormula& f);
ColoringInstance circuit_to_3col(const Circuit& c);

// Lift a satisfying CNF assignment (1-based var values) to a proper
// coloring of the reduced instance.
Coloring lift_assignment(const ColoringInstance& inst, const CnfFormula& f,
                         const std::vector<std::uint8_t>& assignment);

Coloring map_witness(const CompoundWitness& w, const CompoundStatement& st,
                     const Circuit& circuit, const ColoringInstance& inst);

}  // namespace czk

#endif  // CZK_STATEMENT_COMPILER_HPP_
