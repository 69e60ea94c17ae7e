// bayesnet.hpp: Bayesian network with per-variable decision-tree
// conditional distributions: greedy penalized-likelihood learning from a
// selected population, and ancestral sampling of new genomes.
#pragma once

#include "hboa/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace hboa {

/// Node of a decision-tree conditional distribution. A leaf stores the
/// training counts of the target variable; an internal node splits on one
/// variable with child0/child1 indexed by that variable's value.
struct TreeNode {
    int split_var = -1;  // -1 marks a leaf
    int child0 = -1;
    int child1 = -1;
    std::uint64_t count0 = 0;
    std::uint64_t count1 = 0;

    bool is_leaf() const { return split_var < 0; }
};

/// Conditional distribution of one variable as a binary decision tree.
/// No variable repeats on a root-to-leaf path and the target never splits.
struct DecisionTree {
    int target = -1;
    std::vector<TreeNode> nodes;  // node 0 is the root

    /// Leaf reached by descending with the given full assignment.
    const TreeNode& descend(std::span<const std::uint8_t> bits) const {
        int idx = 0;
        while (!nodes[idx].is_leaf())
            idx = bits[nodes[idx].split_var] ? nodes[idx].child1 : nodes[idx].child0;
        return nodes[idx];
    }
};

/// Probability of target = 1 at a leaf. Zero-support leaves fall back to 1/2.
inline double leaf_probability(const TreeNode& leaf) {
    const std::uint64_t t = leaf.count0 + leaf.count1;
    if (t == 0) return 0.5;
    return static_cast<double>(leaf.count1) / static_cast<double>(t);
}

/// One accepted split during learning, for inspection and property tests.
struct SplitEvent {
    int target = -1;
    int split_var = -1;
    double gain = 0.0;
};

/// Bayesian network with decision-tree local structures. The directed graph
/// {j -> i : j splits somewhere in tree i} is acyclic by construction.
class BayesNet {
public:
    explicit BayesNet(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {
        n_ = trees_.size();
        parents_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            if (trees_[i].target != static_cast<int>(i))
                throw std::invalid_argument("BayesNet: tree target out of order");
            collect_parents(i);
        }
        topo_ = topological_order();  // throws on a cyclic graph
    }

    std::size_t variable_count() const { return n_; }
    const DecisionTree& tree(std::size_t i) const { return trees_[i]; }
    const std::vector<int>& parents(std::size_t i) const { return parents_[i]; }

    /// Deterministic topological order (smallest index first among ready
    /// variables). Throws std::invalid_argument if the graph has a cycle.
    std::vector<int> topological_order() const {
        std::vector<int> indeg(n_, 0);
        for (std::size_t i = 0; i < n_; ++i) indeg[i] = static_cast<int>(parents_[i].size());
        std::vector<std::vector<int>> children(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (int p : parents_[i]) children[p].push_back(static_cast<int>(i));
        std::vector<int> order;
        order.reserve(n_);
        std::vector<bool> placed(n_, false);
        for (std::size_t step = 0; step < n_; ++step) {
            int pick = -1;
            for (std::size_t v = 0; v < n_; ++v) {
                if (!placed[v] && indeg[v] == 0) {
                    pick = static_cast<int>(v);
                    break;
                }
            }
            if (pick < 0) throw std::invalid_argument("BayesNet: dependency graph is cyclic");
            placed[pick] = true;
            order.push_back(pick);
            for (int c : children[pick]) --indeg[c];
        }
        return order;
    }

    const std::vector<int>& sampling_order() const { return topo_; }

private:
    void collect_parents(std::size_t i) {
        std::vector<bool> seen(n_, false);
        for (const TreeNode& node : trees_[i].nodes) {
            if (!node.is_leaf() && !seen[node.split_var]) {
                seen[node.split_var] = true;
                parents_[i].push_back(node.split_var);
            }
        }
        std::sort(parents_[i].begin(), parents_[i].end());
    }

    std::size_t n_ = 0;
    std::vector<DecisionTree> trees_;
    std::vector<std::vector<int>> parents_;
    std::vector<int> topo_;
};

namespace detail {

/// Instance bits packed per variable for popcount-based leaf statistics.
class BitColumns {
public:
    BitColumns(const Population& pop, std::size_t n) : rows_(pop.size()), words_((rows_ + 63) / 64) {
        data_.assign(n * words_, 0);
        for (std::size_t r = 0; r < rows_; ++r) {
            const auto& bits = pop.members[r].bits;
            for (std::size_t v = 0; v < n; ++v)
                if (bits[v]) data_[v * words_ + r / 64] |= std::uint64_t{1} << (r % 64);
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t words() const { return words_; }
    const std::uint64_t* col(int v) const { return data_.data() + static_cast<std::size_t>(v) * words_; }

    std::vector<std::uint64_t> full_mask() const {
        std::vector<std::uint64_t> m(words_, ~std::uint64_t{0});
        if (rows_ % 64 != 0 && words_ > 0) m.back() = (std::uint64_t{1} << (rows_ % 64)) - 1;
        return m;
    }

private:
    std::size_t rows_, words_;
    std::vector<std::uint64_t> data_;
};

inline double leaf_log_likelihood(std::uint64_t c0, std::uint64_t c1) {
    const std::uint64_t t = c0 + c1;
    if (t == 0) return 0.0;
    double ll = 0.0;
    if (c0) ll += static_cast<double>(c0) * std::log(static_cast<double>(c0) / static_cast<double>(t));
    if (c1) ll += static_cast<double>(c1) * std::log(static_cast<double>(c1) / static_cast<double>(t));
    return ll;
}

/// Reachability closure over a small DAG, one bitset row per vertex.
class Reachability {
public:
    explicit Reachability(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

    bool reaches(int from, int to) const {
        return (row(from)[to / 64] >> (to % 64)) & 1;
    }

    /// Would edge from -> to close a cycle?
    bool creates_cycle(int from, int to) const { return from == to || reaches(to, from); }

    void add_edge(int from, int to) {
        // everything reaching `from` (plus `from` itself) now reaches `to`
        // and everything `to` reaches
        std::vector<std::uint64_t> closure(row(to), row(to) + words_);
        closure[to / 64] |= std::uint64_t{1} << (to % 64);
        for (std::size_t a = 0; a < n_; ++a) {
            if (a == static_cast<std::size_t>(from) || reaches(static_cast<int>(a), from)) {
                std::uint64_t* r = row_mut(a);
                for (std::size_t w = 0; w < words_; ++w) r[w] |= closure[w];
            }
        }
    }

private:
    const std::uint64_t* row(std::size_t v) const { return bits_.data() + v * words_; }
    std::uint64_t* row_mut(std::size_t v) { return bits_.data() + v * words_; }

    std::size_t n_, words_;
    std::vector<std::uint64_t> bits_;
};

}  // namespace detail

/// Learn a Bayesian network with decision-tree conditionals from a selected
/// population. All trees start as single leaves; the model grows by repeatedly
/// applying the highest-gain admissible split anywhere in the model until no
/// split has a strictly positive gain. The gain of a split is the
/// log-likelihood improvement minus a BIC penalty of ln(N)/2 per new leaf
/// pair. Ties break toward the earliest-created leaf, then the lowest split
/// variable. Admissible splits never repeat a variable on a path, never split
/// on the target and never close a directed cycle between trees.
inline BayesNet learn_model(const Population& selected, std::vector<SplitEvent>* log = nullptr) {
    if (selected.empty()) throw std::invalid_argument("learn_model: empty population");
    const std::size_t n = selected.members.front().length();
    for (const Genome& g : selected.members)
        if (g.length() != n) throw std::invalid_argument("learn_model: genome lengths differ");

    const std::size_t rows = selected.size();
    const detail::BitColumns cols(selected, n);
    const std::size_t words = cols.words();
    const double penalty = 0.5 * std::log(static_cast<double>(rows));

    std::vector<DecisionTree> trees(n);

    struct Candidate {
        double gain;
        int var;
    };
    struct Leaf {
        int target;                         // tree this leaf belongs to
        int node;                           // node index within the tree
        std::vector<std::uint64_t> mask;     // instances reaching this leaf
        std::vector<bool> on_path;           // variables used on the path, plus target
        std::vector<Candidate> candidates;   // positive-gain splits, best first
        bool open = true;
    };

    std::vector<Leaf> leaves;  // index = creation order
    detail::Reachability reach(n);

    const auto count_pair = [&](const std::uint64_t* a, const std::uint64_t* b,
                                const std::vector<std::uint64_t>& mask) {
        std::uint64_t both = 0, first = 0;
        for (std::size_t w = 0; w < words; ++w) {
            const std::uint64_t ma = mask[w] & a[w];
            first += std::popcount(ma);
            both += std::popcount(ma & b[w]);
        }
        return std::pair<std::uint64_t, std::uint64_t>(first, both);
    };

    const auto score_leaf = [&](Leaf& leaf) {
        const std::uint64_t* target_col = cols.col(leaf.target);
        std::uint64_t total = 0, c1 = 0;
        for (std::size_t w = 0; w < words; ++w) {
            total += std::popcount(leaf.mask[w]);
            c1 += std::popcount(leaf.mask[w] & target_col[w]);
        }
        const std::uint64_t c0 = total - c1;
        TreeNode& node = trees[leaf.target].nodes[leaf.node];
        node.count0 = c0;
        node.count1 = c1;
        if (total == 0) return;
        const double parent_ll = detail::leaf_log_likelihood(c0, c1);
        for (std::size_t j = 0; j < n; ++j) {
            if (leaf.on_path[j]) continue;
            const auto [in1, in1t1] = count_pair(cols.col(static_cast<int>(j)), target_col, leaf.mask);
            const std::uint64_t c11 = in1t1;            // split var 1, target 1
            const std::uint64_t c10 = in1 - in1t1;      // split var 1, target 0
            const std::uint64_t c01 = c1 - c11;
            const std::uint64_t c00 = c0 - c10;
            const double gain = detail::leaf_log_likelihood(c00, c01) +
                                detail::leaf_log_likelihood(c10, c11) - parent_ll - penalty;
            if (gain > 0.0) leaf.candidates.push_back({gain, static_cast<int>(j)});
        }
        std::sort(leaf.candidates.begin(), leaf.candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.gain != b.gain) return a.gain > b.gain;
            return a.var < b.var;
        });
    };

    const auto full = cols.full_mask();
    for (std::size_t i = 0; i < n; ++i) {
        trees[i].target = static_cast<int>(i);
        trees[i].nodes.push_back(TreeNode{});
        Leaf leaf;
        leaf.target = static_cast<int>(i);
        leaf.node = 0;
        leaf.mask = full;
        leaf.on_path.assign(n, false);
        leaf.on_path[i] = true;
        score_leaf(leaf);
        leaves.push_back(std::move(leaf));
    }

    for (;;) {
        // best admissible candidate over all open leaves; candidate lists are
        // sorted, so the first admissible entry is each leaf's best
        double best_gain = 0.0;
        std::size_t best_leaf = leaves.size();
        int best_var = -1;
        for (std::size_t li = 0; li < leaves.size(); ++li) {
            Leaf& leaf = leaves[li];
            if (!leaf.open) continue;
            for (const Candidate& cand : leaf.candidates) {
                if (best_var >= 0 && cand.gain <= best_gain) break;  // sorted: nothing better here
                if (reach.creates_cycle(cand.var, leaf.target)) continue;
                best_gain = cand.gain;
                best_leaf = li;
                best_var = cand.var;
                break;
            }
        }
        if (best_var < 0) break;

        Leaf& parent = leaves[best_leaf];
        DecisionTree& tree = trees[parent.target];
        const int node_idx = parent.node;
        const int c0_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        const int c1_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        tree.nodes[node_idx].split_var = best_var;
        tree.nodes[node_idx].child0 = c0_idx;
        tree.nodes[node_idx].child1 = c1_idx;
        reach.add_edge(best_var, parent.target);  // idempotent if the edge exists
        if (log) log->push_back({parent.target, best_var, best_gain});

        Leaf child0, child1;
        child0.target = child1.target = parent.target;
        child0.node = c0_idx;
        child1.node = c1_idx;
        child0.on_path = parent.on_path;
        child0.on_path[best_var] = true;
        child1.on_path = child0.on_path;
        const std::uint64_t* split_col = cols.col(best_var);
        child0.mask.resize(words);
        child1.mask.resize(words);
        for (std::size_t w = 0; w < words; ++w) {
            child1.mask[w] = parent.mask[w] & split_col[w];
            child0.mask[w] = parent.mask[w] & ~split_col[w];
        }
        parent.open = false;
        parent.mask.clear();
        parent.mask.shrink_to_fit();
        parent.candidates.clear();
        parent.candidates.shrink_to_fit();
        score_leaf(child0);
        score_leaf(child1);
        leaves.push_back(std::move(child0));
        leaves.push_back(std::move(child1));
    }

    return BayesNet(std::move(trees));
}

/// Sample `count` genomes from the model. Variables are visited in the
/// model's deterministic topological order; each bit is drawn from the leaf
/// its tree reaches under the values sampled so far. Fitness is left unset.
inline Population sample_model(const BayesNet& model, std::size_t count, RandomSource& rng) {
    if (count < 1) throw std::invalid_argument("sample_model: count must be positive");
    const std::size_t n = model.variable_count();
    const std::vector<int>& order = model.sampling_order();
    Population out;
    out.members.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        Genome g;
        g.bits.assign(n, 0);
        for (int v : order) {
            const TreeNode& leaf = model.tree(v).descend(g.bits);
            g.bits[v] = rng.real01() < leaf_probability(leaf) ? 1 : 0;
        }
        out.members.push_back(std::move(g));
    }
    return out;
}

/// Plain-text model dump for debugging; not a stable format.
inline std::string dump_model(const BayesNet& model) {
    std::ostringstream os;
    for (std::size_t i = 0; i < model.variable_count(); ++i) {
        os << "var " << i << ": parents={";
        const auto& ps = model.parents(i);
        for (std::size_t k = 0; k < ps.size(); ++k) os << (k ? "," : "") << ps[k];
        os << "}\n";
        // pre-order listing
        struct Item {
            int node;
            int depth;
        };
        std::vector<Item> stack{{0, 1}};
        while (!stack.empty()) {
            const Item it = stack.back();
            stack.pop_back();
            const TreeNode& nd = model.tree(i).nodes[it.node];
            os << std::string(static_cast<std::size_t>(it.depth) * 2, ' ');
            if (nd.is_leaf())
                os << "leaf (" << nd.count0 << "," << nd.count1 << ")\n";
            else {
                os << "split x" << nd.split_var << "\n";
                stack.push_back({nd.child1, it.depth + 1});
                stack.push_back({nd.child0, it.depth + 1});
            }
        }
    }
    return os.str();
}

}  // namespace hboa
