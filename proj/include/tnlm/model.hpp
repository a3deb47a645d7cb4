#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tnlm/network.hpp"

namespace tnlm {

/// Ordered set of distinct tokens; symbol index = position.
class SymbolSet {
public:
    SymbolSet() = default;
    explicit SymbolSet(std::vector<std::string> symbols, std::optional<std::size_t> oov = std::nullopt);

    std::size_t size() const noexcept { return symbols_.size(); }
    const std::string& token(std::size_t index) const { return symbols_.at(index); }
    const std::vector<std::string>& tokens() const noexcept { return symbols_; }
    std::optional<std::size_t> find(const std::string& token) const;
    /// Index of the reserved out-of-vocabulary symbol, if the set has one.
    std::optional<std::size_t> oov() const noexcept { return oov_; }

    bool operator==(const SymbolSet& other) const { return symbols_ == other.symbols_ && oov_ == other.oov_; }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, std::size_t> index_;
    std::optional<std::size_t> oov_;
};

/// Fixed-length sequences with positive multiplicities.
class SampleMultiset {
public:
    explicit SampleMultiset(std::size_t length);

    void add(const Sequence& s, std::uint64_t multiplicity = 1);

    std::size_t length() const noexcept { return length_; }
    std::uint64_t cardinality() const noexcept { return cardinality_; }
    bool empty() const noexcept { return entries_.empty(); }
    /// Distinct sequences in lexicographic order with their multiplicities.
    const std::map<Sequence, std::uint64_t>& entries() const noexcept { return entries_; }

    /// Throws ArgumentError if any sequence does not fit the network.
    void check_against(const TensorNetwork& net) const;

private:
    std::size_t length_;
    std::uint64_t cardinality_ = 0;
    std::map<Sequence, std::uint64_t> entries_;
};

using Distribution = std::map<Sequence, double>;

/// An objective that may be infinite; `culprit` names the sequence that made
/// it so.
struct ObjectiveValue {
    double value = 0.0;
    std::optional<Sequence> culprit;

    bool finite() const noexcept { return !culprit.has_value(); }
};

/// mu(s) = |<s|Psi>|^2.
double born_probability(const TensorNetwork& net, const Sequence& s);

/// m(s) / |S|.
Distribution empirical_distribution(const SampleMultiset& sample);

/// F(u|S) = -sum_s m(s) log |<s|Psi>|^2 (nats). Infinite, with the culprit
/// recorded, when some sampled sequence has zero amplitude.
ObjectiveValue negative_log_likelihood(const TensorNetwork& net, const SampleMultiset& sample);

/// D(p || q) with 0 log 0 = 0. Infinite, with the culprit recorded, when q
/// vanishes somewhere on the support of p.
ObjectiveValue kl_divergence(const Distribution& p, const Distribution& q);

/// Shannon entropy (nats).
double entropy(const Distribution& p);

/// Model distribution restricted to the support of `sample`.
Distribution model_distribution_on(const TensorNetwork& net, const SampleMultiset& sample);

/// Marginal probabilities <Psi| o_pinned (x) 1 |Psi> of a pure-state model.
/// Trees contract a doubled (ket-bra) network leaf to root, carrying a
/// reduced operator per edge and skipping subtrees with no pinned site,
/// whose reduced operator is the identity. Other DAGs materialize |Psi|^2
/// once and sum over it.
class BornMarginals {
public:
    explicit BornMarginals(const TensorNetwork& net);

    /// (site, symbol) pairs; sites must be distinct.
    double marginal(const std::vector<std::pair<std::size_t, std::size_t>>& pinned) const;

    /// Joint distribution of two distinct sites as a dim(i) x dim(j) table.
    std::vector<std::vector<double>> two_site_joint(std::size_t i, std::size_t j) const;

    const TensorNetwork& network() const noexcept { return net_; }

private:
    double tree_marginal(const std::vector<std::pair<std::size_t, std::size_t>>& pinned) const;
    double table_marginal(const std::vector<std::pair<std::size_t, std::size_t>>& pinned) const;

    TensorNetwork net_;
    bool tree_;
    std::vector<double> probabilities_;  // only for non-tree networks
    std::vector<std::size_t> strides_;
};

}  // namespace tnlm
