#include "tnlm/model.hpp"

#include <cmath>
#include <limits>

#include "tnlm/errors.hpp"

namespace tnlm {

SymbolSet::SymbolSet(std::vector<std::string> symbols, std::optional<std::size_t> oov)
    : symbols_(std::move(symbols)), oov_(oov) {
    if (symbols_.empty()) throw ArgumentError("symbol set must be nonempty");
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (!index_.emplace(symbols_[i], i).second)
            throw ArgumentError("duplicate symbol '" + symbols_[i] + "'");
    }
    if (oov_ && *oov_ >= symbols_.size()) throw ArgumentError("out-of-vocabulary index out of range");
}

std::optional<std::size_t> SymbolSet::find(const std::string& token) const {
    const auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

SampleMultiset::SampleMultiset(std::size_t length) : length_(length) {
    if (length == 0) throw ArgumentError("sample sequences must have positive length");
}

void SampleMultiset::add(const Sequence& s, std::uint64_t multiplicity) {
    if (s.size() != length_)
        throw ArgumentError("sequence of length " + std::to_string(s.size()) + " added to a multiset of length " +
                            std::to_string(length_));
    if (multiplicity == 0) throw ArgumentError("multiplicities must be positive");
    entries_[s] += multiplicity;
    cardinality_ += multiplicity;
}

void SampleMultiset::check_against(const TensorNetwork& net) const {
    if (length_ != net.num_sites())
        throw ArgumentError("sample length " + std::to_string(length_) + " does not match network length " +
                            std::to_string(net.num_sites()));
    for (const auto& [s, m] : entries_) check_sequence(net, s);
}

double born_probability(const TensorNetwork& net, const Sequence& s) { return std::norm(amplitude(net, s)); }

Distribution empirical_distribution(const SampleMultiset& sample) {
    if (sample.empty()) throw ArgumentError("empirical distribution of an empty sample");
    Distribution p;
    const auto total = static_cast<double>(sample.cardinality());
    for (const auto& [s, m] : sample.entries()) p.emplace(s, static_cast<double>(m) / total);
    return p;
}

ObjectiveValue negative_log_likelihood(const TensorNetwork& net, const SampleMultiset& sample) {
    sample.check_against(net);
    ObjectiveValue f;
    for (const auto& [s, m] : sample.entries()) {
        const double p = born_probability(net, s);
        if (!(p > std::numeric_limits<double>::min())) {
            f.value = std::numeric_limits<double>::infinity();
            f.culprit = s;
            return f;
        }
        f.value -= static_cast<double>(m) * std::log(p);
    }
    return f;
}

ObjectiveValue kl_divergence(const Distribution& p, const Distribution& q) {
    ObjectiveValue d;
    for (const auto& [s, ps] : p) {
        if (ps < 0.0) throw ArgumentError("negative probability");
        if (ps == 0.0) continue;
        const auto it = q.find(s);
        const double qs = it == q.end() ? 0.0 : it->second;
        if (!(qs > 0.0)) {
            d.value = std::numeric_limits<double>::infinity();
            d.culprit = s;
            return d;
        }
        d.value += ps * std::log(ps / qs);
    }
    return d;
}

double entropy(const Distribution& p) {
    double h = 0.0;
    for (const auto& [s, ps] : p)
        if (ps > 0.0) h -= ps * std::log(ps);
    return h;
}

Distribution model_distribution_on(const TensorNetwork& net, const SampleMultiset& sample) {
    Distribution q;
    for (const auto& [s, m] : sample.entries()) q.emplace(s, born_probability(net, s));
    return q;
}

BornMarginals::BornMarginals(const TensorNetwork& net) : net_(net), tree_(net.quiver().is_tree()) {
    if (!net.is_pure_state_model()) throw PreconditionError("Born marginals require a pure-state model");
    if (tree_) return;
    const DenseTensor psi = state(net);
    probabilities_.reserve(psi.size());
    for (const Complex& z : psi.data()) probabilities_.push_back(std::norm(z));
    const Shape dims = net.site_dims();
    strides_.assign(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) strides_[k - 1] = strides_[k] * dims[k];
}

double BornMarginals::marginal(const std::vector<std::pair<std::size_t, std::size_t>>& pinned) const {
    std::vector<bool> seen(net_.num_sites(), false);
    for (const auto& [site, symbol] : pinned) {
        if (site >= net_.num_sites()) throw ArgumentError("site " + std::to_string(site) + " out of range");
        if (seen[site]) throw ArgumentError("site " + std::to_string(site) + " pinned twice");
        if (symbol >= net_.site_dim(site))
            throw ArgumentError("symbol " + std::to_string(symbol) + " out of range at site " + std::to_string(site));
        seen[site] = true;
    }
    return tree_ ? tree_marginal(pinned) : table_marginal(pinned);
}

double BornMarginals::tree_marginal(const std::vector<std::pair<std::size_t, std::size_t>>& pinned) const {
    const Quiver& q = net_.quiver();
    // Reduced operator per edge; nullopt stands for the identity.
    std::vector<std::optional<ComplexMatrix>> rho(q.num_edges());
    for (const auto& [site, symbol] : pinned) {
        const EdgeId e = q.out_edges()[site];
        const auto d = static_cast<Eigen::Index>(net_.edge_dim(e));
        ComplexMatrix projector = ComplexMatrix::Zero(d, d);
        projector(static_cast<Eigen::Index>(symbol), static_cast<Eigen::Index>(symbol)) = 1.0;
        rho[e] = std::move(projector);
    }

    const auto order = topological_order(net_.layering());
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const VertexId v = *it;
        const auto& outs = q.outgoing(v);
        DenseTensor applied = net_.tensor(v);
        bool identity = true;
        for (std::size_t t = 0; t < outs.size(); ++t) {
            if (!rho[outs[t]]) continue;
            identity = false;
            applied = apply_to_axis(applied, t, *rho[outs[t]]);
        }
        if (identity) continue;
        const ComplexMatrix m = as_matrix(net_.tensor(v), net_.split(v));
        const ComplexMatrix ma = as_matrix(applied, net_.split(v));
        rho[q.incoming(v)[0]] = m.adjoint() * ma;
    }
    const auto& root = rho[q.in_edges()[0]];
    return root ? (*root)(0, 0).real() : 1.0;
}

double BornMarginals::table_marginal(const std::vector<std::pair<std::size_t, std::size_t>>& pinned) const {
    const Shape dims = net_.site_dims();
    double total = 0.0;
    for (std::size_t flat = 0; flat < probabilities_.size(); ++flat) {
        bool match = true;
        for (const auto& [site, symbol] : pinned) {
            if ((flat / strides_[site]) % dims[site] != symbol) {
                match = false;
                break;
            }
        }
        if (match) total += probabilities_[flat];
    }
    return total;
}

std::vector<std::vector<double>> BornMarginals::two_site_joint(std::size_t i, std::size_t j) const {
    if (i == j) throw ArgumentError("two_site_joint needs distinct sites");
    if (i >= net_.num_sites() || j >= net_.num_sites()) throw ArgumentError("site out of range");
    std::vector<std::vector<double>> joint(net_.site_dim(i), std::vector<double>(net_.site_dim(j)));
    for (std::size_t a = 0; a < joint.size(); ++a)
        for (std::size_t b = 0; b < joint[a].size(); ++b) joint[a][b] = marginal({{i, a}, {j, b}});
    return joint;
}

}  // namespace tnlm
