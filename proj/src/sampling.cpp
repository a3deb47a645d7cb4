#include "tnlm/sampling.hpp"

#include <limits>
#include <map>
#include <sstream>

#include "tnlm/errors.hpp"
#include "tnlm/rng.hpp"

namespace tnlm {

std::vector<double> conditional_distribution(const BornMarginals& marginals, const Sequence& prefix) {
    const TensorNetwork& net = marginals.network();
    const std::size_t k = prefix.size();
    if (k >= net.num_sites())
        throw ArgumentError("prefix of length " + std::to_string(k) + " leaves no site to condition");
    std::vector<std::pair<std::size_t, std::size_t>> pinned;
    for (std::size_t i = 0; i < k; ++i) {
        if (prefix[i] >= net.site_dim(i)) throw ArgumentError("prefix symbol out of range");
        pinned.emplace_back(i, prefix[i]);
    }
    std::vector<double> p(net.site_dim(k));
    double total = 0.0;
    pinned.emplace_back(k, 0);
    for (std::size_t x = 0; x < p.size(); ++x) {
        pinned.back().second = x;
        p[x] = std::max(0.0, marginals.marginal(pinned));
        total += p[x];
    }
    if (!(total > std::numeric_limits<double>::min())) {
        std::ostringstream os;
        os << "cannot condition on zero-probability prefix (";
        for (std::size_t i = 0; i < k; ++i) os << (i ? "," : "") << prefix[i];
        os << ')';
        throw ConditioningError(os.str());
    }
    for (double& x : p) x /= total;
    return p;
}

std::vector<double> conditional_distribution(const TensorNetwork& net, const Sequence& prefix) {
    return conditional_distribution(BornMarginals(net), prefix);
}

std::vector<Sequence> sample(const TensorNetwork& net, std::size_t count, const CounterRng& rng) {
    const BornMarginals marginals(net);
    const std::size_t n = net.num_sites();
    CounterRng stream = rng.split(streams::sampling);
    // Prefixes repeat across draws; conditionals are exact, so reuse them.
    std::map<Sequence, std::vector<double>> cache;
    constexpr std::size_t kCacheLimit = 1 << 18;
    std::vector<Sequence> draws;
    draws.reserve(count);
    for (std::size_t d = 0; d < count; ++d) {
        Sequence s;
        s.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            stream.set_counter(d * n + k);
            const double u = stream.uniform();
            auto it = cache.find(s);
            if (it == cache.end()) {
                std::vector<double> fresh = conditional_distribution(marginals, s);
                if (cache.size() >= kCacheLimit) cache.clear();
                it = cache.emplace(s, std::move(fresh)).first;
            }
            const std::vector<double>& p = it->second;
            double cumulative = 0.0;
            std::size_t pick = p.size();
            std::size_t last_positive = 0;
            for (std::size_t x = 0; x < p.size(); ++x) {
                if (p[x] > 0.0) last_positive = x;
                cumulative += p[x];
                if (u < cumulative) {
                    pick = x;
                    break;
                }
            }
            // Rounding can leave the total a hair below u.
            if (pick == p.size()) pick = last_positive;
            s.push_back(pick);
        }
        draws.push_back(std::move(s));
    }
    return draws;
}

}  // namespace tnlm
