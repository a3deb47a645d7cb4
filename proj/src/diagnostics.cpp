#include "tnlm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "tnlm/errors.hpp"
#include "tnlm/rng.hpp"

namespace tnlm {

void DecayCurve::validate() const {
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& p = points[k];
        if (p.distance == 0) throw ArgumentError("decay curve: distance must be positive");
        if (k > 0 && p.distance <= points[k - 1].distance)
            throw ArgumentError("decay curve: distances must be strictly increasing");
        if (!std::isfinite(p.information) || p.information < 0.0)
            throw ArgumentError("decay curve: information must be finite and non-negative");
    }
}

std::string to_string(DecayKind kind) { return kind == DecayKind::power ? "power" : "exponential"; }

double DecayFit::predict(double distance) const {
    if (kind == DecayKind::power) return amplitude * std::pow(distance, -rate) + offset;
    return amplitude * std::exp(-rate * distance);
}

double mutual_information(const std::vector<std::vector<double>>& joint) {
    if (joint.empty() || joint.front().empty()) throw ArgumentError("mutual_information: empty table");
    const std::size_t rows = joint.size(), cols = joint.front().size();
    std::vector<double> pr(rows, 0.0), pc(cols, 0.0);
    std::vector<std::vector<double>> p = joint;
    for (std::size_t a = 0; a < rows; ++a) {
        if (p[a].size() != cols) throw ShapeError("mutual_information: ragged table");
        for (std::size_t b = 0; b < cols; ++b) {
            if (!(p[a][b] >= -kInformationFloor)) throw ArgumentError("mutual_information: negative probability");
            p[a][b] = std::max(p[a][b], 0.0);
            pr[a] += p[a][b];
            pc[b] += p[a][b];
        }
    }
    double info = 0.0;
    for (std::size_t a = 0; a < rows; ++a)
        for (std::size_t b = 0; b < cols; ++b) {
            const double pab = p[a][b];
            if (pab > 0.0) info += pab * std::log(pab / (pr[a] * pc[b]));
        }
    if (info < -1e-12) throw Error("mutual_information: negative value " + std::to_string(info));
    return std::max(info, 0.0);
}

double pairwise_mutual_information_model(const BornMarginals& marginals, std::size_t i, std::size_t j) {
    return mutual_information(marginals.two_site_joint(i, j));
}

double pairwise_mutual_information_model(const TensorNetwork& net, std::size_t i, std::size_t j) {
    return pairwise_mutual_information_model(BornMarginals(net), i, j);
}

namespace {

void check_samples(const std::vector<Sequence>& samples, std::size_t i, std::size_t j) {
    if (samples.size() < 2) throw ArgumentError("mutual information: need at least two samples");
    const std::size_t n = samples.front().size();
    for (const auto& s : samples)
        if (s.size() != n) throw ShapeError("mutual information: samples differ in length");
    if (i >= n || j >= n || i == j) throw ArgumentError("mutual information: bad position pair");
}

// Plug-in estimate over the draws listed in `pick` (indices into samples).
InformationEstimate plug_in(const std::vector<Sequence>& samples, const std::vector<std::size_t>& pick,
                            std::size_t i, std::size_t j) {
    std::map<std::pair<std::size_t, std::size_t>, double> pair_counts;
    std::map<std::size_t, double> ci, cj;
    for (std::size_t d : pick) {
        const auto& s = samples[d];
        pair_counts[{s[i], s[j]}] += 1.0;
        ci[s[i]] += 1.0;
        cj[s[j]] += 1.0;
    }
    const double total = static_cast<double>(pick.size());
    double info = 0.0;
    for (const auto& [key, c] : pair_counts) info += c / total * std::log(c * total / (ci[key.first] * cj[key.second]));
    InformationEstimate est;
    est.value = std::max(info, 0.0);
    est.samples = pick.size();
    est.bias = (static_cast<double>(ci.size()) - 1.0) * (static_cast<double>(cj.size()) - 1.0) / (2.0 * total);
    return est;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = k;
    return v;
}

void check_l_max(std::size_t n, std::size_t l_max) {
    if (l_max == 0) throw ArgumentError("decay_curve: l_max must be at least 1");
    if (l_max >= n)
        throw ArgumentError("decay_curve: l_max " + std::to_string(l_max) + " must be below n = " +
                            std::to_string(n));
}

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    LineFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    return f;
}

struct PowerCandidate {
    double amplitude = 0.0, rate = 0.0, offset = 0.0;
    double residual = std::numeric_limits<double>::infinity();
};

PowerCandidate power_with_offset(const std::vector<double>& l, const std::vector<double>& info, double offset) {
    std::vector<double> x(l.size()), z(l.size());
    for (std::size_t k = 0; k < l.size(); ++k) {
        x[k] = std::log(l[k]);
        z[k] = std::log(info[k] - offset);
    }
    const LineFit line = least_squares_line(x, z);
    PowerCandidate c;
    c.amplitude = std::exp(line.intercept);
    c.rate = -line.slope;
    c.offset = offset;
    double r = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) {
        const double pred = c.amplitude * std::pow(l[k], -c.rate) + offset;
        const double d = std::log(info[k]) - std::log(pred);
        r += d * d;
    }
    c.residual = std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    return c;
}

}  // namespace

InformationEstimate pairwise_mutual_information_data(const std::vector<Sequence>& samples, std::size_t i,
                                                     std::size_t j) {
    check_samples(samples, i, j);
    return plug_in(samples, all_indices(samples.size()), i, j);
}

double bootstrap_information_stddev(const std::vector<Sequence>& samples, std::size_t i, std::size_t j,
                                    std::size_t replicates, CounterRng& rng) {
    check_samples(samples, i, j);
    if (replicates < 2) throw ArgumentError("bootstrap: need at least two replicates");
    std::vector<double> values;
    std::vector<std::size_t> pick(samples.size());
    for (std::size_t r = 0; r < replicates; ++r) {
        for (auto& p : pick) p = static_cast<std::size_t>(rng.uniform_index(samples.size()));
        values.push_back(plug_in(samples, pick, i, j).value);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(values.size() - 1));
}

DecayCurve decay_curve(const BornMarginals& marginals, std::size_t l_max) {
    const std::size_t n = marginals.network().num_sites();
    check_l_max(n, l_max);
    DecayCurve curve;
    for (std::size_t l = 1; l <= l_max; ++l) {
        double sum = 0.0;
        for (std::size_t i = 0; i + l < n; ++i) sum += pairwise_mutual_information_model(marginals, i, i + l);
        curve.points.push_back({l, sum / static_cast<double>(n - l)});
    }
    return curve;
}

DecayCurve decay_curve(const TensorNetwork& net, std::size_t l_max) { return decay_curve(BornMarginals(net), l_max); }

DecayCurve decay_curve(const std::vector<Sequence>& samples, std::size_t l_max) {
    if (samples.empty()) throw ArgumentError("decay_curve: no samples");
    const std::size_t n = samples.front().size();
    check_l_max(n, l_max);
    DecayCurve curve;
    for (std::size_t l = 1; l <= l_max; ++l) {
        double sum = 0.0;
        for (std::size_t i = 0; i + l < n; ++i) sum += pairwise_mutual_information_data(samples, i, i + l).value;
        curve.points.push_back({l, sum / static_cast<double>(n - l)});
    }
    return curve;
}

DecayCurve average_curves(const std::vector<DecayCurve>& curves) {
    if (curves.empty()) throw ArgumentError("average_curves: no curves");
    DecayCurve mean = curves.front();
    for (std::size_t c = 1; c < curves.size(); ++c) {
        if (curves[c].points.size() != mean.points.size())
            throw ShapeError("average_curves: curves have different lengths");
        for (std::size_t k = 0; k < mean.points.size(); ++k) {
            if (curves[c].points[k].distance != mean.points[k].distance)
                throw ShapeError("average_curves: curves sampled at different distances");
            mean.points[k].information += curves[c].points[k].information;
        }
    }
    for (auto& p : mean.points) p.information /= static_cast<double>(curves.size());
    return mean;
}

DecayFit fit_decay(const DecayCurve& curve, DecayKind kind) {
    curve.validate();
    std::vector<double> l, info, y;
    for (const auto& p : curve.points)
        if (p.information > kInformationFloor) {
            l.push_back(static_cast<double>(p.distance));
            info.push_back(p.information);
            y.push_back(std::log(p.information));
        }
    if (l.size() < 3)
        throw FitError("decay fit needs at least 3 points above " + std::to_string(kInformationFloor) + ", got " +
                       std::to_string(l.size()));

    DecayFit fit;
    fit.kind = kind;
    fit.points_used = l.size();
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(y.size());
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - ybar) * (v - ybar);

    if (ss_tot <= 1e-20 * static_cast<double>(y.size())) {
        fit.degenerate = true;
        fit.note = "flat curve: decay rate not identifiable";
        fit.amplitude = std::exp(ybar);
        fit.r_squared = 0.0;
        return fit;
    }

    if (kind == DecayKind::exponential) {
        const LineFit line = least_squares_line(l, y);
        fit.amplitude = std::exp(line.intercept);
        fit.rate = -line.slope;
        double r = 0.0;
        for (std::size_t k = 0; k < l.size(); ++k) {
            const double d = y[k] - (line.intercept + line.slope * l[k]);
            r += d * d;
        }
        fit.residual = r;
    } else {
        const double min_info = *std::min_element(info.begin(), info.end());
        constexpr int kGrid = 100;
        const double step = min_info / kGrid;
        PowerCandidate best;
        int best_k = 0;
        for (int k = 0; k < kGrid; ++k) {
            PowerCandidate c = power_with_offset(l, info, step * k);
            if (c.residual < best.residual) {
                best = c;
                best_k = k;
            }
        }
        // Golden-section search on the grid cell either side of the best point.
        double lo = best_k > 0 ? step * (best_k - 1) : 0.0;
        double hi = std::min(step * (best_k + 1), min_info * (1.0 - 1e-9));
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        PowerCandidate ca = power_with_offset(l, info, a), cb = power_with_offset(l, info, b);
        for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, min_info); ++it) {
            if (ca.residual <= cb.residual) {
                hi = b;
                b = a;
                cb = ca;
                a = hi - g * (hi - lo);
                ca = power_with_offset(l, info, a);
            } else {
                lo = a;
                a = b;
                ca = cb;
                b = lo + g * (hi - lo);
                cb = power_with_offset(l, info, b);
            }
        }
        for (const auto& c : {ca, cb})
            if (c.residual < best.residual) best = c;
        fit.amplitude = best.amplitude;
        fit.rate = best.rate;
        fit.offset = best.offset;
        fit.residual = best.residual;
    }
    fit.r_squared = 1.0 - fit.residual / ss_tot;
    if (!(fit.rate > 0.0)) {
        fit.degenerate = true;
        fit.note = "non-positive decay rate";
    }
    return fit;
}

DecayFit fit_decay_or_flag(const DecayCurve& curve, DecayKind kind) {
    try {
        return fit_decay(curve, kind);
    } catch (const FitError& e) {
        DecayFit fit;
        fit.kind = kind;
        fit.degenerate = true;
        fit.note = e.what();
        return fit;
    }
}

std::string ModelDecay::verdict() const {
    if (power.degenerate && exponential.degenerate) return "undetermined";
    if (power.degenerate) return "exponential";
    if (exponential.degenerate) return "power";
    return exponential_advantage() > 0.0 ? "exponential" : "power";
}

ModelDecay analyze_decay(DecayCurve curve) {
    ModelDecay d;
    d.power = fit_decay_or_flag(curve, DecayKind::power);
    d.exponential = fit_decay_or_flag(curve, DecayKind::exponential);
    d.curve = std::move(curve);
    return d;
}

DecayComparison compare_decay(const TensorNetwork& net_a, const TensorNetwork& net_b, std::size_t l_max) {
    if (net_a.site_dims() != net_b.site_dims())
        throw ArgumentError("compare_decay: models differ in length or site dimensions");
    return {analyze_decay(decay_curve(net_a, l_max)), analyze_decay(decay_curve(net_b, l_max))};
}

DecayComparison chain_vs_tree_ensembles(const EnsembleConfig& cfg) {
    if (cfg.draws == 0) throw ArgumentError("ensemble: draws must be positive");
    CounterRng rng(cfg.seed, streams::init);
    const Quiver chain = build_chain(cfg.n);
    const Quiver tree = build_binary_tree(cfg.n);
    const auto chain_dims = isometric_edge_dims(chain, cfg.symbol_dim, cfg.chain_bond);
    const auto tree_dims = isometric_edge_dims(tree, cfg.symbol_dim, cfg.tree_bond);
    const std::size_t l_max = cfg.l_max == 0 ? cfg.n - 1 : cfg.l_max;
    std::vector<DecayCurve> chain_curves, tree_curves;
    for (std::size_t d = 0; d < cfg.draws; ++d) {
        chain_curves.push_back(decay_curve(random_network(chain, chain_dims, rng), l_max));
        tree_curves.push_back(decay_curve(random_network(tree, tree_dims, rng), l_max));
    }
    return {analyze_decay(average_curves(chain_curves)), analyze_decay(average_curves(tree_curves))};
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

nlohmann::json fit_json(const DecayFit& f) {
    nlohmann::json j;
    j["kind"] = to_string(f.kind);
    j["amplitude"] = f.amplitude;
    j["rate"] = f.rate;
    j["offset"] = f.offset;
    j["residual"] = f.residual;
    j["r_squared"] = f.r_squared;
    j["points_used"] = f.points_used;
    j["degenerate"] = f.degenerate;
    j["note"] = f.note;
    return j;
}

}  // namespace

void write_decay_table(const std::vector<std::pair<std::string, ModelDecay>>& models, std::ostream& os) {
    if (models.empty()) return;
    os << "distance";
    for (const auto& [name, d] : models) os << '\t' << name;
    os << '\n';
    const auto& ref = models.front().second.curve.points;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        os << ref[k].distance;
        for (const auto& [name, d] : models)
            os << '\t' << (k < d.curve.points.size() ? fmt(d.curve.points[k].information) : "");
        os << '\n';
    }
    os << '\n' << "model\tfit\tamplitude\trate\toffset\tr_squared\tstatus\n";
    for (const auto& [name, d] : models) {
        for (const DecayFit* f : {&d.power, &d.exponential}) {
            os << name << '\t' << to_string(f->kind) << '\t' << fmt(f->amplitude) << '\t' << fmt(f->rate) << '\t'
               << fmt(f->offset) << '\t' << fmt(f->r_squared) << '\t'
               << (f->degenerate ? "degenerate: " + f->note : "ok") << '\n';
        }
        os << name << "\tverdict\t" << d.verdict() << "\t(r2_exp - r2_pow = " << fmt(d.exponential_advantage())
           << ")\n";
    }
}

void write_decay_json(const std::vector<std::pair<std::string, ModelDecay>>& models, std::ostream& os) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [name, d] : models) {
        nlohmann::json m;
        m["name"] = name;
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : d.curve.points) pts.push_back({{"distance", p.distance}, {"information", p.information}});
        m["curve"] = pts;
        m["power"] = fit_json(d.power);
        m["exponential"] = fit_json(d.exponential);
        m["exponential_advantage"] = d.exponential_advantage();
        m["verdict"] = d.verdict();
        out.push_back(m);
    }
    os << out.dump(2) << '\n';
}

}  // namespace tnlm
