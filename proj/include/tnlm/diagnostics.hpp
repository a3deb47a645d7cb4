#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tnlm/model.hpp"

namespace tnlm {

class CounterRng;

/// Mutual information values at or below this are treated as zero when fitting.
inline constexpr double kInformationFloor = 1e-12;

struct DecayPoint {
    std::size_t distance = 0;
    double information = 0.0;  ///< nats
};

struct DecayCurve {
    std::vector<DecayPoint> points;

    /// Distances strictly increasing, informations finite and >= 0.
    void validate() const;
};

enum class DecayKind { power, exponential };
std::string to_string(DecayKind kind);

/// power:       I(l) = amplitude * l^(-rate) + offset
/// exponential: I(l) = amplitude * exp(-rate * l)     (offset = 0)
struct DecayFit {
    DecayKind kind = DecayKind::power;
    double amplitude = 0.0;
    double rate = 0.0;
    double offset = 0.0;
    double residual = 0.0;   ///< sum of squared residuals of log I
    double r_squared = 0.0;  ///< 1 - residual / total sum of squares of log I
    std::size_t points_used = 0;
    bool degenerate = false;
    std::string note;

    /// Non-degenerate with a positive decay rate.
    bool accepted() const { return !degenerate && rate > 0.0; }
    double predict(double distance) const;
};

/// I = D(p_ij || p_i (x) p_j) of a joint probability table. Float noise down
/// to -1e-12 is clipped to 0; anything more negative throws.
double mutual_information(const std::vector<std::vector<double>>& joint);

/// Exact two-site mutual information of a pure-state model.
double pairwise_mutual_information_model(const BornMarginals& marginals, std::size_t i, std::size_t j);
double pairwise_mutual_information_model(const TensorNetwork& net, std::size_t i, std::size_t j);

/// Plug-in estimate from samples. `bias` is the leading-order positive bias
/// (r_i - 1)(r_j - 1) / (2N) of the plug-in estimator, with r the number of
/// observed symbols at each position.
struct InformationEstimate {
    double value = 0.0;
    double bias = 0.0;
    std::size_t samples = 0;
};
InformationEstimate pairwise_mutual_information_data(const std::vector<Sequence>& samples, std::size_t i,
                                                     std::size_t j);

/// Standard deviation of the plug-in estimate over bootstrap resamples.
double bootstrap_information_stddev(const std::vector<Sequence>& samples, std::size_t i, std::size_t j,
                                    std::size_t replicates, CounterRng& rng);

/// I(l) for l = 1..l_max, averaged over every position pair at distance l.
DecayCurve decay_curve(const BornMarginals& marginals, std::size_t l_max);
DecayCurve decay_curve(const TensorNetwork& net, std::size_t l_max);
DecayCurve decay_curve(const std::vector<Sequence>& samples, std::size_t l_max);

/// Pointwise mean of curves sampled at the same distances.
DecayCurve average_curves(const std::vector<DecayCurve>& curves);

/// Least squares in log I over points above kInformationFloor. The power
/// law's offset is profiled over a 100-point grid on [0, min I) and refined
/// by golden-section search around the best grid point. Flat curves and
/// non-positive rates are flagged degenerate. Throws FitError with fewer
/// than three usable points.
DecayFit fit_decay(const DecayCurve& curve, DecayKind kind);

/// fit_decay, but a FitError becomes a degenerate fit carrying the message.
DecayFit fit_decay_or_flag(const DecayCurve& curve, DecayKind kind);

struct ModelDecay {
    DecayCurve curve;
    DecayFit power;
    DecayFit exponential;

    /// r^2(exponential) - r^2(power); positive means exponential fits better.
    double exponential_advantage() const { return exponential.r_squared - power.r_squared; }
    /// "exponential", "power", or "undetermined" when both fits are degenerate.
    std::string verdict() const;
};

ModelDecay analyze_decay(DecayCurve curve);

struct DecayComparison {
    ModelDecay a;
    ModelDecay b;
};

/// Curves and both fits for two models sharing n and site dimensions.
DecayComparison compare_decay(const TensorNetwork& net_a, const TensorNetwork& net_b, std::size_t l_max);

/// Random-network ensembles of a chain (MPS) and a binary tree with the same
/// n and site dimension. Network d of each family is drawn from stream
/// streams::init of seed, advancing through the draws in order.
struct EnsembleConfig {
    std::size_t n = 32;
    std::size_t symbol_dim = 2;
    std::size_t chain_bond = 4;
    std::size_t tree_bond = 8;
    std::size_t draws = 20;
    std::size_t l_max = 0;  ///< 0 means n - 1
    std::uint64_t seed = 0;
};

/// a: averaged chain curve, b: averaged tree curve, each with both fits.
DecayComparison chain_vs_tree_ensembles(const EnsembleConfig& cfg);

/// Plain-text table: one row per distance, then one row per fit.
void write_decay_table(const std::vector<std::pair<std::string, ModelDecay>>& models, std::ostream& os);
/// Structured (JSON) report of the same content.
void write_decay_json(const std::vector<std::pair<std::string, ModelDecay>>& models, std::ostream& os);

}  // namespace tnlm
