// tnlm: train, sample, evaluate and inspect isometric tensor-network models.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tnlm/corpus.hpp"
#include "tnlm/diagnostics.hpp"
#include "tnlm/errors.hpp"
#include "tnlm/manifold.hpp"
#include "tnlm/model_io.hpp"
#include "tnlm/rng.hpp"
#include "tnlm/sampling.hpp"
#include "tnlm/training.hpp"

using namespace tnlm;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error("cannot read " + path);
    return ss.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    return out;
}

SymbolSet read_vocab_file(const std::string& path) {
    std::istringstream in(read_file(path));
    return read_vocab(in);
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

std::vector<Sequence> expand(const SampleMultiset& s) {
    std::vector<Sequence> out;
    for (const auto& [seq, m] : s.entries())
        for (std::uint64_t k = 0; k < m; ++k) out.push_back(seq);
    return out;
}

struct TrainArgs {
    std::string graph = "tree", vocab, data, out, trace, scheme = "chars";
    std::size_t n = 0, steps = 1000, batch = 1, stride = 1, checkpoint_every = 0;
    std::vector<std::size_t> bond_dims{8};
    double eta = 0.05;
    std::uint64_t seed = 0;
    bool no_shuffle = false;
};

int run_vocab(const std::string& data, const std::string& scheme, std::size_t max_size, const std::string& out) {
    const SymbolSet symbols = build_vocab(read_file(data), parse_token_scheme(scheme), max_size);
    auto os = open_out(out);
    write_vocab(symbols, os);
    std::cout << "symbols: " << symbols.size() << (symbols.oov() ? " (including <unk>)" : "") << '\n';
    return 0;
}

int run_train(const TrainArgs& a) {
    const TokenScheme scheme = parse_token_scheme(a.scheme);
    const SymbolSet symbols = read_vocab_file(a.vocab);
    const auto tokens = encode(read_file(a.data), symbols, scheme);
    const SampleMultiset sample = windows(tokens, a.n, a.stride);

    const Quiver q = build_graph(a.graph, a.n);
    const auto dims = graph_edge_dims(q, symbols.size(), a.bond_dims);
    CounterRng init(a.seed, streams::init);
    const TensorNetwork net0 = random_network(q, dims, init);

    TrainConfig cfg;
    cfg.learning_rate = a.eta;
    cfg.steps = a.steps;
    cfg.batch_size = a.batch;
    cfg.seed = a.seed;
    cfg.shuffle = !a.no_shuffle;
    cfg.checkpoint_every = a.checkpoint_every;

    const GraphSpec spec{a.graph, a.n, a.bond_dims};
    auto bundle = [&](const TensorNetwork& net) { return ModelBundle{net, symbols, scheme, spec, a.seed}; };
    const CheckpointFn checkpoint = [&](std::size_t step, const TensorNetwork& net) {
        save_model(bundle(net), std::filesystem::path(a.out + ".step" + std::to_string(step)));
    };
    const TrainResult result = train(net0, sample, cfg, checkpoint);

    save_model(bundle(result.network), std::filesystem::path(a.out));
    const std::string trace_path = a.trace.empty() ? a.out + ".trace.csv" : a.trace;
    auto trace_os = open_out(trace_path);
    write_loss_trace_csv(result.trace, trace_os);

    const double initial =
        negative_log_likelihood(net0, sample).value / static_cast<double>(sample.cardinality());
    std::cout << "windows: " << sample.cardinality() << '\n'
              << "initial_loss: " << num(initial) << '\n'
              << "final_loss: "
              << num(result.trace.records.empty() ? initial : result.trace.records.back().loss) << '\n'
              << "model: " << a.out << '\n'
              << "trace: " << trace_path << '\n';
    return 0;
}

int run_sample(const std::string& model_path, std::size_t count, std::uint64_t seed, const std::string& out) {
    const ModelBundle m = load_model(std::filesystem::path(model_path));
    const auto draws = sample(m.network, count, CounterRng(seed));
    std::ostringstream os;
    for (const auto& s : draws) os << detokenize(s, m.symbols, m.scheme) << '\n';
    if (out.empty()) {
        std::cout << os.str();
    } else {
        auto f = open_out(out);
        f << os.str();
    }
    return 0;
}

int run_eval(const std::string& model_path, const std::string& data, std::size_t stride) {
    const ModelBundle m = load_model(std::filesystem::path(model_path));
    const auto tokens = encode(read_file(data), m.symbols, m.scheme);
    const SampleMultiset s = windows(tokens, m.network.num_sites(), stride);
    const ObjectiveValue f = negative_log_likelihood(m.network, s);
    const double per_window = f.value / static_cast<double>(s.cardinality());
    const double per_token = per_window / static_cast<double>(m.network.num_sites());
    std::cout << "windows: " << s.cardinality() << '\n'
              << "free_energy_per_window: " << num(per_window) << '\n'
              << "cross_entropy_per_token: " << num(per_token) << '\n'
              << "perplexity: " << num(std::exp(per_token)) << '\n';
    if (!f.finite()) std::cout << "zero_probability_window: " << detokenize(*f.culprit, m.symbols, m.scheme) << '\n';
    return 0;
}

void emit_decay(const std::vector<std::pair<std::string, ModelDecay>>& models, const std::string& report) {
    write_decay_table(models, std::cout);
    auto os = open_out(report);
    write_decay_json(models, os);
    std::cout << "report: " << report << '\n';
}

int run_mi(const std::string& model_path, const std::string& data, const std::string& vocab,
           const std::string& scheme_name, std::size_t l_max, std::string report) {
    if (model_path.empty() == data.empty()) throw ArgumentError("mi: give exactly one of --model or --data");
    if (model_path.empty()) {
        const TokenScheme scheme = parse_token_scheme(scheme_name);
        const std::string text = read_file(data);
        const SymbolSet symbols = vocab.empty() ? build_vocab(text, scheme, std::size_t(-1) >> 1)
                                                : read_vocab_file(vocab);
        const auto samples = expand(windows(encode(text, symbols, scheme), l_max + 1, 1));
        const auto est = pairwise_mutual_information_data(samples, 0, 1);
        std::cout << "# plug-in estimate from " << samples.size() << " windows; leading bias at l=1: "
                  << num(est.bias) << " nats\n";
        if (report.empty()) report = data + ".mi.json";
        emit_decay({{"data", analyze_decay(decay_curve(samples, l_max))}}, report);
    } else {
        const ModelBundle m = load_model(std::filesystem::path(model_path));
        if (report.empty()) report = model_path + ".mi.json";
        emit_decay({{"model", analyze_decay(decay_curve(m.network, l_max))}}, report);
    }
    return 0;
}

int run_dim(const std::string& model_path) {
    const ModelBundle m = load_model(std::filesystem::path(model_path));
    const TensorNetwork& net = m.network;
    const std::size_t real_dim = real_parameter_dimension(net);
    const std::size_t gauge_rank = gauge_orbit_rank(net);
    if (net.quiver().is_tree()) {
        const std::size_t moduli = moduli_dimension(net);
        const bool ok = 2 * moduli + gauge_rank == real_dim;
        std::cout << "moduli_dimension: " << moduli << '\n';
        std::cout << "real_parameter_dimension: " << real_dim << '\n'
                  << "gauge_orbit_rank: " << gauge_rank << '\n'
                  << "gauge_rank_consistent: " << (ok ? "yes" : "no") << '\n';
        return ok ? 0 : 2;
    }
    std::cout << "moduli_dimension: unavailable (not a tree)\n"
              << "real_parameter_dimension: " << real_dim << '\n'
              << "gauge_orbit_rank: " << gauge_rank << '\n'
              << "quotient_dimension_estimate: " << num((static_cast<double>(real_dim) - gauge_rank) / 2.0) << '\n';
    return 0;
}

int run_inspect(const std::string& model_path) {
    const ModelBundle m = load_model(std::filesystem::path(model_path));
    const TensorNetwork& net = m.network;
    const Quiver& q = net.quiver();
    std::cout << "graph: " << m.graph.kind << " n=" << m.graph.n << " bond_dims=";
    for (std::size_t k = 0; k < m.graph.bond_dims.size(); ++k) std::cout << (k ? "," : "") << m.graph.bond_dims[k];
    std::cout << '\n'
              << "vertices: " << q.num_vertices() << "  edges: " << q.num_edges() << " (in " << q.in_edges().size()
              << ", out " << q.out_edges().size() << ", internal " << q.internal_edges().size() << ")\n"
              << "layers: " << net.layering().size() << "  tree: " << (q.is_tree() ? "yes" : "no") << '\n'
              << "symbols: " << m.symbols.size() << "  scheme: " << to_string(m.scheme) << "  seed: " << m.seed
              << '\n';
    std::cout << "edge\tkind\tsource\ttarget\tdim\n";
    for (EdgeId e = 0; e < q.num_edges(); ++e) {
        const Edge& ed = q.edge(e);
        std::cout << e << '\t' << to_string(ed.kind) << '\t' << (ed.source ? std::to_string(*ed.source) : "-")
                  << '\t' << (ed.target ? std::to_string(*ed.target) : "-") << '\t' << net.edge_dim(e) << '\n';
    }
    std::cout << "vertex\tlayer\tshape\tisometry_violation\n";
    for (VertexId v = 0; v < net.num_vertices(); ++v) {
        std::cout << v << '\t' << net.layering().layer_of[v] << '\t';
        const Shape shape = net.vertex_shape(v);
        for (std::size_t k = 0; k < shape.size(); ++k) std::cout << (k ? "x" : "") << shape[k];
        std::cout << '\t' << num(isometry_violation(net.tensor(v), net.split(v))) << '\n';
    }
    std::cout << "max_isometry_violation: " << num(net.max_isometry_violation()) << '\n';
    return 0;
}

int run_compare(const EnsembleConfig& cfg, const std::string& report) {
    const DecayComparison c = chain_vs_tree_ensembles(cfg);
    emit_decay({{"chain", c.a}, {"tree", c.b}}, report);
    const double gap = c.a.exponential_advantage() - c.b.exponential_advantage();
    std::cout << "delta_r2_chain_minus_tree: " << num(gap) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Isometric tensor-network sequence models"};
    app.require_subcommand(1);

    std::string data, scheme = "chars", out;
    std::size_t max_size = 1000;
    auto* vocab_cmd = app.add_subcommand("vocab", "Build a vocabulary file from text");
    vocab_cmd->add_option("--data", data, "Text file")->required();
    vocab_cmd->add_option("--scheme", scheme, "bytes | chars | words");
    vocab_cmd->add_option("--max-size", max_size, "Maximum symbols before <unk>");
    vocab_cmd->add_option("--out", out, "Vocabulary file to write")->required();

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Train a model on text windows");
    train_cmd->add_option("--graph", ta.graph, "chain | tree | mera")->required();
    train_cmd->add_option("--n", ta.n, "Sequence length")->required();
    train_cmd->add_option("--bond-dims", ta.bond_dims, "One cap, or one value per internal edge")->delimiter(',');
    train_cmd->add_option("--vocab", ta.vocab, "Vocabulary file")->required();
    train_cmd->add_option("--data", ta.data, "Training text")->required();
    train_cmd->add_option("--eta", ta.eta, "Learning rate");
    train_cmd->add_option("--steps", ta.steps, "SGD steps");
    train_cmd->add_option("--batch", ta.batch, "Batch size");
    train_cmd->add_option("--seed", ta.seed, "Seed for initialization and shuffling");
    train_cmd->add_option("--out", ta.out, "Model file to write")->required();
    train_cmd->add_option("--scheme", ta.scheme, "bytes | chars | words");
    train_cmd->add_option("--stride", ta.stride, "Window stride");
    train_cmd->add_option("--trace", ta.trace, "Loss trace CSV (default OUT.trace.csv)");
    train_cmd->add_option("--checkpoint-every", ta.checkpoint_every, "Write OUT.stepK every K steps");
    train_cmd->add_flag("--no-shuffle", ta.no_shuffle, "Cycle draws in lexicographic order");

    std::string model;
    std::size_t count = 0, stride = 1, l_max = 8;
    std::uint64_t seed = 0;
    auto* sample_cmd = app.add_subcommand("sample", "Draw sequences from a model");
    sample_cmd->add_option("--model", model, "Model file")->required();
    sample_cmd->add_option("--count", count, "Number of sequences")->required();
    sample_cmd->add_option("--seed", seed, "Sampling seed");
    sample_cmd->add_option("--out", out, "Write to file instead of stdout");

    auto* eval_cmd = app.add_subcommand("eval", "Free energy, cross-entropy and perplexity on text");
    eval_cmd->add_option("--model", model, "Model file")->required();
    eval_cmd->add_option("--data", data, "Text file")->required();
    eval_cmd->add_option("--stride", stride, "Window stride");

    std::string vocab, report;
    auto* mi_cmd = app.add_subcommand("mi", "Mutual-information decay curve and fits");
    mi_cmd->add_option("--model", model, "Model file");
    mi_cmd->add_option("--data", data, "Text file");
    mi_cmd->add_option("--vocab", vocab, "Vocabulary for --data (default: all tokens)");
    mi_cmd->add_option("--scheme", scheme, "Tokenization for --data");
    mi_cmd->add_option("--lmax", l_max, "Largest distance")->required();
    mi_cmd->add_option("--report", report, "JSON report path");

    auto* dim_cmd = app.add_subcommand("dim", "Moduli dimension and gauge-rank check");
    dim_cmd->add_option("--model", model, "Model file")->required();

    auto* inspect_cmd = app.add_subcommand("inspect", "Graph summary, dimensions, isometry violations");
    inspect_cmd->add_option("--model", model, "Model file")->required();

    EnsembleConfig ec;
    report = "";
    auto* compare_cmd = app.add_subcommand("compare", "Chain versus tree decay over random ensembles");
    compare_cmd->add_option("--n", ec.n, "Sequence length (power of two)");
    compare_cmd->add_option("--w", ec.symbol_dim, "Site dimension");
    compare_cmd->add_option("--chain-bond", ec.chain_bond, "Chain bond dimension");
    compare_cmd->add_option("--tree-bond", ec.tree_bond, "Tree bond cap");
    compare_cmd->add_option("--draws", ec.draws, "Networks per ensemble");
    compare_cmd->add_option("--lmax", ec.l_max, "Largest distance (default n - 1)");
    compare_cmd->add_option("--seed", ec.seed, "Ensemble seed");
    compare_cmd->add_option("--report", report, "JSON report path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*vocab_cmd) return run_vocab(data, scheme, max_size, out);
        if (*train_cmd) return run_train(ta);
        if (*sample_cmd) return run_sample(model, count, seed, out);
        if (*eval_cmd) return run_eval(model, data, stride);
        if (*mi_cmd) return run_mi(model, data, vocab, scheme, l_max, report);
        if (*dim_cmd) return run_dim(model);
        if (*inspect_cmd) return run_inspect(model);
        if (*compare_cmd) return run_compare(ec, report);
    } catch (const std::exception& e) {
        std::cerr << "tnlm: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
