#include "tnlm/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "json.hpp"
#include "tnlm/errors.hpp"
#include "tnlm/rng.hpp"

namespace tnlm {

namespace {

constexpr char kMagic[16] = {'T', 'N', 'L', 'M', '\0', 'I', 'S', 'O', 'T', 'N', '\0', 'M', 'O', 'D', 'E', 'L'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out += static_cast<char>((v >> (8 * k)) & 0xFF);
}

std::uint64_t get_u64(std::string_view in, std::size_t pos) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + k])) << (8 * k);
    return v;
}

void put_f64(std::string& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

double get_f64(std::string_view in, std::size_t pos) { return std::bit_cast<double>(get_u64(in, pos)); }

nlohmann::json edge_json(const Edge& e, std::size_t id, std::size_t dim) {
    nlohmann::json j;
    j["id"] = id;
    j["kind"] = to_string(e.kind);
    j["source"] = e.source ? nlohmann::json(*e.source) : nlohmann::json(nullptr);
    j["target"] = e.target ? nlohmann::json(*e.target) : nlohmann::json(nullptr);
    j["dim"] = dim;
    return j;
}

EdgeKind parse_edge_kind(const std::string& s) {
    if (s == "internal") return EdgeKind::internal;
    if (s == "in") return EdgeKind::in;
    if (s == "out") return EdgeKind::out;
    throw FormatError("model file: unknown edge kind '" + s + "'");
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

Quiver build_graph(std::string_view kind, std::size_t n) {
    if (kind == "chain") return build_chain(n);
    if (kind == "tree") return build_binary_tree(n);
    if (kind == "mera") return build_mera(n);
    throw ArgumentError("unknown graph kind '" + std::string(kind) + "' (expected chain, tree or mera)");
}

std::vector<std::size_t> graph_edge_dims(const Quiver& q, std::size_t symbol_dim,
                                         const std::vector<std::size_t>& bond_dims) {
    if (bond_dims.empty()) throw ArgumentError("bond dimensions: empty list");
    for (auto d : bond_dims)
        if (d == 0) throw ArgumentError("bond dimensions must be positive");
    if (bond_dims.size() == 1) return isometric_edge_dims(q, symbol_dim, bond_dims.front());
    const auto& internal = q.internal_edges();
    if (bond_dims.size() != internal.size())
        throw ArgumentError("bond dimensions: expected 1 or " + std::to_string(internal.size()) + " values, got " +
                            std::to_string(bond_dims.size()));
    std::vector<std::size_t> dims(q.num_edges(), 1);
    for (auto e : q.out_edges()) dims[e] = symbol_dim;
    for (std::size_t k = 0; k < internal.size(); ++k) dims[internal[k]] = bond_dims[k];
    return dims;
}

void save_model(const ModelBundle& model, std::ostream& os) {
    const TensorNetwork& net = model.network;
    const Quiver& q = net.quiver();
    if (model.symbols.size() == 0) throw ArgumentError("save_model: empty symbol set");
    for (auto e : q.out_edges())
        if (net.edge_dim(e) != model.symbols.size())
            throw ArgumentError("save_model: site dimension differs from the number of symbols");

    nlohmann::json h;
    h["format_version"] = kModelFormatVersion;
    h["graph"] = {{"kind", model.graph.kind}, {"n", model.graph.n}, {"bond_dims", model.graph.bond_dims}};
    nlohmann::json vertices = nlohmann::json::array();
    for (VertexId v = 0; v < net.num_vertices(); ++v)
        vertices.push_back({{"id", v}, {"shape", net.vertex_shape(v)}, {"axis_edges", net.axis_edges(v)}});
    h["vertices"] = vertices;
    nlohmann::json edges = nlohmann::json::array();
    for (EdgeId e = 0; e < q.num_edges(); ++e) edges.push_back(edge_json(q.edge(e), e, net.edge_dim(e)));
    h["edges"] = edges;
    nlohmann::json symbols = nlohmann::json::array();
    for (std::size_t k = 0; k < model.symbols.size(); ++k) symbols.push_back(escape_token(model.symbols.token(k)));
    h["symbols"] = symbols;
    h["oov"] = model.symbols.oov() ? nlohmann::json(*model.symbols.oov()) : nlohmann::json(nullptr);
    h["scheme"] = to_string(model.scheme);
    h["prng"] = std::string(CounterRng::algorithm);
    h["seed"] = model.seed;
    const std::string header = h.dump(1);

    std::string body;
    for (const auto& t : net.tensors())
        for (const Complex& z : t.data()) {
            put_f64(body, z.real());
            put_f64(body, z.imag());
        }

    std::string out(kMagic, sizeof kMagic);
    put_u64(out, header.size());
    out += header;
    out += body;
    put_u64(out, fnv1a64(body));
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw Error("save_model: write failed");
}

ModelBundle load_model(std::istream& is) {
    const std::string raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (raw.size() < sizeof kMagic + 16 || std::memcmp(raw.data(), kMagic, sizeof kMagic) != 0)
        throw FormatError("model file: bad magic (not a model file)");
    const std::uint64_t header_len = get_u64(raw, sizeof kMagic);
    const std::size_t header_pos = sizeof kMagic + 8;
    if (header_len > raw.size() - header_pos - 8) throw FormatError("model file: truncated header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(raw.substr(header_pos, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model file: malformed header: ") + e.what());
    }

    try {
        if (h.at("format_version").get<int>() != kModelFormatVersion)
            throw FormatError("model file: unsupported format version " + h.at("format_version").dump());
        if (h.at("prng").get<std::string>() != CounterRng::algorithm)
            throw FormatError("model file: unknown PRNG algorithm " + h.at("prng").dump());

        std::vector<Edge> edges;
        std::vector<std::size_t> dims;
        for (const auto& je : h.at("edges")) {
            if (je.at("id").get<std::size_t>() != edges.size()) throw FormatError("model file: edge ids not dense");
            Edge e;
            e.kind = parse_edge_kind(je.at("kind").get<std::string>());
            if (!je.at("source").is_null()) e.source = je.at("source").get<std::size_t>();
            if (!je.at("target").is_null()) e.target = je.at("target").get<std::size_t>();
            edges.push_back(e);
            dims.push_back(je.at("dim").get<std::size_t>());
        }
        const auto& jv = h.at("vertices");
        Quiver q(jv.size(), edges);

        const std::size_t body_pos = header_pos + header_len;
        const std::size_t body_len = raw.size() - body_pos - 8;
        const std::string_view body(raw.data() + body_pos, body_len);
        if (get_u64(raw, raw.size() - 8) != fnv1a64(body)) throw FormatError("model file: checksum mismatch");

        std::vector<DenseTensor> tensors;
        std::size_t pos = 0;
        for (std::size_t v = 0; v < jv.size(); ++v) {
            if (jv[v].at("id").get<std::size_t>() != v) throw FormatError("model file: vertex ids not dense");
            const Shape shape = jv[v].at("shape").get<Shape>();
            const std::size_t count = shape_size(shape);
            if ((body_len - pos) / 16 < count) throw FormatError("model file: truncated tensor data");
            std::vector<Complex> data(count);
            for (auto& z : data) {
                z = Complex(get_f64(body, pos), get_f64(body, pos + 8));
                pos += 16;
            }
            tensors.emplace_back(shape, std::move(data));
        }
        if (pos != body_len) throw FormatError("model file: trailing tensor data");

        std::vector<std::string> symbols;
        for (const auto& s : h.at("symbols")) symbols.push_back(unescape_token(s.get<std::string>()));
        std::optional<std::size_t> oov;
        if (!h.at("oov").is_null()) oov = h.at("oov").get<std::size_t>();

        GraphSpec graph;
        graph.kind = h.at("graph").at("kind").get<std::string>();
        graph.n = h.at("graph").at("n").get<std::size_t>();
        graph.bond_dims = h.at("graph").at("bond_dims").get<std::vector<std::size_t>>();

        TensorNetwork net(std::move(q), std::move(dims), std::move(tensors));
        for (VertexId v = 0; v < net.num_vertices(); ++v)
            if (jv[v].at("axis_edges").get<std::vector<EdgeId>>() != net.axis_edges(v))
                throw FormatError("model file: axis order differs from this build");
        SymbolSet symbol_set(std::move(symbols), oov);
        if (!net.quiver().out_edges().empty() && net.site_dim(0) != symbol_set.size())
            throw FormatError("model file: site dimension differs from the number of symbols");
        return ModelBundle{std::move(net), std::move(symbol_set),
                           parse_token_scheme(h.at("scheme").get<std::string>()), std::move(graph),
                           h.at("seed").get<std::uint64_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model file: bad header field: ") + e.what());
    } catch (const FormatError&) {
        throw;
    } catch (const Error& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
}

void save_model(const ModelBundle& model, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    save_model(model, os);
}

ModelBundle load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open model file " + path.string());
    return load_model(is);
}

}  // namespace tnlm
