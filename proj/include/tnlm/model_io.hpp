#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tnlm/corpus.hpp"
#include "tnlm/model.hpp"

namespace tnlm {

/// How the quiver was built. kind is "chain", "tree", "mera" or "custom";
/// bond_dims is the flag value the network was created with.
struct GraphSpec {
    std::string kind = "custom";
    std::size_t n = 0;
    std::vector<std::size_t> bond_dims;

    bool operator==(const GraphSpec&) const = default;
};

Quiver build_graph(std::string_view kind, std::size_t n);

/// Edge dimensions for a built graph. A single bond value caps every
/// internal edge (reduced where no isometry would exist); otherwise one
/// value per internal edge in ascending edge id.
std::vector<std::size_t> graph_edge_dims(const Quiver& q, std::size_t symbol_dim,
                                         const std::vector<std::size_t>& bond_dims);

/// Everything a model file holds.
struct ModelBundle {
    TensorNetwork network;
    SymbolSet symbols;
    TokenScheme scheme = TokenScheme::chars;
    GraphSpec graph;
    std::uint64_t seed = 0;
};

inline constexpr int kModelFormatVersion = 1;

/// 16-byte magic, 8-byte little-endian header length, JSON header, tensors
/// (vertex ids ascending, row-major, little-endian f64 real then imaginary),
/// then the FNV-1a 64-bit hash of the tensor bytes, little-endian.
void save_model(const ModelBundle& model, std::ostream& os);
ModelBundle load_model(std::istream& is);
void save_model(const ModelBundle& model, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace tnlm
