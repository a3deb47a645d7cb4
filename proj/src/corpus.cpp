#include "tnlm/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>

#include "tnlm/errors.hpp"

namespace tnlm {

std::string to_string(TokenScheme scheme) {
    switch (scheme) {
        case TokenScheme::bytes: return "bytes";
        case TokenScheme::chars: return "chars";
        case TokenScheme::words: return "words";
    }
    return "?";
}

TokenScheme parse_token_scheme(std::string_view name) {
    if (name == "bytes") return TokenScheme::bytes;
    if (name == "chars") return TokenScheme::chars;
    if (name == "words" || name == "whitespace-words") return TokenScheme::words;
    throw ArgumentError("unknown token scheme '" + std::string(name) + "'");
}

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Length of the UTF-8 scalar starting at text[i]; throws on malformed input.
std::size_t utf8_length(std::string_view text, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len;
    std::uint32_t cp;
    if (b0 < 0x80) return 1;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        throw ArgumentError("malformed UTF-8 at byte " + std::to_string(i));
    }
    if (i + len > text.size()) throw ArgumentError("truncated UTF-8 at byte " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(text[i + k]);
        if ((b & 0xC0) != 0x80) throw ArgumentError("malformed UTF-8 at byte " + std::to_string(i + k));
        cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr std::uint32_t min_cp[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_cp[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
        throw ArgumentError("invalid UTF-8 scalar at byte " + std::to_string(i));
    return len;
}

std::string read_all(std::istream& in) {
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, TokenScheme scheme) {
    std::vector<std::string> out;
    switch (scheme) {
        case TokenScheme::bytes:
            for (char c : text) out.emplace_back(1, c);
            break;
        case TokenScheme::chars:
            for (std::size_t i = 0; i < text.size();) {
                const std::size_t len = utf8_length(text, i);
                out.emplace_back(text.substr(i, len));
                i += len;
            }
            break;
        case TokenScheme::words: {
            std::size_t i = 0;
            while (i < text.size()) {
                while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
                std::size_t j = i;
                while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
                if (j > i) out.emplace_back(text.substr(i, j - i));
                i = j;
            }
            break;
        }
    }
    return out;
}

SymbolSet build_vocab(std::string_view text, TokenScheme scheme, std::size_t max_size) {
    if (max_size == 0) throw ArgumentError("build_vocab: max_size must be positive");
    const auto tokens = tokenize(text, scheme);
    if (tokens.empty()) {
        if (scheme != TokenScheme::bytes) throw ArgumentError("build_vocab: empty text");
        std::vector<std::string> all;
        for (int b = 0; b < 256; ++b) all.emplace_back(1, static_cast<char>(b));
        if (all.size() <= max_size) return SymbolSet(std::move(all));
        all.resize(max_size);
        all.emplace_back(kOovToken);
        return SymbolSet(std::move(all), max_size);
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> symbols;
    const bool truncated = ranked.size() > max_size;
    for (std::size_t k = 0; k < std::min(max_size, ranked.size()); ++k) symbols.push_back(ranked[k].first);
    if (!truncated) return SymbolSet(std::move(symbols));
    // A kept token could itself be spelled "<unk>"; then OOV has no free name.
    if (std::find(symbols.begin(), symbols.end(), kOovToken) != symbols.end())
        throw ArgumentError("build_vocab: text contains the reserved token " + std::string(kOovToken));
    symbols.emplace_back(kOovToken);
    return SymbolSet(std::move(symbols), max_size);
}

SymbolSet build_vocab(std::istream& in, TokenScheme scheme, std::size_t max_size) {
    return build_vocab(read_all(in), scheme, max_size);
}

std::vector<std::size_t> encode(std::string_view text, const SymbolSet& symbols, TokenScheme scheme) {
    std::vector<std::size_t> out;
    for (const auto& t : tokenize(text, scheme)) {
        auto idx = symbols.find(t);
        if (idx && symbols.oov() && *idx == *symbols.oov()) idx.reset();
        if (!idx) {
            if (!symbols.oov()) throw ArgumentError("token '" + escape_token(t) + "' is not in the vocabulary");
            idx = symbols.oov();
        }
        out.push_back(*idx);
    }
    return out;
}

std::string detokenize(const Sequence& s, const SymbolSet& symbols, TokenScheme scheme) {
    std::string out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (scheme == TokenScheme::words && k > 0) out += ' ';
        out += symbols.token(s[k]);
    }
    return out;
}

SampleMultiset windows(const std::vector<std::size_t>& tokens, std::size_t n, std::size_t stride) {
    if (n == 0 || stride == 0) throw ArgumentError("windows: n and stride must be positive");
    if (tokens.size() < n)
        throw ArgumentError("windows: " + std::to_string(tokens.size()) + " tokens give no window of length " +
                            std::to_string(n) + " (empty multiset)");
    SampleMultiset sample(n);
    for (std::size_t start = 0; start + n <= tokens.size(); start += stride)
        sample.add(Sequence(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                            tokens.begin() + static_cast<std::ptrdiff_t>(start + n)));
    return sample;
}

std::string escape_token(std::string_view token) {
    std::string out;
    if (token == kOovToken) return "\\x3cunk>";
    for (char ch : token) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else if (c == '\r') out += "\\r";
        else if (c == '\t') out += "\\t";
        else if (c < 0x20 || c == 0x7F) {
            char buf[5];
            std::snprintf(buf, sizeof buf, "\\x%02x", c);
            out += buf;
        } else
            out += ch;
    }
    return out;
}

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// Single bytes >= 0x80 are not valid UTF-8 on their own.
std::string escape_for_file(std::string_view token) {
    const std::string base = escape_token(token);
    std::string out;
    for (char ch : base) {
        const auto c = static_cast<unsigned char>(ch);
        if (c >= 0x80 && token.size() == 1) {
            char buf[5];
            std::snprintf(buf, sizeof buf, "\\x%02x", c);
            out += buf;
        } else {
            out += ch;
        }
    }
    return out;
}

}  // namespace

std::string unescape_token(std::string_view line) {
    std::string out;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] != '\\') {
            out += line[i];
            continue;
        }
        if (i + 1 >= line.size()) throw FormatError("vocabulary: dangling backslash");
        const char e = line[++i];
        if (e == '\\') out += '\\';
        else if (e == 'n') out += '\n';
        else if (e == 'r') out += '\r';
        else if (e == 't') out += '\t';
        else if (e == 'x') {
            const int hi = i + 1 < line.size() ? hex_value(line[i + 1]) : -1;
            const int lo = i + 2 < line.size() ? hex_value(line[i + 2]) : -1;
            if (hi < 0 || lo < 0) throw FormatError("vocabulary: bad \\x escape");
            out += static_cast<char>(hi * 16 + lo);
            i += 2;
        } else {
            throw FormatError(std::string("vocabulary: unknown escape \\") + e);
        }
    }
    return out;
}

void write_vocab(const SymbolSet& symbols, std::ostream& os) {
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        if (symbols.oov() && *symbols.oov() == k) {
            if (k + 1 != symbols.size()) throw ArgumentError("write_vocab: OOV symbol must be last");
            os << kOovToken << '\n';
        } else {
            os << escape_for_file(symbols.token(k)) << '\n';
        }
    }
}

SymbolSet read_vocab(std::istream& is) {
    std::vector<std::string> tokens;
    std::optional<std::size_t> oov;
    std::string line;
    while (std::getline(is, line)) {
        if (oov) throw FormatError("vocabulary: OOV token must be the last line");
        if (line == kOovToken) {
            oov = tokens.size();
            tokens.emplace_back(kOovToken);
        } else {
            tokens.push_back(unescape_token(line));
        }
    }
    if (tokens.empty()) throw FormatError("vocabulary: no tokens");
    try {
        return SymbolSet(std::move(tokens), oov);
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("vocabulary: ") + e.what());
    }
}

}  // namespace tnlm
