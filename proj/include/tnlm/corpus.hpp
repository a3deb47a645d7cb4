#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tnlm/model.hpp"

namespace tnlm {

enum class TokenScheme { bytes, chars, words };

std::string to_string(TokenScheme scheme);
/// Accepts "bytes", "chars", "words" (and "whitespace-words").
TokenScheme parse_token_scheme(std::string_view name);

/// Reserved out-of-vocabulary token.
inline constexpr std::string_view kOovToken = "<unk>";

/// bytes: one token per raw byte. chars: one token per Unicode scalar value
/// of UTF-8 input (malformed input throws). words: maximal runs of non
/// whitespace.
std::vector<std::string> tokenize(std::string_view text, TokenScheme scheme);

/// Symbols ordered by descending frequency, ties broken lexicographically.
/// If more than max_size distinct tokens occur, the most frequent max_size
/// are kept and kOovToken is appended as the out-of-vocabulary symbol.
/// Empty input is an error except under the bytes scheme, which then
/// returns all 256 byte values.
SymbolSet build_vocab(std::string_view text, TokenScheme scheme, std::size_t max_size);
SymbolSet build_vocab(std::istream& in, TokenScheme scheme, std::size_t max_size);

/// Symbol indices of the tokens of `text`. Unknown tokens map to the OOV
/// symbol, or throw ArgumentError if the set has none.
std::vector<std::size_t> encode(std::string_view text, const SymbolSet& symbols, TokenScheme scheme);

/// Concatenation (bytes, chars) or single-space join (words).
std::string detokenize(const Sequence& s, const SymbolSet& symbols, TokenScheme scheme);

/// Length-n windows starting at 0, stride, 2*stride, ...; identical windows
/// accumulate multiplicity and a tail shorter than n is dropped. Throws
/// ArgumentError if the stream is shorter than n.
SampleMultiset windows(const std::vector<std::size_t>& tokens, std::size_t n, std::size_t stride);

/// One token per line, LF endings, line index = symbol index. Backslash,
/// control characters and (for bytes) non-ASCII bytes are written as
/// \\, \n, \r, \t or \xHH. The OOV symbol, when present, is the last line and
/// reads back as OOV; a regular token spelled like it is escaped.
void write_vocab(const SymbolSet& symbols, std::ostream& os);
SymbolSet read_vocab(std::istream& is);

std::string escape_token(std::string_view token);
std::string unescape_token(std::string_view line);

}  // namespace tnlm
