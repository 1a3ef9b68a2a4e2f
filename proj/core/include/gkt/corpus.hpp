// Copyright 2026 The gkt-lm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GKT_CORPUS_HPP
#define GKT_CORPUS_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gkt {

inline constexpr int kVocabSize = 30;

using SymbolId = std::uint8_t;
using SymbolSeq = std::vector<SymbolId>;

/// The fixed 30-symbol alphabet: A-Z at 0-25, then SPACE, EOS, APOSTROPHE
/// and PERIOD. EOS is both the end-of-sentence symbol and the sentence
/// delimiter; it decodes to a line break.
struct Vocab {
  static constexpr SymbolId kSpace = 26;
  static constexpr SymbolId kEos = 27;
  static constexpr SymbolId kApostrophe = 28;
  static constexpr SymbolId kPeriod = 29;

  // Decoded characters in index order.
  static constexpr std::string_view kSymbols = "ABCDEFGHIJKLMNOPQRSTUVWXYZ \n'.";

  static char decode(SymbolId id);
  // Canonical character to id, or -1.
  static int encode(char c);
  static bool valid(int id) { return id >= 0 && id < kVocabSize; }
  // Fingerprint of the symbol ordering, stored in checkpoint headers.
  static std::uint64_t ordering_hash();
};

std::string decode(const SymbolSeq& s);
// Strict inverse of decode(); throws DataError on a non-canonical byte.
SymbolSeq encode_canonical(std::string_view text);
// Encodes an uppercase A-Z word.
SymbolSeq encode_word(std::string_view word);

/// Raw text to symbols: letters are uppercased, line breaks become EOS,
/// and any run of whitespace or unsupported characters becomes a single
/// SPACE between symbols. Spaces never touch an EOS, blank lines collapse,
/// and leading line breaks are dropped. Throws DataError if nothing is left.
SymbolSeq preprocess(std::string_view raw);

/// Maximal EOS-terminated runs; a trailing unterminated run is kept.
std::vector<SymbolSeq> split_sentences(const SymbolSeq& s);
SymbolSeq join(const std::vector<SymbolSeq>& sentences);
std::size_t count_sentences(const SymbolSeq& s);

struct Fractions {
  double train = 0.98;
  double valid = 0.01;
  double test = 0.01;
};

struct CorpusSplit {
  SymbolSeq train;
  SymbolSeq valid;
  SymbolSeq test;
  Fractions fractions;
};

/// Contiguous train/valid/test split; each cut lands right after the EOS
/// closest to the requested character fraction, and every part keeps at
/// least one sentence.
CorpusSplit split_corpus(const SymbolSeq& s, const Fractions& fractions);

struct PrivatePartition {
  SymbolSeq public_sentences;
  SymbolSeq private_sentences;
  std::set<std::string> word_list;
};

// Months, weekdays, and seasons.
std::set<std::string> default_private_words();

// Whole-word test with SPACE, EOS, PERIOD and APOSTROPHE as delimiters.
bool contains_any_word(const SymbolSeq& sentence, const std::set<std::string>& words);

PrivatePartition partition_private(const SymbolSeq& s, const std::set<std::string>& words);

/// Seeded shuffle of sentence order followed by round-robin assignment.
std::vector<SymbolSeq> shard(const SymbolSeq& s, std::size_t n, std::uint64_t seed);

// -- files ------------------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

// Canonical corpus file: one byte per symbol, EOS as '\n'.
void write_corpus_file(const std::string& path, const SymbolSeq& s);
SymbolSeq read_corpus_file(const std::string& path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Sidecar metadata: one key=value per line.
void write_metadata(const std::string& path, const KeyValues& kv);
std::map<std::string, std::string> read_metadata(const std::string& path);

// One uppercase word per line; blank lines and '#' comments ignored.
std::set<std::string> read_word_list(const std::string& path);

}  // namespace gkt

#endif  // GKT_CORPUS_HPP
