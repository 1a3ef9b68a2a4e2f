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

#include "gkt/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gkt/errors.hpp"
#include "gkt/hash.hpp"
#include "gkt/rng.hpp"

namespace gkt {

char Vocab::decode(SymbolId id) {
  if (!valid(id)) throw DataError("invalid symbol id " + std::to_string(id));
  return kSymbols[id];
}

int Vocab::encode(char c) {
  auto pos = kSymbols.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

std::uint64_t Vocab::ordering_hash() { return fnv1a(kSymbols); }

std::string decode(const SymbolSeq& s) {
  std::string out;
  out.reserve(s.size());
  for (SymbolId id : s) out.push_back(Vocab::decode(id));
  return out;
}

SymbolSeq encode_canonical(std::string_view text) {
  SymbolSeq out;
  out.reserve(text.size());
  for (std::size_t k = 0; k < text.size(); ++k) {
    int id = Vocab::encode(text[k]);
    if (id < 0) {
      throw DataError("non-canonical byte " + std::to_string(static_cast<unsigned char>(text[k])) +
                      " at offset " + std::to_string(k));
    }
    out.push_back(static_cast<SymbolId>(id));
  }
  return out;
}

SymbolSeq encode_word(std::string_view word) {
  SymbolSeq out;
  for (char c : word) {
    if (c < 'A' || c > 'Z') throw DataError("word must be uppercase A-Z: " + std::string(word));
    out.push_back(static_cast<SymbolId>(c - 'A'));
  }
  return out;
}

SymbolSeq preprocess(std::string_view raw) {
  SymbolSeq out;
  out.reserve(raw.size());
  bool pending_space = false;
  auto emit = [&](SymbolId id) {
    if (pending_space && !out.empty() && out.back() != Vocab::kEos) out.push_back(Vocab::kSpace);
    pending_space = false;
    out.push_back(id);
  };
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalpha(c)) {
      emit(static_cast<SymbolId>(std::toupper(c) - 'A'));
    } else if (c == '.') {
      emit(Vocab::kPeriod);
    } else if (c == '\'') {
      emit(Vocab::kApostrophe);
    } else if (c == '\n') {
      pending_space = false;
      if (!out.empty() && out.back() != Vocab::kEos) out.push_back(Vocab::kEos);
    } else {
      pending_space = true;
    }
  }
  if (out.empty()) throw DataError("empty corpus after preprocessing");
  return out;
}

std::vector<SymbolSeq> split_sentences(const SymbolSeq& s) {
  std::vector<SymbolSeq> out;
  SymbolSeq cur;
  for (SymbolId id : s) {
    cur.push_back(id);
    if (id == Vocab::kEos) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

SymbolSeq join(const std::vector<SymbolSeq>& sentences) {
  SymbolSeq out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::size_t count_sentences(const SymbolSeq& s) {
  std::size_t n = static_cast<std::size_t>(std::count(s.begin(), s.end(), Vocab::kEos));
  if (!s.empty() && s.back() != Vocab::kEos) ++n;
  return n;
}

CorpusSplit split_corpus(const SymbolSeq& s, const Fractions& fr) {
  if (!(fr.train > 0 && fr.valid > 0 && fr.test > 0)) {
    throw ConfigError("split fractions must all be positive");
  }
  if (std::abs(fr.train + fr.valid + fr.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  auto sentences = split_sentences(s);
  const std::size_t n = sentences.size();
  if (n < 3) throw DataError("corpus has fewer than 3 sentences");

  // cum[k] = characters in the first k sentences.
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) cum[k + 1] = cum[k] + static_cast<double>(sentences[k].size());
  const double total = cum[n];

  auto nearest = [&](double target, std::size_t lo, std::size_t hi) {
    std::size_t best = lo;
    for (std::size_t k = lo; k <= hi; ++k) {
      if (std::abs(cum[k] - target) < std::abs(cum[best] - target)) best = k;
    }
    return best;
  };
  const std::size_t cut1 = nearest(fr.train * total, 1, n - 2);
  const std::size_t cut2 = nearest((fr.train + fr.valid) * total, cut1 + 1, n - 1);

  CorpusSplit out;
  out.fractions = fr;
  for (std::size_t k = 0; k < n; ++k) {
    SymbolSeq& dst = k < cut1 ? out.train : (k < cut2 ? out.valid : out.test);
    dst.insert(dst.end(), sentences[k].begin(), sentences[k].end());
  }
  return out;
}

std::set<std::string> default_private_words() {
  return {"JANUARY", "FEBRUARY", "MARCH",     "APRIL",    "MAY",    "JUNE",
          "JULY",    "AUGUST",   "SEPTEMBER", "OCTOBER",  "NOVEMBER", "DECEMBER",
          "MONDAY",  "TUESDAY",  "WEDNESDAY", "THURSDAY", "FRIDAY", "SATURDAY",
          "SUNDAY",  "SPRING",   "SUMMER",    "AUTUMN",   "WINTER"};
}

bool contains_any_word(const SymbolSeq& sentence, const std::set<std::string>& words) {
  std::string word;
  auto check = [&]() {
    bool hit = !word.empty() && words.count(word) > 0;
    word.clear();
    return hit;
  };
  for (SymbolId id : sentence) {
    if (id < 26) {
      word.push_back(static_cast<char>('A' + id));
    } else if (check()) {
      return true;
    }
  }
  return check();
}

PrivatePartition partition_private(const SymbolSeq& s, const std::set<std::string>& words) {
  PrivatePartition out;
  out.word_list = words;
  for (const auto& sentence : split_sentences(s)) {
    SymbolSeq& dst = contains_any_word(sentence, words) ? out.private_sentences : out.public_sentences;
    dst.insert(dst.end(), sentence.begin(), sentence.end());
  }
  return out;
}

std::vector<SymbolSeq> shard(const SymbolSeq& s, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("shard count must be at least 1");
  auto sentences = split_sentences(s);
  if (n > sentences.size()) {
    throw DataError("cannot make " + std::to_string(n) + " shards from " +
                    std::to_string(sentences.size()) + " sentences");
  }
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<SymbolSeq> shards(n);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& src = sentences[order[k]];
    shards[k % n].insert(shards[k % n].end(), src.begin(), src.end());
  }
  return shards;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("write failed: " + path);
}

void write_corpus_file(const std::string& path, const SymbolSeq& s) {
  write_text_file(path, decode(s));
}

SymbolSeq read_corpus_file(const std::string& path) {
  try {
    return encode_canonical(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_metadata(const std::string& path, const KeyValues& kv) {
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  write_text_file(path, os.str());
}

std::map<std::string, std::string> read_metadata(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::set<std::string> read_word_list(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::set<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    line = line.substr(start);
    for (char& c : line) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (char c : line) {
      if (c < 'A' || c > 'Z') {
        throw DataError(path + ":" + std::to_string(lineno) + ": words must be A-Z only");
      }
    }
    out.insert(line);
  }
  if (out.empty()) throw DataError(path + ": word list is empty");
  return out;
}

}  // namespace gkt
