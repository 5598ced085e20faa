#include "advpara/synth/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string_view>

#include "advpara/util/error.hpp"

namespace advpara::synth {

namespace {

constexpr std::array<std::string_view, 14> kOnsets{"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
constexpr std::array<std::string_view, 5> kVowels{"a", "e", "i", "o", "u"};
constexpr std::array<std::string_view, 4> kCodas{"", "n", "r", "s"};

constexpr std::array<std::string_view, 9> kDeterminers{"the", "a", "this", "that", "each", "every", "some", "our", "their"};
constexpr std::array<std::string_view, 9> kPrepositions{"in", "near", "with", "into", "of", "from", "under", "beside", "across"};
constexpr std::array<std::string_view, 5> kPronouns{"they", "we", "it", "she", "he"};
constexpr std::array<std::string_view, 5> kConjunctions{"and", "but", "while", "because", "yet"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& words, Rng& rng) {
  return words[rng.uniform_below(N)];
}

std::vector<std::size_t> sample_distinct(std::size_t k, std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < std::min(k, n); ++i) std::swap(idx[i], idx[i + rng.uniform_below(n - i)]);
  idx.resize(std::min(k, n));
  return idx;
}

}  // namespace

void WorldConfig::validate() const {
  if (topics == 0 || nouns_per_topic == 0 || verbs_per_topic == 0 || adjectives_per_topic == 0 ||
      shared_nouns == 0 || adverbs == 0 || collocates == 0) {
    throw ConfigError("world word pools must be non-empty");
  }
  if (!(topic_focus >= 0.0 && topic_focus <= 1.0)) throw ConfigError("topic_focus must lie in [0, 1]");
  if (!(collocation_strength >= 0.0 && collocation_strength <= 1.0)) {
    throw ConfigError("collocation_strength must lie in [0, 1]");
  }
  if (!(zipf >= 0.0)) throw ConfigError("zipf exponent must be non-negative");
  if (min_doc_tokens == 0 || min_doc_tokens > max_doc_tokens) throw ConfigError("bad document length range");
}

World::World(WorldConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(cfg_.seed, "world-lexicon"));
  std::set<std::string> used;
  auto invent = [&](std::size_t syllables) {
    for (;;) {
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kOnsets[rng.uniform_below(kOnsets.size())];
        w += kVowels[rng.uniform_below(kVowels.size())];
      }
      w += kCodas[rng.uniform_below(kCodas.size())];
      if (used.insert(w).second) return w;
    }
  };
  for (std::size_t t = 0; t < cfg_.topics; ++t) {
    Topic topic;
    for (std::size_t i = 0; i < cfg_.adjectives_per_topic; ++i) topic.adjectives.push_back(invent(3));
    for (std::size_t i = 0; i < cfg_.verbs_per_topic; ++i) {
      topic.verbs.push_back({invent(2), sample_distinct(cfg_.collocates, cfg_.nouns_per_topic, rng)});
    }
    for (std::size_t i = 0; i < cfg_.nouns_per_topic; ++i) {
      topic.nouns.push_back({invent(2), sample_distinct(cfg_.collocates, cfg_.verbs_per_topic, rng),
                             sample_distinct(cfg_.collocates, cfg_.adjectives_per_topic, rng)});
    }
    topics_.push_back(std::move(topic));
  }
  for (std::size_t i = 0; i < cfg_.shared_nouns; ++i) shared_.push_back(invent(3));
  for (std::size_t i = 0; i < cfg_.adverbs; ++i) adverbs_.push_back(invent(2) + "ly");
}

std::size_t World::zipf_index(std::size_t n, Rng& rng) const {
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) total += 1.0 / std::pow(static_cast<double>(r + 1), cfg_.zipf);
  double u = rng.uniform01() * total;
  for (std::size_t r = 0; r < n; ++r) {
    u -= 1.0 / std::pow(static_cast<double>(r + 1), cfg_.zipf);
    if (u < 0.0) return r;
  }
  return n - 1;
}

std::size_t World::topic_of_slot(std::size_t topic, Rng& rng) const {
  return rng.uniform01() < cfg_.topic_focus ? topic : rng.uniform_below(topics_.size());
}

void World::noun_phrase(const Topic& topic, std::size_t noun, Rng& rng, std::vector<std::string>& out) const {
  out.emplace_back(pick(kDeterminers, rng));
  if (rng.uniform01() < 0.5) {
    const auto& n = topic.nouns[noun];
    const std::size_t adj = rng.uniform01() < cfg_.collocation_strength
                                ? n.adjectives[rng.uniform_below(n.adjectives.size())]
                                : zipf_index(topic.adjectives.size(), rng);
    out.push_back(topic.adjectives[adj]);
  }
  out.push_back(topic.nouns[noun].word);
}

void World::sentence(std::size_t topic_id, Rng& rng, std::vector<std::string>& out) const {
  const Topic& topic = topics_[topic_of_slot(topic_id, rng)];
  const std::size_t subject = zipf_index(topic.nouns.size(), rng);
  const auto& sn = topic.nouns[subject];
  const std::size_t verb = rng.uniform01() < cfg_.collocation_strength ? sn.verbs[rng.uniform_below(sn.verbs.size())]
                                                                        : zipf_index(topic.verbs.size(), rng);
  const auto& v = topic.verbs[verb];
  const std::size_t object = rng.uniform01() < cfg_.collocation_strength
                                 ? v.objects[rng.uniform_below(v.objects.size())]
                                 : zipf_index(topic.nouns.size(), rng);
  auto extra = [&] {
    out.emplace_back(pick(kPrepositions, rng));
    out.emplace_back(pick(kDeterminers, rng));
    out.push_back(shared_[zipf_index(shared_.size(), rng)]);
  };
  auto adverb = [&] { out.push_back(adverbs_[zipf_index(adverbs_.size(), rng)]); };

  switch (rng.uniform_below(7)) {
    case 0:
      noun_phrase(topic, subject, rng, out);
      out.push_back(v.word);
      noun_phrase(topic, object, rng, out);
      break;
    case 1:
      noun_phrase(topic, subject, rng, out);
      out.push_back(v.word);
      noun_phrase(topic, object, rng, out);
      extra();
      break;
    case 2:
      noun_phrase(topic, subject, rng, out);
      out.push_back(v.word);
      adverb();
      break;
    case 3:
      out.emplace_back("when");
      noun_phrase(topic, subject, rng, out);
      out.push_back(v.word);
      out.emplace_back(",");
      out.emplace_back(pick(kPronouns, rng));
      out.push_back(topic.verbs[zipf_index(topic.verbs.size(), rng)].word);
      noun_phrase(topic, object, rng, out);
      break;
    case 4:
      noun_phrase(topic, subject, rng, out);
      out.push_back(v.word);
      noun_phrase(topic, object, rng, out);
      out.emplace_back(pick(kConjunctions, rng));
      out.emplace_back(pick(kPronouns, rng));
      out.push_back(topic.verbs[topic.nouns[object].verbs[0]].word);
      adverb();
      break;
    case 5:
      out.emplace_back("there");
      out.emplace_back("is");
      noun_phrase(topic, object, rng, out);
      extra();
      break;
    default:
      out.emplace_back(pick(kPronouns, rng));
      out.push_back(v.word);
      noun_phrase(topic, object, rng, out);
      out.emplace_back(",");
      out.emplace_back("which");
      out.push_back(topic.verbs[topic.nouns[object].verbs[0]].word);
      adverb();
      break;
  }
  out.emplace_back(".");
}

std::string World::document(Rng& rng) const { return document(rng, rng.uniform_below(topics_.size())); }

std::string World::document(Rng& rng, std::size_t topic) const {
  if (topic >= topics_.size()) throw ConfigError("topic index out of range");
  const std::size_t target =
      cfg_.min_doc_tokens + rng.uniform_below(cfg_.max_doc_tokens - cfg_.min_doc_tokens + 1);
  std::vector<std::string> tokens;
  while (tokens.size() < target) sentence(topic, rng, tokens);
  // Trim whole sentences that overshoot the upper bound.
  while (tokens.size() > cfg_.max_doc_tokens) {
    tokens.pop_back();
    while (!tokens.empty() && tokens.back() != ".") tokens.pop_back();
  }
  std::string text;
  for (const auto& t : tokens) {
    if (!text.empty() && t != "." && t != ",") text += ' ';
    text += t;
  }
  return text;
}

std::vector<std::string> World::documents(std::size_t n, std::string_view task) const {
  Rng rng(derive_seed(cfg_.seed, task));
  std::vector<std::string> docs;
  docs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) docs.push_back(document(rng));
  return docs;
}

std::vector<std::string> World::content_words() const {
  std::vector<std::string> out;
  for (const auto& t : topics_) {
    for (const auto& n : t.nouns) out.push_back(n.word);
    for (const auto& v : t.verbs) out.push_back(v.word);
    out.insert(out.end(), t.adjectives.begin(), t.adjectives.end());
  }
  out.insert(out.end(), shared_.begin(), shared_.end());
  out.insert(out.end(), adverbs_.begin(), adverbs_.end());
  return out;
}

}  // namespace advpara::synth
