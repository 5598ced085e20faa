#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advpara/util/rng.hpp"

namespace advpara::synth {

/// Parameters of a toy English-like language. Function words come from fixed
/// lists; content words are invented per topic and tied together by
/// collocations (each noun prefers a few verbs and adjectives, each verb a few
/// objects), so an n-gram model can follow a topic locally.
struct WorldConfig {
  std::uint64_t seed = 7;
  std::size_t topics = 3;
  std::size_t nouns_per_topic = 8;
  std::size_t verbs_per_topic = 6;
  std::size_t adjectives_per_topic = 6;
  std::size_t shared_nouns = 6;
  std::size_t adverbs = 8;
  // Preferred partners per noun (verbs, adjectives) and per verb (objects).
  std::size_t collocates = 2;
  // Chance that a slot follows its collocation instead of the topic at large.
  double collocation_strength = 0.8;
  // Chance that an unconstrained content slot stays in the document's topic.
  double topic_focus = 0.0;
  // Zipf exponent of word choice inside a pool.
  double zipf = 0.8;
  std::size_t min_doc_tokens = 120;
  std::size_t max_doc_tokens = 320;

  void validate() const;
};

class World {
 public:
  explicit World(WorldConfig cfg);

  const WorldConfig& config() const { return cfg_; }

  // One document; consumes randomness from `rng` only.
  std::string document(Rng& rng) const;
  std::string document(Rng& rng, std::size_t topic) const;

  // `n` documents from the stream derive_seed(world seed, task).
  std::vector<std::string> documents(std::size_t n, std::string_view task) const;

  std::vector<std::string> content_words() const;

 private:
  struct Noun {
    std::string word;
    std::vector<std::size_t> verbs;       // indices into the topic's verbs
    std::vector<std::size_t> adjectives;  // indices into the topic's adjectives
  };
  struct Verb {
    std::string word;
    std::vector<std::size_t> objects;  // indices into the topic's nouns
  };
  struct Topic {
    std::vector<Noun> nouns;
    std::vector<Verb> verbs;
    std::vector<std::string> adjectives;
  };

  std::size_t zipf_index(std::size_t n, Rng& rng) const;
  std::size_t topic_of_slot(std::size_t topic, Rng& rng) const;
  void noun_phrase(const Topic& topic, std::size_t noun, Rng& rng, std::vector<std::string>& out) const;
  void sentence(std::size_t topic, Rng& rng, std::vector<std::string>& out) const;

  WorldConfig cfg_;
  std::vector<Topic> topics_;
  std::vector<std::string> shared_;
  std::vector<std::string> adverbs_;
};

}  // namespace advpara::synth
