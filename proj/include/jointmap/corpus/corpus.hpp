#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace jointmap::corpus {

enum class Intent : std::uint8_t { kCommercial = 0, kNonCommercial = 1 };

std::string intent_name(Intent intent);
// Parses "commercial" / "non-commercial"; throws InputError otherwise.
Intent parse_intent(const std::string& name);

using CategoryId = int;
using QueryId = std::int64_t;
using ProductId = std::int64_t;

struct Category {
  CategoryId id = 0;
  std::string name;
};

struct Product {
  ProductId pid = 0;
  std::vector<std::string> tokens;
  std::vector<CategoryId> categories;  // sorted, non-empty
};

class Taxonomy {
 public:
  Taxonomy() = default;
  // Validates unique category ids and that every product maps to at least
  // one known category. Throws InputError.
  Taxonomy(std::vector<Category> categories, std::vector<Product> products);

  const std::vector<Category>& categories() const noexcept { return categories_; }
  const std::vector<Product>& products() const noexcept { return products_; }
  std::size_t category_count() const noexcept { return categories_.size(); }

  // Throws LookupError for unknown pids.
  const Product& product(ProductId pid) const;
  bool has_product(ProductId pid) const { return product_index_.count(pid) != 0; }

 private:
  std::vector<Category> categories_;
  std::vector<Product> products_;
  std::unordered_map<ProductId, std::size_t> product_index_;
};

struct Query {
  QueryId id = 0;
  std::string text;
  std::vector<std::string> tokens;
  Intent intent = Intent::kCommercial;
  std::vector<CategoryId> categories;  // sorted; empty iff non-commercial
  // Generator-side flag for near-boundary queries. Not persisted.
  bool ambiguous = false;
};

struct ClickRecord {
  QueryId query = 0;
  ProductId pid = 0;
  std::int64_t count = 0;
};

using ClickLog = std::vector<ClickRecord>;

struct CorpusConfig {
  int categories = 8;
  int vocabulary_size = 400;
  int queries = 5000;
  double noncommercial_fraction = 0.015;
  double skew_exponent = 1.0;
  std::uint64_t seed = 1;
  double ambiguity_rate = 0.02;
  // Probability that a click lands on a random product instead of one from
  // the query's own product line.
  double click_noise = 0.0;
};

struct Corpus {
  Taxonomy taxonomy;
  std::vector<Query> queries;
  ClickLog clicks;
};

// Smallest vocabulary_size the generator can instantiate templates with.
int minimum_vocabulary(int categories);

// Deterministic under cfg.seed. Throws ConfigError on invalid settings.
Corpus generate_corpus(const CorpusConfig& cfg);

// Gold labels by query id; plays the role of the human labeler.
class Oracle {
 public:
  explicit Oracle(const std::vector<Query>& queries);

  struct Label {
    Intent intent;
    std::vector<CategoryId> categories;
  };

  // Throws LookupError for unknown ids.
  const Label& label(QueryId id) const;
  std::size_t calls() const noexcept { return calls_; }

 private:
  std::unordered_map<QueryId, Label> labels_;
  mutable std::size_t calls_ = 0;
};

// TSV persistence: taxonomy.tsv, queries.tsv, clicks.tsv under `dir`.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus read_corpus(const std::filesystem::path& dir);

std::string format_category_ids(const std::vector<CategoryId>& ids);
// Parses "3,1,7" (or empty); the result is sorted and deduplicated.
std::vector<CategoryId> parse_category_ids(const std::string& field);

}  // namespace jointmap::corpus
