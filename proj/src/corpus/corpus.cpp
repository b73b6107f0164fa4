#include "jointmap/corpus/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "jointmap/error.hpp"
#include "jointmap/numerics/random.hpp"
#include "jointmap/text.hpp"

namespace jointmap::corpus {

std::string intent_name(Intent intent) {
  return intent == Intent::kCommercial ? "commercial" : "non-commercial";
}

Intent parse_intent(const std::string& name) {
  if (name == "commercial") return Intent::kCommercial;
  if (name == "non-commercial") return Intent::kNonCommercial;
  throw InputError("unknown intent '" + name + "'");
}

Taxonomy::Taxonomy(std::vector<Category> categories, std::vector<Product> products)
    : categories_(std::move(categories)), products_(std::move(products)) {
  std::set<CategoryId> ids;
  for (const auto& c : categories_) {
    if (!ids.insert(c.id).second) {
      throw InputError("duplicate category id " + std::to_string(c.id));
    }
  }
  for (std::size_t i = 0; i < products_.size(); ++i) {
    auto& p = products_[i];
    if (p.categories.empty()) {
      throw InputError("product " + std::to_string(p.pid) + " has no category");
    }
    for (CategoryId c : p.categories) {
      if (!ids.count(c)) {
        throw InputError("product " + std::to_string(p.pid) + " maps to unknown category " +
                         std::to_string(c));
      }
    }
    std::sort(p.categories.begin(), p.categories.end());
    if (!product_index_.emplace(p.pid, i).second) {
      throw InputError("duplicate product id " + std::to_string(p.pid));
    }
  }
}

const Product& Taxonomy::product(ProductId pid) const {
  const auto it = product_index_.find(pid);
  if (it == product_index_.end()) throw LookupError("unknown product id " + std::to_string(pid));
  return products_[it->second];
}

Oracle::Oracle(const std::vector<Query>& queries) {
  for (const auto& q : queries) labels_[q.id] = Label{q.intent, q.categories};
}

const Oracle::Label& Oracle::label(QueryId id) const {
  const auto it = labels_.find(id);
  if (it == labels_.end()) throw LookupError("oracle has no label for query " + std::to_string(id));
  ++calls_;
  return it->second;
}

std::string format_category_ids(const std::vector<CategoryId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(ids[i]);
  }
  return out;
}

std::vector<CategoryId> parse_category_ids(const std::string& field) {
  std::vector<CategoryId> ids;
  if (field.empty()) return ids;
  for (const auto& part : split(field, ',')) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(part, &used);
    } catch (const std::exception&) {
      throw InputError("bad category id '" + part + "'");
    }
    if (used != part.size()) throw InputError("bad category id '" + part + "'");
    ids.push_back(value);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// ---------------------------------------------------------------------------
// Generator

namespace {

const std::vector<std::string> kCategoryNames = {
    "tools",    "lighting", "electrical", "appliance", "flooring",   "plumbing", "paint",
    "outdoors", "garden",   "hardware",   "kitchen",   "bath",       "storage",  "heating",
    "cooling",  "doors",    "windows",    "lumber",    "roofing",    "decor",    "furniture",
    "cleaning", "safety",   "automotive", "pool",      "holiday",    "fencing",  "grills",
    "rugs",     "blinds",   "smart-home", "building"};

// Seed nouns for the leading lines of the first categories.
const std::vector<std::vector<std::string>> kSeedNouns = {
    {"drill", "saw", "wrench", "hammer", "sander", "grinder"},
    {"lamp", "chandelier", "bulb", "sconce", "lantern"},
    {"outlet", "breaker", "wire", "switch", "conduit"},
    {"refrigerator", "dishwasher", "washer", "dryer", "microwave"},
    {"tiles", "carpet", "laminate", "vinyl", "hardwood"},
    {"faucet", "toilet", "pipe", "valve", "sink"},
    {"primer", "stain", "brush", "roller", "sprayer"},
    {"mower", "trimmer", "blower", "shed", "hose"},
};

const std::vector<std::string> kSeedBrands = {
    "dewalt", "milwaukee", "makita", "whirlpool", "kohler", "moen",  "behr",
    "glidden", "husky", "ridgid", "bosch", "craftsman", "delta", "pfister",
    "honeywell", "toro", "ge", "lg", "frigidaire", "maytag"};

const std::vector<std::string> kNumbers = {"18", "24", "30", "36", "12", "48"};
const std::vector<std::string> kUnits = {"volt", "in.", "ft.", "gal.", "watt"};
const std::vector<std::string> kAdjectives = {"classic", "cordless", "white",  "black",
                                              "stainless", "compact", "heavy-duty", "smart"};
const std::vector<std::string> kPlaces = {"near me", "today", "sunday"};

// Near-boundary pairs: the non-commercial form drops the trailing token.
struct BoundaryPair {
  const char* service;
  const char* trailing;
};
const std::vector<BoundaryPair> kBoundaryPairs = {
    {"installation", "kit"}, {"repair", "kit"}, {"replacement", "parts"}};

std::vector<std::string> fixed_lexicon() {
  std::set<std::string> words;
  const std::vector<std::string> service_phrases = {
      "where is my shipped order", "how to install my", "cost to rent a",
      "store hours",               "military discount", "track my order",
      "installation guide",        "return policy for", "gift card balance",
      "discount"};
  for (const auto& p : service_phrases)
    for (auto& t : tokenize(p)) words.insert(t);
  for (const auto& p : kPlaces)
    for (auto& t : tokenize(p)) words.insert(t);
  for (const auto& list : {kNumbers, kUnits, kAdjectives})
    for (const auto& w : list) words.insert(w);
  for (const auto& b : kBoundaryPairs) {
    words.insert(b.service);
    words.insert(b.trailing);
  }
  return {words.begin(), words.end()};
}

struct Line {
  CategoryId primary = 0;
  std::vector<CategoryId> categories;
  std::string brand;
  std::string noun;
  std::vector<ProductId> products;
};

class TokenFactory {
 public:
  TokenFactory(numerics::Rng& rng, std::set<std::string> reserved)
      : rng_(rng), used_(std::move(reserved)) {}

  bool claim(const std::string& word) { return used_.insert(word).second; }

  std::string fresh() {
    static const std::string consonants = "bdfgklmnprstvz";
    static const std::string vowels = "aeiou";
    while (true) {
      std::string w;
      const auto syllables = 2 + rng_.uniform_index(2);
      for (std::uint64_t s = 0; s < syllables; ++s) {
        w.push_back(consonants[rng_.uniform_index(consonants.size())]);
        w.push_back(vowels[rng_.uniform_index(vowels.size())]);
      }
      if (claim(w)) return w;
    }
  }

 private:
  numerics::Rng& rng_;
  std::set<std::string> used_;
};

template <typename T>
const T& pick(const std::vector<T>& items, numerics::Rng& rng) {
  return items[rng.uniform_index(items.size())];
}

// Largest-remainder apportionment of `total` proportional to `weights`;
// ties go to the lower index, so non-increasing weights give
// non-increasing counts.
std::vector<int> apportion(int total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = total * weights[i] / sum;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < total - assigned; ++k) ++counts[remainders[static_cast<std::size_t>(k)].second];
  return counts;
}

void validate(const CorpusConfig& cfg) {
  if (cfg.categories < 1) throw ConfigError("category count must be >= 1");
  if (cfg.queries < 1) throw ConfigError("query count must be >= 1");
  if (cfg.vocabulary_size < 1) throw ConfigError("vocabulary size must be >= 1");
  for (double f : {cfg.noncommercial_fraction, cfg.ambiguity_rate, cfg.click_noise}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("fractions must lie in [0, 1]");
  }
  if (!(cfg.skew_exponent >= 0.0)) throw ConfigError("skew exponent must be >= 0");
  if (cfg.vocabulary_size < minimum_vocabulary(cfg.categories)) {
    throw ConfigError("vocabulary size " + std::to_string(cfg.vocabulary_size) +
                      " is too small for template instantiation; need at least " +
                      std::to_string(minimum_vocabulary(cfg.categories)));
  }
}

struct QuerySpec {
  std::string text;
  Intent intent;
  std::vector<CategoryId> categories;
  bool ambiguous;
  int line;  // -1 for non-commercial
};

}  // namespace

int minimum_vocabulary(int categories) {
  return static_cast<int>(fixed_lexicon().size()) + 2 * std::max(categories, 0);
}

Corpus generate_corpus(const CorpusConfig& cfg) {
  validate(cfg);
  numerics::Rng rng(cfg.seed);
  const auto lexicon = fixed_lexicon();
  TokenFactory tokens(rng, std::set<std::string>(lexicon.begin(), lexicon.end()));

  const int n_categories = cfg.categories;
  const int lines_per_category =
      (cfg.vocabulary_size - static_cast<int>(lexicon.size())) / (2 * n_categories);

  std::vector<Category> categories;
  for (int c = 0; c < n_categories; ++c) {
    const std::string name = c < static_cast<int>(kCategoryNames.size())
                                 ? kCategoryNames[static_cast<std::size_t>(c)]
                                 : "category" + std::to_string(c);
    categories.push_back({c, name});
  }

  // Product lines. Line 0 of category c also belongs to c-1 and line 1 to
  // c-1 and c-2, so related categories share multi-category products.
  std::vector<Line> lines;
  std::vector<std::vector<int>> lines_of(static_cast<std::size_t>(n_categories));
  std::size_t next_brand = 0;
  for (int c = 0; c < n_categories; ++c) {
    for (int j = 0; j < lines_per_category; ++j) {
      Line line;
      line.primary = c;
      line.categories.push_back(c);
      if (j == 0 && c >= 1) line.categories.push_back(c - 1);
      if (j == 1 && c >= 2) {
        line.categories.push_back(c - 1);
        line.categories.push_back(c - 2);
      }
      std::sort(line.categories.begin(), line.categories.end());

      std::string brand;
      if (c == 2 && j == 1 && tokens.claim("ryobi")) brand = "ryobi";
      if (c == 3 && j == 0 && tokens.claim("samsung")) brand = "samsung";
      while (brand.empty() && next_brand < kSeedBrands.size()) {
        if (tokens.claim(kSeedBrands[next_brand])) brand = kSeedBrands[next_brand];
        ++next_brand;
      }
      if (brand.empty()) brand = tokens.fresh();
      line.brand = brand;

      std::string noun;
      if (c < static_cast<int>(kSeedNouns.size())) {
        const auto& seeds = kSeedNouns[static_cast<std::size_t>(c)];
        if (j < static_cast<int>(seeds.size()) && tokens.claim(seeds[static_cast<std::size_t>(j)])) {
          noun = seeds[static_cast<std::size_t>(j)];
        }
      }
      if (noun.empty()) noun = tokens.fresh();
      line.noun = noun;

      lines_of[static_cast<std::size_t>(c)].push_back(static_cast<int>(lines.size()));
      lines.push_back(std::move(line));
    }
  }

  std::vector<Product> products;
  for (auto& line : lines) {
    for (int v = 0; v < 3; ++v) {
      Product p;
      p.pid = static_cast<ProductId>(products.size() + 1);
      p.tokens = {line.brand};
      if (v > 0) p.tokens.push_back(kAdjectives[static_cast<std::size_t>(v - 1)]);
      p.tokens.push_back(line.noun);
      p.categories = line.categories;
      line.products.push_back(p.pid);
      products.push_back(std::move(p));
    }
  }

  // Query budget.
  const int n_total = cfg.queries;
  const int n_noncommercial =
      static_cast<int>(std::floor(cfg.noncommercial_fraction * n_total + 0.5));
  const int n_commercial = n_total - n_noncommercial;
  const int n_ambiguous = static_cast<int>(std::floor(cfg.ambiguity_rate * n_total + 0.5));
  const int n_ambiguous_nc = std::min(n_ambiguous / 2, n_noncommercial / 2);
  const int n_ambiguous_c = std::min(n_ambiguous - n_ambiguous_nc, n_commercial);

  std::vector<double> weights;
  for (int c = 0; c < n_categories; ++c) weights.push_back(std::pow(c + 1.0, -cfg.skew_exponent));
  const auto per_category = apportion(n_commercial, weights);

  // One slot per commercial query: its product line, round-robin within
  // the primary category.
  std::vector<int> slots;
  for (int c = 0; c < n_categories; ++c) {
    const auto& ls = lines_of[static_cast<std::size_t>(c)];
    for (int i = 0; i < per_category[static_cast<std::size_t>(c)]; ++i) {
      slots.push_back(ls[static_cast<std::size_t>(i) % ls.size()]);
    }
  }
  std::vector<char> slot_ambiguous(slots.size(), 0);
  {
    std::vector<std::size_t> order(slots.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    for (int k = 0; k < n_ambiguous_c; ++k) slot_ambiguous[order[static_cast<std::size_t>(k)]] = 1;
  }

  std::vector<QuerySpec> specs;
  specs.reserve(static_cast<std::size_t>(n_total));
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const Line& line = lines[static_cast<std::size_t>(slots[s])];
    std::string text;
    if (slot_ambiguous[s]) {
      const auto& pair = pick(kBoundaryPairs, rng);
      const std::string prefix = rng.bernoulli(0.5) ? line.brand + " " : "";
      text = prefix + line.noun + " " + pair.service + " " + pair.trailing;
    } else {
      const auto num = pick(kNumbers, rng);
      const auto unit = pick(kUnits, rng);
      const auto adj = pick(kAdjectives, rng);
      switch (rng.uniform_index(6)) {
        case 0: text = line.noun; break;
        case 1: text = line.brand + " " + line.noun; break;
        case 2: text = adj + " " + line.noun; break;
        case 3: text = num + " " + unit + " " + line.brand + " " + line.noun; break;
        case 4: text = num + " " + unit + " " + line.brand; break;
        default: text = line.brand + " " + line.noun + " " + adj; break;
      }
    }
    specs.push_back({text, Intent::kCommercial, line.categories, slot_ambiguous[s] != 0, slots[s]});
  }

  auto random_line = [&]() -> const Line& { return lines[rng.uniform_index(lines.size())]; };
  for (int k = 0; k < n_noncommercial; ++k) {
    std::string text;
    const bool ambiguous = k < n_ambiguous_nc;
    if (ambiguous) {
      const auto& pair = pick(kBoundaryPairs, rng);
      const Line& line = random_line();
      const std::string prefix = rng.bernoulli(0.5) ? line.brand + " " : "";
      text = prefix + line.noun + " " + pair.service;
    } else {
      const Line& line = random_line();
      switch (rng.uniform_index(9)) {
        case 0: text = "where is my shipped order"; break;
        case 1: text = "how to install my " + line.noun; break;
        case 2: text = "cost to rent a " + line.noun; break;
        case 3: text = "store hours " + pick(kPlaces, rng); break;
        case 4: text = rng.bernoulli(0.5) ? "military discount" : line.brand + " discount"; break;
        case 5: text = "track my order"; break;
        case 6: text = line.noun + " installation guide"; break;
        case 7: text = "return policy for " + line.noun; break;
        default: text = "gift card balance"; break;
      }
    }
    specs.push_back({text, Intent::kNonCommercial, {}, ambiguous, -1});
  }
  rng.shuffle(std::span<QuerySpec>(specs));

  Corpus corpus;
  corpus.taxonomy = Taxonomy(std::move(categories), std::move(products));
  corpus.queries.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& spec = specs[i];
    Query q;
    q.id = static_cast<QueryId>(i + 1);
    q.text = spec.text;
    q.tokens = tokenize(spec.text);
    q.intent = spec.intent;
    q.categories = spec.categories;
    q.ambiguous = spec.ambiguous;
    corpus.queries.push_back(std::move(q));

    if (spec.intent != Intent::kCommercial) continue;
    const Line& line = lines[static_cast<std::size_t>(spec.line)];
    std::map<ProductId, std::int64_t> clicks;
    const auto total = 3 + rng.uniform_index(18);
    const auto n_products = corpus.taxonomy.products().size();
    for (std::uint64_t c = 0; c < total; ++c) {
      if (rng.bernoulli(cfg.click_noise)) {
        ++clicks[corpus.taxonomy.products()[rng.uniform_index(n_products)].pid];
      } else {
        ++clicks[line.products[rng.uniform_index(line.products.size())]];
      }
    }
    for (const auto& [pid, count] : clicks) corpus.clicks.push_back({corpus.queries.back().id, pid, count});
  }
  return corpus;
}

}  // namespace jointmap::corpus
