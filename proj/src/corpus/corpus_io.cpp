#include <fstream>
#include <string>

#include "jointmap/corpus/corpus.hpp"
#include "jointmap/error.hpp"
#include "jointmap/text.hpp"

namespace jointmap::corpus {

namespace {

const char* kCategoryHeader = "category_id\tname";
const char* kProductHeader = "pid\ttokens\tcategory_ids";
const char* kQueryHeader = "query_id\ttext\tintent\tcategory_ids";
const char* kClickHeader = "query_id\tpid\tcount";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read " + path.string());
  return in;
}

std::int64_t parse_int(const std::string& field, const std::string& file, std::size_t line) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(file, line, "expected an integer, got '" + field + "'");
}

// Reads lines, stripping a trailing CR, and calls fn(fields, line_number)
// for every non-empty line after the header.
template <typename Fn>
void for_each_row(const std::filesystem::path& path, const char* header, Fn fn) {
  auto in = open_in(path);
  const std::string name = path.filename().string();
  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  ++number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ParseError(name, 1, "unexpected header '" + line + "'");
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(split(line, '\t'), number, name);
  }
}

}  // namespace

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "taxonomy.tsv");
    out << kCategoryHeader << '\n';
    for (const auto& c : corpus.taxonomy.categories()) out << c.id << '\t' << c.name << '\n';
    out << kProductHeader << '\n';
    for (const auto& p : corpus.taxonomy.products()) {
      out << p.pid << '\t' << join(p.tokens, " ") << '\t' << format_category_ids(p.categories)
          << '\n';
    }
  }
  {
    auto out = open_out(dir / "queries.tsv");
    out << kQueryHeader << '\n';
    for (const auto& q : corpus.queries) {
      out << q.id << '\t' << q.text << '\t' << intent_name(q.intent) << '\t'
          << format_category_ids(q.categories) << '\n';
    }
  }
  {
    auto out = open_out(dir / "clicks.tsv");
    out << kClickHeader << '\n';
    for (const auto& c : corpus.clicks) out << c.query << '\t' << c.pid << '\t' << c.count << '\n';
  }
}

Taxonomy read_taxonomy(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string name = path.filename().string();
  std::vector<Category> categories;
  std::vector<Product> products;
  std::string line;
  std::size_t number = 0;
  bool in_products = false;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  ++number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCategoryHeader) throw ParseError(name, 1, "unexpected header '" + line + "'");
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kProductHeader) {
      in_products = true;
      continue;
    }
    const auto f = split(line, '\t');
    if (!in_products) {
      if (f.size() != 2) throw ParseError(name, number, "category rows need 2 fields");
      categories.push_back({static_cast<CategoryId>(parse_int(f[0], name, number)), f[1]});
    } else {
      if (f.size() != 3) throw ParseError(name, number, "product rows need 3 fields");
      Product p;
      p.pid = parse_int(f[0], name, number);
      p.tokens = tokenize(f[1]);
      try {
        p.categories = parse_category_ids(f[2]);
      } catch (const InputError& e) {
        throw ParseError(name, number, e.what());
      }
      products.push_back(std::move(p));
    }
  }
  try {
    return Taxonomy(std::move(categories), std::move(products));
  } catch (const InputError& e) {
    throw ParseError(name, number, e.what());
  }
}

Corpus read_corpus(const std::filesystem::path& dir) {
  Corpus corpus;
  corpus.taxonomy = read_taxonomy(dir / "taxonomy.tsv");
  for_each_row(dir / "queries.tsv", kQueryHeader,
               [&](const std::vector<std::string>& f, std::size_t line, const std::string& file) {
                 if (f.size() != 4) throw ParseError(file, line, "query rows need 4 fields");
                 Query q;
                 q.id = parse_int(f[0], file, line);
                 q.text = f[1];
                 q.tokens = tokenize(f[1]);
                 if (q.tokens.empty()) throw ParseError(file, line, "empty query text");
                 try {
                   q.intent = parse_intent(f[2]);
                   q.categories = parse_category_ids(f[3]);
                 } catch (const InputError& e) {
                   throw ParseError(file, line, e.what());
                 }
                 if ((q.intent == Intent::kNonCommercial) != q.categories.empty()) {
                   throw ParseError(file, line,
                                    "category set must be empty exactly for non-commercial queries");
                 }
                 corpus.queries.push_back(std::move(q));
               });
  for_each_row(dir / "clicks.tsv", kClickHeader,
               [&](const std::vector<std::string>& f, std::size_t line, const std::string& file) {
                 if (f.size() != 3) throw ParseError(file, line, "click rows need 3 fields");
                 ClickRecord r{parse_int(f[0], file, line), parse_int(f[1], file, line),
                               parse_int(f[2], file, line)};
                 if (r.count < 0) throw ParseError(file, line, "negative click count");
                 if (!corpus.taxonomy.has_product(r.pid)) {
                   throw ParseError(file, line, "unknown pid " + std::to_string(r.pid));
                 }
                 corpus.clicks.push_back(r);
               });
  return corpus;
}

}  // namespace jointmap::corpus
