#include "jointmap/datasets/labeled_dataset.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "jointmap/error.hpp"
#include "jointmap/text.hpp"

namespace jointmap::datasets {

std::string split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    default: return "unassigned";
  }
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  if (name == "unassigned") return Split::kUnassigned;
  throw InputError("unknown split '" + name + "'");
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kSeed: return "seed";
    case Provenance::kKnn: return "knn";
    case Provenance::kOracle: return "oracle-relabel";
    case Provenance::kClicks: return "clicks";
    default: return "oversampled";
  }
}

std::size_t LabeledDataset::count(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const auto& r) { return r.split == s; }));
}

std::size_t LabeledDataset::count(Split s, Intent intent) const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const auto& r) {
    return r.split == s && r.intent == intent;
  }));
}

std::int64_t LabeledDataset::max_record_id() const {
  std::int64_t m = 0;
  for (const auto& r : records) m = std::max(m, r.record_id);
  return m;
}

std::vector<PoolQuery> to_pool(const std::vector<corpus::Query>& queries) {
  std::vector<PoolQuery> pool;
  pool.reserve(queries.size());
  for (const auto& q : queries) pool.push_back({q.id, q.tokens});
  return pool;
}

void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  out << "record_id\tquery_id\tsplit\tintent\tcategory_ids\n";
  for (const auto& r : ds.records) {
    out << r.record_id << '\t' << r.query_id << '\t' << split_name(r.split) << '\t'
        << corpus::intent_name(r.intent) << '\t' << corpus::format_category_ids(r.categories)
        << '\n';
  }
}

LabeledDataset read_dataset(const std::filesystem::path& path,
                            const std::vector<corpus::Query>& queries) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read " + path.string());
  const std::string file = path.filename().string();
  std::unordered_map<QueryId, const corpus::Query*> by_id;
  for (const auto& q : queries) by_id[q.id] = &q;

  LabeledDataset ds;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1) {
      if (line != "record_id\tquery_id\tsplit\tintent\tcategory_ids") {
        throw ParseError(file, 1, "unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 5) throw ParseError(file, number, "dataset rows need 5 fields");
    LabeledRecord r;
    try {
      r.record_id = std::stoll(f[0]);
      r.query_id = std::stoll(f[1]);
      r.split = parse_split(f[2]);
      r.intent = corpus::parse_intent(f[3]);
      r.categories = corpus::parse_category_ids(f[4]);
    } catch (const Error& e) {
      throw ParseError(file, number, e.what());
    } catch (const std::exception&) {
      throw ParseError(file, number, "bad numeric field");
    }
    const auto it = by_id.find(r.query_id);
    if (it == by_id.end()) throw ParseError(file, number, "unknown query id " + f[1]);
    r.tokens = it->second->tokens;
    ds.records.push_back(std::move(r));
  }
  if (number == 0) throw ParseError(file, 1, "missing header");
  return ds;
}

}  // namespace jointmap::datasets
