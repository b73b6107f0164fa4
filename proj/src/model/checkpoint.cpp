#include "jointmap/model/checkpoint.hpp"

#include <fstream>

#include "jointmap/binary_io.hpp"
#include "jointmap/error.hpp"

namespace jointmap::model {

namespace {

constexpr std::string_view kMagic = "JMAP1";
constexpr std::uint64_t kMaxCount = 1ull << 32;

std::uint64_t read_count(std::istream& in, const char* what) {
  const auto n = binary::read_u64(in);
  if (n > kMaxCount) throw FileError(std::string("implausible ") + what + " in checkpoint");
  return n;
}

}  // namespace

void save_checkpoint(const JointMapModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write checkpoint '" + path.string() + "'");
  const ModelConfig& c = model.config();
  binary::write_magic(out, kMagic);
  binary::write_u64(out, c.vocab_size);
  binary::write_u64(out, c.embedding_dim);
  binary::write_u64(out, c.query_length);
  binary::write_u64(out, c.categories);
  binary::write_u64(out, c.intents);
  binary::write_u64(out, c.heads);
  binary::write_f64(out, c.focal_gamma);
  binary::write_u64(out, c.focal_alpha.size());
  for (double a : c.focal_alpha) binary::write_f64(out, a);
  binary::write_f64(out, c.beta_category);
  binary::write_f64(out, c.beta_intent);
  binary::write_f64(out, c.dropout);
  binary::write_f64(out, c.category_threshold);
  binary::write_f64(out, c.embedding_init_scale);
  binary::write_f64(out, c.gate_bias_init);

  const auto& tokens = model.vocabulary().tokens();
  binary::write_u64(out, tokens.size());
  for (const auto& t : tokens) binary::write_string(out, t);

  binary::write_u64(out, model.params().size());
  for (const auto& p : model.params()) {
    binary::write_string(out, p.name);
    binary::write_u64(out, p.value.rows());
    binary::write_u64(out, p.value.cols());
    for (double v : p.value.values()) binary::write_f64(out, v);
  }
  if (!out) throw FileError("failed writing checkpoint '" + path.string() + "'");
}

JointMapModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open checkpoint '" + path.string() + "'");
  binary::expect_magic(in, kMagic);
  ModelConfig c;
  c.vocab_size = read_count(in, "vocabulary size");
  c.embedding_dim = read_count(in, "embedding dimension");
  c.query_length = read_count(in, "query length");
  c.categories = read_count(in, "category count");
  c.intents = read_count(in, "intent count");
  c.heads = read_count(in, "head count");
  c.focal_gamma = binary::read_f64(in);
  c.focal_alpha.resize(read_count(in, "alpha count"));
  for (double& a : c.focal_alpha) a = binary::read_f64(in);
  c.beta_category = binary::read_f64(in);
  c.beta_intent = binary::read_f64(in);
  c.dropout = binary::read_f64(in);
  c.category_threshold = binary::read_f64(in);
  c.embedding_init_scale = binary::read_f64(in);
  c.gate_bias_init = binary::read_f64(in);

  std::vector<std::string> tokens(read_count(in, "token count"));
  for (auto& t : tokens) t = binary::read_string(in);

  // Build with throwaway initial values, then overwrite every parameter.
  numerics::Rng rng(0);
  JointMapModel model(c, Vocabulary::from_tokens(std::move(tokens)), rng);
  auto& params = model.params();
  const auto count = binary::read_u64(in);
  if (count != params.size()) {
    throw FileError("checkpoint holds " + std::to_string(count) + " parameters, model expects " +
                    std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const std::string name = binary::read_string(in);
    const auto rows = binary::read_u64(in);
    const auto cols = binary::read_u64(in);
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
      throw FileError("checkpoint parameter '" + name + "' does not match '" + p.name + "' " +
                      p.value.shape_string());
    }
    for (double& v : p.value.values()) v = binary::read_f64(in);
  }
  return model;
}

}  // namespace jointmap::model
