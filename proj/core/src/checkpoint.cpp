#include "graphmask/checkpoint.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "graphmask/error.hpp"

namespace graphmask {

namespace {
constexpr const char* kMagic = "graphmask-checkpoint";

std::string expect_key(std::istream& in, const std::string& key) {
  std::string k, v;
  if (!(in >> k >> v) || k != key) throw InvalidInput("checkpoint: expected '" + key + "'");
  return v;
}

std::size_t parse_size(const std::string& text) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(text, &pos);
    if (pos != text.size()) throw InvalidInput("checkpoint: bad integer '" + text + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw InvalidInput("checkpoint: bad integer '" + text + "'");
  }
}

}  // namespace

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw InvalidInput("not a number: '" + text + "'");
  }
  return v;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  p.validate();
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  out << "opcode_dim " << p.schema.opcode_dim << '\n';
  out << "permission_dim " << p.schema.permission_dim << '\n';
  out << "layers " << p.layers() << '\n';
  out << "hidden " << p.hidden << '\n';
  out << "variant " << variant_name(p.variant) << '\n';
  out << "gamma " << hex_double(ckpt.gamma) << '\n';
  out << "lambda1 " << hex_double(ckpt.weights.lambda1) << '\n';
  out << "lambda2 " << hex_double(ckpt.weights.lambda2) << '\n';
  out << "metadata " << ckpt.metadata.size() << '\n';
  for (const auto& [k, v] : ckpt.metadata) out << k << ' ' << v << '\n';
  std::size_t count = 0;
  p.for_each_tensor([&](const std::string&, const Matrix&) { ++count; });
  out << "tensors " << count << '\n';
  p.for_each_tensor([&](const std::string& name, const Matrix& m) {
    out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << hex_double(m(r, c));
      out << '\n';
    }
  });
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) {
    throw InvalidInput("not a checkpoint file (missing header)");
  }
  if (version != kCheckpointVersion) {
    throw InvalidInput("unsupported checkpoint version " + std::to_string(version));
  }
  FeatureSchema schema;
  schema.opcode_dim = parse_size(expect_key(in, "opcode_dim"));
  schema.permission_dim = parse_size(expect_key(in, "permission_dim"));
  const std::size_t layers = parse_size(expect_key(in, "layers"));
  const std::size_t hidden = parse_size(expect_key(in, "hidden"));
  const Variant variant = parse_variant(expect_key(in, "variant"));

  Checkpoint ckpt;
  ckpt.gamma = parse_double(expect_key(in, "gamma"));
  ckpt.weights.lambda1 = parse_double(expect_key(in, "lambda1"));
  ckpt.weights.lambda2 = parse_double(expect_key(in, "lambda2"));
  const std::size_t n_meta = parse_size(expect_key(in, "metadata"));
  for (std::size_t i = 0; i < n_meta; ++i) {
    std::string k, v;
    if (!(in >> k >> v)) throw InvalidInput("checkpoint: truncated metadata");
    ckpt.metadata[k] = v;
  }

  // Shapes come from a freshly initialized skeleton; values from the file.
  ckpt.params = init_params(schema, hidden, layers, 0, variant);
  const std::size_t n_tensors = parse_size(expect_key(in, "tensors"));
  std::size_t expected = 0;
  ckpt.params.for_each_tensor([&](const std::string&, const Matrix&) { ++expected; });
  if (n_tensors != expected) throw InvalidInput("checkpoint: unexpected tensor count");

  ckpt.params.for_each_tensor([&](const std::string& name, Matrix& m) {
    std::string tag, got;
    long long rows = 0, cols = 0;
    if (!(in >> tag >> got >> rows >> cols) || tag != "tensor" || got != name) {
      throw InvalidInput("checkpoint: expected tensor '" + name + "'");
    }
    if (rows != m.rows() || cols != m.cols()) {
      throw InvalidInput("checkpoint: tensor '" + name + "' has shape " + std::to_string(rows) +
                         "x" + std::to_string(cols) + ", expected " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
    }
    std::string token;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (!(in >> token)) throw InvalidInput("checkpoint: truncated tensor '" + name + "'");
      m.data()[i] = parse_double(token);
    }
  });
  std::string end;
  if (!(in >> end) || end != "end") throw InvalidInput("checkpoint: missing end marker");
  ckpt.params.validate();
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  write_checkpoint(out, ckpt);
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  return read_checkpoint(in);
}

}  // namespace graphmask
