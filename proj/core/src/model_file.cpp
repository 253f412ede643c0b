#include "thermoface/model_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include "thermoface/atomic_file.hpp"
#include "thermoface/error.hpp"

namespace thermoface {

namespace {

constexpr std::array<unsigned char, 8> kMagic = {'T', 'F', 'A', 'C', 'E', 'M', 'D', 'L'};

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::span<const unsigned char> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  void text(std::string_view s) {
    raw(std::span(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
  }
  void reals(const double* data, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) f64(data[i]);
  }
  void block(const char (&tag)[5], const Writer& payload) {
    raw(std::span(reinterpret_cast<const unsigned char*>(tag), 4));
    u64(payload.bytes_.size());
    raw(payload.bytes_);
  }

  std::vector<unsigned char> take() { return std::move(bytes_); }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::span<const unsigned char> take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw Error(ErrorCode::ParseError, "model file truncated");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return v;
  }
  std::uint64_t u64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  // Guards allocations against lengths that cannot fit in the remaining bytes.
  std::size_t count(std::uint64_t n, std::size_t element_size) {
    if (element_size && n > (bytes_.size() - pos_) / element_size) {
      throw Error(ErrorCode::ParseError, "model file count exceeds block length");
    }
    return static_cast<std::size_t>(n);
  }
  void reals(double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) data[i] = f64();
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

Writer eigen_block(const Eigenspace& es) {
  Writer w;
  w.u64(es.dim());
  w.u64(es.k());
  w.reals(es.mean.data(), es.mean.size());
  w.reals(es.eigenvalues.data(), es.eigenvalues.size());
  w.reals(es.basis.data(), es.basis.size());
  return w;
}

Eigenspace read_eigen_block(Reader& r) {
  Eigenspace es;
  const auto d = r.count(r.u64(), 8);
  const auto k = r.count(r.u64(), 8);
  if (k > d) throw Error(ErrorCode::ParseError, "eigenspace k exceeds d");
  es.mean.resize(static_cast<Eigen::Index>(d));
  es.eigenvalues.resize(static_cast<Eigen::Index>(k));
  r.count(static_cast<std::uint64_t>(d) * k, 8);
  es.basis.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
  r.reals(es.mean.data(), es.mean.size());
  r.reals(es.eigenvalues.data(), es.eigenvalues.size());
  r.reals(es.basis.data(), es.basis.size());
  return es;
}

Writer mlp_block(const MlpModel& m) {
  Writer w;
  const auto& c = m.config;
  w.u64(c.layer_sizes.size());
  for (auto s : c.layer_sizes) w.u64(s);
  w.f64(c.learning_rate);
  w.f64(c.momentum);
  w.u64(c.max_epochs);
  w.f64(c.target_loss);
  w.u64(c.seed);
  w.f64(c.init_scale);
  w.u64(m.epochs_completed);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    // Row-major so the on-disk order is fan_out rows of fan_in weights.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w_rm = m.weights[l];
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> v_rm = m.weight_velocity[l];
    w.reals(w_rm.data(), w_rm.size());
    w.reals(m.biases[l].data(), m.biases[l].size());
    w.reals(v_rm.data(), v_rm.size());
    w.reals(m.bias_velocity[l].data(), m.bias_velocity[l].size());
  }
  return w;
}

MlpModel read_mlp_block(Reader& r) {
  MlpModel m;
  auto& c = m.config;
  const auto layers = r.count(r.u64(), 8);
  if (layers < 2) throw Error(ErrorCode::ParseError, "network block needs at least 2 layers");
  c.layer_sizes.resize(layers);
  for (auto& s : c.layer_sizes) {
    s = r.count(r.u64(), 0);
    if (s == 0 || s > (1u << 24)) throw Error(ErrorCode::ParseError, "network layer size out of range");
  }
  c.learning_rate = r.f64();
  c.momentum = r.f64();
  c.max_epochs = static_cast<std::size_t>(r.u64());
  c.target_loss = r.f64();
  c.seed = r.u64();
  c.init_scale = r.f64();
  m.epochs_completed = r.u64();
  for (std::size_t l = 1; l < layers; ++l) {
    const auto out = static_cast<Eigen::Index>(c.layer_sizes[l]);
    const auto in = static_cast<Eigen::Index>(c.layer_sizes[l - 1]);
    r.count(static_cast<std::uint64_t>(2 * (out * in + out)), 8);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w_rm(out, in), v_rm(out, in);
    Eigen::VectorXd b(out), bv(out);
    r.reals(w_rm.data(), w_rm.size());
    r.reals(b.data(), b.size());
    r.reals(v_rm.data(), v_rm.size());
    r.reals(bv.data(), bv.size());
    m.weights.emplace_back(w_rm);
    m.biases.push_back(std::move(b));
    m.weight_velocity.emplace_back(v_rm);
    m.bias_velocity.push_back(std::move(bv));
  }
  return m;
}

}  // namespace

std::vector<unsigned char> serialize_model(const ModelFile& file) {
  Writer conf;
  conf.text(serialize_config(file.config));
  Writer labels;
  labels.u64(file.labels.size());
  for (std::size_t i = 0; i < file.labels.size(); ++i) {
    labels.u64(i);
    labels.u64(file.labels[i].size());
    labels.text(file.labels[i]);
  }

  Writer out;
  out.raw(kMagic);
  out.u8(kModelFormatVersion);
  out.u32(4);
  out.block("CONF", conf);
  out.block("EIGN", eigen_block(file.model.eigenspace));
  out.block("MLPN", mlp_block(file.model.network));
  out.block("LABL", labels);
  return out.take();
}

ModelFile deserialize_model(std::span<const unsigned char> bytes) {
  if (bytes.size() < kMagic.size() + 1 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::VersionMismatch, "not a thermoface model file (bad magic)");
  }
  Reader r(bytes.subspan(kMagic.size()));
  const auto version = r.u8();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) + ", expected " +
                                                std::to_string(kModelFormatVersion));
  }
  const auto blocks = r.u32();

  ModelFile file;
  bool seen_conf = false, seen_eign = false, seen_mlpn = false, seen_labl = false;
  for (std::uint32_t b = 0; b < blocks; ++b) {
    const auto tag_bytes = r.take(4);
    const std::string tag(tag_bytes.begin(), tag_bytes.end());
    const auto length = r.count(r.u64(), 1);
    Reader payload(r.take(length));
    if (tag == "CONF") {
      const auto text = payload.take(length);
      file.config = parse_config(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()));
      seen_conf = true;
    } else if (tag == "EIGN") {
      file.model.eigenspace = read_eigen_block(payload);
      seen_eign = true;
    } else if (tag == "MLPN") {
      file.model.network = read_mlp_block(payload);
      seen_mlpn = true;
    } else if (tag == "LABL") {
      const auto n = payload.count(payload.u64(), 16);
      for (std::size_t i = 0; i < n; ++i) {
        if (payload.u64() != i) throw Error(ErrorCode::ParseError, "label ids must be dense and ordered");
        const auto len = payload.count(payload.u64(), 1);
        const auto s = payload.take(len);
        file.labels.emplace_back(s.begin(), s.end());
      }
      seen_labl = true;
    } else {
      throw Error(ErrorCode::ParseError, "unknown model block '" + tag + "'");
    }
    if (!payload.done()) throw Error(ErrorCode::ParseError, "block " + tag + " length does not match its contents");
  }
  if (!r.done()) throw Error(ErrorCode::ParseError, "trailing bytes after model blocks");
  if (!(seen_conf && seen_eign && seen_mlpn && seen_labl)) {
    throw Error(ErrorCode::ParseError, "model file is missing a required block");
  }
  const auto& net = file.model.network;
  if (net.num_inputs() != file.model.eigenspace.k()) {
    throw Error(ErrorCode::ParseError, "network input size does not match eigenspace k");
  }
  if (net.num_classes() != file.labels.size()) {
    throw Error(ErrorCode::ParseError, "label table size does not match network outputs");
  }
  return file;
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(file));
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open model " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace thermoface
