#include "thermoface/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "thermoface/error.hpp"

namespace thermoface {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::ParseError, "invalid value '" + std::string(value) + "' for " + std::string(key));
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) bad_value(key, value);
  return v;
}

double to_real(std::string_view key, std::string_view value) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) bad_value(key, value);
  return v;
}

std::vector<std::size_t> to_size_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  while (true) {
    const auto comma = value.find(',');
    out.push_back(static_cast<std::size_t>(to_uint(key, trim(value.substr(0, comma)))));
    if (comma == std::string_view::npos) break;
    value = value.substr(comma + 1);
  }
  return out;
}

std::string real_text(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string size_list_text(const auto& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(TransformVariant v) {
  switch (v) {
    case TransformVariant::Raw: return "raw";
    case TransformVariant::LineSkeletal: return "line_skeletal";
    case TransformVariant::Polar: return "polar";
    case TransformVariant::PolarLineSkeletal: return "polar_line_skeletal";
  }
  return "unknown";
}

TransformVariant parse_variant(std::string_view name) {
  for (auto v : kAllVariants) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorCode::ParseError, "unknown variant '" + std::string(name) +
                                               "' (expected raw, line_skeletal, polar, polar_line_skeletal)");
}

void PipelineConfig::validate() const {
  polar.validate();
  mlp.validate();
  if (linefeat.binarize_at && !(*linefeat.binarize_at > 0.0 && *linefeat.binarize_at <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "linefeat.binarize_at must be in (0, 1]");
  }
  if (pca_k == 0) throw Error(ErrorCode::InvalidParameter, "pca.k must be >= 1");
  if (synth.size < 64) throw Error(ErrorCode::InvalidParameter, "synth.size must be >= 64");
  if (!(synth.noise >= 0.0)) throw Error(ErrorCode::InvalidParameter, "synth.noise must be non-negative");
}

void PipelineConfig::set(std::string_view key_in, std::string_view value_in) {
  const std::string_view key = trim(key_in);
  const std::string_view value = trim(value_in);
  if (key == "seed") {
    seed = to_uint(key, value);
  } else if (key == "polar.base") {
    polar.base = static_cast<unsigned>(to_uint(key, value));
  } else if (key == "polar.fixed_side") {
    if (value.empty()) {
      polar.fixed_side.reset();
    } else {
      polar.fixed_side = static_cast<std::size_t>(to_uint(key, value));
    }
  } else if (key == "polar.r_min") {
    polar.r_min = to_real(key, value);
  } else if (key == "linefeat.bank_path") {
    if (value.empty()) {
      linefeat.bank_path.reset();
    } else {
      linefeat.bank_path = std::filesystem::path(std::string(value));
    }
  } else if (key == "linefeat.binarize_at") {
    if (value.empty()) {
      linefeat.binarize_at.reset();
    } else {
      linefeat.binarize_at = to_real(key, value);
    }
  } else if (key == "pca.k") {
    pca_k = static_cast<std::size_t>(to_uint(key, value));
  } else if (key == "mlp.layer_sizes") {
    mlp.layer_sizes = to_size_list(key, value);
  } else if (key == "mlp.learning_rate") {
    mlp.learning_rate = to_real(key, value);
  } else if (key == "mlp.momentum") {
    mlp.momentum = to_real(key, value);
  } else if (key == "mlp.max_epochs") {
    mlp.max_epochs = static_cast<std::size_t>(to_uint(key, value));
  } else if (key == "mlp.target_loss") {
    mlp.target_loss = to_real(key, value);
  } else if (key == "mlp.init_scale") {
    mlp.init_scale = to_real(key, value);
  } else if (key == "eval.variant") {
    eval.variant = parse_variant(value);
  } else if (key == "eval.fold_sizes") {
    if (value.empty()) {
      eval.fold_sizes.reset();
    } else {
      const auto sizes = to_size_list(key, value);
      if (sizes.size() != 3) bad_value(key, value);
      eval.fold_sizes = std::array<std::size_t, 3>{sizes[0], sizes[1], sizes[2]};
    }
  } else if (key == "synth.size") {
    synth.size = static_cast<std::size_t>(to_uint(key, value));
  } else if (key == "synth.noise") {
    synth.noise = to_real(key, value);
  } else if (key == "io.manifest") {
    io.manifest = std::string(value);
  } else if (key == "io.model") {
    io.model = std::string(value);
  } else if (key == "io.output_dir") {
    io.output_dir = std::string(value);
  } else {
    throw Error(ErrorCode::ParseError, "unknown config key '" + std::string(key) + "'");
  }
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      cfg.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(cfg.seed);
  kv["polar.base"] = std::to_string(cfg.polar.base);
  kv["polar.fixed_side"] = cfg.polar.fixed_side ? std::to_string(*cfg.polar.fixed_side) : "";
  kv["polar.r_min"] = real_text(cfg.polar.r_min);
  kv["linefeat.bank_path"] = cfg.linefeat.bank_path ? cfg.linefeat.bank_path->string() : "";
  kv["linefeat.binarize_at"] = cfg.linefeat.binarize_at ? real_text(*cfg.linefeat.binarize_at) : "";
  kv["pca.k"] = std::to_string(cfg.pca_k);
  kv["mlp.layer_sizes"] = size_list_text(cfg.mlp.layer_sizes);
  kv["mlp.learning_rate"] = real_text(cfg.mlp.learning_rate);
  kv["mlp.momentum"] = real_text(cfg.mlp.momentum);
  kv["mlp.max_epochs"] = std::to_string(cfg.mlp.max_epochs);
  kv["mlp.target_loss"] = real_text(cfg.mlp.target_loss);
  kv["mlp.init_scale"] = real_text(cfg.mlp.init_scale);
  kv["eval.variant"] = std::string(to_string(cfg.eval.variant));
  kv["eval.fold_sizes"] = cfg.eval.fold_sizes ? size_list_text(*cfg.eval.fold_sizes) : "";
  kv["synth.size"] = std::to_string(cfg.synth.size);
  kv["synth.noise"] = real_text(cfg.synth.noise);
  kv["io.manifest"] = cfg.io.manifest;
  kv["io.model"] = cfg.io.model;
  kv["io.output_dir"] = cfg.io.output_dir;

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

}  // namespace thermoface
