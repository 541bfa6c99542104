#include "tandem/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tandem {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'T', 'A', 'N', 'D', 'E', 'M', 'C', 'K'};
constexpr int kFormatVersion = 1;

json encoder_config_json(const EncoderConfig& c) {
  return json{{"vocab_size", c.vocab_size}, {"d_model", c.d_model},
              {"n_layers", c.n_layers},     {"n_heads", c.n_heads},
              {"max_len", c.max_len},       {"ffn_dim", c.ffn_dim}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig c;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  return c;
}

void write_archive(const std::string& path, const json& header,
                   std::vector<TensorRef>& tensors) {
  json full = header;
  full["format_version"] = kFormatVersion;
  json shapes = json::array();
  for (const auto& t : tensors) {
    shapes.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  full["tensors"] = shapes;
  std::string head_str = full.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  uint64_t head_len = head_str.size();
  out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
  out.write(head_str.data(), static_cast<std::streamsize>(head_str.size()));
  for (const auto& t : tensors) {
    out.write(reinterpret_cast<const char*>(t.values->data()),
              static_cast<std::streamsize>(t.values->size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed while writing checkpoint: " + path);
}

json read_archive(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  uint64_t head_len = 0;
  in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len));
  std::string head_str(head_len, '\0');
  in.read(head_str.data(), static_cast<std::streamsize>(head_len));
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  json header = json::parse(head_str);
  int version = header.at("format_version").get<int>();
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported checkpoint format version " +
                             std::to_string(version) + " in " + path);
  }
  return header;
}

void read_payload(std::ifstream& in, const std::string& path, const json& header,
                  std::vector<TensorRef>& tensors) {
  const json& shapes = header.at("tensors");
  if (shapes.size() != tensors.size()) {
    throw std::runtime_error("checkpoint tensor count mismatch in " + path);
  }
  for (size_t i = 0; i < tensors.size(); ++i) {
    const json& s = shapes[i];
    if (s.at("name").get<std::string>() != tensors[i].name ||
        s.at("rows").get<int>() != tensors[i].rows ||
        s.at("cols").get<int>() != tensors[i].cols) {
      throw std::runtime_error("checkpoint tensor '" + tensors[i].name +
                               "' has unexpected shape in " + path);
    }
    in.read(reinterpret_cast<char*>(tensors[i].values->data()),
            static_cast<std::streamsize>(tensors[i].values->size() *
                                         sizeof(double)));
  }
  if (!in) throw std::runtime_error("truncated checkpoint payload: " + path);
}

}  // namespace

void save_model(const std::string& path, const ModelParams& params) {
  json header;
  header["kind"] = "model";
  header["role"] = role_name(params.role);
  header["encoder_frozen"] = params.encoder_frozen;
  header["encoder_config"] = encoder_config_json(params.encoder.config);
  header["n_classes"] = params.head.n_classes();
  std::vector<TensorRef> tensors;
  collect_tensors(const_cast<ModelParams&>(params), tensors,
                  /*include_encoder=*/true);
  write_archive(path, header, tensors);
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json header = read_archive(in, path);
  if (header.at("kind").get<std::string>() != "model") {
    throw std::runtime_error("checkpoint does not hold a model: " + path);
  }
  ModelParams params;
  params.role = role_from_name(header.at("role").get<std::string>());
  params.encoder_frozen = header.at("encoder_frozen").get<bool>();
  EncoderConfig config = encoder_config_from_json(header.at("encoder_config"));
  params.encoder = init_encoder(config, /*seed=*/0);
  params.head = init_head(config.d_model, header.at("n_classes").get<int>(),
                          /*seed=*/0);
  std::vector<TensorRef> tensors;
  collect_tensors(params, tensors, /*include_encoder=*/true);
  read_payload(in, path, header, tensors);
  return params;
}

void save_encoder(const std::string& path, const EncoderParams& params) {
  json header;
  header["kind"] = "encoder";
  header["encoder_config"] = encoder_config_json(params.config);
  std::vector<TensorRef> tensors;
  collect_tensors(const_cast<EncoderParams&>(params), "", tensors);
  write_archive(path, header, tensors);
}

EncoderParams load_encoder(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json header = read_archive(in, path);
  if (header.at("kind").get<std::string>() != "encoder") {
    throw std::runtime_error("checkpoint does not hold an encoder: " + path);
  }
  EncoderConfig config = encoder_config_from_json(header.at("encoder_config"));
  EncoderParams params = init_encoder(config, /*seed=*/0);
  std::vector<TensorRef> tensors;
  collect_tensors(params, "", tensors);
  read_payload(in, path, header, tensors);
  return params;
}

}  // namespace tandem
