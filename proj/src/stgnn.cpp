#include "stgf/stgnn.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

namespace stgf {

Task parse_task(const std::string& name) {
  if (name == "regression") return Task::Regression;
  if (name == "classification") return Task::Classification;
  throw std::invalid_argument("unknown task: " + name);
}

CellKind parse_cell(const std::string& name) {
  if (name == "gcrn") return CellKind::Gcrn;
  if (name == "gclstm") return CellKind::Gclstm;
  throw std::invalid_argument("unknown model cell: " + name);
}

Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::Adam;
  if (name == "sgd") return Optimizer::Sgd;
  throw std::invalid_argument("unknown optimizer: " + name);
}

Precision parse_precision(const std::string& name) {
  if (name == "f32") return Precision::Float32;
  if (name == "f64") return Precision::Float64;
  throw std::invalid_argument("unknown precision: " + name);
}

namespace {

constexpr char kMagic[8] = {'S', 'T', 'G', 'F', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  char bytes[sizeof(T)];
  in.read(bytes, sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

nlohmann::json config_to_json(const TrainConfig& config) {
  return {{"learning_rate", config.learning_rate}, {"epochs", config.epochs},
          {"seed", config.seed},                   {"task", to_string(config.task)},
          {"hidden", config.hidden},               {"optimizer", to_string(config.optimizer)},
          {"precision", to_string(config.precision)}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig config;
  config.learning_rate = j.at("learning_rate").get<double>();
  config.epochs = j.at("epochs").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.task = parse_task(j.at("task").get<std::string>());
  config.hidden = j.at("hidden").get<Eigen::Index>();
  config.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  config.precision = parse_precision(j.at("precision").get<std::string>());
  return config;
}

nlohmann::json read_header(std::istream& in, const std::string& path) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a model checkpoint: " + path);
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = read_le<std::uint64_t>(in);
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("checkpoint truncated");
  return nlohmann::json::parse(header);
}

}  // namespace

template <typename Scalar>
void save_checkpoint(const std::string& path, const Model<Scalar>& model,
                     const TrainConfig& config) {
  const auto views = param_views(model);
  nlohmann::json blocks = nlohmann::json::array();
  detail::visit_params(model, [&](std::string name, const auto& block) {
    blocks.push_back({{"name", std::move(name)}, {"rows", block.rows()}, {"cols", block.cols()}});
  });
  const nlohmann::json header = {
      {"cell", to_string(model.cell)},   {"task", to_string(model.task)},
      {"input_dim", model.input_dim},    {"hidden", model.hidden},
      {"horizon", model.horizon},        {"precision", sizeof(Scalar) == 4 ? "f32" : "f64"},
      {"config", config_to_json(config)}, {"blocks", blocks}};
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_le(out, kVersion);
  write_le(out, static_cast<std::uint64_t>(header_text.size()));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& view : views) {
    out.write(reinterpret_cast<const char*>(view.data),
              static_cast<std::streamsize>(view.size) * static_cast<std::streamsize>(sizeof(Scalar)));
  }
  if (!out) throw std::runtime_error("write failed for checkpoint: " + path);
}

Precision checkpoint_precision(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  const auto header = read_header(in, path);
  return parse_precision(header.at("precision").get<std::string>());
}

template <typename Scalar>
Model<Scalar> load_checkpoint(const std::string& path, TrainConfig* config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  const auto header = read_header(in, path);

  const auto precision = parse_precision(header.at("precision").get<std::string>());
  if ((precision == Precision::Float32) != (sizeof(Scalar) == 4)) {
    throw std::runtime_error("checkpoint precision " + header.at("precision").get<std::string>() +
                             " does not match the requested scalar type");
  }

  Model<Scalar> model = make_model<Scalar>(
      parse_cell(header.at("cell").get<std::string>()),
      parse_task(header.at("task").get<std::string>()), header.at("input_dim").get<Eigen::Index>(),
      header.at("hidden").get<Eigen::Index>(), header.at("horizon").get<Eigen::Index>(), 0);

  const auto& blocks = header.at("blocks");
  auto views = param_views(model);
  if (blocks.size() != views.size()) {
    throw std::runtime_error("checkpoint block count does not match the architecture");
  }
  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto& meta = blocks[k];
    const auto declared =
        meta.at("rows").get<Eigen::Index>() * meta.at("cols").get<Eigen::Index>();
    if (meta.at("name").get<std::string>() != views[k].name || declared != views[k].size) {
      throw std::runtime_error("checkpoint block " + meta.at("name").get<std::string>() +
                               " does not match the architecture");
    }
    in.read(reinterpret_cast<char*>(views[k].data),
            static_cast<std::streamsize>(views[k].size) *
                static_cast<std::streamsize>(sizeof(Scalar)));
    if (!in) throw std::runtime_error("checkpoint truncated");
  }
  if (config != nullptr) *config = config_from_json(header.at("config"));
  return model;
}

template void save_checkpoint<float>(const std::string&, const Model<float>&, const TrainConfig&);
template void save_checkpoint<double>(const std::string&, const Model<double>&,
                                      const TrainConfig&);
template Model<float> load_checkpoint<float>(const std::string&, TrainConfig*);
template Model<double> load_checkpoint<double>(const std::string&, TrainConfig*);

}  // namespace stgf
