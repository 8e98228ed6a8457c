#include "gardin/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "gardin/error.hpp"

namespace gardin {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'G', 'D', 'N', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kFormatVersion = 1;

void write_file(const std::filesystem::path& path, const std::string& kind, const json& spec,
                int64_t step, const std::vector<nn::ParamRef<float>>& params) {
  json tensors = json::array();
  int64_t offset = 0;
  for (const auto& p : params) {
    tensors.push_back(
        {{"name", p.name}, {"dims", p.value->dims}, {"offset", offset}, {"count", p.value->size()}});
    offset += p.value->size();
  }
  const json header = {{"format_version", kFormatVersion},
                       {"kind", kind},
                       {"step", step},
                       {"spec", spec},
                       {"tensors", tensors}};
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const uint32_t hlen = static_cast<uint32_t>(hs.size());
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& p : params)
    out.write(reinterpret_cast<const char*>(p.value->data()),
              static_cast<std::streamsize>(p.value->size() * sizeof(float)));
  if (!out) throw IoError("short write to " + path.string());
}

struct LoadedFile {
  json header;
  std::vector<float> data;
};

LoadedFile read_file(const std::filesystem::path& path, const std::string& expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw IoError(path.string() + ": not a checkpoint file");
  uint32_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  if (!in) throw IoError(path.string() + ": truncated checkpoint header");
  std::string hs(hlen, '\0');
  in.read(hs.data(), hlen);
  if (!in) throw IoError(path.string() + ": truncated checkpoint header");

  LoadedFile f;
  try {
    f.header = json::parse(hs);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": corrupt checkpoint header: " + e.what());
  }
  if (f.header.value("format_version", 0u) != kFormatVersion)
    throw IoError(path.string() + ": checkpoint format version mismatch");
  if (f.header.value("kind", std::string()) != expected_kind)
    throw IoError(path.string() + ": checkpoint kind is '" +
                  f.header.value("kind", std::string()) + "', expected '" + expected_kind + "'");

  int64_t total = 0;
  for (const auto& t : f.header.at("tensors")) total += t.at("count").get<int64_t>();
  f.data.resize(static_cast<size_t>(total));
  in.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(f.data.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(f.data.size() * sizeof(float)))
    throw IoError(path.string() + ": truncated checkpoint data");
  return f;
}

void fill_params(const LoadedFile& f, const std::vector<nn::ParamRef<float>>& params,
                 const std::string& path) {
  for (const auto& p : params) {
    const json* found = nullptr;
    for (const auto& t : f.header.at("tensors")) {
      if (t.at("name").get<std::string>() == p.name) {
        found = &t;
        break;
      }
    }
    if (!found) throw ValidationError(path + ": checkpoint is missing tensor '" + p.name + "'");
    const auto dims = found->at("dims").get<std::vector<int>>();
    if (dims != p.value->dims)
      throw ValidationError(path + ": shape mismatch at '" + p.name + "'");
    const int64_t offset = found->at("offset").get<int64_t>();
    const int64_t count = found->at("count").get<int64_t>();
    if (count != p.value->size() || offset < 0 ||
        offset + count > static_cast<int64_t>(f.data.size()))
      throw IoError(path + ": bad tensor index for '" + p.name + "'");
    std::copy_n(f.data.data() + offset, count, p.value->data());
  }
}

}  // namespace

void save_gardin_checkpoint(const std::filesystem::path& path, GardinModel& model) {
  const json spec = {{"generator",
                      {{"encoder_filters", model.gen_spec.encoder_filters},
                       {"decoder_filters", model.gen_spec.decoder_filters},
                       {"kernel", model.gen_spec.kernel},
                       {"lrelu_slope", model.gen_spec.lrelu_slope}}},
                     {"discriminator",
                      {{"filters", model.disc_spec.filters},
                       {"kernel", model.disc_spec.kernel},
                       {"lrelu_slope", model.disc_spec.lrelu_slope}}}};
  auto params = model.generator_params();
  auto disc = model.discriminator_params();
  params.insert(params.end(), disc.begin(), disc.end());
  write_file(path, "gardin", spec, model.step, params);
}

std::unique_ptr<GardinModel> load_gardin_checkpoint(const std::filesystem::path& path) {
  const LoadedFile f = read_file(path, "gardin");
  GeneratorSpec gs;
  DiscriminatorSpec ds;
  try {
    const json& g = f.header.at("spec").at("generator");
    gs.encoder_filters = g.at("encoder_filters").get<std::vector<int>>();
    gs.decoder_filters = g.at("decoder_filters").get<std::vector<int>>();
    gs.kernel = g.at("kernel").get<int>();
    gs.lrelu_slope = g.at("lrelu_slope").get<double>();
    const json& d = f.header.at("spec").at("discriminator");
    ds.filters = d.at("filters").get<std::vector<int>>();
    ds.kernel = d.at("kernel").get<int>();
    ds.lrelu_slope = d.at("lrelu_slope").get<double>();
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": corrupt spec section: " + e.what());
  }
  auto model = std::make_unique<GardinModel>(gs, ds);
  model->step = f.header.value("step", int64_t{0});
  auto params = model->generator_params();
  auto disc = model->discriminator_params();
  params.insert(params.end(), disc.begin(), disc.end());
  fill_params(f, params, path.string());
  return model;
}

void save_alrec_checkpoint(const std::filesystem::path& path, ClassifierModel& model) {
  const json spec = {{"gen_hidden", model.spec.gen_hidden},
                     {"disc_hidden", model.spec.disc_hidden},
                     {"noise_dim", model.spec.noise_dim},
                     {"e_dim", model.spec.e_dim},
                     {"dropout", model.spec.dropout},
                     {"lrelu_slope", model.spec.lrelu_slope}};
  auto params = model.generator_params();
  auto disc = model.discriminator_params();
  params.insert(params.end(), disc.begin(), disc.end());
  write_file(path, "alrec", spec, model.step, params);
}

std::unique_ptr<ClassifierModel> load_alrec_checkpoint(const std::filesystem::path& path) {
  const LoadedFile f = read_file(path, "alrec");
  AlrecSpec spec;
  try {
    const json& s = f.header.at("spec");
    spec.gen_hidden = s.at("gen_hidden").get<std::vector<int>>();
    spec.disc_hidden = s.at("disc_hidden").get<std::vector<int>>();
    spec.noise_dim = s.at("noise_dim").get<int>();
    spec.e_dim = s.at("e_dim").get<int>();
    spec.dropout = s.at("dropout").get<double>();
    spec.lrelu_slope = s.at("lrelu_slope").get<double>();
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": corrupt spec section: " + e.what());
  }
  auto model = std::make_unique<ClassifierModel>(spec);
  model->step = f.header.value("step", int64_t{0});
  auto params = model->generator_params();
  auto disc = model->discriminator_params();
  params.insert(params.end(), disc.begin(), disc.end());
  fill_params(f, params, path.string());
  return model;
}

}  // namespace gardin
