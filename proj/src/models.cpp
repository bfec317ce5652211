#include "deeprepair/models.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace deeprepair {

using nn::Add;
using nn::AvgPool2;
using nn::BatchNorm2d;
using nn::ConcatChannels;
using nn::Conv2d;
using nn::GlobalAvgPool;
using nn::Linear;
using nn::Network;
using nn::ReLU;

ArchitectureSpec arch_from_name(const std::string& name) {
  ArchitectureSpec spec;
  spec.name = name;
  if (name == "tiny" || name == "allconv" || name == "dense") return spec;
  if (name == "wideres") {
    spec.depth = 28;
    spec.widen = 10;
    return spec;
  }
  throw ConfigError("unknown architecture: " + name);
}

namespace {

template <typename T>
int conv_bn_relu(Network<T>& net, int in, std::size_t c_in, std::size_t c_out,
                 std::size_t k, std::size_t stride, std::size_t pad) {
  int id = net.add(std::make_unique<Conv2d<T>>(c_in, c_out, k, stride, pad),
                   {in});
  id = net.add(std::make_unique<BatchNorm2d<T>>(c_out), {id});
  return net.add(std::make_unique<ReLU<T>>(), {id});
}

template <typename T>
Network<T> build_tiny(const ArchitectureSpec& spec) {
  Network<T> net;
  const std::size_t cin = std::size_t(spec.in_channels);
  int id = conv_bn_relu(net, Network<T>::kInput, cin, 8, 3, 1, 1);
  id = net.add(std::make_unique<AvgPool2<T>>(), {id});
  id = conv_bn_relu(net, id, 8, 16, 3, 1, 1);
  id = net.add(std::make_unique<AvgPool2<T>>(), {id});
  id = net.add(std::make_unique<GlobalAvgPool<T>>(), {id});
  net.add(std::make_unique<Linear<T>>(16, std::size_t(spec.num_classes)),
          {id});
  return net;
}

template <typename T>
Network<T> build_allconv(const ArchitectureSpec& spec) {
  Network<T> net;
  const std::size_t cin = std::size_t(spec.in_channels);
  int id = conv_bn_relu(net, Network<T>::kInput, cin, 96, 3, 1, 1);
  id = conv_bn_relu(net, id, 96, 96, 3, 1, 1);
  id = conv_bn_relu(net, id, 96, 96, 3, 2, 1);
  id = conv_bn_relu(net, id, 96, 192, 3, 1, 1);
  id = conv_bn_relu(net, id, 192, 192, 3, 1, 1);
  id = conv_bn_relu(net, id, 192, 192, 3, 2, 1);
  id = conv_bn_relu(net, id, 192, 192, 3, 1, 0);
  id = conv_bn_relu(net, id, 192, 192, 1, 1, 0);
  id = net.add(std::make_unique<Conv2d<T>>(192, std::size_t(spec.num_classes),
                                           1, 1, 0),
               {id});
  net.add(std::make_unique<GlobalAvgPool<T>>(), {id});
  return net;
}

template <typename T>
Network<T> build_dense(const ArchitectureSpec& spec) {
  Network<T> net;
  const std::size_t growth = std::size_t(spec.growth);
  std::size_t c = 2 * growth;
  int id = net.add(std::make_unique<Conv2d<T>>(std::size_t(spec.in_channels),
                                               c, 3, 1, 1),
                   {Network<T>::kInput});
  const int layers_per_block = 6;
  for (int block = 0; block < 3; ++block) {
    for (int l = 0; l < layers_per_block; ++l) {
      int b = net.add(std::make_unique<BatchNorm2d<T>>(c), {id});
      b = net.add(std::make_unique<ReLU<T>>(), {b});
      b = net.add(std::make_unique<Conv2d<T>>(c, growth, 3, 1, 1), {b});
      id = net.add(std::make_unique<ConcatChannels<T>>(), {id, b});
      c += growth;
    }
    if (block < 2) {
      int t = net.add(std::make_unique<BatchNorm2d<T>>(c), {id});
      t = net.add(std::make_unique<ReLU<T>>(), {t});
      c = c / 2;
      t = net.add(std::make_unique<Conv2d<T>>(c * 2, c, 1, 1, 0), {t});
      id = net.add(std::make_unique<AvgPool2<T>>(), {t});
    }
  }
  id = net.add(std::make_unique<BatchNorm2d<T>>(c), {id});
  id = net.add(std::make_unique<ReLU<T>>(), {id});
  id = net.add(std::make_unique<GlobalAvgPool<T>>(), {id});
  net.add(std::make_unique<Linear<T>>(c, std::size_t(spec.num_classes)), {id});
  return net;
}

// Pre-activation residual block.
template <typename T>
int wide_block(Network<T>& net, int in, std::size_t c_in, std::size_t c_out,
               std::size_t stride) {
  int b = net.add(std::make_unique<BatchNorm2d<T>>(c_in), {in});
  int r = net.add(std::make_unique<ReLU<T>>(), {b});
  int id = net.add(std::make_unique<Conv2d<T>>(c_in, c_out, 3, stride, 1),
                   {r});
  id = net.add(std::make_unique<BatchNorm2d<T>>(c_out), {id});
  id = net.add(std::make_unique<ReLU<T>>(), {id});
  id = net.add(std::make_unique<Conv2d<T>>(c_out, c_out, 3, 1, 1), {id});
  int sc = in;
  if (c_in != c_out || stride != 1)
    sc = net.add(std::make_unique<Conv2d<T>>(c_in, c_out, 1, stride, 0), {r});
  return net.add(std::make_unique<Add<T>>(), {id, sc});
}

template <typename T>
Network<T> build_wideres(const ArchitectureSpec& spec) {
  if ((spec.depth - 4) % 6 != 0 || spec.depth < 10)
    throw ConfigError("wideres: depth must be 6n+4");
  const std::size_t n = std::size_t((spec.depth - 4) / 6);
  const std::size_t k = std::size_t(spec.widen);
  Network<T> net;
  int id = net.add(std::make_unique<Conv2d<T>>(std::size_t(spec.in_channels),
                                               16, 3, 1, 1),
                   {Network<T>::kInput});
  std::size_t c = 16;
  const std::size_t widths[3] = {16 * k, 32 * k, 64 * k};
  for (int g = 0; g < 3; ++g) {
    const std::size_t stride = g == 0 ? 1 : 2;
    id = wide_block(net, id, c, widths[g], stride);
    c = widths[g];
    for (std::size_t b = 1; b < n; ++b) id = wide_block(net, id, c, c, 1);
  }
  id = net.add(std::make_unique<BatchNorm2d<T>>(c), {id});
  id = net.add(std::make_unique<ReLU<T>>(), {id});
  id = net.add(std::make_unique<GlobalAvgPool<T>>(), {id});
  net.add(std::make_unique<Linear<T>>(c, std::size_t(spec.num_classes)), {id});
  return net;
}

}  // namespace

template <typename T>
Network<T> build_model(const ArchitectureSpec& spec, Rng& init_rng) {
  Network<T> net;
  if (spec.name == "tiny")
    net = build_tiny<T>(spec);
  else if (spec.name == "allconv")
    net = build_allconv<T>(spec);
  else if (spec.name == "dense")
    net = build_dense<T>(spec);
  else if (spec.name == "wideres")
    net = build_wideres<T>(spec);
  else
    throw ConfigError("unknown architecture: " + spec.name);
  net.init(init_rng);
  return net;
}

template Network<float> build_model<float>(const ArchitectureSpec&, Rng&);
template Network<double> build_model<double>(const ArchitectureSpec&, Rng&);

std::size_t parameter_count(const ArchitectureSpec& spec) {
  Rng rng(0);
  return build_model<float>(spec, rng).param_count();
}

namespace {

constexpr char kMagic[8] = {'D', 'R', 'C', 'H', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json arch_to_json(const ArchitectureSpec& a) {
  return {{"name", a.name},         {"num_classes", a.num_classes},
          {"in_channels", a.in_channels}, {"depth", a.depth},
          {"widen", a.widen},       {"growth", a.growth}};
}

ArchitectureSpec arch_from_json(const nlohmann::json& j) {
  ArchitectureSpec a;
  a.name = j.at("name").get<std::string>();
  a.num_classes = j.at("num_classes").get<int>();
  a.in_channels = j.at("in_channels").get<int>();
  a.depth = j.at("depth").get<int>();
  a.widen = j.at("widen").get<int>();
  a.growth = j.at("growth").get<int>();
  return a;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const ArchitectureSpec& arch,
                     const nn::Network<float>& net,
                     const std::map<std::string, std::string>& meta) {
  const std::vector<float> params = net.get_params();
  const std::vector<float> buffers = net.get_buffers();
  nlohmann::json header = {{"arch", arch_to_json(arch)},
                           {"meta", meta},
                           {"params", params.size()},
                           {"buffers", buffers.size()}};
  const std::string hdr = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write checkpoint: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t hlen = hdr.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hdr.data(), std::streamsize(hdr.size()));
  out.write(reinterpret_cast<const char*>(params.data()),
            std::streamsize(params.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(buffers.data()),
            std::streamsize(buffers.size() * sizeof(float)));
  if (!out) throw LoadError("short write on checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw LoadError("bad checkpoint magic: " + path.string());
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kVersion)
    throw LoadError("unsupported checkpoint version: " + path.string());
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hdr(hlen, '\0');
  in.read(hdr.data(), std::streamsize(hlen));
  if (!in) throw LoadError("truncated checkpoint header: " + path.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hdr);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("bad checkpoint header: " + std::string(e.what()));
  }
  Checkpoint ckpt;
  ckpt.arch = arch_from_json(header.at("arch"));
  ckpt.meta = header.at("meta").get<std::map<std::string, std::string>>();
  Rng rng(0);
  ckpt.net = build_model<float>(ckpt.arch, rng);
  std::vector<float> params(header.at("params").get<std::size_t>());
  std::vector<float> buffers(header.at("buffers").get<std::size_t>());
  in.read(reinterpret_cast<char*>(params.data()),
          std::streamsize(params.size() * sizeof(float)));
  in.read(reinterpret_cast<char*>(buffers.data()),
          std::streamsize(buffers.size() * sizeof(float)));
  if (!in) throw LoadError("truncated checkpoint blob: " + path.string());
  ckpt.net.set_params(params);
  ckpt.net.set_buffers(buffers);
  return ckpt;
}

}  // namespace deeprepair
