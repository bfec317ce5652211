// Model registry and checkpoint I/O.
//
// Four families: "tiny" (desk-scale smoke net), "allconv" (all
// convolutional), "dense" (densely connected), "wideres" (wide residual,
// depth/widen configurable, e.g. depth 28 widen 10).

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "deeprepair/errors.hpp"
#include "deeprepair/nn/network.hpp"
#include "deeprepair/rng.hpp"

namespace deeprepair {

struct ArchitectureSpec {
  std::string name = "tiny";  // tiny | allconv | dense | wideres
  int num_classes = 10;
  int in_channels = 3;
  int depth = 28;   // wideres: total depth, (depth-4) % 6 == 0
  int widen = 10;   // wideres: width multiplier
  int growth = 12;  // dense: growth rate
};

// Presets by name; throws ConfigError for unknown names.
ArchitectureSpec arch_from_name(const std::string& name);

template <typename T>
nn::Network<T> build_model(const ArchitectureSpec& spec, Rng& init_rng);

extern template nn::Network<float> build_model<float>(const ArchitectureSpec&,
                                                      Rng&);
extern template nn::Network<double> build_model<double>(const ArchitectureSpec&,
                                                        Rng&);

std::size_t parameter_count(const ArchitectureSpec& spec);

struct Checkpoint {
  ArchitectureSpec arch;
  nn::Network<float> net;
  std::map<std::string, std::string> meta;
};

// Binary checkpoint: magic + version + JSON header + raw float32
// parameter and buffer blobs.  Round trip is bit exact.
void save_checkpoint(const std::filesystem::path& path,
                     const ArchitectureSpec& arch,
                     const nn::Network<float>& net,
                     const std::map<std::string, std::string>& meta = {});

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace deeprepair
