#include "deeprepair/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "deeprepair/errors.hpp"
#include "deeprepair/png_io.hpp"
#include "deeprepair/rng.hpp"

namespace fs = std::filesystem;

namespace deeprepair {

Image LabelledDataset::image(std::size_t i) const {
  Image img(shape);
  const float* src = image_data(i);
  std::copy(src, src + image_size(), img.data.begin());
  return img;
}

void LabelledDataset::append(const Image& img, int label) {
  if (labels.empty() && shape.size() == 0) shape = img.shape;
  if (!(img.shape == shape))
    throw ValidationError("dataset: appended image shape mismatch");
  images.insert(images.end(), img.data.begin(), img.data.end());
  labels.push_back(label);
}

LabelledDataset LabelledDataset::subset(const std::vector<std::size_t>& indices,
                                        const std::string& subset_name) const {
  LabelledDataset out;
  out.shape = shape;
  out.num_classes = num_classes;
  out.name = subset_name;
  out.images.reserve(indices.size() * image_size());
  out.labels.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= size())
      throw ValidationError("dataset: subset index out of range");
    const float* src = image_data(idx);
    out.images.insert(out.images.end(), src, src + image_size());
    out.labels.push_back(labels[idx]);
  }
  return out;
}

void LabelledDataset::validate() const {
  if (images.size() != size() * image_size())
    throw ValidationError("dataset '" + name +
                          "': image buffer does not match label count");
  if (num_classes <= 0)
    throw ValidationError("dataset '" + name + "': num_classes must be positive");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw ValidationError("dataset '" + name + "': label out of range at index " +
                            std::to_string(i));
  }
  for (float v : images) {
    if (!(v >= 0.0f && v <= 1.0f))
      throw ValidationError("dataset '" + name + "': pixel outside [0,1]");
  }
}

namespace {

constexpr int kCifarDim = 32;
constexpr std::size_t kCifarRecord = 1 + 3 * kCifarDim * kCifarDim;

void read_cifar_file(const fs::path& file, LabelledDataset& out) {
  std::ifstream in(file, std::ios::binary | std::ios::ate);
  if (!in) throw LoadError("dataset: cannot open " + file.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes == 0 || bytes % kCifarRecord != 0)
    throw LoadError("dataset: " + file.string() +
                    " is not a CIFAR binary batch (size " +
                    std::to_string(bytes) + ")");
  in.seekg(0);
  const std::size_t count = bytes / kCifarRecord;
  std::vector<std::uint8_t> record(kCifarRecord);
  for (std::size_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(record.data()), kCifarRecord);
    if (!in) throw LoadError("dataset: truncated read in " + file.string());
    out.labels.push_back(record[0]);
    // CIFAR stores planes R,G,B row-major, which is already CHW
    for (std::size_t p = 1; p < kCifarRecord; ++p)
      out.images.push_back(static_cast<float>(record[p]) / 255.0f);
  }
}

}  // namespace

LabelledDataset load_cifar_binary(const fs::path& root, Split split) {
  std::vector<fs::path> files;
  if (split == Split::kTrain) {
    for (const auto& e : fs::directory_iterator(root)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("data_batch_", 0) == 0 && name.ends_with(".bin"))
        files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw LoadError("dataset: no data_batch_*.bin under " + root.string());
  } else {
    const fs::path f = root / "test_batch.bin";
    if (!fs::exists(f))
      throw LoadError("dataset: missing " + f.string());
    files.push_back(f);
  }

  LabelledDataset ds;
  ds.shape = {3, kCifarDim, kCifarDim};
  ds.num_classes = 10;
  ds.name = split == Split::kTrain ? "train" : "test";
  for (const auto& f : files) read_cifar_file(f, ds);
  ds.validate();
  return ds;
}

LabelledDataset load_image_directory(const fs::path& root, Split split) {
  const fs::path dir = root / (split == Split::kTrain ? "train" : "test");
  const fs::path index = dir / "labels.txt";
  std::ifstream in(index);
  if (!in) throw LoadError("dataset: missing label index " + index.string());

  LabelledDataset ds;
  ds.num_classes = 10;
  ds.name = split == Split::kTrain ? "train" : "test";
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string file;
    int label = -1;
    if (!(ss >> file >> label))
      throw LoadError("dataset: malformed line in " + index.string() + ": " + line);
    ds.append(read_png(dir / file), label);
  }
  if (ds.size() == 0)
    throw LoadError("dataset: empty label index " + index.string());
  ds.validate();
  return ds;
}

LabelledDataset load_dataset(const fs::path& root, Split split) {
  if (!fs::exists(root))
    throw LoadError("dataset: path does not exist: " + root.string());
  if (fs::exists(root / "test_batch.bin") ||
      fs::exists(root / "data_batch_1.bin"))
    return load_cifar_binary(root, split);
  const fs::path sub = root / (split == Split::kTrain ? "train" : "test");
  if (fs::exists(sub / "labels.txt")) return load_image_directory(root, split);
  throw LoadError("dataset: no CIFAR batches or labels.txt found under " +
                  root.string());
}

namespace {

// Synthetic class appearance: per-channel base color plus a few
// low-frequency sinusoids.  Instance jitter (gain, offset, a smooth
// perturbation field, pixel noise) controls task difficulty.
struct Wave {
  double amp, fy, fx, phase;
};

struct ClassTemplate {
  double base[3];
  std::vector<Wave> waves[3];
};

ClassTemplate make_template(const Rng& root, int cls) {
  Rng rng = root.stream(0x7e3a, static_cast<std::uint64_t>(cls));
  ClassTemplate t;
  for (int c = 0; c < 3; ++c) {
    t.base[c] = rng.uniform(0.30, 0.70);
    const int n_waves = 3;
    for (int w = 0; w < n_waves; ++w) {
      Wave wv;
      wv.amp = rng.uniform(0.05, 0.16);
      wv.fy = static_cast<double>(rng.uniform_int(0, 3));
      wv.fx = static_cast<double>(rng.uniform_int(0, 3));
      if (wv.fy == 0 && wv.fx == 0) wv.fx = 1;
      wv.phase = rng.uniform(0.0, 2.0 * M_PI);
      t.waves[c].push_back(wv);
    }
  }
  return t;
}

Image render_instance(const ClassTemplate& t, const SyntheticSpec& spec,
                      Rng& rng) {
  const int h = spec.height, w = spec.width;
  Image img({3, h, w});
  const double gain = rng.uniform(0.80, 1.20);
  const double offset = rng.uniform(-0.10, 0.10);
  // smooth instance-specific field shared across channels
  const double pa = rng.uniform(0.0, 0.12);
  const double pfy = static_cast<double>(rng.uniform_int(0, 2));
  const double pfx = static_cast<double>(rng.uniform_int(0, 2));
  const double pph = rng.uniform(0.0, 2.0 * M_PI);
  const double noise_sigma = 0.04;

  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double v = t.base[c];
        for (const Wave& wv : t.waves[c]) {
          v += wv.amp * std::sin(2.0 * M_PI *
                                     (wv.fy * y + wv.fx * x) /
                                     static_cast<double>(w) +
                                 wv.phase);
        }
        v = gain * (v - 0.5) + 0.5 + offset;
        v += pa * std::sin(2.0 * M_PI * (pfy * y + pfx * x) /
                               static_cast<double>(w) +
                           pph);
        v += rng.normal(0.0, noise_sigma);
        img.at(c, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return img;
}

void write_cifar_file(const fs::path& file,
                      const std::vector<std::uint8_t>& records) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw LoadError("dataset: cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(records.data()),
            static_cast<std::streamsize>(records.size()));
}

void synthesize_split(const fs::path& file, int count,
                      const std::vector<ClassTemplate>& templates,
                      const SyntheticSpec& spec, Rng& rng) {
  std::vector<std::uint8_t> records;
  records.reserve(static_cast<std::size_t>(count) * kCifarRecord);
  for (int i = 0; i < count; ++i) {
    const int cls = i % spec.num_classes;  // balanced classes
    Image img = render_instance(templates[cls], spec, rng);
    records.push_back(static_cast<std::uint8_t>(cls));
    for (float v : img.data)
      records.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
  }
  write_cifar_file(file, records);
}

}  // namespace

void write_synthetic_dataset(const fs::path& root, const SyntheticSpec& spec,
                             std::uint64_t seed) {
  if (spec.height != kCifarDim || spec.width != kCifarDim)
    throw ConfigError("synthetic dataset: CIFAR layout requires 32x32");
  fs::create_directories(root);
  const Rng base(seed);
  std::vector<ClassTemplate> templates;
  for (int c = 0; c < spec.num_classes; ++c)
    templates.push_back(make_template(base, c));

  Rng train_rng = base.stream(0x11);
  synthesize_split(root / "data_batch_1.bin", spec.train_count, templates,
                   spec, train_rng);
  Rng test_rng = base.stream(0x22);
  synthesize_split(root / "test_batch.bin", spec.test_count, templates, spec,
                   test_rng);
}

}  // namespace deeprepair
