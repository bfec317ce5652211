#include "deeprepair/trainer.hpp"

#include <algorithm>
#include <numeric>

#include "deeprepair/errors.hpp"
#include "deeprepair/harness.hpp"
#include "deeprepair/nn/losses.hpp"
#include "deeprepair/rng.hpp"

namespace deeprepair {

namespace {

nn::Tensor<float> images_to_tensor(const std::vector<Image>& imgs) {
  const ImageShape s = imgs.front().shape;
  nn::Tensor<float> x({imgs.size(), std::size_t(s.channels),
                       std::size_t(s.height), std::size_t(s.width)});
  for (std::size_t i = 0; i < imgs.size(); ++i)
    std::copy_n(imgs[i].data.data(), s.size(), x.data.data() + i * s.size());
  return x;
}

// Snapshot of the best-validation weights, restored at the end.
struct BestTracker {
  std::vector<float> params, buffers;
  double best = -1.0;
  int best_epoch = -1;
  int since_best = 0;

  // Returns true while training should continue.
  bool observe(nn::Network<float>& net, double acc, int epoch, int patience) {
    if (acc > best) {
      best = acc;
      best_epoch = epoch;
      since_best = 0;
      params = net.get_params();
      buffers = net.get_buffers();
    } else {
      // ties keep the most recent weights but still consume patience
      if (acc == best) {
        best_epoch = epoch;
        params = net.get_params();
        buffers = net.get_buffers();
      }
      ++since_best;
    }
    return since_best < patience;
  }

  void restore(nn::Network<float>& net) const {
    if (best_epoch >= 0) {
      net.set_params(params);
      net.set_buffers(buffers);
    }
  }
};

void scale_inplace(nn::Tensor<float>& t, float a) {
  for (auto& v : t.data) v *= a;
}

}  // namespace

void split_train_val(std::size_t n, double val_fraction, std::uint64_t seed,
                     std::vector<std::size_t>& train_idx,
                     std::vector<std::size_t>& val_idx) {
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw ConfigError("val_fraction must be in [0, 1)");
  Rng rng = Rng(seed).stream(0x5917u);
  const std::vector<std::size_t> order = rng.permutation(n);
  std::size_t n_val = std::size_t(double(n) * val_fraction);
  if (val_fraction > 0.0 && n_val == 0 && n > 1) n_val = 1;
  train_idx.assign(order.begin() + long(n_val), order.end());
  val_idx.assign(order.begin(), order.begin() + long(n_val));
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  if (train_idx.empty()) throw ValidationError("empty training split");
}

TrainingLog train_base(nn::Network<float>& net, const LabelledDataset& train,
                       const LabelledDataset& val, const TrainConfig& cfg) {
  if (train.size() == 0) throw ValidationError("train_base: empty dataset");
  nn::SgdOptimizer<float> opt(net, cfg.lr, cfg.momentum, cfg.weight_decay);
  Rng shuffle_root = Rng(cfg.seed).stream(0x0bdeu);
  TrainingLog log;
  BestTracker best;
  nn::Workspace<float> ws;
  std::vector<std::size_t> batch_idx;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const std::vector<std::size_t> order =
        shuffle_root.stream(std::uint64_t(epoch)).permutation(train.size());
    double ce_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + cfg.batch_size);
      batch_idx.assign(order.begin() + long(start),
                       order.begin() + long(stop));
      const nn::Tensor<float> x = batch_tensor(train, batch_idx);
      std::vector<int> y(batch_idx.size());
      for (std::size_t i = 0; i < batch_idx.size(); ++i)
        y[i] = train.labels[batch_idx[i]];
      net.forward(x, ws, /*training=*/true);
      nn::Tensor<float> probs, dlogits;
      nn::softmax(net.output(ws), probs);
      const double ce = nn::cross_entropy(probs, y, &dlogits);
      net.zero_grad();
      net.backward(x, dlogits, ws);
      opt.step();
      ce_sum += ce;
      ++batches;
    }
    const double val_acc = evaluate(net, val).accuracy;
    EpochLog e;
    e.epoch = epoch;
    e.ce_loss = batches ? ce_sum / double(batches) : 0.0;
    e.total_loss = e.ce_loss;
    e.val_accuracy = val_acc;
    log.epochs.push_back(e);
    if (!best.observe(net, val_acc, epoch, cfg.patience)) {
      log.early_stopped = true;
      break;
    }
  }
  best.restore(net);
  log.best_epoch = best.best_epoch;
  log.best_val_accuracy = best.best;
  return log;
}

TrainingLog repair(nn::Network<float>& net, const LabelledDataset& data,
                   const OperationSet& ops, const TrainConfig& cfg) {
  ops.validate();
  std::vector<std::size_t> tr, va;
  split_train_val(data.size(), cfg.val_fraction, cfg.seed, tr, va);
  const LabelledDataset val_set =
      va.empty() ? data.subset(tr, data.name + "/val")
                 : data.subset(va, data.name + "/val");
  nn::SgdOptimizer<float> opt(net, cfg.lr, cfg.momentum, cfg.weight_decay);
  Rng shuffle_root = Rng(cfg.seed).stream(0x4e90u);
  const Rng aug_root = Rng(cfg.seed).stream(0x0a06u);
  TrainingLog log;
  BestTracker best;
  nn::Workspace<float> ws0, ws1, ws2;
  std::vector<std::size_t> batch_idx;
  std::vector<Image> view1, view2;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const std::vector<std::size_t> order =
        shuffle_root.stream(std::uint64_t(epoch)).permutation(tr.size());
    double ce_sum = 0.0, js_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + cfg.batch_size);
      batch_idx.clear();
      for (std::size_t i = start; i < stop; ++i)
        batch_idx.push_back(tr[order[i]]);
      const nn::Tensor<float> x0 = batch_tensor(data, batch_idx);
      std::vector<int> y(batch_idx.size());
      view1.clear();
      view2.clear();
      for (std::size_t i = 0; i < batch_idx.size(); ++i) {
        const std::size_t gi = batch_idx[i];
        y[i] = data.labels[gi];
        const Image img = data.image(gi);
        Rng r1 = aug_root.stream(std::uint64_t(epoch), gi, 1);
        Rng r2 = aug_root.stream(std::uint64_t(epoch), gi, 2);
        view1.push_back(style_aug(img, ops, r1, cfg.m_width, cfg.alpha));
        view2.push_back(style_aug(img, ops, r2, cfg.m_width, cfg.alpha));
      }
      const nn::Tensor<float> x1 = images_to_tensor(view1);
      const nn::Tensor<float> x2 = images_to_tensor(view2);
      net.forward(x0, ws0, /*training=*/true);
      net.forward(x1, ws1, /*training=*/true);
      net.forward(x2, ws2, /*training=*/true);
      nn::Tensor<float> p0, p1, p2;
      nn::softmax(net.output(ws0), p0);
      nn::softmax(net.output(ws1), p1);
      nn::softmax(net.output(ws2), p2);
      nn::Tensor<float> dce, dj0, dj1, dj2;
      const double ce = nn::cross_entropy(p0, y, &dce);
      const double js = nn::js_loss(p0, p1, p2, &dj0, &dj1, &dj2);
      // clean branch carries both terms
      scale_inplace(dj0, float(cfg.lambda));
      kernels::axpy(dce.size(), 1.0f, dce.data.data(), dj0.data.data());
      scale_inplace(dj1, float(cfg.lambda));
      scale_inplace(dj2, float(cfg.lambda));
      net.zero_grad();
      net.backward(x0, dj0, ws0);
      net.backward(x1, dj1, ws1);
      net.backward(x2, dj2, ws2);
      opt.step();
      ce_sum += ce;
      js_sum += js;
      ++batches;
    }
    const double val_acc = evaluate(net, val_set).accuracy;
    EpochLog e;
    e.epoch = epoch;
    e.ce_loss = batches ? ce_sum / double(batches) : 0.0;
    e.js_loss = batches ? js_sum / double(batches) : 0.0;
    e.total_loss = e.ce_loss + cfg.lambda * e.js_loss;
    e.val_accuracy = val_acc;
    log.epochs.push_back(e);
    if (!best.observe(net, val_acc, epoch, cfg.patience)) {
      log.early_stopped = true;
      break;
    }
  }
  best.restore(net);
  log.best_epoch = best.best_epoch;
  log.best_val_accuracy = best.best;
  return log;
}

std::string method_name(RepairMethod m) {
  switch (m) {
    case RepairMethod::kStyleRepair: return "style-repair";
    case RepairMethod::kPlain: return "plain";
    case RepairMethod::kBaseMix: return "base-mix";
    case RepairMethod::kCutout: return "cutout";
    case RepairMethod::kMixup: return "mixup";
    case RepairMethod::kCutmix: return "cutmix";
  }
  throw ConfigError("unknown repair method");
}

RepairMethod method_from_name(const std::string& name) {
  for (RepairMethod m :
       {RepairMethod::kStyleRepair, RepairMethod::kPlain,
        RepairMethod::kBaseMix, RepairMethod::kCutout, RepairMethod::kMixup,
        RepairMethod::kCutmix}) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown repair method: " + name);
}

TrainingLog finetune_baseline(nn::Network<float>& net,
                              const LabelledDataset& data, RepairMethod method,
                              const TrainConfig& cfg) {
  if (method == RepairMethod::kStyleRepair)
    throw ConfigError("style repair is not a baseline; call repair()");
  if (method == RepairMethod::kBaseMix) {
    // consistency trainer restricted to the base operation set
    return repair(net, data, make_base_operations(), cfg);
  }
  std::vector<std::size_t> tr, va;
  split_train_val(data.size(), cfg.val_fraction, cfg.seed, tr, va);
  const LabelledDataset val_set =
      va.empty() ? data.subset(tr, data.name + "/val")
                 : data.subset(va, data.name + "/val");
  nn::SgdOptimizer<float> opt(net, cfg.lr, cfg.momentum, cfg.weight_decay);
  Rng shuffle_root = Rng(cfg.seed).stream(0xbb5eu);
  const Rng aug_root = Rng(cfg.seed).stream(0xc001u);
  TrainingLog log;
  BestTracker best;
  nn::Workspace<float> ws;
  std::vector<std::size_t> batch_idx;
  std::vector<Image> batch_imgs;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const std::vector<std::size_t> order =
        shuffle_root.stream(std::uint64_t(epoch)).permutation(tr.size());
    double ce_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + cfg.batch_size);
      batch_idx.clear();
      for (std::size_t i = start; i < stop; ++i)
        batch_idx.push_back(tr[order[i]]);
      batch_imgs.clear();
      std::vector<int> y(batch_idx.size());
      for (std::size_t i = 0; i < batch_idx.size(); ++i) {
        y[i] = data.labels[batch_idx[i]];
        batch_imgs.push_back(data.image(batch_idx[i]));
      }
      Rng brng = aug_root.stream(std::uint64_t(epoch), batch_idx.front());
      double ce = 0.0;
      nn::Tensor<float> probs, dlogits;
      if (method == RepairMethod::kMixup || method == RepairMethod::kCutmix) {
        const MixedBatch mixed =
            method == RepairMethod::kMixup
                ? mixup(batch_imgs, y, data.num_classes, cfg.baseline_alpha,
                        brng)
                : cutmix(batch_imgs, y, data.num_classes, cfg.baseline_alpha,
                         brng);
        const nn::Tensor<float> x = images_to_tensor(mixed.images);
        net.forward(x, ws, /*training=*/true);
        nn::softmax(net.output(ws), probs);
        ce = nn::cross_entropy_soft(probs, mixed.soft_labels, &dlogits);
        net.zero_grad();
        net.backward(x, dlogits, ws);
      } else {
        if (method == RepairMethod::kCutout) {
          for (std::size_t i = 0; i < batch_imgs.size(); ++i) {
            Rng r = aug_root.stream(std::uint64_t(epoch), batch_idx[i]);
            batch_imgs[i] = cutout(batch_imgs[i], cfg.cutout_size, r);
          }
        }
        const nn::Tensor<float> x = images_to_tensor(batch_imgs);
        net.forward(x, ws, /*training=*/true);
        nn::softmax(net.output(ws), probs);
        ce = nn::cross_entropy(probs, y, &dlogits);
        net.zero_grad();
        net.backward(x, dlogits, ws);
      }
      opt.step();
      ce_sum += ce;
      ++batches;
    }
    const double val_acc = evaluate(net, val_set).accuracy;
    EpochLog e;
    e.epoch = epoch;
    e.ce_loss = batches ? ce_sum / double(batches) : 0.0;
    e.total_loss = e.ce_loss;
    e.val_accuracy = val_acc;
    log.epochs.push_back(e);
    if (!best.observe(net, val_acc, epoch, cfg.patience)) {
      log.early_stopped = true;
      break;
    }
  }
  best.restore(net);
  log.best_epoch = best.best_epoch;
  log.best_val_accuracy = best.best;
  return log;
}

}  // namespace deeprepair
