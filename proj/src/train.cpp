#include "wgfd/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "wgfd/error.hpp"
#include "wgfd/rng.hpp"

namespace wgfd::nn {

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw InvalidArgument("learning_rate must be > 0");
    if (batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
    if (max_epochs == 0) throw InvalidArgument("max_epochs must be >= 1");
    if (!(plateau_factor > 0 && plateau_factor < 1)) throw InvalidArgument("plateau_factor must be in (0, 1)");
    if (early_stop_patience == 0 || plateau_patience == 0) throw InvalidArgument("patience values must be >= 1");
    if (min_lr < 0 || min_delta < 0) throw InvalidArgument("min_lr and min_delta must be >= 0");
    if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1) || !(adam_eps > 0))
        throw InvalidArgument("adam betas must be in [0, 1) and eps > 0");
    augmentation.validate();
}

std::size_t TrainHistory::best_epoch() const {
    std::size_t best = 0;
    double loss = std::numeric_limits<double>::infinity();
    for (const auto& e : epochs) {
        if (e.checkpointed && e.val_loss < loss) {
            loss = e.val_loss;
            best = e.epoch;
        }
    }
    return best;
}

TrainingMonitor::TrainingMonitor(const TrainConfig& cfg)
    : cfg_(cfg), lr_(cfg.learning_rate), best_checkpoint_(std::numeric_limits<double>::infinity()),
      best_monitored_(std::numeric_limits<double>::infinity()) {
    cfg_.validate();
}

TrainingMonitor::Decision TrainingMonitor::observe(double val_loss) {
    Decision d;
    ++epochs_;
    if (val_loss < best_checkpoint_) {
        best_checkpoint_ = val_loss;
        d.checkpoint = true;
    }
    if (val_loss < best_monitored_ - cfg_.min_delta) {
        best_monitored_ = val_loss;
        wait_stop_ = 0;
        wait_plateau_ = 0;
    } else {
        ++wait_stop_;
        ++wait_plateau_;
        if (wait_plateau_ >= cfg_.plateau_patience) {
            const double next = std::max(lr_ * cfg_.plateau_factor, cfg_.min_lr);
            d.reduce_lr = next < lr_;
            lr_ = next;
            wait_plateau_ = 0;
        }
        if (wait_stop_ >= cfg_.early_stop_patience) d.stop = true;
    }
    if (epochs_ >= cfg_.max_epochs) d.stop = true;
    return d;
}

namespace {

std::vector<double> logits_prepared(const Model<float>& model, const std::vector<ImageTensor>& prepared, Exec exec) {
    constexpr std::size_t chunk = 128;
    std::vector<double> out;
    out.reserve(prepared.size());
    for (std::size_t start = 0; start < prepared.size(); start += chunk) {
        const std::size_t n = std::min(chunk, prepared.size() - start);
        const auto batch = to_batch<float>(std::span<const ImageTensor>(prepared.data() + start, n));
        const auto z = forward_logits(model, batch, exec);
        out.insert(out.end(), z.begin(), z.end());
    }
    return out;
}

void check_set(const LabeledImages& set, const char* what) {
    if (set.images.empty()) throw EmptyDatasetError(std::string(what) + " set is empty");
    if (set.images.size() != set.labels.size()) {
        throw InvalidArgument(std::string(what) + " set has " + std::to_string(set.images.size()) + " images but " +
                              std::to_string(set.labels.size()) + " labels");
    }
}

} // namespace

TrainResult train(const Model<float>& initial, const LabeledImages& train_set, const LabeledImages& val_set,
                  const TrainConfig& cfg, const DomainKind& domain, Exec exec, const EpochCallback& on_epoch) {
    cfg.validate();
    check_set(train_set, "training");
    check_set(val_set, "validation");
    const std::size_t side = initial.config.input_side;
    const auto train_x = prepare_batch(train_set.images, domain, side, exec);
    const auto val_x = prepare_batch(val_set.images, domain, side, exec);

    Model<float> model = initial;
    Model<float> best = initial;
    auto opt = adam_init(model);
    const AdamConfig adam{cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps};
    TrainingMonitor monitor(cfg);
    TrainHistory history;

    const std::size_t n = train_x.size();
    std::vector<std::size_t> order(n);
    std::vector<ImageTensor> batch_images;
    std::vector<Label> batch_labels;

    for (std::size_t epoch = 1;; ++epoch) {
        const double lr = monitor.lr();
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed({cfg.seed, 0x5348u, epoch}));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, n - start);
            batch_images.assign(count, ImageTensor());
            batch_labels.assign(count, Label::Real);
            const long c = static_cast<long>(count);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
            for (long j = 0; j < c; ++j) {
                const std::size_t pos = start + static_cast<std::size_t>(j);
                const std::size_t idx = order[pos];
                if (cfg.augment) {
                    Rng aug_rng(derive_seed({cfg.seed, 0x4155u, epoch, pos}));
                    batch_images[j] = augment(train_x[idx], cfg.augmentation, aug_rng);
                } else {
                    batch_images[j] = train_x[idx];
                }
            }
            for (std::size_t j = 0; j < count; ++j) batch_labels[j] = train_set.labels[order[start + j]];
            const auto batch = to_batch<float>(batch_images);
            const auto grads = backward(model, batch, batch_labels, exec);
            loss_sum += grads.loss * static_cast<double>(count);
            adam_step(opt, model, grads, lr, adam);
        }

        const auto z = logits_prepared(model, val_x, exec);
        const double val_loss = bce_with_logits(z, val_set.labels);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const bool fake = sigmoid(z[i]) >= 0.5;
            correct += fake == (val_set.labels[i] == Label::Fake);
        }

        const auto decision = monitor.observe(val_loss);
        if (decision.checkpoint) best = model;
        EpochRecord rec{epoch,  loss_sum / static_cast<double>(n),
                        val_loss, static_cast<double>(correct) / static_cast<double>(z.size()),
                        lr,     decision.checkpoint};
        history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (decision.stop) break;
    }
    return {std::move(best), std::move(history)};
}

std::vector<double> predict_prepared(const Model<float>& model, const std::vector<ImageTensor>& prepared, Exec exec) {
    if (prepared.empty()) return {};
    auto z = logits_prepared(model, prepared, exec);
    for (auto& v : z) v = sigmoid(v);
    return z;
}

std::vector<double> predict(const Model<float>& model, const std::vector<ImageTensor>& images,
                            const DomainKind& domain, Exec exec) {
    return predict_prepared(model, prepare_batch(images, domain, model.config.input_side, exec), exec);
}

std::string history_csv(const TrainHistory& history) {
    std::string out = "epoch,train_loss,val_loss,val_acc,lr,checkpointed\n";
    char line[256];
    for (const auto& e : history.epochs) {
        std::snprintf(line, sizeof line, "%zu,%.10f,%.10f,%.6f,%.6g,%d\n", e.epoch, e.train_loss, e.val_loss,
                      e.val_acc, e.lr, e.checkpointed ? 1 : 0);
        out += line;
    }
    return out;
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
    const auto text = history_csv(history);
    write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace wgfd::nn
