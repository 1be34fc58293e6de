#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "wgfd/augment.hpp"
#include "wgfd/model.hpp"
#include "wgfd/pipeline.hpp"

namespace wgfd::nn {

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t early_stop_patience = 10;
    std::size_t plateau_patience = 5;
    double plateau_factor = 0.5;
    double min_lr = 1e-6;
    double min_delta = 1e-4; // an epoch "improves" when val loss drops by at least this
    std::uint64_t seed = 0;
    bool augment = true;
    AugmentConfig augmentation;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double lr = 0.0; // rate in effect during this epoch
    bool checkpointed = false;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;

    std::size_t best_epoch() const; // the checkpointed epoch with the lowest val loss
    friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

// Checkpoint / early-stopping / plateau bookkeeping on the validation loss.
// A checkpoint is taken whenever the loss is strictly below every earlier
// one. The patience counters only reset on an improvement of at least
// min_delta over the best loss they have seen. When the plateau counter
// reaches plateau_patience the rate is multiplied by plateau_factor (floored
// at min_lr) for the following epochs and the counter restarts.
class TrainingMonitor {
public:
    struct Decision {
        bool checkpoint = false;
        bool reduce_lr = false;
        bool stop = false;
    };

    explicit TrainingMonitor(const TrainConfig& cfg);

    // Call once at the end of every epoch.
    Decision observe(double val_loss);
    double lr() const { return lr_; }
    std::size_t epochs_seen() const { return epochs_; }

private:
    TrainConfig cfg_;
    double lr_;
    double best_checkpoint_;
    double best_monitored_;
    std::size_t wait_stop_ = 0;
    std::size_t wait_plateau_ = 0;
    std::size_t epochs_ = 0;
};

struct LabeledImages {
    std::vector<ImageTensor> images; // raw pixels, any size; resized by prepare()
    std::vector<Label> labels;
};

struct TrainResult {
    Model<float> model; // checkpointed (lowest validation loss) parameters
    TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Inputs are mapped into `domain` once; augmentation is then drawn per epoch
// on the prepared training tensors. Each epoch shuffles with a generator
// seeded from (seed, epoch) and every item augments with one seeded from
// (seed, epoch, position), so a run is reproducible bit for bit.
TrainResult train(const Model<float>& initial, const LabeledImages& train_set, const LabeledImages& val_set,
                  const TrainConfig& cfg, const DomainKind& domain, Exec exec = Exec::Parallel,
                  const EpochCallback& on_epoch = {});

// Fake-class probability per image, in input order; no augmentation.
std::vector<double> predict(const Model<float>& model, const std::vector<ImageTensor>& images,
                            const DomainKind& domain, Exec exec = Exec::Parallel);

// Same as predict() for already prepared inputs.
std::vector<double> predict_prepared(const Model<float>& model, const std::vector<ImageTensor>& prepared,
                                     Exec exec = Exec::Parallel);

std::string history_csv(const TrainHistory& history);
void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);

} // namespace wgfd::nn
