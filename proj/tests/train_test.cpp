#include "wgfd/train.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "wgfd/error.hpp"
#include "wgfd/metrics.hpp"
#include "wgfd/model_io.hpp"
#include "wgfd/synth.hpp"

using namespace wgfd;
using namespace wgfd::nn;

namespace {

TrainConfig monitor_config() {
    TrainConfig cfg;
    cfg.max_epochs = 50;
    return cfg;
}

ModelConfig tiny_model(std::uint64_t seed = 1) {
    ModelConfig cfg;
    cfg.input_side = 16;
    cfg.channels_per_block = {4, 8};
    cfg.seed = seed;
    return cfg;
}

LabeledImages tiny_set(std::size_t n_per_class, std::uint64_t seed) {
    SynthConfig sc;
    sc.side = 16;
    sc.blur_sigma = 1.0;
    sc.artifact_gain = 0.08;
    auto ds = build_synth_dataset(n_per_class, sc, seed);
    LabeledImages out;
    out.images = ds.images;
    for (const auto& it : ds.items) out.labels.push_back(it.label);
    return out;
}

TrainConfig quick_config(std::size_t epochs) {
    TrainConfig cfg;
    cfg.learning_rate = 3e-3;
    cfg.batch_size = 8;
    cfg.max_epochs = epochs;
    cfg.seed = 5;
    return cfg;
}

} // namespace

TEST(TrainConfig, Validation) {
    TrainConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.plateau_factor = 1.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.plateau_patience = 0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(TrainingMonitor, StrictlyImprovingRunsToMaxEpochs) {
    const auto cfg = monitor_config();
    TrainingMonitor mon(cfg);
    double loss = 1.0;
    std::size_t epochs = 0;
    for (;;) {
        const auto d = mon.observe(loss);
        ++epochs;
        EXPECT_TRUE(d.checkpoint);
        EXPECT_FALSE(d.reduce_lr);
        EXPECT_EQ(mon.lr(), cfg.learning_rate);
        loss -= 0.01;
        if (d.stop) break;
    }
    EXPECT_EQ(epochs, cfg.max_epochs);
}

TEST(TrainingMonitor, ConstantLossTrace) {
    // Epoch 1 improves on +inf; from then on nothing improves. The plateau
    // counter reaches 5 at epoch 6 (rate halves for epoch 7 onward) and again
    // at epoch 11, where the stop counter also reaches 10.
    const auto cfg = monitor_config();
    TrainingMonitor mon(cfg);
    std::vector<std::size_t> reductions;
    std::vector<std::size_t> checkpoints;
    std::size_t stop_epoch = 0;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto d = mon.observe(0.7);
        if (d.reduce_lr) reductions.push_back(epoch);
        if (d.checkpoint) checkpoints.push_back(epoch);
        if (epoch == 6) EXPECT_EQ(mon.lr(), cfg.learning_rate * 0.5);
        if (d.stop) {
            stop_epoch = epoch;
            break;
        }
    }
    EXPECT_EQ(checkpoints, (std::vector<std::size_t>{1}));
    EXPECT_EQ(reductions, (std::vector<std::size_t>{6, 11}));
    EXPECT_EQ(stop_epoch, 11u);
}

TEST(TrainingMonitor, SmallGainsBelowMinDeltaDoNotResetPatience) {
    TrainConfig cfg = monitor_config();
    TrainingMonitor mon(cfg);
    mon.observe(1.0);
    std::size_t stop_epoch = 0;
    double loss = 1.0;
    for (std::size_t epoch = 2; epoch <= 50; ++epoch) {
        loss -= 5e-6; // always a new minimum, never by min_delta
        const auto d = mon.observe(loss);
        EXPECT_TRUE(d.checkpoint);
        if (d.stop) {
            stop_epoch = epoch;
            break;
        }
    }
    EXPECT_EQ(stop_epoch, 11u);
}

TEST(TrainingMonitor, RateFloorsAtMinLr) {
    TrainConfig cfg = monitor_config();
    cfg.learning_rate = 4e-6;
    cfg.early_stop_patience = 40;
    cfg.plateau_patience = 1;
    TrainingMonitor mon(cfg);
    mon.observe(1.0);
    for (int i = 0; i < 10; ++i) mon.observe(1.0);
    EXPECT_EQ(mon.lr(), cfg.min_lr);
}

TEST(Train, DeterministicAndCheckpointConsistent) {
    const auto tr = tiny_set(16, 1);
    const auto va = tiny_set(8, 2);
    const auto model = build_model<float>(tiny_model());
    const auto cfg = quick_config(4);
    const auto a = train(model, tr, va, cfg, DomainKind::wavelet("db2"));
    const auto b = train(model, tr, va, cfg, DomainKind::wavelet("db2"));
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(history_csv(a.history), history_csv(b.history));
    ASSERT_EQ(a.history.epochs.size(), 4u);

    // Checkpoint invariant: the returned model reproduces the minimum
    // recorded validation loss.
    double min_loss = INFINITY;
    for (const auto& e : a.history.epochs) min_loss = std::min(min_loss, e.val_loss);
    const auto val_x = prepare_batch(va.images, DomainKind::wavelet("db2"), 16);
    const auto p = predict_prepared(a.model, val_x);
    std::vector<double> z;
    for (double v : p) z.push_back(std::log(v / (1 - v)));
    EXPECT_NEAR(bce_with_logits(z, va.labels), min_loss, 1e-9);
    EXPECT_EQ(a.history.epochs[a.history.best_epoch() - 1].val_loss, min_loss);

    for (std::size_t i = 1; i < a.history.epochs.size(); ++i)
        EXPECT_LE(a.history.epochs[i].lr, a.history.epochs[i - 1].lr);
}

TEST(Train, SerialAndParallelIdentical) {
    const auto tr = tiny_set(8, 3);
    const auto va = tiny_set(4, 4);
    const auto model = build_model<float>(tiny_model());
    const auto cfg = quick_config(2);
    const auto a = train(model, tr, va, cfg, DomainKind::spatial(), Exec::Serial);
    const auto b = train(model, tr, va, cfg, DomainKind::spatial(), Exec::Parallel);
    EXPECT_EQ(a.history, b.history);
}

TEST(Train, LearnsSeparableData) {
    const auto tr = tiny_set(40, 5);
    auto cfg = quick_config(30);
    cfg.augment = false;
    const auto res = train(build_model<float>(tiny_model()), tr, tr, cfg, DomainKind::spatial());
    const auto p = predict(res.model, tr.images, DomainKind::spatial());
    EXPECT_GT(metrics::evaluate(tr.labels, p).accuracy, 0.9);
}

TEST(Train, EmptySetsRejected) {
    const auto tr = tiny_set(4, 1);
    const LabeledImages empty;
    const auto m = build_model<float>(tiny_model());
    EXPECT_THROW(train(m, empty, tr, quick_config(1), DomainKind::spatial()), EmptyDatasetError);
    EXPECT_THROW(train(m, tr, empty, quick_config(1), DomainKind::spatial()), EmptyDatasetError);
}

TEST(Predict, ZeroHeadIsHalfAndPermutationEquivariant) {
    auto m = build_model<float>(tiny_model());
    const auto set = tiny_set(5, 9);
    const auto p = predict(m, set.images, DomainKind::spatial());
    auto shuffled = set.images;
    std::reverse(shuffled.begin(), shuffled.end());
    auto q = predict(m, shuffled, DomainKind::spatial());
    std::reverse(q.begin(), q.end());
    EXPECT_EQ(p, q);

    for (auto& v : m.param("head.weight").data) v = 0.0f;
    for (double v : predict(m, set.images, DomainKind::spatial())) EXPECT_EQ(v, 0.5);
}

TEST(History, CsvColumns) {
    TrainHistory h;
    h.epochs.push_back({1, 0.7, 0.69, 0.5, 1e-4, true});
    const auto csv = history_csv(h);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,val_loss,val_acc,lr,checkpointed");
    EXPECT_NE(csv.find("\n1,0.7000000000,0.6900000000,0.500000,0.0001,1\n"), std::string::npos);
}

TEST(ModelIo, RoundTripIsBitExact) {
    const auto m = build_model<float>(ModelConfig{});
    const auto bytes = serialize_model(m, 77);
    const auto back = deserialize_model(bytes);
    EXPECT_EQ(back.training_seed, 77u);
    EXPECT_EQ(back.model.config, m.config);
    ASSERT_EQ(back.model.params.size(), m.params.size());
    for (std::size_t t = 0; t < m.params.size(); ++t) {
        EXPECT_EQ(back.model.params[t].name, m.params[t].name);
        EXPECT_EQ(back.model.params[t].shape, m.params[t].shape);
        EXPECT_EQ(0, std::memcmp(back.model.params[t].data.data(), m.params[t].data.data(),
                                 m.params[t].data.size() * sizeof(float)));
    }
    EXPECT_EQ(serialize_model(back.model, 77), bytes);
}

TEST(ModelIo, TruncatedAndFlippedRejected) {
    const auto bytes = serialize_model(build_model<float>(ModelConfig{}), 1);
    for (std::size_t keep : {std::size_t{3}, std::size_t{7}, bytes.size() / 2, bytes.size() - 1}) {
        std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<long>(keep));
        if (keep < 4) EXPECT_THROW(deserialize_model(cut), VersionMismatchError);
        else EXPECT_THROW(deserialize_model(cut), CorruptFileError) << keep;
    }
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    EXPECT_THROW(deserialize_model(flipped), CorruptFileError);
}

TEST(ModelIo, MagicAndVersionChecked) {
    auto bytes = serialize_model(build_model<float>(ModelConfig{}), 1);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(deserialize_model(bad_magic), VersionMismatchError);
    auto bumped = bytes;
    bumped[4] = 2;
    EXPECT_THROW(deserialize_model(bumped), VersionMismatchError);
}

TEST(ModelIo, TableDisagreementIsShapeError) {
    auto m = build_model<float>(ModelConfig{});
    m.params[0].shape = {8, 3, 3, 2};
    m.params[0].data.resize(8 * 3 * 3 * 2);
    EXPECT_THROW(deserialize_model(serialize_model(m, 1)), ShapeMismatchError);
}

TEST(ModelIo, MissingFileIsIoError) {
    EXPECT_THROW(load_model("/nonexistent/dir/model.wgfd"), IoError);
}
