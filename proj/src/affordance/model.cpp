#include "hal/affordance/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "hal/approx/losses.hpp"
#include "hal/common/error.hpp"

namespace hal::affordance {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

auto matrix_bytes(const Matrix<float>& m) -> std::string {
    std::string out;
    const std::int64_t dims[2] = {m.rows(), m.cols()};
    out.append(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.append(reinterpret_cast<const char*>(m.data()), sizeof(float) * static_cast<std::size_t>(m.size()));
    return out;
}

auto matrix_from(const std::string& blob) -> Matrix<float> {
    std::int64_t dims[2];
    if (blob.size() < sizeof(dims)) {
        throw Error("affordance checkpoint: truncated matrix");
    }
    std::memcpy(dims, blob.data(), sizeof(dims));
    if (dims[0] < 0 || dims[1] < 0 || blob.size() != sizeof(dims) + sizeof(float) * static_cast<std::size_t>(dims[0] * dims[1])) {
        throw Error("affordance checkpoint: bad matrix size");
    }
    Matrix<float> m(dims[0], dims[1]);
    std::memcpy(m.data(), blob.data() + sizeof(dims), sizeof(float) * static_cast<std::size_t>(m.size()));
    return m;
}

}    // namespace

auto discretize(const std::vector<double>& probs, double threshold, const std::vector<bool>& trained) -> grid::AffordanceMask {
    if (probs.size() != trained.size()) {
        throw ShapeError("discretize: probability and trained-flag counts differ");
    }
    grid::AffordanceMask m(probs.size());
    for (std::size_t g = 0; g < probs.size(); ++g) {
        m.set(g, !trained[g] || probs[g] >= threshold);
    }
    return m;
}

AffordanceModel::AffordanceModel(agents::ObservationEncoder encoder, int milestones, AffordanceConfig config,
                                 std::uint64_t seed)
    : encoder_(encoder),
      config_(std::move(config)),
      milestones_(milestones),
      population_(static_cast<std::size_t>(milestones)),
      margins_(static_cast<std::size_t>(milestones)),
      trained_(static_cast<std::size_t>(milestones), false),
      saw_pos_(static_cast<std::size_t>(milestones), false),
      saw_neg_(static_cast<std::size_t>(milestones), false) {
    if (milestones < 1) {
        throw ConfigError("milestones", "need at least one milestone");
    }
    Rng seeds(seed);
    psi_ = approx::Network<float>(encoder_.net_config(config_.conv, config_.hidden, 1, config_.embed_dim, false), seeds.next_u64());
    approx::NetConfig head;
    if (config_.representation_input) {
        head.extra = config_.embed_dim;
    } else {
        head = encoder_.net_config(config_.conv, config_.hidden, 1, 1, false);
    }
    head.heads = milestones;
    head.width = 1;
    head.dueling = false;
    phi_ = approx::Network<float>(head, seeds.next_u64());
    psi_adam_ = approx::Adam<float>(config_.adam, psi_.param_count());
    phi_adam_ = approx::Adam<float>(config_.adam, phi_.param_count());
    snapshot_ = psi_;
}

auto AffordanceModel::embed(std::span<const grid::Observation* const> batch) const -> Matrix<float> {
    return psi_.predict(encoder_.encode(batch));
}

auto AffordanceModel::logits(const Matrix<float>& x) const -> Matrix<float> {
    return config_.representation_input ? phi_.predict(psi_.predict(x)) : phi_.predict(x);
}

auto AffordanceModel::probabilities(const grid::Observation& obs) const -> std::vector<double> {
    const Matrix<float> z = logits(encoder_.encode(obs));
    std::vector<double> p(static_cast<std::size_t>(milestones_));
    for (int g = 0; g < milestones_; ++g) {
        p[static_cast<std::size_t>(g)] = 1.0 / (1.0 + std::exp(-static_cast<double>(z(g, 0))));
    }
    return p;
}

auto AffordanceModel::mask(const grid::Observation& obs) const -> grid::AffordanceMask {
    if (std::none_of(trained_.begin(), trained_.end(), [](bool t) { return t; })) {
        return grid::AffordanceMask(static_cast<std::size_t>(milestones_), true);
    }
    return discretize(probabilities(obs), config_.threshold, trained_);
}

auto AffordanceModel::update_representation(const replay::SegmentStore& segments, Rng& rng) -> double {
    if (!config_.contrastive) {
        return kNaN;
    }
    std::vector<replay::Triplet> triplets;
    try {
        triplets = segments.sample_triplets(static_cast<std::size_t>(config_.batch), config_.sigma, rng);
    } catch (const InsufficientDataError&) {
        return kNaN;
    }
    const auto n = triplets.size();
    std::vector<const grid::Observation*> obs(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        obs[i] = triplets[i].anchor.get();
        obs[n + i] = triplets[i].positive.get();
        obs[2 * n + i] = triplets[i].negative.get();
    }
    psi_.zero_grad();
    const Matrix<float> z = psi_.forward(encoder_.encode(obs));
    const auto b = static_cast<Eigen::Index>(n);
    const auto loss = approx::triplet_loss<float>(z.leftCols(b), z.middleCols(b, b), z.rightCols(b), config_.alpha);
    if (!std::isfinite(loss.value)) {
        throw NonFiniteError("contrastive loss is not finite");
    }
    psi_.backward(loss.grad);
    psi_adam_.step(psi_);
    return loss.value;
}

void AffordanceModel::update_margins(const replay::AffordanceBuffers& buffers, Rng& rng) {
    snapshot_ = psi_;
    for (int g = 0; g < milestones_; ++g) {
        replay::PopulationSplit split;
        try {
            split = buffers.split_population(g, static_cast<std::size_t>(config_.knn_n),
                                             static_cast<std::size_t>(config_.reference_m), config_.holdout, rng);
        } catch (const InsufficientDataError&) {
            continue;
        }
        std::vector<const grid::Observation*> pop;
        std::vector<const grid::Observation*> ref;
        for (const auto* e : split.population) {
            pop.push_back(e->obs.get());
        }
        for (const auto* e : split.reference) {
            ref.push_back(e->obs.get());
        }
        auto& population = population_[static_cast<std::size_t>(g)];
        population = snapshot_.predict(encoder_.encode(pop));
        const auto scores = knn_distances(snapshot_.predict(encoder_.encode(ref)), population, config_.knn_k);
        margins_[static_cast<std::size_t>(g)] =
            fit_filter_margin(scores, config_.fnf_perc, config_.fnf_conf, config_.tolerance_limit);
    }
}

auto AffordanceModel::update_classifier(const replay::AffordanceBuffers& buffers, Rng& rng) -> double {
    std::vector<int> heads;
    for (int g = 0; g < milestones_; ++g) {
        const bool margin_ready = !config_.use_fnf || margins_[static_cast<std::size_t>(g)].has_value();
        if (!buffers.positives(g).empty() && !buffers.negatives(g).empty() && margin_ready) {
            heads.push_back(g);
        }
    }
    if (heads.empty()) {
        return kNaN;
    }
    struct Pick {
        const replay::AffordanceExample* example;
        int head;
        bool positive;
    };
    std::vector<Pick> picks;
    std::vector<std::vector<std::size_t>> neg_by_head(static_cast<std::size_t>(milestones_));
    for (int i = 0; i < config_.batch; ++i) {
        const int g = heads[rng.uniform_index(heads.size())];
        const bool positive = i % 2 == 0;
        const auto& ring = positive ? buffers.positives(g) : buffers.negatives(g);
        picks.push_back({&ring[rng.uniform_index(ring.size())], g, positive});
        if (!positive) {
            neg_by_head[static_cast<std::size_t>(g)].push_back(picks.size() - 1);
        }
    }

    std::vector<bool> keep(picks.size(), true);
    for (int g = 0; g < milestones_; ++g) {
        const auto& idx = neg_by_head[static_cast<std::size_t>(g)];
        if (idx.empty()) {
            continue;
        }
        std::vector<bool> flagged(idx.size(), false);
        if (config_.use_fnf) {
            std::vector<const grid::Observation*> obs;
            for (const auto i : idx) {
                obs.push_back(picks[i].example->obs.get());
            }
            const auto result = filter_negatives(snapshot_.predict(encoder_.encode(obs)), population_[static_cast<std::size_t>(g)],
                                                 config_.knn_k, margins_[static_cast<std::size_t>(g)]->rho);
            for (const int f : result.flagged) {
                flagged[static_cast<std::size_t>(f)] = true;
            }
        }
        for (std::size_t j = 0; j < idx.size(); ++j) {
            keep[idx[j]] = !flagged[j];
            ++stats_.candidates;
            stats_.flagged += flagged[j] ? 1 : 0;
            const auto oracle = picks[idx[j]].example->oracle;
            if (oracle >= 0) {
                ++stats_.labelled;
                if (oracle == 1) {
                    ++stats_.false_negatives;
                    stats_.flagged_false += flagged[j] ? 1 : 0;
                } else {
                    ++stats_.true_negatives;
                    stats_.kept_true += flagged[j] ? 0 : 1;
                }
            }
        }
    }

    const auto n = static_cast<Eigen::Index>(picks.size());
    std::vector<const grid::Observation*> obs;
    for (const auto& p : picks) {
        obs.push_back(p.example->obs.get());
    }
    Matrix<float> target = Matrix<float>::Zero(milestones_, n);
    Matrix<float> weight = Matrix<float>::Zero(milestones_, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        const auto& p = picks[static_cast<std::size_t>(b)];
        if (keep[static_cast<std::size_t>(b)]) {
            weight(p.head, b) = 1.0f;
            target(p.head, b) = p.positive ? 1.0f : 0.0f;
            (p.positive ? saw_pos_ : saw_neg_)[static_cast<std::size_t>(p.head)] = true;
        }
    }
    if (weight.sum() <= 0.0f) {
        return kNaN;
    }
    const Matrix<float> x = encoder_.encode(obs);
    const bool through_psi = config_.representation_input;
    const bool tune = through_psi && config_.tune_representation;
    phi_.zero_grad();
    psi_.zero_grad();
    Matrix<float> out;
    if (through_psi) {
        const Matrix<float> z = psi_.forward(x);
        out = phi_.forward(z);
    } else {
        out = phi_.forward(x);
    }
    const auto loss = approx::bce_with_logits<float>(out, target, weight);
    if (!std::isfinite(loss.value)) {
        throw NonFiniteError("affordance classifier loss is not finite");
    }
    const Matrix<float> dz = phi_.backward(loss.grad, tune);
    phi_adam_.step(phi_);
    if (tune) {
        psi_.backward(dz);
        psi_adam_.step(psi_);
    }
    for (int g = 0; g < milestones_; ++g) {
        const auto i = static_cast<std::size_t>(g);
        trained_[i] = trained_[i] || (saw_pos_[i] && saw_neg_[i]);
    }
    return loss.value;
}

void AffordanceModel::save(approx::CheckpointWriter& out, const std::string& prefix) const {
    out.add(prefix + "psi", psi_.serialize());
    out.add(prefix + "phi", phi_.serialize());
    out.add(prefix + "psi_adam", psi_adam_.serialize());
    out.add(prefix + "phi_adam", phi_adam_.serialize());
    out.add(prefix + "snapshot", snapshot_.serialize());
    std::ostringstream state;
    state.precision(17);
    for (int g = 0; g < milestones_; ++g) {
        const auto i = static_cast<std::size_t>(g);
        state << trained_[i] << ' ' << saw_pos_[i] << ' ' << saw_neg_[i] << ' ' << margins_[i].has_value();
        if (margins_[i]) {
            state << ' ' << margins_[i]->rho << ' ' << margins_[i]->mean << ' ' << margins_[i]->stddev << ' '
                  << margins_[i]->samples << ' ' << margins_[i]->factor;
        }
        state << '\n';
        out.add(prefix + "population" + std::to_string(g), matrix_bytes(population_[i]));
    }
    out.add(prefix + "heads", state.str());
}

void AffordanceModel::load(const approx::CheckpointReader& in, const std::string& prefix) {
    psi_ = approx::Network<float>::deserialize(in.get(prefix + "psi"));
    phi_ = approx::Network<float>::deserialize(in.get(prefix + "phi"));
    psi_adam_ = approx::Adam<float>::deserialize(in.get(prefix + "psi_adam"));
    phi_adam_ = approx::Adam<float>::deserialize(in.get(prefix + "phi_adam"));
    snapshot_ = approx::Network<float>::deserialize(in.get(prefix + "snapshot"));
    std::istringstream state(in.get(prefix + "heads"));
    for (int g = 0; g < milestones_; ++g) {
        const auto i = static_cast<std::size_t>(g);
        int t = 0;
        int p = 0;
        int n = 0;
        int has = 0;
        state >> t >> p >> n >> has;
        trained_[i] = t != 0;
        saw_pos_[i] = p != 0;
        saw_neg_[i] = n != 0;
        margins_[i].reset();
        if (has) {
            FilterMargin m;
            state >> m.rho >> m.mean >> m.stddev >> m.samples >> m.factor;
            margins_[i] = m;
        }
        if (!state) {
            throw Error("affordance checkpoint: bad head state");
        }
        population_[i] = matrix_from(in.get(prefix + "population" + std::to_string(g)));
    }
}

}    // namespace hal::affordance
