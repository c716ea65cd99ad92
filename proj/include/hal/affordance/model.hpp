// File: model.hpp
// Description: Achievement-context embedding, per-milestone affordance
// classifier heads, margin fitting and filtered classifier training

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hal/affordance/filter.hpp"
#include "hal/agents/qlearner.hpp"
#include "hal/approx/checkpoint.hpp"
#include "hal/replay/examples.hpp"
#include "hal/replay/segments.hpp"

namespace hal::affordance {

struct AffordanceConfig {
    std::vector<int> conv = {16, 16};
    std::vector<int> hidden = {128, 128};
    int embed_dim = 32;
    double alpha = 1.0;             // triplet margin
    double sigma = 7.0;             // positive offset spread
    int batch = 32;
    int knn_n = 1000;
    int knn_k = 1;
    int reference_m = 100;
    double holdout = 0.2;           // share of positive segments reserved for reference points
    double fnf_perc = 0.9;
    double fnf_conf = 0.95;
    bool tolerance_limit = true;
    double threshold = 0.5;
    // ablation switches; all on is the full method
    bool use_fnf = true;                // off: -FNF
    bool tune_representation = true;    // off: -RT
    bool representation_input = true;   // off: -RAI
    bool contrastive = true;            // off: -CL
    approx::AdamConfig adam;
};

// Candidate-negative bookkeeping against oracle labels (when available).
struct FilterStats {
    std::uint64_t candidates = 0;
    std::uint64_t flagged = 0;
    std::uint64_t labelled = 0;          // candidates with an oracle label
    std::uint64_t false_negatives = 0;   // labelled and oracle-afforded
    std::uint64_t flagged_false = 0;     // of those, flagged
    std::uint64_t true_negatives = 0;    // labelled and oracle-unafforded
    std::uint64_t kept_true = 0;         // of those, kept

    void reset() { *this = FilterStats{}; }
};

auto discretize(const std::vector<double>& probs, double threshold, const std::vector<bool>& trained)
    -> grid::AffordanceMask;

class AffordanceModel {
public:
    AffordanceModel() = default;
    AffordanceModel(agents::ObservationEncoder encoder, int milestones, AffordanceConfig config, std::uint64_t seed);

    [[nodiscard]] auto embed(std::span<const grid::Observation* const> batch) const -> Matrix<float>;
    [[nodiscard]] auto probabilities(const grid::Observation& obs) const -> std::vector<double>;
    [[nodiscard]] auto mask(const grid::Observation& obs) const -> grid::AffordanceMask;

    // Each returns the loss, or NaN when there was not enough data to update.
    auto update_representation(const replay::SegmentStore& segments, Rng& rng) -> double;
    auto update_classifier(const replay::AffordanceBuffers& buffers, Rng& rng) -> double;
    // Refits every head with enough positive segments; freezes the embedding
    // used for filtering until the next refit.
    void update_margins(const replay::AffordanceBuffers& buffers, Rng& rng);

    [[nodiscard]] auto milestones() const -> int { return milestones_; }
    [[nodiscard]] auto trained(int g) const -> bool { return trained_.at(static_cast<std::size_t>(g)); }
    [[nodiscard]] auto trained_flags() const -> const std::vector<bool>& { return trained_; }
    [[nodiscard]] auto margin(int g) const -> const std::optional<FilterMargin>& { return margins_.at(static_cast<std::size_t>(g)); }
    [[nodiscard]] auto filter_stats() const -> const FilterStats& { return stats_; }
    void reset_filter_stats() { stats_.reset(); }
    [[nodiscard]] auto config() const -> const AffordanceConfig& { return config_; }
    [[nodiscard]] auto embedding() -> approx::Network<float>& { return psi_; }
    [[nodiscard]] auto classifier() -> approx::Network<float>& { return phi_; }

    void save(approx::CheckpointWriter& out, const std::string& prefix) const;
    void load(const approx::CheckpointReader& in, const std::string& prefix);

private:
    [[nodiscard]] auto logits(const Matrix<float>& x) const -> Matrix<float>;

    agents::ObservationEncoder encoder_;
    AffordanceConfig config_;
    int milestones_ = 0;
    approx::Network<float> psi_;
    approx::Network<float> phi_;
    approx::Adam<float> psi_adam_;
    approx::Adam<float> phi_adam_;
    approx::Network<float> snapshot_;
    std::vector<Matrix<float>> population_;
    std::vector<std::optional<FilterMargin>> margins_;
    std::vector<bool> trained_;
    std::vector<bool> saw_pos_;
    std::vector<bool> saw_neg_;
    FilterStats stats_;
};

}    // namespace hal::affordance
