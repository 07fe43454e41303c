#pragma once

#include <array>
#include <string>

#include "ados/items.hpp"

namespace ados {

/// Weighting transforms for combining per-item LLM and rule MAEs.
enum class FusionStrategy {
    V1_HardSelect,      // all weight on the lower-MAE source
    V2_InverseMae,      // weights proportional to 1/mae
    V3_InverseSquaredMae,
    V4_SoftmaxNegMae,   // weights proportional to exp(-mae)
};

std::string_view fusion_strategy_name(FusionStrategy strategy);
std::optional<FusionStrategy> fusion_strategy_from_name(std::string_view name);

struct MaePair {
    double llm = 0.0;
    double rule = 0.0;
};

struct MaeTable {
    std::array<MaePair, kItemCount> entries{};

    MaePair& operator[](ItemId item) { return entries[item_index(item)]; }
    const MaePair& operator[](ItemId item) const { return entries[item_index(item)]; }

    std::string to_json() const;
    static MaeTable from_json(const std::string& text);
};

/// Per-item convex coefficients; alpha_rule is implied as 1 - alpha_llm.
struct FusionWeights {
    FusionStrategy strategy = FusionStrategy::V4_SoftmaxNegMae;
    std::array<double, kItemCount> alpha_llm{};

    std::string to_json() const;
    static FusionWeights from_json(const std::string& text);
};

/// Real-valued fused scores plus the inputs that produced them.
struct FusedScoreSheet {
    std::array<double, kItemCount> fused{};
    ItemScoreSheet llm;
    ItemScoreSheet rule;
    FusionWeights weights;

    double operator[](ItemId item) const { return fused[item_index(item)]; }
};

FusionWeights compute_weights(const MaeTable& mae, FusionStrategy strategy);

FusedScoreSheet fuse(const ItemScoreSheet& llm, const ItemScoreSheet& rule,
                     const FusionWeights& weights);

/// Round half away from zero and clamp to [0, 3]; classification path only.
ItemScoreSheet round_for_totals(const FusedScoreSheet& sheet);

}  // namespace ados
