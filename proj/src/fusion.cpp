#include "ados/fusion.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace ados {

using nlohmann::json;

std::string_view fusion_strategy_name(FusionStrategy strategy) {
    switch (strategy) {
        case FusionStrategy::V1_HardSelect: return "v1";
        case FusionStrategy::V2_InverseMae: return "v2";
        case FusionStrategy::V3_InverseSquaredMae: return "v3";
        case FusionStrategy::V4_SoftmaxNegMae: return "v4";
    }
    return "?";
}

std::optional<FusionStrategy> fusion_strategy_from_name(std::string_view name) {
    if (name == "v1") return FusionStrategy::V1_HardSelect;
    if (name == "v2") return FusionStrategy::V2_InverseMae;
    if (name == "v3") return FusionStrategy::V3_InverseSquaredMae;
    if (name == "v4") return FusionStrategy::V4_SoftmaxNegMae;
    return std::nullopt;
}

FusionWeights compute_weights(const MaeTable& mae, FusionStrategy strategy) {
    FusionWeights weights;
    weights.strategy = strategy;
    for (ItemId item : kAllItems) {
        const double m_llm = mae[item].llm;
        const double m_rule = mae[item].rule;
        if (!(std::isfinite(m_llm) && std::isfinite(m_rule)) || m_llm < 0 || m_rule < 0) {
            throw Error(ErrorKind::ConfigError,
                        "MAE table entry for " + std::string(item_name(item)));
        }
        double alpha = 0.5;
        switch (strategy) {
            case FusionStrategy::V1_HardSelect:
                alpha = m_llm < m_rule ? 1.0 : (m_llm > m_rule ? 0.0 : 0.5);
                break;
            case FusionStrategy::V2_InverseMae:
            case FusionStrategy::V3_InverseSquaredMae: {
                if (m_llm == 0.0 || m_rule == 0.0) {
                    throw Error(ErrorKind::ZeroMae,
                                std::string(item_name(item)) + " under " +
                                    std::string(fusion_strategy_name(strategy)));
                }
                const double power =
                    strategy == FusionStrategy::V2_InverseMae ? 1.0 : 2.0;
                const double inv_llm = std::pow(1.0 / m_llm, power);
                const double inv_rule = std::pow(1.0 / m_rule, power);
                alpha = inv_llm / (inv_llm + inv_rule);
                break;
            }
            case FusionStrategy::V4_SoftmaxNegMae: {
                // Shift by the min before exponentiating; same ratio, no underflow.
                const double shift = std::min(m_llm, m_rule);
                const double e_llm = std::exp(-(m_llm - shift));
                const double e_rule = std::exp(-(m_rule - shift));
                alpha = e_llm / (e_llm + e_rule);
                break;
            }
        }
        weights.alpha_llm[item_index(item)] = alpha;
    }
    return weights;
}

FusedScoreSheet fuse(const ItemScoreSheet& llm, const ItemScoreSheet& rule,
                     const FusionWeights& weights) {
    FusedScoreSheet out;
    out.llm = llm;
    out.rule = rule;
    out.weights = weights;
    for (ItemId item : kAllItems) {
        const double alpha = weights.alpha_llm[item_index(item)];
        out.fused[item_index(item)] =
            alpha * llm[item] + (1.0 - alpha) * rule[item];
    }
    return out;
}

ItemScoreSheet round_for_totals(const FusedScoreSheet& sheet) {
    ItemScoreSheet out;
    out.source = ScoreSource::Fused;
    for (ItemId item : kAllItems) {
        const double value = sheet[item];
        int rounded = static_cast<int>(std::round(value));  // half away from zero
        rounded = std::clamp(rounded, 0, 3);
        out[item] = rounded;
    }
    return out;
}

std::string MaeTable::to_json() const {
    json doc = json::object();
    for (ItemId item : kAllItems) {
        doc[std::string(item_name(item))] = {{"llm", (*this)[item].llm},
                                             {"rule", (*this)[item].rule}};
    }
    return doc.dump(2) + "\n";
}

MaeTable MaeTable::from_json(const std::string& text) {
    json doc = json::parse(text);
    MaeTable table;
    for (ItemId item : kAllItems) {
        const auto& entry = doc.at(std::string(item_name(item)));
        table[item] = {entry.at("llm").get<double>(), entry.at("rule").get<double>()};
    }
    return table;
}

std::string FusionWeights::to_json() const {
    json doc;
    doc["strategy"] = std::string(fusion_strategy_name(strategy));
    json alphas = json::object();
    for (ItemId item : kAllItems) {
        alphas[std::string(item_name(item))] = alpha_llm[item_index(item)];
    }
    doc["alpha_llm"] = alphas;
    return doc.dump(2) + "\n";
}

FusionWeights FusionWeights::from_json(const std::string& text) {
    json doc = json::parse(text);
    FusionWeights weights;
    auto strategy = fusion_strategy_from_name(doc.at("strategy").get<std::string>());
    if (!strategy) {
        throw Error(ErrorKind::ConfigError, "unknown fusion strategy");
    }
    weights.strategy = *strategy;
    for (ItemId item : kAllItems) {
        weights.alpha_llm[item_index(item)] =
            doc.at("alpha_llm").at(std::string(item_name(item))).get<double>();
    }
    return weights;
}

}  // namespace ados
