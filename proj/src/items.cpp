#include "ados/items.hpp"

namespace ados {

std::string_view item_name(ItemId item) {
    switch (item) {
        case ItemId::A4: return "A4";
        case ItemId::A7: return "A7";
        case ItemId::A8: return "A8";
        case ItemId::B4: return "B4";
        case ItemId::B7: return "B7";
        case ItemId::B9: return "B9";
        case ItemId::B10: return "B10";
        case ItemId::B11: return "B11";
    }
    return "?";
}

std::optional<ItemId> item_from_name(std::string_view name) {
    for (ItemId item : kAllItems) {
        if (item_name(item) == name) return item;
    }
    return std::nullopt;
}

std::string_view score_source_name(ScoreSource source) {
    switch (source) {
        case ScoreSource::Rule: return "rule";
        case ScoreSource::Llm: return "llm";
        case ScoreSource::Fused: return "fused";
        case ScoreSource::Clinician: return "clinician";
    }
    return "?";
}

void ClinicianItemSheet::validate() const {
    if (scores.size() != 6) {
        throw Error(ErrorKind::MissingItem,
                    "clinician sheet needs exactly 6 items, got " +
                        std::to_string(scores.size()));
    }
    for (const auto& [label, value] : scores) {
        if (value < 0 || value > 3) {
            throw Error(ErrorKind::ScoreOutOfRange,
                        "clinician item " + label + " = " + std::to_string(value));
        }
    }
}

}  // namespace ados
