#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ados/error.hpp"

namespace ados {

/// The eight language-related Module-3 items scored by this pipeline.
enum class ItemId { A4, A7, A8, B4, B7, B9, B10, B11 };

inline constexpr std::size_t kItemCount = 8;

inline constexpr std::array<ItemId, kItemCount> kAllItems = {
    ItemId::A4, ItemId::A7, ItemId::A8, ItemId::B4,
    ItemId::B7, ItemId::B9, ItemId::B10, ItemId::B11,
};

std::string_view item_name(ItemId item);
std::optional<ItemId> item_from_name(std::string_view name);
inline std::size_t item_index(ItemId item) { return static_cast<std::size_t>(item); }

enum class ScoreSource { Rule, Llm, Fused, Clinician };

std::string_view score_source_name(ScoreSource source);

/// Integer scores for the eight language items, tagged by origin.
struct ItemScoreSheet {
    ScoreSource source = ScoreSource::Rule;
    std::array<int, kItemCount> scores{};

    int& operator[](ItemId item) { return scores[item_index(item)]; }
    int operator[](ItemId item) const { return scores[item_index(item)]; }

    bool operator==(const ItemScoreSheet&) const = default;
};

/// Clinician-provided scores for the six non-language Module-3 items.
/// Keys are free-form item labels; exactly 6 entries, values in 0..3.
struct ClinicianItemSheet {
    std::map<std::string, int> scores;

    void validate() const;

    bool operator==(const ClinicianItemSheet&) const = default;
};

}  // namespace ados
