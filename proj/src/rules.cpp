#include "ados/rules.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

namespace ados {

using nlohmann::json;

std::string_view rule_direction_name(RuleDirection direction) {
    return direction == RuleDirection::HigherIsWorse ? "higher_is_worse"
                                                     : "lower_is_worse";
}

std::optional<RuleDirection> rule_direction_from_name(std::string_view name) {
    if (name == "higher_is_worse") return RuleDirection::HigherIsWorse;
    if (name == "lower_is_worse") return RuleDirection::LowerIsWorse;
    return std::nullopt;
}

void ItemRule::validate() const {
    if (terms.empty()) {
        throw Error(ErrorKind::ConfigError,
                    std::string(item_name(item)) + ": rule needs at least one term");
    }
    for (const auto& term : terms) {
        if (!std::isfinite(term.weight)) {
            throw Error(ErrorKind::ConfigError,
                        std::string(item_name(item)) + ": non-finite weight");
        }
        bool known = std::find(FeatureVector::names().begin(),
                               FeatureVector::names().end(),
                               term.feature) != FeatureVector::names().end();
        if (!known) {
            throw Error(ErrorKind::UnknownFeatureName, term.feature);
        }
    }
    if (direction == RuleDirection::HigherIsWorse ? t1 > t2 : t2 > t1) {
        throw Error(ErrorKind::ConfigError,
                    std::string(item_name(item)) + ": thresholds out of order");
    }
}

int score_item_rule(const FeatureVector& features, const ItemRule& rule) {
    double s = 0.0;
    for (const auto& term : rule.terms) {
        s += term.weight * features.by_name(term.feature);
    }
    if (rule.direction == RuleDirection::HigherIsWorse) {
        if (s >= rule.t2) return 2;
        if (s >= rule.t1) return 1;
        return 0;
    }
    if (s <= rule.t2) return 2;
    if (s <= rule.t1) return 1;
    return 0;
}

ItemScoreSheet score_all_rule(const FeatureVector& features, const RuleParams& params) {
    ItemScoreSheet sheet;
    sheet.source = ScoreSource::Rule;
    for (ItemId item : kAllItems) {
        sheet[item] = score_item_rule(features, params[item]);
    }
    return sheet;
}

RuleParams default_rule_params() {
    RuleParams params;
    auto engagement = std::vector<RuleTerm>{{"alternation_rate", 0.5},
                                            {"participation_rate", 0.5}};
    params[ItemId::A4] = {ItemId::A4,
                          {{"echolalia_rate", 1.0}},
                          RuleDirection::HigherIsWorse,
                          0.3,
                          0.6};
    params[ItemId::A7] = {ItemId::A7,
                          {{"response_rate", 1.0}},
                          RuleDirection::LowerIsWorse,
                          0.7,
                          0.4};
    params[ItemId::A8] = {ItemId::A8, engagement, RuleDirection::LowerIsWorse, 0.6, 0.3};
    params[ItemId::B4] = {ItemId::B4,
                          {{"enjoyment_rate", 1.0}, {"passive_rate", -1.0}},
                          RuleDirection::LowerIsWorse,
                          0.15,
                          -0.05};
    params[ItemId::B7] = {ItemId::B7,
                          {{"suggestion_rate", 1.0}},
                          RuleDirection::LowerIsWorse,
                          0.3,
                          0.1};
    params[ItemId::B9] = {ItemId::B9,
                          {{"response_rate", 1.0}},
                          RuleDirection::LowerIsWorse,
                          0.7,
                          0.4};
    params[ItemId::B10] = {ItemId::B10, engagement, RuleDirection::LowerIsWorse, 0.6, 0.3};
    params[ItemId::B11] = {ItemId::B11,
                           {{"echolalia_rate", -1.0 / 7},
                            {"alternation_rate", 1.0 / 7},
                            {"participation_rate", 1.0 / 7},
                            {"enjoyment_rate", 1.0 / 7},
                            {"passive_rate", -1.0 / 7},
                            {"suggestion_rate", 1.0 / 7},
                            {"response_rate", 1.0 / 7}},
                           RuleDirection::LowerIsWorse,
                           0.35,
                           0.2};
    return params;
}

std::string RuleParams::to_json() const {
    json doc = json::object();
    for (const auto& rule : rules) {
        json terms = json::array();
        for (const auto& term : rule.terms) {
            terms.push_back({{"feature", term.feature}, {"weight", term.weight}});
        }
        doc[std::string(item_name(rule.item))] = {
            {"terms", terms},
            {"direction", std::string(rule_direction_name(rule.direction))},
            {"t1", rule.t1},
            {"t2", rule.t2},
        };
    }
    return doc.dump(2) + "\n";
}

RuleParams RuleParams::from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorKind::ConfigError, "rule params: not a JSON object");
    }
    RuleParams params;
    std::array<bool, kItemCount> seen{};
    for (const auto& [key, value] : doc.items()) {
        auto item = item_from_name(key);
        if (!item) {
            throw Error(ErrorKind::ConfigError, "rule params: unknown item " + key);
        }
        ItemRule rule;
        rule.item = *item;
        for (const auto& term : value.at("terms")) {
            rule.terms.push_back({term.at("feature").get<std::string>(),
                                  term.at("weight").get<double>()});
        }
        auto direction =
            rule_direction_from_name(value.at("direction").get<std::string>());
        if (!direction) {
            throw Error(ErrorKind::ConfigError, "rule params: bad direction for " + key);
        }
        rule.direction = *direction;
        rule.t1 = value.at("t1").get<double>();
        rule.t2 = value.at("t2").get<double>();
        rule.validate();
        params[*item] = std::move(rule);
        seen[item_index(*item)] = true;
    }
    for (ItemId item : kAllItems) {
        if (!seen[item_index(item)]) {
            throw Error(ErrorKind::MissingItem,
                        "rule params: " + std::string(item_name(item)));
        }
    }
    return params;
}

std::string FitReport::to_json() const {
    json doc;
    doc["folds"] = {folds[0], folds[1]};
    json items = json::object();
    for (ItemId item : kAllItems) {
        const std::size_t idx = item_index(item);
        json list = json::array();
        for (const auto& candidate : candidates[idx]) {
            list.push_back({{"t1", candidate.thresholds.t1},
                            {"t2", candidate.thresholds.t2},
                            {"fold_mae", candidate.fold_mae},
                            {"mean_mae", candidate.mean_mae}});
        }
        items[std::string(item_name(item))] = {{"candidates", list},
                                               {"selected", selected[idx]}};
    }
    doc["items"] = items;
    return doc.dump(2) + "\n";
}

std::vector<int> stratified_two_fold(const std::vector<LabeledSession>& corpus,
                                     std::uint64_t seed) {
    // Order by session_id so the split ignores corpus file ordering.
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return corpus[a].session_id < corpus[b].session_id;
    });

    std::array<std::vector<std::size_t>, 3> strata;
    for (std::size_t pos : order) {
        const int stratum = corpus[pos].stratum;
        if (stratum < 0 || stratum > 2) {
            throw Error(ErrorKind::InsufficientStrata,
                        "bad stratum for " + corpus[pos].session_id);
        }
        strata[static_cast<std::size_t>(stratum)].push_back(pos);
    }

    std::vector<int> fold(corpus.size(), 0);
    std::mt19937_64 rng(seed);
    for (auto& members : strata) {
        if (members.empty()) continue;
        if (members.size() < 2) {
            throw Error(ErrorKind::InsufficientStrata,
                        "stratum with a single session: " +
                            corpus[members.front()].session_id);
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            fold[members[i]] = static_cast<int>(i % 2);
        }
    }
    return fold;
}

namespace {

// Grid candidates are direction-agnostic pairs; order them to match the
// ladder convention of the rule they are tried against.
ThresholdPair orient_thresholds(RuleDirection direction, ThresholdPair pair) {
    const double lo = std::min(pair.t1, pair.t2);
    const double hi = std::max(pair.t1, pair.t2);
    return direction == RuleDirection::HigherIsWorse ? ThresholdPair{lo, hi}
                                                     : ThresholdPair{hi, lo};
}

}  // namespace

FitResult fit_params(const std::vector<LabeledSession>& corpus,
                     const RuleParams& rule_template, const ThresholdGrid& grid,
                     std::uint64_t seed) {
    for (ItemId item : kAllItems) {
        if (grid[item_index(item)].empty()) {
            throw Error(ErrorKind::EmptyGrid, std::string(item_name(item)));
        }
    }
    if (corpus.empty()) {
        throw Error(ErrorKind::EmptyInput, "fit corpus");
    }

    const std::vector<int> fold = stratified_two_fold(corpus, seed);

    FitResult result;
    result.params = rule_template;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        result.report.folds[static_cast<std::size_t>(fold[i])].push_back(
            corpus[i].session_id);
    }
    for (auto& ids : result.report.folds) std::sort(ids.begin(), ids.end());

    for (ItemId item : kAllItems) {
        const std::size_t idx = item_index(item);
        ItemRule rule = rule_template[item];

        std::size_t best = 0;
        double best_mae = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < grid[idx].size(); ++c) {
            const ThresholdPair pair = orient_thresholds(rule.direction, grid[idx][c]);
            rule.t1 = pair.t1;
            rule.t2 = pair.t2;

            CandidateResult candidate;
            candidate.thresholds = pair;
            for (int k = 0; k < 2; ++k) {
                double abs_sum = 0.0;
                std::size_t n = 0;
                for (std::size_t i = 0; i < corpus.size(); ++i) {
                    if (fold[i] != k) continue;
                    const int predicted = score_item_rule(corpus[i].features, rule);
                    abs_sum += std::abs(predicted - corpus[i].labels[item]);
                    ++n;
                }
                candidate.fold_mae[static_cast<std::size_t>(k)] =
                    n == 0 ? 0.0 : abs_sum / static_cast<double>(n);
            }
            candidate.mean_mae = (candidate.fold_mae[0] + candidate.fold_mae[1]) / 2.0;
            result.report.candidates[idx].push_back(candidate);

            if (candidate.mean_mae < best_mae) {
                best_mae = candidate.mean_mae;
                best = c;
            }
        }
        result.report.selected[idx] = best;
        const ThresholdPair chosen = orient_thresholds(rule.direction, grid[idx][best]);
        result.params[item].t1 = chosen.t1;
        result.params[item].t2 = chosen.t2;
    }
    return result;
}

}  // namespace ados
