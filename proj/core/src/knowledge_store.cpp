#include "mgv/knowledge_store.hpp"

#include <algorithm>
#include <stdexcept>

#include "mgv/errors.hpp"

namespace mgv {

double KnowledgeItem::smoothed_success_rate() const noexcept {
    return (successes + 1.0) / (successes + failures + 2.0);
}

KnowledgeStore::KnowledgeStore(double access_prob, double encoding_rate, int prune_margin)
    : access_prob_(access_prob), encoding_rate_(encoding_rate), prune_margin_(prune_margin) {
    if (!(access_prob >= 0.0 && access_prob <= 1.0)) {
        throw std::invalid_argument("access_prob must lie in [0,1]");
    }
    if (!(encoding_rate >= 0.0 && encoding_rate <= 1.0)) {
        throw std::invalid_argument("encoding_rate must lie in [0,1]");
    }
    if (prune_margin < 0) throw std::invalid_argument("prune_margin must be >= 0");
}

void KnowledgeStore::add(KnowledgeItem item) {
    if (item.id.empty()) throw std::invalid_argument("knowledge item id must be non-empty");
    if (item.successes < 0 || item.failures < 0) {
        throw std::invalid_argument("success/failure counters must be nonnegative");
    }
    for (const auto& r : item.calibration_records) {
        if (!(r.fok_magnitude >= 0.0) || !(r.confidence >= 0.0 && r.confidence <= 1.0)) {
            throw std::invalid_argument("calibration record out of range in item " + item.id);
        }
    }
    auto id = item.id;
    ltm_.insert_or_assign(std::move(id), std::move(item));
}

const KnowledgeItem* KnowledgeStore::find(const std::string& id) const {
    auto it = ltm_.find(id);
    return it == ltm_.end() ? nullptr : &it->second;
}

std::vector<KnowledgeItem> KnowledgeStore::stm_items() const {
    std::vector<KnowledgeItem> out;
    out.reserve(stm_.size());
    for (const auto& id : stm_) out.push_back(ltm_.at(id));
    return out;
}

std::vector<KnowledgeItem> KnowledgeStore::stm_items(Category category) const {
    std::vector<KnowledgeItem> out;
    for (const auto& id : stm_) {
        const auto& item = ltm_.at(id);
        if (item.category == category) out.push_back(item);
    }
    return out;
}

namespace {

bool shares_tag(const TagSet& a, const TagSet& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> KnowledgeStore::retrieve_probabilistic(const TagSet& query, Rng& rng) {
    if (query.empty()) throw std::invalid_argument("retrieval query must be non-empty");
    std::vector<std::string> added;
    for (const auto& [id, item] : ltm_) {
        if (stm_.count(id) || !shares_tag(item.tags, query)) continue;
        if (rng.bernoulli(access_prob_)) {
            stm_.insert(id);
            added.push_back(id);
        }
    }
    return added;
}

std::size_t KnowledgeStore::consolidate(std::span<const ExperienceTuple> tuples, Rng& rng) {
    std::size_t written = 0;
    for (const auto& t : tuples) {
        if (!rng.bernoulli(encoding_rate_)) continue;
        KnowledgeItem item;
        // Serial ids never collide with caller-supplied ones that avoid '#'.
        do {
            item.id = "consolidated#" + std::to_string(next_serial_++);
        } while (ltm_.count(item.id));
        item.tags = {t.strategy_id};
        if (t.confidence) {
            item.category = Category::Task;
            const double magnitude = t.fok ? t.fok->magnitude() : 0.0;
            item.calibration_records.push_back(
                {magnitude, clamp_unit(*t.confidence), t.outcome_quality > 0.0});
        } else {
            item.category = Category::Strategy;
        }
        if (t.outcome_quality > 0.0) item.successes = 1;
        else if (t.outcome_quality < 0.0) item.failures = 1;
        ltm_.emplace(item.id, std::move(item));
        ++written;
    }
    return written;
}

void KnowledgeStore::update_knowledge(const ExperienceTuple& tuple) {
    auto it = ltm_.find(tuple.strategy_id);
    if (it == ltm_.end()) {
        KnowledgeItem item;
        item.id = tuple.strategy_id;
        item.category = Category::Strategy;
        item.tags = {tuple.strategy_id};
        it = ltm_.emplace(item.id, std::move(item)).first;
    }
    if (tuple.outcome_quality > 0.0) ++it->second.successes;
    else if (tuple.outcome_quality < 0.0) ++it->second.failures;
    prune();
}

void KnowledgeStore::prune() {
    for (auto it = ltm_.begin(); it != ltm_.end();) {
        if (it->second.failures - it->second.successes > prune_margin_) {
            stm_.erase(it->first);
            it = ltm_.erase(it);
        } else {
            ++it;
        }
    }
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Thresholds KnowledgeStore::calibrate_thresholds() const {
    std::vector<double> magnitudes;
    std::vector<double> confidences;
    for (const auto& id : stm_) {
        for (const auto& r : ltm_.at(id).calibration_records) {
            if (!r.was_correct) continue;
            magnitudes.push_back(r.fok_magnitude);
            confidences.push_back(r.confidence);
        }
    }
    if (magnitudes.empty()) throw NoCalibrationHistory();
    return {median(std::move(magnitudes)), median(std::move(confidences))};
}

void to_json(nlohmann::json& j, const Category& c) {
    switch (c) {
        case Category::Agent: j = "agent"; break;
        case Category::Task: j = "task"; break;
        case Category::Strategy: j = "strategy"; break;
        case Category::MetaStrategy: j = "meta_strategy"; break;
    }
}

void from_json(const nlohmann::json& j, Category& c) {
    const auto s = j.get<std::string>();
    if (s == "agent") c = Category::Agent;
    else if (s == "task") c = Category::Task;
    else if (s == "strategy") c = Category::Strategy;
    else if (s == "meta_strategy") c = Category::MetaStrategy;
    else throw std::invalid_argument("unknown knowledge category: " + s);
}

void to_json(nlohmann::json& j, const KnowledgeItem& item) {
    auto records = nlohmann::json::array();
    for (const auto& r : item.calibration_records) {
        records.push_back({{"fok_magnitude", r.fok_magnitude},
                           {"confidence", r.confidence},
                           {"was_correct", r.was_correct}});
    }
    j = nlohmann::json{{"id", item.id},
                       {"category", item.category},
                       {"tags", item.tags},
                       {"features", item.features},
                       {"successes", item.successes},
                       {"failures", item.failures},
                       {"calibration_records", std::move(records)}};
}

void from_json(const nlohmann::json& j, KnowledgeItem& item) {
    item.id = j.at("id").get<std::string>();
    item.category = j.value("category", Category::Strategy);
    item.tags = j.value("tags", TagSet{});
    item.features = j.value("features", std::vector<double>{});
    item.successes = j.value("successes", 0);
    item.failures = j.value("failures", 0);
    item.calibration_records.clear();
    if (j.contains("calibration_records")) {
        for (const auto& r : j.at("calibration_records")) {
            item.calibration_records.push_back({r.at("fok_magnitude").get<double>(),
                                                r.at("confidence").get<double>(),
                                                r.at("was_correct").get<bool>()});
        }
    }
}

nlohmann::json KnowledgeStore::to_json() const {
    auto items = nlohmann::json::array();
    for (const auto& [id, item] : ltm_) items.push_back(item);
    return {{"access_prob", access_prob_},
            {"encoding_rate", encoding_rate_},
            {"prune_margin", prune_margin_},
            {"items", std::move(items)},
            {"stm", stm_},
            {"next_serial", next_serial_}};
}

KnowledgeStore KnowledgeStore::from_json(const nlohmann::json& j) {
    KnowledgeStore store(j.value("access_prob", 1.0), j.value("encoding_rate", 1.0),
                         j.value("prune_margin", kDefaultPruneMargin));
    if (j.contains("items")) {
        for (const auto& item : j.at("items")) store.add(item.get<KnowledgeItem>());
    }
    if (j.contains("stm")) {
        for (const auto& id : j.at("stm")) {
            auto s = id.get<std::string>();
            if (!store.contains(s)) throw std::invalid_argument("STM id not in LTM: " + s);
            store.stm_.insert(std::move(s));
        }
    }
    store.next_serial_ = j.value("next_serial", std::size_t{0});
    return store;
}

}  // namespace mgv
