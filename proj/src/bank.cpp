#include "lirf/bank.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lirf/serial.hpp"

namespace lirf {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t ExampleBank::insert_positive(const Snapshot& snap, Env& curator,
                                         std::uint64_t provenance_seed) {
    curator.restore_state(snap);
    if (!curator.ground_truth_success())
        throw EnvError("positive example rejected: oracle reports failure");
    BankEntry e;
    e.snap = curator.snapshot_state();
    e.label = ExampleLabel::positive;
    e.provenance_seed = provenance_seed;
    entries_.push_back(std::move(e));
    return entries_.size() - 1;
}

std::size_t ExampleBank::insert_negative(const Snapshot& snap, Env& curator,
                                         std::uint64_t provenance_seed) {
    // Store the physical outcome only: a fresh episode starts with no
    // hefting knowledge, so epistemic latents are reset via the phase switch.
    curator.restore_state(snap);
    curator.begin_irf_phase(1);
    BankEntry e;
    e.snap = curator.snapshot_state();
    e.label = ExampleLabel::negative;
    e.provenance_seed = provenance_seed;
    entries_.push_back(std::move(e));
    return entries_.size() - 1;
}

std::size_t ExampleBank::sample(Rng& rng) {
    const ExampleLabel want =
        rng.bernoulli(0.5) ? ExampleLabel::positive : ExampleLabel::negative;
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].label == want && !entries_[i].destroyed) pool.push_back(i);
    if (pool.empty())
        throw EnvError(std::string("example bank has no usable ") +
                       (want == ExampleLabel::positive ? "positive" : "negative") +
                       " examples");
    const std::size_t idx = pool[rng.uniform_index(pool.size())];
    entries_[idx].reuse_count++;
    (want == ExampleLabel::positive ? episodes_pos_ : episodes_neg_)++;
    return idx;
}

void ExampleBank::curate_after_episode(std::size_t index, const Snapshot& terminal,
                                       Env& curator) {
    BankEntry& e = entries_.at(index);
    if (e.label != ExampleLabel::positive) return;
    curator.restore_state(terminal);
    if (!curator.ground_truth_success()) e.destroyed = true;
}

std::size_t ExampleBank::count(ExampleLabel label) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.label == label;
    return n;
}

std::size_t ExampleBank::usable(ExampleLabel label) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.label == label && !e.destroyed;
    return n;
}

std::size_t ExampleBank::destroyed_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.destroyed;
    return n;
}

std::uint64_t ExampleBank::episodes_with(ExampleLabel label) const {
    return label == ExampleLabel::positive ? episodes_pos_ : episodes_neg_;
}

std::size_t ExampleBank::distinct_used(ExampleLabel label) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.label == label && e.reuse_count > 0;
    return n;
}

void ExampleBank::save(const std::string& dir) const {
    fs::create_directories(dir);
    std::vector<std::uint8_t> blob;
    json manifest;
    manifest["schema_version"] = 1;
    manifest["episodes_pos"] = episodes_pos_;
    manifest["episodes_neg"] = episodes_neg_;
    json items = json::array();
    for (const auto& e : entries_) {
        const auto rec = e.snap.serialize();
        json it;
        it["label"] = e.label == ExampleLabel::positive ? "positive" : "negative";
        it["reuse_count"] = e.reuse_count;
        it["destroyed"] = e.destroyed;
        it["provenance_seed"] = e.provenance_seed;
        it["offset"] = blob.size();
        it["length"] = rec.size();
        items.push_back(it);
        blob.insert(blob.end(), rec.begin(), rec.end());
    }
    manifest["examples"] = items;
    json pos_obs = json::array();
    for (const auto& o : positive_obs_) pos_obs.push_back(o);
    manifest["positive_observations"] = pos_obs;
    write_file(dir + "/snapshots.bin", blob);
    std::ofstream mf(dir + "/manifest.json", std::ios::trunc);
    mf << manifest.dump(2) << "\n";
    if (!mf) throw SerialError("cannot write bank manifest: " + dir);
}

ExampleBank ExampleBank::load(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw SerialError("cannot read bank manifest: " + dir);
    json manifest = json::parse(mf);
    const auto blob = read_file(dir + "/snapshots.bin");
    ExampleBank bank;
    bank.episodes_pos_ = manifest.at("episodes_pos").get<std::uint64_t>();
    bank.episodes_neg_ = manifest.at("episodes_neg").get<std::uint64_t>();
    for (const auto& it : manifest.at("examples")) {
        const std::size_t off = it.at("offset").get<std::size_t>();
        const std::size_t len = it.at("length").get<std::size_t>();
        std::vector<std::uint8_t> rec(blob.begin() + off, blob.begin() + off + len);
        BankEntry e;
        e.snap = Snapshot::deserialize(rec);
        e.label = it.at("label").get<std::string>() == "positive" ? ExampleLabel::positive
                                                                  : ExampleLabel::negative;
        e.reuse_count = it.at("reuse_count").get<std::uint64_t>();
        e.destroyed = it.at("destroyed").get<bool>();
        e.provenance_seed = it.at("provenance_seed").get<std::uint64_t>();
        bank.entries_.push_back(std::move(e));
    }
    for (const auto& o : manifest.at("positive_observations"))
        bank.positive_obs_.push_back(o.get<Obs>());
    return bank;
}

}  // namespace lirf
