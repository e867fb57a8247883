#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lirf/env.hpp"

namespace lirf {

enum class ExampleLabel { positive, negative };

struct BankEntry {
    Snapshot snap;
    ExampleLabel label;
    std::uint64_t reuse_count = 0;  // episodes initialized from this example
    bool destroyed = false;
    std::uint64_t provenance_seed = 0;
};

// The actionable example store: latent snapshots standing in for physical
// object instances, plus the companion positive observations the classifier
// trains on. Append-only, single writer. The curator env passed into the
// mutating calls models the human curation channel: it validates positives
// on insertion and notices when an episode destroys an example's success
// property. Its oracle counter is reported separately from training envs.
class ExampleBank {
public:
    // Positives represent human-provided successes; insertion fails if the
    // oracle rejects the state.
    std::size_t insert_positive(const Snapshot& snap, Env& curator,
                                std::uint64_t provenance_seed);
    // Negatives come from task-policy rollouts. The stored record is the
    // physical outcome: agent-knowledge latents are scrubbed on the way in.
    std::size_t insert_negative(const Snapshot& snap, Env& curator,
                                std::uint64_t provenance_seed);

    // Balanced class choice (0.5/0.5), uniform within the class, destroyed
    // examples excluded. Increments the reuse counter. Throws EnvError when
    // the drawn class has no usable entries.
    std::size_t sample(Rng& rng);

    // Post-episode curation: a positive whose restored episode left the
    // success property broken is flagged destroyed and never reused.
    void curate_after_episode(std::size_t index, const Snapshot& terminal, Env& curator);

    const BankEntry& entry(std::size_t i) const { return entries_[i]; }
    std::size_t size() const { return entries_.size(); }
    std::size_t count(ExampleLabel label) const;
    std::size_t usable(ExampleLabel label) const;
    std::size_t destroyed_count() const;
    std::uint64_t episodes_with(ExampleLabel label) const;
    std::size_t distinct_used(ExampleLabel label) const;

    void add_positive_observation(Obs o) { positive_obs_.push_back(std::move(o)); }
    const std::vector<Obs>& positive_observations() const { return positive_obs_; }

    void save(const std::string& dir) const;
    static ExampleBank load(const std::string& dir);

private:
    std::vector<BankEntry> entries_;
    std::vector<Obs> positive_obs_;
    std::uint64_t episodes_pos_ = 0, episodes_neg_ = 0;
};

}  // namespace lirf
