#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "montage/core/types.hpp"

namespace montage {

// An attacker-controlled posting identity.
struct PublisherBot {
    std::string bot_id;
    std::string handle;
    std::uint64_t persona_seed = 0;
};

void validate(const std::vector<PublisherBot>& bots);
nlohmann::json to_json(const PublisherBot& bot);
PublisherBot bot_from_json(const nlohmann::json& j);

enum class PostOrigin { attack, normal };
const char* post_origin_name(PostOrigin origin);
PostOrigin post_origin_from_name(const std::string& name);

// One entry of the merged public feed. Attack posts carry the index of the
// sequence fragment they publish; organic posts carry author "organic".
struct PublishedPost {
    std::string text;
    std::int64_t timestamp = 0;
    std::string author;
    PostOrigin origin = PostOrigin::attack;
    std::optional<std::size_t> fragment_index;
};

void validate(const PublishedPost& post);
nlohmann::json to_json(const PublishedPost& post);
PublishedPost published_post_from_json(const nlohmann::json& j);

enum class AssignStrategy { round_robin, randomized_round_robin };
const char* assign_strategy_name(AssignStrategy strategy);
AssignStrategy assign_strategy_from_name(const std::string& name);

// Builds m bots with distinct ids and seeded display handles.
std::vector<PublisherBot> make_bot_pool(std::size_t m, std::uint64_t seed);

// Maps each sequence fragment to exactly one bot. round_robin walks the pool
// in order; randomized_round_robin draws a fresh seeded bot permutation per
// full cycle, so per-bot load still differs by at most one.
std::vector<PublishedPost> assign_publishers(const MontageSequence& sequence,
                                             const std::vector<PublisherBot>& bots,
                                             AssignStrategy strategy, std::uint64_t seed);

// Every evidence id any fragment of the sequence traces back to.
std::set<std::string> provenance_union(const MontageSequence& sequence);

// Samples normal_count organic posts from the normal pool (seeded, without
// replacement, skipping excluded ids), timestamps them uniformly over the
// attack window, and merges with the attack posts sorted by (timestamp,
// author).
std::vector<PublishedPost> build_feed(const std::vector<PublishedPost>& attack_posts,
                                      const std::vector<EvidenceFragment>& normal_pool,
                                      std::size_t normal_count, std::uint64_t seed,
                                      const std::set<std::string>& exclude_ids = {});

} // namespace montage
