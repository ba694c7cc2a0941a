#include "montage/inject/sybil.hpp"

#include <algorithm>
#include <cstdio>

#include "montage/util/errors.hpp"
#include "montage/util/rng.hpp"

namespace montage {

namespace {

const char* kHandleLead[] = {"quiet", "local", "daily", "night", "metro",
                             "plain", "rapid", "civic"};
const char* kHandleTail[] = {"observer", "dispatch", "witness", "report",
                             "monitor", "signal", "record", "lens"};

} // namespace

void validate(const std::vector<PublisherBot>& bots) {
    std::set<std::string> seen;
    for (const auto& bot : bots) {
        if (bot.bot_id.empty()) raise(Errc::invalid_input, "bot with empty id");
        if (!seen.insert(bot.bot_id).second)
            raise(Errc::invalid_input, "duplicate bot id " + bot.bot_id);
    }
}

nlohmann::json to_json(const PublisherBot& bot) {
    return {{"bot_id", bot.bot_id}, {"handle", bot.handle}, {"persona_seed", bot.persona_seed}};
}

PublisherBot bot_from_json(const nlohmann::json& j) {
    PublisherBot bot;
    bot.bot_id = j.at("bot_id").get<std::string>();
    bot.handle = j.at("handle").get<std::string>();
    bot.persona_seed = j.value("persona_seed", std::uint64_t{0});
    return bot;
}

const char* post_origin_name(PostOrigin origin) {
    return origin == PostOrigin::attack ? "attack" : "normal";
}

PostOrigin post_origin_from_name(const std::string& name) {
    if (name == "attack") return PostOrigin::attack;
    if (name == "normal") return PostOrigin::normal;
    raise(Errc::parse_error, "unknown post origin '" + name + "'");
}

void validate(const PublishedPost& post) {
    if (post.text.empty()) raise(Errc::invalid_input, "published post with empty text");
    if (post.author.empty()) raise(Errc::invalid_input, "published post with empty author");
    if (post.origin == PostOrigin::attack) {
        if (!post.fragment_index)
            raise(Errc::invalid_input, "attack post without fragment index");
        if (post.author == "organic")
            raise(Errc::invalid_input, "attack post credited to organic traffic");
    }
}

nlohmann::json to_json(const PublishedPost& post) {
    nlohmann::json j{{"text", post.text},
                     {"timestamp", post.timestamp},
                     {"author", post.author},
                     {"origin", post_origin_name(post.origin)}};
    if (post.fragment_index) j["fragment_index"] = *post.fragment_index;
    return j;
}

PublishedPost published_post_from_json(const nlohmann::json& j) {
    PublishedPost post;
    post.text = j.at("text").get<std::string>();
    post.timestamp = j.at("timestamp").get<std::int64_t>();
    post.author = j.at("author").get<std::string>();
    post.origin = post_origin_from_name(j.at("origin").get<std::string>());
    if (j.contains("fragment_index")) post.fragment_index = j["fragment_index"].get<std::size_t>();
    validate(post);
    return post;
}

const char* assign_strategy_name(AssignStrategy strategy) {
    return strategy == AssignStrategy::round_robin ? "round_robin" : "randomized_round_robin";
}

AssignStrategy assign_strategy_from_name(const std::string& name) {
    if (name == "round_robin") return AssignStrategy::round_robin;
    if (name == "randomized_round_robin") return AssignStrategy::randomized_round_robin;
    raise(Errc::invalid_config, "unknown assignment strategy '" + name + "'");
}

std::vector<PublisherBot> make_bot_pool(std::size_t m, std::uint64_t seed) {
    if (m == 0) raise(Errc::invalid_input, "bot pool must have at least one bot");
    Rng rng(derive_seed(seed, "bot-pool"));
    std::vector<PublisherBot> bots;
    bots.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        PublisherBot bot;
        char id[32];
        std::snprintf(id, sizeof(id), "bot-%02zu", i + 1);
        bot.bot_id = id;
        bot.persona_seed = rng.next();
        const auto* lead = kHandleLead[bot.persona_seed % 8];
        const auto* tail = kHandleTail[(bot.persona_seed >> 8) % 8];
        bot.handle = "@" + std::string(lead) + "_" + tail + std::to_string(1 + i);
        bots.push_back(std::move(bot));
    }
    return bots;
}

std::vector<PublishedPost> assign_publishers(const MontageSequence& sequence,
                                             const std::vector<PublisherBot>& bots,
                                             AssignStrategy strategy, std::uint64_t seed) {
    if (sequence.fragments.empty()) raise(Errc::invalid_input, "cannot publish an empty sequence");
    validate(bots);
    if (bots.empty()) raise(Errc::invalid_input, "bot pool is empty");

    const std::size_t m = bots.size();
    std::vector<std::size_t> cycle(m);
    for (std::size_t i = 0; i < m; ++i) cycle[i] = i;
    Rng rng(derive_seed(seed, "assign"));

    std::vector<PublishedPost> posts;
    posts.reserve(sequence.fragments.size());
    for (std::size_t i = 0; i < sequence.fragments.size(); ++i) {
        if (strategy == AssignStrategy::randomized_round_robin && i % m == 0) rng.shuffle(cycle);
        const auto& bot = bots[strategy == AssignStrategy::round_robin ? i % m : cycle[i % m]];
        PublishedPost post;
        post.text = sequence.fragments[i].text;
        post.timestamp = sequence.fragments[i].timestamp;
        post.author = bot.bot_id;
        post.origin = PostOrigin::attack;
        post.fragment_index = i;
        posts.push_back(std::move(post));
    }
    return posts;
}

std::set<std::string> provenance_union(const MontageSequence& sequence) {
    std::set<std::string> ids;
    for (const auto& fragment : sequence.fragments)
        ids.insert(fragment.provenance.begin(), fragment.provenance.end());
    return ids;
}

std::vector<PublishedPost> build_feed(const std::vector<PublishedPost>& attack_posts,
                                      const std::vector<EvidenceFragment>& normal_pool,
                                      std::size_t normal_count, std::uint64_t seed,
                                      const std::set<std::string>& exclude_ids) {
    if (attack_posts.empty()) raise(Errc::invalid_input, "feed needs at least one attack post");
    for (const auto& post : attack_posts) validate(post);
    if (normal_count > normal_pool.size())
        raise(Errc::invalid_config, "normal_count " + std::to_string(normal_count) +
                                        " exceeds normal pool size " +
                                        std::to_string(normal_pool.size()));

    auto feed = attack_posts;
    if (normal_count > 0) {
        std::vector<const EvidenceFragment*> eligible;
        eligible.reserve(normal_pool.size());
        for (const auto& fragment : normal_pool) {
            if (!exclude_ids.count(fragment.id)) eligible.push_back(&fragment);
        }
        if (normal_count > eligible.size())
            raise(Errc::invalid_config,
                  "normal_count " + std::to_string(normal_count) + " exceeds the " +
                      std::to_string(eligible.size()) + " posts left after provenance exclusion");

        auto window = std::minmax_element(
            attack_posts.begin(), attack_posts.end(),
            [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
        const std::int64_t lo = window.first->timestamp;
        const std::int64_t hi = window.second->timestamp;

        Rng rng(derive_seed(seed, "feed"));
        // partial Fisher-Yates: the first normal_count slots become the sample
        for (std::size_t i = 0; i < normal_count; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
            std::swap(eligible[i], eligible[j]);
        }
        for (std::size_t i = 0; i < normal_count; ++i) {
            PublishedPost post;
            post.text = eligible[i]->text;
            post.timestamp = lo + static_cast<std::int64_t>(
                                      rng.below(static_cast<std::uint64_t>(hi - lo) + 1));
            post.author = "organic";
            post.origin = PostOrigin::normal;
            feed.push_back(std::move(post));
        }
    }

    std::stable_sort(feed.begin(), feed.end(), [](const auto& a, const auto& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.author < b.author;
    });
    return feed;
}

} // namespace montage
