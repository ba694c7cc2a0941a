#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "montage/core/types.hpp"

namespace montage {

// One thread folder from a PHEME-layout archive, before partitioning.
struct RawThread {
    std::string thread_id;
    std::string event;
    std::string text;           // source post body
    std::int64_t timestamp = 0; // source post time, epoch seconds
    std::int64_t reactions = 0; // reply records in the thread
    std::string label;          // veracity annotation, normalized spelling
};

struct ParseStats {
    std::size_t threads = 0;
    std::size_t skipped = 0; // missing annotation, bad timestamp, empty text
};

// Walks root/<event>/.../<thread>/ folders holding a source post record, an
// annotation record, and reaction records. Skips (with a logged warning)
// threads lacking an annotation or a parseable timestamp. Output is sorted
// by (event, thread_id) so ingestion is reproducible byte for byte.
std::vector<RawThread> parse_archive(const std::string& root, ParseStats* stats = nullptr);

// "Wed Jan 07 11:06:08 +0000 2015" -> epoch seconds; -1 when unparseable.
std::int64_t parse_twitter_time(const std::string& created_at);

struct Partition {
    std::vector<RawThread> evidence;   // label true / non-rumor
    std::vector<RawThread> candidates; // label false / unverified
    std::vector<RawThread> rejected;   // anything else
};

Partition partition_threads(const std::vector<RawThread>& threads);

// Ground-truth counterpart for a fabricated claim when the archive offers
// only a veracity label.
std::string negate_claim(const std::string& claim);

// Greedy dedup in descending cascade order (thread id breaks ties): a
// candidate is dropped when its token-set Jaccard similarity with any
// retained claim reaches the threshold. top_n = 0 keeps everything.
std::vector<TargetFabrication> dedup_and_rank(const std::vector<RawThread>& candidates,
                                              double similarity_threshold,
                                              std::size_t top_n = 0);

} // namespace montage
