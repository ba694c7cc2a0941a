#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace montage {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Evidence and targets

// One timestamped, factually-true post drawn from the evidence pool.
struct EvidenceFragment {
    std::string id;
    std::string text;
    std::int64_t timestamp = 0; // seconds since epoch
    std::string source_event;
    std::string veracity_label; // "true" or "non-rumor"
    std::int64_t cascade_size = 1; // reactions + 1
};

void validate(const EvidenceFragment& fragment);
Json to_json(const EvidenceFragment& fragment);
EvidenceFragment evidence_fragment_from_json(const Json& j);

// A fabricated hypothesis with its real counterpart and virality rank key.
struct TargetFabrication {
    std::string id;
    std::string claim_text;
    std::string real_counterpart;
    std::string source_event;
    std::int64_t historical_cascade = 1;
};

void validate(const TargetFabrication& target);
Json to_json(const TargetFabrication& target);
TargetFabrication target_fabrication_from_json(const Json& j);

// Directed causal-structure description: genuine edges vs. the spurious ones
// an attack tries to imply.
struct CausalGraphSpec {
    std::vector<std::string> nodes;
    std::vector<std::pair<std::string, std::string>> real_edges;
    std::vector<std::pair<std::string, std::string>> false_edges;
};

void validate(const CausalGraphSpec& graph);

// ---------------------------------------------------------------------------
// Production artifacts

struct NarrativeDraft {
    std::string text;
    int round = 1;
    std::optional<double> director_score;
    std::optional<bool> lt_verified;
};

void validate(const NarrativeDraft& draft);
Json to_json(const NarrativeDraft& draft);
NarrativeDraft narrative_draft_from_json(const Json& j);

struct SequencedPost {
    std::string text;
    std::int64_t timestamp = 0;
    std::vector<std::string> provenance; // source EvidenceFragment ids
};

// Ordered fragment stream with per-fragment schedule and provenance.
struct MontageSequence {
    std::vector<SequencedPost> fragments;
    int round = 1;
    std::optional<double> director_score;
};

void validate(const MontageSequence& sequence);
Json to_json(const MontageSequence& sequence);
MontageSequence montage_sequence_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Gate decisions

enum class GateKind { accept, reject, revise };

const char* gate_kind_name(GateKind kind);
GateKind gate_kind_from_name(const std::string& name);

// Three-state gate verdict. Construct through the factories: they enforce the
// per-kind invariants (an ACCEPT below tau does not exist).
struct GateDecision {
    GateKind kind = GateKind::revise;
    double score = 0.0;
    std::string critique;                 // non-empty iff kind == revise
    std::vector<std::size_t> lt_failures; // non-empty iff kind == reject

    static GateDecision accept(double score, double tau);
    static GateDecision reject(std::vector<std::size_t> lt_failures, double score = 0.0);
    static GateDecision revise(double score, std::string critique);
};

Json to_json(const GateDecision& decision);
GateDecision gate_decision_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Victim verdicts

enum class Verdict { adopt_fabrication, adopt_truth, uncertain };

const char* verdict_name(Verdict verdict);
Verdict verdict_from_name(const std::string& name);

struct VictimVerdict {
    Verdict verdict = Verdict::uncertain;
    double confidence = 0.0; // clamped to [0,1] at parse
    std::string rationale;
    int victim_index = 1;
};

void validate(const VictimVerdict& verdict);
Json to_json(const VictimVerdict& verdict);
VictimVerdict victim_verdict_from_json(const Json& j);

} // namespace montage
