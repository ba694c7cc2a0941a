#include "montage/core/types.hpp"

#include "montage/core/text.hpp"
#include "montage/util/errors.hpp"

#include <algorithm>
#include <set>

namespace montage {

namespace {

double require_unit_interval(double value, const char* what) {
    if (!(value >= 0.0 && value <= 1.0))
        raise(Errc::invalid_input, std::string(what) + " must lie in [0,1]");
    return value;
}

} // namespace

// ---------------------------------------------------------------------------
// EvidenceFragment

void validate(const EvidenceFragment& fragment) {
    if (fragment.id.empty()) raise(Errc::invalid_input, "fragment id is empty");
    if (normalize_text(fragment.text).empty())
        raise(Errc::invalid_input, "fragment text is empty after normalization");
    if (fragment.veracity_label != "true" && fragment.veracity_label != "non-rumor")
        raise(Errc::invalid_input,
              "fragment " + fragment.id + " has veracity label '" + fragment.veracity_label +
                  "'; only true/non-rumor posts enter the pool");
    if (fragment.timestamp <= 0)
        raise(Errc::invalid_input, "fragment " + fragment.id + " has non-positive timestamp");
    if (fragment.cascade_size < 1)
        raise(Errc::invalid_input, "fragment " + fragment.id + " has cascade_size < 1");
}

Json to_json(const EvidenceFragment& f) {
    return Json{{"id", f.id},
                {"text", f.text},
                {"timestamp", f.timestamp},
                {"source_event", f.source_event},
                {"veracity_label", f.veracity_label},
                {"cascade_size", f.cascade_size}};
}

EvidenceFragment evidence_fragment_from_json(const Json& j) {
    EvidenceFragment f;
    f.id = j.at("id").get<std::string>();
    f.text = j.at("text").get<std::string>();
    f.timestamp = j.at("timestamp").get<std::int64_t>();
    f.source_event = j.value("source_event", "");
    f.veracity_label = j.at("veracity_label").get<std::string>();
    f.cascade_size = j.value("cascade_size", std::int64_t{1});
    validate(f);
    return f;
}

// ---------------------------------------------------------------------------
// TargetFabrication

void validate(const TargetFabrication& target) {
    if (target.id.empty()) raise(Errc::invalid_input, "target id is empty");
    if (target.claim_text.empty()) raise(Errc::invalid_input, "target claim text is empty");
    if (target.claim_text == target.real_counterpart)
        raise(Errc::invalid_input, "target " + target.id + " equals its real counterpart");
    if (target.historical_cascade < 1)
        raise(Errc::invalid_input, "target " + target.id + " has historical_cascade < 1");
}

Json to_json(const TargetFabrication& t) {
    return Json{{"id", t.id},
                {"claim_text", t.claim_text},
                {"real_counterpart", t.real_counterpart},
                {"source_event", t.source_event},
                {"historical_cascade", t.historical_cascade}};
}

TargetFabrication target_fabrication_from_json(const Json& j) {
    TargetFabrication t;
    t.id = j.at("id").get<std::string>();
    t.claim_text = j.at("claim_text").get<std::string>();
    t.real_counterpart = j.at("real_counterpart").get<std::string>();
    t.source_event = j.value("source_event", "");
    t.historical_cascade = j.at("historical_cascade").get<std::int64_t>();
    validate(t);
    return t;
}

// ---------------------------------------------------------------------------
// CausalGraphSpec

void validate(const CausalGraphSpec& graph) {
    std::set<std::string> nodes(graph.nodes.begin(), graph.nodes.end());
    auto check_edges = [&](const std::vector<std::pair<std::string, std::string>>& edges,
                           const char* which) {
        for (const auto& [from, to] : edges) {
            if (!nodes.count(from) || !nodes.count(to))
                raise(Errc::invalid_input,
                      std::string(which) + " edge (" + from + " -> " + to +
                          ") references a label outside nodes");
        }
    };
    check_edges(graph.real_edges, "real");
    check_edges(graph.false_edges, "false");
    std::set<std::pair<std::string, std::string>> real(graph.real_edges.begin(),
                                                       graph.real_edges.end());
    for (const auto& e : graph.false_edges) {
        if (real.count(e))
            raise(Errc::invalid_input,
                  "edge (" + e.first + " -> " + e.second + ") is both real and false");
    }
}

// ---------------------------------------------------------------------------
// NarrativeDraft

void validate(const NarrativeDraft& draft) {
    if (draft.round < 1) raise(Errc::invalid_input, "draft round must be >= 1");
    if (draft.director_score && !(*draft.director_score >= 0.0 && *draft.director_score <= 10.0))
        raise(Errc::invalid_input, "director score must lie in [0,10]");
}

Json to_json(const NarrativeDraft& d) {
    Json j{{"text", d.text}, {"round", d.round}};
    if (d.director_score) j["director_score"] = *d.director_score;
    if (d.lt_verified) j["lt_verified"] = *d.lt_verified;
    return j;
}

NarrativeDraft narrative_draft_from_json(const Json& j) {
    NarrativeDraft d;
    d.text = j.at("text").get<std::string>();
    d.round = j.at("round").get<int>();
    if (j.contains("director_score")) d.director_score = j.at("director_score").get<double>();
    if (j.contains("lt_verified")) d.lt_verified = j.at("lt_verified").get<bool>();
    validate(d);
    return d;
}

// ---------------------------------------------------------------------------
// MontageSequence

void validate(const MontageSequence& sequence) {
    if (sequence.fragments.empty()) raise(Errc::invalid_input, "sequence has no fragments");
    if (sequence.round < 1) raise(Errc::invalid_input, "sequence round must be >= 1");
    if (sequence.director_score &&
        !(*sequence.director_score >= 0.0 && *sequence.director_score <= 10.0))
        raise(Errc::invalid_input, "director score must lie in [0,10]");
    std::int64_t last = INT64_MIN;
    for (std::size_t i = 0; i < sequence.fragments.size(); ++i) {
        const auto& frag = sequence.fragments[i];
        if (frag.timestamp <= last)
            raise(Errc::invalid_input,
                  "sequence timestamps must be strictly increasing (fragment " +
                      std::to_string(i) + ")");
        last = frag.timestamp;
        if (frag.provenance.empty())
            raise(Errc::invalid_input,
                  "fragment " + std::to_string(i) + " carries no provenance reference");
    }
}

Json to_json(const MontageSequence& s) {
    Json fragments = Json::array();
    for (const auto& f : s.fragments)
        fragments.push_back(
            Json{{"text", f.text}, {"timestamp", f.timestamp}, {"provenance", f.provenance}});
    Json j{{"fragments", std::move(fragments)}, {"round", s.round}};
    if (s.director_score) j["director_score"] = *s.director_score;
    return j;
}

MontageSequence montage_sequence_from_json(const Json& j) {
    MontageSequence s;
    for (const auto& fj : j.at("fragments")) {
        SequencedPost f;
        f.text = fj.at("text").get<std::string>();
        f.timestamp = fj.at("timestamp").get<std::int64_t>();
        f.provenance = fj.at("provenance").get<std::vector<std::string>>();
        s.fragments.push_back(std::move(f));
    }
    s.round = j.at("round").get<int>();
    if (j.contains("director_score")) s.director_score = j.at("director_score").get<double>();
    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// GateDecision

const char* gate_kind_name(GateKind kind) {
    switch (kind) {
    case GateKind::accept: return "ACCEPT";
    case GateKind::reject: return "REJECT";
    case GateKind::revise: return "REVISE";
    }
    return "REVISE";
}

GateKind gate_kind_from_name(const std::string& name) {
    if (name == "ACCEPT") return GateKind::accept;
    if (name == "REJECT") return GateKind::reject;
    if (name == "REVISE") return GateKind::revise;
    raise(Errc::parse_error, "unknown gate kind '" + name + "'");
}

namespace {
double require_score_range(double score) {
    if (!(score >= 0.0 && score <= 10.0))
        raise(Errc::invalid_input, "gate score must lie in [0,10]");
    return score;
}
} // namespace

GateDecision GateDecision::accept(double score, double tau) {
    require_score_range(score);
    if (score < tau)
        raise(Errc::invalid_input, "cannot construct ACCEPT with score " + std::to_string(score) +
                                       " below tau " + std::to_string(tau));
    GateDecision d;
    d.kind = GateKind::accept;
    d.score = score;
    return d;
}

GateDecision GateDecision::reject(std::vector<std::size_t> lt_failures, double score) {
    require_score_range(score);
    if (lt_failures.empty())
        raise(Errc::invalid_input, "REJECT requires at least one offending fragment index");
    GateDecision d;
    d.kind = GateKind::reject;
    d.score = score;
    d.lt_failures = std::move(lt_failures);
    return d;
}

GateDecision GateDecision::revise(double score, std::string critique) {
    require_score_range(score);
    if (critique.empty()) raise(Errc::invalid_input, "REVISE requires a non-empty critique");
    GateDecision d;
    d.kind = GateKind::revise;
    d.score = score;
    d.critique = std::move(critique);
    return d;
}

Json to_json(const GateDecision& d) {
    return Json{{"kind", gate_kind_name(d.kind)},
                {"score", d.score},
                {"critique", d.critique},
                {"lt_failures", d.lt_failures}};
}

GateDecision gate_decision_from_json(const Json& j) {
    GateDecision d;
    d.kind = gate_kind_from_name(j.at("kind").get<std::string>());
    d.score = j.at("score").get<double>();
    d.critique = j.value("critique", "");
    d.lt_failures = j.value("lt_failures", std::vector<std::size_t>{});
    return d;
}

// ---------------------------------------------------------------------------
// VictimVerdict

const char* verdict_name(Verdict verdict) {
    switch (verdict) {
    case Verdict::adopt_fabrication: return "ADOPT_FABRICATION";
    case Verdict::adopt_truth: return "ADOPT_TRUTH";
    case Verdict::uncertain: return "UNCERTAIN";
    }
    return "UNCERTAIN";
}

Verdict verdict_from_name(const std::string& name) {
    if (name == "ADOPT_FABRICATION") return Verdict::adopt_fabrication;
    if (name == "ADOPT_TRUTH") return Verdict::adopt_truth;
    if (name == "UNCERTAIN") return Verdict::uncertain;
    raise(Errc::parse_error, "unknown verdict '" + name + "'");
}

void validate(const VictimVerdict& verdict) {
    require_unit_interval(verdict.confidence, "confidence");
    if (verdict.victim_index < 1) raise(Errc::invalid_input, "victim_index must be >= 1");
}

Json to_json(const VictimVerdict& v) {
    return Json{{"verdict", verdict_name(v.verdict)},
                {"confidence", v.confidence},
                {"rationale", v.rationale},
                {"victim_index", v.victim_index}};
}

VictimVerdict victim_verdict_from_json(const Json& j) {
    VictimVerdict v;
    v.verdict = verdict_from_name(j.at("verdict").get<std::string>());
    v.confidence = j.at("confidence").get<double>();
    v.rationale = j.value("rationale", "");
    v.victim_index = j.at("victim_index").get<int>();
    validate(v);
    return v;
}

} // namespace montage
