#include <doctest.h>

#include <atomic>
#include <memory>
#include <thread>

#include "montage/llm/gateway.hpp"
#include "montage/llm/scripted.hpp"
#include "montage/util/errors.hpp"

using namespace montage;

namespace {

ChatRequest req(RoleTag role, std::string user = "hello") {
    ChatRequest r;
    r.role_tag = role;
    r.system_prompt = "sys";
    r.user_prompt = std::move(user);
    r.model_id = "m";
    return r;
}

ScriptedBackendSpec spec_of(std::initializer_list<ScriptedEntry> entries) {
    ScriptedBackendSpec s;
    s.entries = entries;
    return s;
}

// Flips between failure kinds a fixed number of times before succeeding.
class FlakyBackend : public Backend {
public:
    FlakyBackend(int transient_failures) : remaining_(transient_failures) {}
    BackendReply complete(const ChatRequest&) override {
        if (remaining_-- > 0) return BackendReply::transient("simulated 429");
        return BackendReply::success("ok");
    }
    std::string name() const override { return "flaky"; }

private:
    std::atomic<int> remaining_;
};

} // namespace

TEST_CASE("scripted backend replays entries per role in order") {
    auto spec = spec_of({
        {RoleTag::director, "SCORE: 8.0\nVERDICT: ACCEPT", "", 1},
        {RoleTag::director, "SCORE: 5.0\nVERDICT: REVISE\nCRITIQUE: softer", "", 1},
        {RoleTag::writer, "a draft", "", 1},
    });
    ScriptedBackend backend(spec);

    CHECK(backend.complete(req(RoleTag::director)).text == "SCORE: 8.0\nVERDICT: ACCEPT");
    CHECK(backend.complete(req(RoleTag::writer)).text == "a draft");
    CHECK(backend.complete(req(RoleTag::director)).text ==
          "SCORE: 5.0\nVERDICT: REVISE\nCRITIQUE: softer");
    CHECK(backend.calls_for(RoleTag::director) == 2);
}

TEST_CASE("scripted backend match and uses constraints") {
    auto spec = spec_of({
        {RoleTag::victim, "VERDICT: TRUE", "(12 posts)", -1},
        {RoleTag::victim, "VERDICT: FALSE", "", -1},
    });
    ScriptedBackend backend(spec);
    CHECK(backend.complete(req(RoleTag::victim, "TIMELINE (12 posts): ...")).text ==
          "VERDICT: TRUE");
    CHECK(backend.complete(req(RoleTag::victim, "TIMELINE (3 posts): ...")).text ==
          "VERDICT: FALSE");
    CHECK(backend.complete(req(RoleTag::victim, "TIMELINE (12 posts): ...")).text ==
          "VERDICT: TRUE");
}

TEST_CASE("scripted backend exhaustion raises its own category") {
    auto spec = spec_of({{RoleTag::writer, "only one", "", 1}});
    ScriptedBackend backend(spec);
    backend.complete(req(RoleTag::writer));
    try {
        backend.complete(req(RoleTag::writer));
        FAIL("expected script_exhausted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::script_exhausted);
    }
}

TEST_CASE("scripted spec JSON round trip") {
    nlohmann::json j{
        {"schema", "scripted/1"},
        {"entries",
         {{{"role", "writer"}, {"text", "draft"}},
          {{"role", "victim"}, {"text", "VERDICT: TRUE"}, {"match", "(12 posts)"}, {"uses", -1}}}},
    };
    auto spec = ScriptedBackendSpec::from_json(j);
    REQUIRE(spec.entries.size() == 2);
    CHECK(spec.entries[0].uses == 1);
    CHECK(spec.entries[1].match == "(12 posts)");
    CHECK(spec.entries[1].uses == -1);
    auto back = ScriptedBackendSpec::from_json(spec.to_json());
    CHECK(back.entries.size() == 2);
    CHECK(back.entries[1].text == "VERDICT: TRUE");

    CHECK_THROWS_AS(ScriptedBackendSpec::from_json(nlohmann::json{{"entries", 3}}), Error);
    CHECK_THROWS_AS(ScriptedBackendSpec::from_json(nlohmann::json{
                        {"entries", {{{"role", "chef"}, {"text", "x"}}}}}),
                    Error);
}

TEST_CASE("gateway retries transient failures with nondecreasing backoff") {
    auto backend = std::make_shared<FlakyBackend>(2);
    Gateway gw(backend, RetryPolicy{3, 100, 2.0});
    std::vector<std::int64_t> delays;
    gw.set_sleep_fn([&](std::chrono::milliseconds d) { delays.push_back(d.count()); });

    auto resp = gw.complete(req(RoleTag::writer));
    CHECK(resp.text == "ok");
    CHECK(resp.attempt == 3);
    REQUIRE(delays.size() == 2);
    CHECK(delays[0] == 100);
    CHECK(delays[1] == 200);
    CHECK(delays[1] >= delays[0]);
}

TEST_CASE("gateway surfaces call failure with attempt history") {
    auto backend = std::make_shared<FlakyBackend>(10);
    Gateway gw(backend, RetryPolicy{2, 1, 2.0});
    gw.set_sleep_fn([](std::chrono::milliseconds) {});
    try {
        gw.complete(req(RoleTag::judge));
        FAIL("expected call_failed");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::call_failed);
        CHECK(std::string(e.what()).find("attempt 3") != std::string::npos);
    }
    REQUIRE(gw.call_count() == 1);
    CHECK(gw.transcript()[0].failed);
    CHECK(gw.transcript()[0].attempt == 3);
}

TEST_CASE("retry policy delays cap and never decrease") {
    RetryPolicy p{8, 1000, 2.0};
    std::int64_t prev = 0;
    for (int a = 1; a <= 12; ++a) {
        auto d = p.delay_for_attempt(a);
        CHECK(d >= prev);
        CHECK(d <= 300000);
        prev = d;
    }
}

TEST_CASE("gateway transcript records every call with ids in order") {
    auto spec = spec_of({{RoleTag::writer, "w1", "", -1}, {RoleTag::victim, "v1", "", -1}});
    Gateway gw(std::make_shared<ScriptedBackend>(spec));

    CallContext ctx;
    ctx.trial_id = "ev/t1";
    gw.complete(req(RoleTag::writer), ctx);
    gw.complete(req(RoleTag::victim), ctx);
    gw.complete(req(RoleTag::writer), ctx);

    auto log = gw.transcript();
    REQUIRE(log.size() == 3);
    CHECK(log[0].call_id == 1);
    CHECK(log[2].call_id == 3);
    CHECK(log[0].trial_id == "ev/t1");
    CHECK(log[1].response_text == "v1");
    CHECK(gw.calls_tagged(RoleTag::writer) == 2);
    CHECK(gw.calls_tagged(RoleTag::victim) == 1);
    CHECK(!log[0].request_hash.empty());
    CHECK(log[0].request_hash.size() == 16);
    CHECK(log[0].request_hash == log[2].request_hash); // identical request bits
    CHECK(log[0].request_hash != log[1].request_hash);
}

TEST_CASE("gateway records failed scripted call before rethrowing") {
    auto spec = spec_of({{RoleTag::writer, "w1", "", 1}});
    Gateway gw(std::make_shared<ScriptedBackend>(spec));
    gw.complete(req(RoleTag::writer));
    CHECK_THROWS_AS(gw.complete(req(RoleTag::writer)), Error);
    REQUIRE(gw.call_count() == 2);
    CHECK(gw.transcript()[1].failed);
    CHECK(gw.transcript()[1].error.find("script-exhausted") != std::string::npos);
}

TEST_CASE("gateway concurrency cap admits at most max_concurrency in flight") {
    class GaugeBackend : public Backend {
    public:
        BackendReply complete(const ChatRequest&) override {
            int now = ++in_flight_;
            int seen = peak_.load();
            while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            --in_flight_;
            return BackendReply::success("ok");
        }
        std::string name() const override { return "gauge"; }
        std::atomic<int> in_flight_{0};
        std::atomic<int> peak_{0};
    };

    auto backend = std::make_shared<GaugeBackend>();
    Gateway gw(backend, RetryPolicy{}, 2);
    std::vector<std::thread> workers;
    for (int i = 0; i < 8; ++i) {
        workers.emplace_back([&gw] { gw.complete(req(RoleTag::victim)); });
    }
    for (auto& w : workers) w.join();
    CHECK(backend->peak_.load() <= 2);
    CHECK(gw.call_count() == 8);
}

TEST_CASE("transcript sink sees entries as they land") {
    auto spec = spec_of({{RoleTag::writer, "w", "", -1}});
    Gateway gw(std::make_shared<ScriptedBackend>(spec));
    std::vector<std::int64_t> ids;
    gw.set_transcript_sink([&](const TranscriptEntry& e) { ids.push_back(e.call_id); });
    gw.complete(req(RoleTag::writer));
    gw.complete(req(RoleTag::writer));
    CHECK(ids == std::vector<std::int64_t>{1, 2});
}
