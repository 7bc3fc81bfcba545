/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "testkit.hpp"

#include <idfabric/cli.hpp>
#include <idfabric/snapshot.hpp>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using namespace idfabric;

namespace {

constexpr const char* kFaculty =
    R"({"person_id":"F1","full_name":"Al Kh","role":"faculty","sub_role":null,"department":"cs","event":null,"effective_date":"2026-01-01"})";

void write(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream f {p};
    f << text;
}

struct Outcome {
    int         code;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        write(dir / "config.json", R"({"data_key":"cli-test-key"})");
        write(dir / "empty.jsonl", "");
        write(dir / "feed.jsonl", std::string {kFaculty} + "\n");
    }

    Outcome run(std::vector<std::string> args)
    {
        std::vector<std::string> full {"--config", (dir / "config.json").string(), "--snapshot",
            (dir / "state.json").string(), "--audit-log", (dir / "audit.jsonl").string(), "--clock",
            "2026-03-01T12:00:00Z"};
        full.insert(full.end(), args.begin(), args.end());
        std::ostringstream out;
        std::ostringstream err;
        int                code = run_cli(full, out, err);
        return {code, out.str(), err.str()};
    }

    testkit::TempDir dir;
};

} // namespace

TEST_F(Cli, EmptyFeedChangesNothing)
{
    auto r = run({"feed", "apply", (dir / "empty.jsonl").string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "state.json"));
}

TEST_F(Cli, FeedThenShowThenEvent)
{
    ASSERT_EQ(run({"feed", "apply", (dir / "feed.jsonl").string()}).code, kExitOk);
    auto shown = run({"identity", "show", "F1"});
    EXPECT_EQ(shown.code, kExitOk) << shown.err;
    EXPECT_NE(shown.out.find("F1"), std::string::npos);
    EXPECT_EQ(run({"event", "apply", "F1", "leave_of_absence"}).code, kExitOk);
    EXPECT_EQ(run({"reconcile"}).code, kExitOk);
}

TEST_F(Cli, ExitCodes)
{
    EXPECT_EQ(run({}).code, kExitUsage);
    EXPECT_EQ(run({"no-such-command"}).code, kExitUsage);
    EXPECT_EQ(run({"event", "apply", "F1", "coronation"}).code, kExitUsage);
    EXPECT_EQ(run({"event", "apply", "ZZ", "graduation"}).code, kExitViolation);
    EXPECT_EQ(run({"fault", "unix_hosts", "sometimes"}).code, kExitUsage);
    EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(Cli, ScenarioRuns)
{
    auto r = run({"scenario", "run", "student-full-lifecycle"});
    EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
    EXPECT_EQ(run({"scenario", "run", "no-such-scenario"}).code, kExitUsage);
}

TEST_F(Cli, ComplianceReport)
{
    ASSERT_EQ(run({"feed", "apply", (dir / "feed.jsonl").string()}).code, kExitOk);
    auto r = run({"report", "compliance"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_EQ(r.out.rfind("0 findings", 0), 0u) << r.out;
    auto html = run({"report", "compliance", "--html"});
    EXPECT_NE(html.out.find("<table"), std::string::npos);
}

TEST_F(Cli, JsonOutput)
{
    auto r = run({"--json", "feed", "apply", (dir / "feed.jsonl").string()});
    auto doc = nlohmann::json::parse(r.out);
    EXPECT_TRUE(doc.at("ok").get<bool>());
    EXPECT_EQ(doc.at("exit_code").get<int>(), kExitOk);

    auto bad  = run({"--json", "event", "apply", "ZZ", "graduation"});
    auto fail = nlohmann::json::parse(bad.out);
    EXPECT_FALSE(fail.at("ok").get<bool>());
    EXPECT_EQ(fail.at("exit_code").get<int>(), kExitViolation);
}

TEST_F(Cli, AdminCheck)
{
    EXPECT_EQ(run({"admin", "check", "domain_admin", "manage_application_groups"}).code, kExitOk);
    EXPECT_EQ(run({"admin", "check", "domain_admin", "add_member"}).code, kExitPartial);
    EXPECT_EQ(run({"admin", "check", "app_admin:learning_platform", "add_member"}).code, kExitOk);
    EXPECT_EQ(run({"admin", "check", "app_admin:learning_platform", "add_member", "student_portal"}).code,
        kExitPartial);
    EXPECT_EQ(run({"admin", "check", "root", "add_member"}).code, kExitUsage);
}

TEST_F(Cli, StateIsWrittenWithTheConfiguredKey)
{
    ASSERT_EQ(run({"feed", "apply", (dir / "feed.jsonl").string()}).code, kExitOk);
    auto text = read_file(dir / "state.json").value();
    testkit::Deployment d;
    EXPECT_TRUE(load_snapshot(d.system, text, "cli-test-key").ok());
    EXPECT_FALSE(std::filesystem::exists(dir / "state.json.key"));
}

TEST_F(Cli, FixedClockAndKeyAreReproducible)
{
    std::vector<std::pair<std::string, std::string>> runs;
    for (int i = 0; i < 2; ++i) {
        std::filesystem::remove(dir / "state.json");
        std::filesystem::remove(dir / "audit.jsonl");
        run({"feed", "apply", (dir / "feed.jsonl").string()});
        run({"fault", "unix_hosts", "intermittent:2"});
        run({"event", "apply", "F1", "termination"});
        run({"retry", "drain"});
        runs.emplace_back(read_file(dir / "state.json").value(), read_file(dir / "audit.jsonl").value());
    }
    EXPECT_EQ(runs[0].first, runs[1].first);
    EXPECT_EQ(runs[0].second, runs[1].second);
}

TEST(CliConfig, ParsesKnownKeys)
{
    auto c = parse_config(
        R"({"snapshot_path":"s.json","audit_log_path":"a.jsonl","max_failed_attempts":3,
            "lockout_duration_seconds":60,"session_ttl_seconds":120,"max_attempts":4,
            "deletion_grace_days":7,"seed":9,"data_key":"k"})");
    ASSERT_TRUE(c.ok());
    EXPECT_EQ(c->snapshot_path, "s.json");
    EXPECT_EQ(c->policy.max_failed_attempts, 3u);
    EXPECT_EQ(c->policy.lockout_duration, std::chrono::seconds {60});
    EXPECT_EQ(c->policy.session_ttl, std::chrono::seconds {120});
    EXPECT_EQ(c->engine.max_attempts, 4u);
    EXPECT_EQ(c->engine.deletion_grace_days, 7u);
    EXPECT_EQ(c->seed, 9u);
    EXPECT_EQ(c->data_key, "k");
}

TEST(CliConfig, RejectsBadInput)
{
    EXPECT_EQ(parse_config("not json").code(), Errc::ParseError);
    EXPECT_EQ(parse_config("[]").code(), Errc::ParseError);
    EXPECT_EQ(parse_config(R"({"colour":"blue"})").code(), Errc::InvalidArgument);
    EXPECT_EQ(parse_config(R"({"max_attempts":0})").code(), Errc::InvalidArgument);
    EXPECT_EQ(parse_config(R"({"session_ttl_seconds":-5})").code(), Errc::InvalidArgument);
    EXPECT_EQ(parse_config(R"({"snapshot_path":"x","audit_log_path":"x"})").code(), Errc::InvalidArgument);
    EXPECT_EQ(parse_config(R"({"data_key":""})").code(), Errc::InvalidArgument);
    EXPECT_EQ(parse_config(R"({"seed":-1})").code(), Errc::InvalidArgument);
}

TEST(CliConfig, ExitCodeMapping)
{
    EXPECT_EQ(exit_code_for(Errc::ParseError), kExitUsage);
    EXPECT_EQ(exit_code_for(Errc::ResourceDown), kExitPartial);
    EXPECT_EQ(exit_code_for(Errc::UnknownIdentity), kExitViolation);
}
