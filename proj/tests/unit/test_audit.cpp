/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "testkit.hpp"

#include <idfabric/audit.hpp>

#include <gtest/gtest.h>

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <fstream>
#include <random>
#include <thread>

using namespace idfabric;

namespace {

ManualClock fixed_clock()
{
    return ManualClock {testkit::noon(testkit::kStart)};
}

} // namespace

TEST(Audit, SequencesStartAtOneWithoutGaps)
{
    auto     clock = fixed_clock();
    AuditLog log {clock};
    for (int i = 0; i < 5; ++i) {
        auto e = log.record("ops", AuditCategory::Workflow, "step", "P1", AuditOutcome::Success);
        ASSERT_TRUE(e.ok());
        EXPECT_EQ(e->sequence, static_cast<std::uint64_t>(i + 1));
        EXPECT_EQ(e->timestamp, clock.now());
    }
    EXPECT_EQ(log.last_sequence(), 5u);
    EXPECT_TRUE(testkit::gap_free(log));
}

TEST(Audit, JsonLineRoundTrip)
{
    AuditEvent e {42, testkit::noon(testkit::kStart), "ada", AuditCategory::AuthAttempt, "authn.password", "P\"1",
        AuditOutcome::Denied, {{"reason", "bad_credentials"}, {"note", "line\nbreak"}}};
    auto line = to_json_line(e);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    auto back = parse_audit_line(line);
    ASSERT_TRUE(back.ok()) << back.error().describe();
    EXPECT_EQ(*back, e);
    EXPECT_EQ(parse_audit_line("{}").code(), Errc::ParseError);
    EXPECT_EQ(parse_audit_line("nope").code(), Errc::ParseError);
}

TEST(Audit, UnavailableLogRefusesWithoutConsumingASequence)
{
    auto     clock = fixed_clock();
    AuditLog log {clock};
    (void)log.record("ops", AuditCategory::Workflow, "a", "", AuditOutcome::Success);
    log.set_available(false);
    EXPECT_EQ(log.ensure_writable().code(), Errc::LogUnavailable);
    EXPECT_EQ(log.record("ops", AuditCategory::Workflow, "b", "", AuditOutcome::Success).code(),
        Errc::LogUnavailable);
    log.set_available(true);
    EXPECT_EQ(log.record("ops", AuditCategory::Workflow, "c", "", AuditOutcome::Success)->sequence, 2u);
}

TEST(Audit, FileBackedLogPersistsAndResumes)
{
    testkit::TempDir dir;
    auto             path  = dir / "audit.jsonl";
    auto             clock = fixed_clock();
    {
        AuditLog log {clock, path};
        (void)log.record("ops", AuditCategory::ResourceMutation, "create_account", "P1", AuditOutcome::Success,
            {{"resource", "unix_hosts"}});
        (void)log.record("ops", AuditCategory::Workflow, "feed", "", AuditOutcome::Partial);
    }
    struct stat st {};
    ASSERT_EQ(::stat(path.c_str(), &st), 0);
    EXPECT_EQ(st.st_mode & 0777, 0600u);

    AuditLog reopened {clock, path};
    EXPECT_EQ(reopened.size(), 2u);
    EXPECT_EQ(reopened.record("ops", AuditCategory::Workflow, "x", "", AuditOutcome::Success)->sequence, 3u);
    auto on_disk = AuditLog::read_file(path).value();
    ASSERT_EQ(on_disk.size(), 3u);
    EXPECT_EQ(on_disk, reopened.events());
}

TEST(Audit, ForeignLockMakesTheLogUnavailable)
{
    testkit::TempDir dir;
    auto             path  = dir / "audit.jsonl";
    auto             clock = fixed_clock();
    AuditLog         log {clock, path};
    int              fd = ::open(path.c_str(), O_RDONLY);
    ASSERT_GE(fd, 0);
    ASSERT_EQ(::flock(fd, LOCK_EX), 0);
    EXPECT_EQ(log.ensure_writable().code(), Errc::LogUnavailable);
    EXPECT_EQ(log.record("ops", AuditCategory::Workflow, "a", "", AuditOutcome::Success).code(),
        Errc::LogUnavailable);
    ::flock(fd, LOCK_UN);
    ::close(fd);
    EXPECT_EQ(log.record("ops", AuditCategory::Workflow, "a", "", AuditOutcome::Success)->sequence, 1u);
    EXPECT_EQ(AuditLog::read_file(path)->size(), 1u);
}

TEST(Audit, CorruptFileIsRejected)
{
    testkit::TempDir dir;
    auto             path = dir / "audit.jsonl";
    {
        std::ofstream out {path};
        out << "{\"not\":\"an event\"}\n";
    }
    auto clock = fixed_clock();
    EXPECT_EQ(AuditLog::read_file(path).code(), Errc::ParseError);
    EXPECT_THROW((AuditLog {clock, path}), ErrorException);
    EXPECT_EQ(AuditLog::read_file(dir / "missing").code(), Errc::IoError);
}

TEST(Audit, ConcurrentWritersStayGapFree)
{
    testkit::TempDir dir;
    auto             clock = fixed_clock();
    AuditLog         log {clock, dir / "audit.jsonl"};
    std::vector<std::thread> threads;
    for (int t = 0; t < 6; ++t) {
        threads.emplace_back([&log, t] {
            for (int i = 0; i < 50; ++i) {
                (void)log.record("w" + std::to_string(t), AuditCategory::Workflow, "tick", "", AuditOutcome::Success);
            }
        });
    }
    for (auto& th : threads) {
        th.join();
    }
    EXPECT_EQ(log.size(), 300u);
    EXPECT_TRUE(testkit::gap_free(log));
    EXPECT_EQ(AuditLog::read_file(dir / "audit.jsonl").value(), log.events());
}

TEST(Audit, WireNames)
{
    EXPECT_EQ(to_string(AuditCategory::ResourceMutation), "resource_mutation");
    EXPECT_EQ(to_string(AuditOutcome::Partial), "partial");
}
