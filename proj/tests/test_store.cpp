#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "grow/domain_json.hpp"
#include "grow/error.hpp"
#include "grow/pii.hpp"
#include "grow/store.hpp"
#include "support/test_support.hpp"

using namespace grow;
using fx::at;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const GrowError& e) {
    return e.code();
  }
  return ErrorCode::ConfigError;
}

std::vector<ToolCallPatch> patches(Phase phase, const json& args) { return split_tool_payload(phase, args); }

const Timestamp kNow = at("2026-03-02T18:00:00Z");

// A user taken through the introduction, values check-in and one goal.
ProfileStore& seeded(ProfileStore& store, const std::string& id = "u1") {
  store.register_user(id);
  store.save_profile(id, patches(Phase::Introduction, fx::intro_payload()), kNow);
  store.save_profile(id, patches(Phase::ValuesCheckIn, {{"bevs", fx::bevs_done_payload()}}), kNow);
  store.save_profile(id, patches(Phase::GoalSetting, {{"mental_health_goals", json::array({fx::goal_create()})}}),
                     kNow);
  return store;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("grow-test-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST(Store, RegisterIsIdempotentAndUnknownUsersFail) {
  ProfileStore store;
  EXPECT_EQ(store.register_user("u1").user_id, "u1");
  EXPECT_EQ(store.register_user("u1").user_id, "u1");
  EXPECT_EQ(store.user_ids(), std::vector<std::string>{"u1"});
  EXPECT_EQ(code_of([&] { store.load_profile("nobody"); }), ErrorCode::UserNotFound);
  EXPECT_EQ(code_of([&] { store.register_user(""); }), ErrorCode::InvalidArgument);
}

TEST(Store, IntroductionSaveMergesAndDropsTheName) {
  ProfileStore store;
  store.register_user("u1");
  const auto r = store.save_profile("u1", patches(Phase::Introduction, fx::intro_payload("Rowan")), kNow);
  EXPECT_TRUE(r.changed);
  EXPECT_EQ(r.display_name, "Rowan");
  const auto p = store.load_profile("u1");
  EXPECT_TRUE(p.intro_complete);
  EXPECT_TRUE(is_intro_complete(p));
  EXPECT_EQ(store.dump().dump().find("Rowan"), std::string::npos);
}

TEST(Store, GoalsDuringIntroductionAreOutOfPhase) {
  ProfileStore store;
  store.register_user("u1");
  ToolCallPatch p{Phase::Introduction, Section::MentalHealthGoals, json::array({fx::goal_create()})};
  EXPECT_EQ(code_of([&] { store.save_profile("u1", p, kNow); }), ErrorCode::WriteOutOfPhase);
  EXPECT_TRUE(store.write_log("u1").empty());
}

TEST(Store, SecondIntroductionIsDuplicate) {
  ProfileStore store;
  store.register_user("u1");
  store.save_profile("u1", patches(Phase::Introduction, fx::intro_payload()), kNow);
  const json before = store.dump();
  EXPECT_EQ(code_of([&] { store.save_profile("u1", patches(Phase::Introduction, fx::intro_payload()), kNow); }),
            ErrorCode::DuplicateWrite);
  EXPECT_EQ(store.dump(), before);
}

TEST(Store, BevsSavedOnce) {
  ProfileStore store;
  seeded(store);
  EXPECT_EQ(code_of([&] {
              store.save_profile("u1", patches(Phase::ValuesCheckIn, {{"bevs", fx::bevs_done_payload()}}), kNow);
            }),
            ErrorCode::DuplicateWrite);
}

TEST(Store, GoalIdsAreAssignedInOrder) {
  ProfileStore store;
  seeded(store);
  const auto r = store.save_profile(
      "u1", patches(Phase::GoalSetting, {{"mental_health_goals", json::array({fx::goal_create("Read"), fx::goal_create("Run")})}}),
      kNow);
  EXPECT_EQ(r.created_goals, (std::vector<std::string>{"goal-2", "goal-3"}));
  EXPECT_EQ(store.load_profile("u1").mental_health_goals.size(), 3u);
}

TEST(Store, ExistingClientGoalIdIsDuplicate) {
  ProfileStore store;
  seeded(store);
  json g = fx::goal_create();
  g["goal_id"] = "goal-1";
  EXPECT_EQ(code_of([&] {
              store.save_profile("u1", patches(Phase::GoalSetting, {{"mental_health_goals", json::array({g})}}), kNow);
            }),
            ErrorCode::DuplicateWrite);
}

TEST(Store, UpdateUnknownGoal) {
  ProfileStore store;
  seeded(store);
  const json before = store.dump();
  EXPECT_EQ(code_of([&] {
              store.save_profile(
                  "u1", patches(Phase::ActiveCoaching, {{"mental_health_goals", json::array({{{"goal_id", "goal-9"}, {"completed_units", 1}}})}}),
                  kNow);
            }),
            ErrorCode::UnknownGoal);
  EXPECT_EQ(store.dump(), before);
}

TEST(Store, UpdateIsAllOrNothing) {
  ProfileStore store;
  seeded(store);
  const json before = store.dump();
  const json args = {{"mental_health_goals",
                      json::array({{{"goal_id", "goal-1"}, {"completed_units", 3}}, {{"goal_id", "goal-7"}, {"completed_units", 1}}})}};
  EXPECT_EQ(code_of([&] { store.save_profile("u1", patches(Phase::ActiveCoaching, args), kNow); }), ErrorCode::UnknownGoal);
  EXPECT_EQ(store.dump(), before);
}

TEST(Store, CheckInUpdatesProgress) {
  ProfileStore store;
  seeded(store);
  const auto r = store.save_profile(
      "u1", patches(Phase::ActiveCoaching, {{"mental_health_goals", json::array({{{"goal_id", "goal-1"}, {"completed_units", 3}}})}}),
      at("2026-03-05T19:00:00Z"));
  EXPECT_EQ(r.updated_goals, std::vector<std::string>{"goal-1"});
  EXPECT_EQ(store.load_profile("u1").mental_health_goals[0].progress, 43);
}

TEST(Store, NoOpUpdateIsAcceptedWithoutLogEntry) {
  ProfileStore store;
  seeded(store);
  const auto args = json{{"mental_health_goals", json::array({{{"goal_id", "goal-1"}, {"completed_units", 0}}})}};
  const auto log_size = store.write_log("u1").size();
  const auto r = store.save_profile("u1", patches(Phase::ActiveCoaching, args), kNow);
  EXPECT_FALSE(r.changed);
  EXPECT_EQ(store.write_log("u1").size(), log_size);
}

TEST(Store, MixedPhaseTagsRejected) {
  ProfileStore store;
  store.register_user("u1");
  std::vector<ToolCallPatch> mixed = patches(Phase::Introduction, fx::intro_payload());
  mixed[0].phase_tag = Phase::GoalSetting;
  EXPECT_EQ(code_of([&] { store.save_profile("u1", mixed, kNow); }), ErrorCode::SchemaViolation);
}

TEST(Store, FreeTextIsScrubbed) {
  ProfileStore store;
  seeded(store);
  json g = fx::goal_create("Text Rowan's study group at 555-123-4567 or rowan@example.edu");
  store.save_profile("u1", patches(Phase::GoalSetting, {{"mental_health_goals", json::array({g})}}), kNow, "Rowan");
  const Goal goal = store.load_profile("u1").mental_health_goals.back();
  EXPECT_EQ(goal.description, "Text [NAME]'s study group at [REDACTED_PHONE] or [REDACTED_EMAIL]");
  EXPECT_TRUE(find_pii_in_dump(store.dump()).empty());
}

TEST(Store, ReplayReproducesProfile) {
  ProfileStore store;
  seeded(store);
  store.save_profile(
      "u1", patches(Phase::ActiveCoaching, {{"mental_health_goals", json::array({{{"goal_id", "goal-1"}, {"completed_units", 3}}})}}),
      at("2026-03-05T19:00:00Z"));
  store.set_communication_style("u1", {Tone::Casual, MessageLength::Short, EmotionalStyle::Neutral, ThinkingStyle::DataDriven},
                                at("2026-03-06T19:00:00Z"));
  EXPECT_EQ(store.replay_write_log("u1"), store.load_profile("u1"));
}

TEST(Store, TranscriptScrubRescrubAndPurge) {
  StoreOptions options;
  options.transcript_retention = std::chrono::days{90};
  ProfileStore store(options);
  store.register_user("u1");
  store.append_transcript("u1", {Speaker::User, "email me at a@b.com", at("2026-01-01T10:00:00Z")});
  store.append_transcript("u1", {Speaker::User, "I'm Rowan by the way", at("2026-03-01T10:00:00Z")});
  auto t = store.transcript("u1");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].turn.text, "email me at [REDACTED_EMAIL]");
  EXPECT_EQ(t[1].turn.text, "I'm Rowan by the way");
  store.rescrub_transcript("u1", "Rowan");
  EXPECT_EQ(store.transcript("u1")[1].turn.text, "I'm [NAME] by the way");
  EXPECT_EQ(store.purge_expired_transcripts(at("2026-04-05T00:00:00Z")), 1u);
  EXPECT_EQ(store.transcript("u1").size(), 1u);
  EXPECT_EQ(code_of([&] { store.append_transcript("u1", {Speaker::User, "", kNow}); }), ErrorCode::InvalidArgument);
}

TEST(Store, PlainTextStoredVerbatim) {
  ProfileStore store;
  store.register_user("u1");
  store.append_transcript("u1", {Speaker::User, "Finals week is rough.", kNow});
  EXPECT_EQ(store.transcript("u1")[0].turn.text, "Finals week is rough.");
}

TEST(Store, DeleteRemovesEverything) {
  ProfileStore store;
  seeded(store);
  CheckinEvent e;
  e.goal_id = "goal-1";
  e.start = kNow;
  store.replace_goal_events("u1", "goal-1", {{e, "evt-1", "k"}});
  const auto removed = store.delete_user_data("u1");
  ASSERT_EQ(removed.size(), 1u);
  EXPECT_EQ(removed[0].provider_event_id, "evt-1");
  EXPECT_EQ(code_of([&] { store.load_profile("u1"); }), ErrorCode::UserNotFound);
  EXPECT_EQ(code_of([&] { store.transcript("u1"); }), ErrorCode::UserNotFound);
  EXPECT_EQ(code_of([&] { store.settings("u1"); }), ErrorCode::UserNotFound);
  EXPECT_EQ(code_of([&] { store.delete_user_data("u1"); }), ErrorCode::UserNotFound);
  const auto fresh = store.register_user("u1");
  EXPECT_FALSE(fresh.intro_complete);
  EXPECT_TRUE(fresh.mental_health_goals.empty());
}

TEST(Store, SnapshotWriteThroughAndReload) {
  TempDir dir;
  StoreOptions options;
  options.snapshot_path = dir.path / "store.json";
  {
    ProfileStore store(options);
    seeded(store);
    store.append_transcript("u1", {Speaker::User, "hello", kNow});
    UserSettings s;
    s.reminders.frequency = ReminderFrequency::Daily;
    s.persona.name = "Sage";
    s.utc_offset = std::chrono::minutes{-300};
    store.put_settings("u1", s);
    store.put_themes("u1", {{"exam stress"}, fx::day("2026-03-02")});
  }
  ProfileStore reloaded(options);
  EXPECT_EQ(reloaded.load_profile("u1").mental_health_goals.size(), 1u);
  EXPECT_EQ(reloaded.transcript("u1").size(), 1u);
  EXPECT_EQ(reloaded.settings("u1").persona.name, "Sage");
  EXPECT_EQ(reloaded.settings("u1").utc_offset, std::chrono::minutes{-300});
  EXPECT_EQ(reloaded.themes("u1").themes, std::vector<std::string>{"exam stress"});
  EXPECT_EQ(reloaded.replay_write_log("u1"), reloaded.load_profile("u1"));
}

TEST(Store, CorruptSnapshotIsStorageUnavailable) {
  TempDir dir;
  StoreOptions options;
  options.snapshot_path = dir.path / "store.json";
  std::ofstream(*options.snapshot_path) << "{not json";
  EXPECT_EQ(code_of([&] { ProfileStore store(options); }), ErrorCode::StorageUnavailable);
}

TEST(Store, FailedWriteRollsBack) {
  TempDir dir;
  StoreOptions options;
  options.snapshot_path = dir.path / "missing-dir" / "store.json";
  ProfileStore store(options);
  EXPECT_EQ(code_of([&] { store.register_user("u1"); }), ErrorCode::StorageUnavailable);
  EXPECT_FALSE(store.has_user("u1"));
}

TEST(Store, ReminderBookkeeping) {
  ProfileStore store;
  store.register_user("u1");
  auto s = store.settings("u1");
  EXPECT_EQ(s.reminders.frequency, ReminderFrequency::Weekly);
  EXPECT_EQ(s.window.window, TimeWindow::Evening);
  s.reminders.enabled = true;
  store.put_settings("u1", s);
  store.mark_reminder_sent("u1", kNow);
  EXPECT_EQ(store.settings("u1").reminders.last_sent, kNow);
  ASSERT_EQ(store.reminder_settings().size(), 1u);
}

TEST(Store, PiiAuditSkipsTimestampsAndFindsLeaks) {
  json dump = {{"users", {{"u1", {{"transcript", json::array({{{"text", "call 555 123 4567"}, {"timestamp", "2026-03-02T18:00:00Z"}}})}}}}}};
  const auto hits = find_pii_in_dump(dump);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0], "call 555 123 4567");
}
