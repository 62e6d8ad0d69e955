#include "grow/providers.hpp"

#include <spdlog/spdlog.h>

#include "grow/error.hpp"

namespace grow {

void InMemoryCalendar::connect(const std::string& user_id, const std::string& authorization_code) {
  if (authorization_code.empty()) throw GrowError(ErrorCode::InvalidArgument, "authorization code is empty");
  std::lock_guard lock(mutex_);
  accounts_[user_id].connected = true;
}

std::vector<BusyInterval> InMemoryCalendar::free_busy(const std::string& user_id, Timestamp from, Timestamp to) {
  std::lock_guard lock(mutex_);
  std::vector<BusyInterval> out;
  auto it = accounts_.find(user_id);
  if (it == accounts_.end()) return out;
  for (const auto& b : it->second.busy) {
    if (b.start < to && from < b.end) out.push_back(b);
  }
  return out;
}

std::string InMemoryCalendar::create_event(const std::string& user_id, const CheckinEvent& event) {
  std::lock_guard lock(mutex_);
  std::string id = "evt-" + std::to_string(next_id_++);
  accounts_[user_id].events.emplace(id, event);
  return id;
}

void InMemoryCalendar::delete_event(const std::string& user_id, const std::string& event_id) {
  std::lock_guard lock(mutex_);
  auto it = accounts_.find(user_id);
  if (it != accounts_.end()) it->second.events.erase(event_id);
}

void InMemoryCalendar::add_busy(const std::string& user_id, BusyInterval interval) {
  if (!(interval.start < interval.end)) throw GrowError(ErrorCode::InvalidArgument, "busy interval is empty");
  std::lock_guard lock(mutex_);
  accounts_[user_id].busy.push_back(interval);
}

bool InMemoryCalendar::is_connected(const std::string& user_id) const {
  std::lock_guard lock(mutex_);
  auto it = accounts_.find(user_id);
  return it != accounts_.end() && it->second.connected;
}

std::map<std::string, CheckinEvent> InMemoryCalendar::events(const std::string& user_id) const {
  std::lock_guard lock(mutex_);
  auto it = accounts_.find(user_id);
  return it == accounts_.end() ? std::map<std::string, CheckinEvent>{} : it->second.events;
}

void RecordingEmail::send(const std::string& user_id, const std::string& subject, const std::string& body) {
  spdlog::info("email to {}: {}", user_id, subject);
  std::lock_guard lock(mutex_);
  sent_.push_back({user_id, subject, body});
}

std::vector<SentEmail> RecordingEmail::sent() const {
  std::lock_guard lock(mutex_);
  return sent_;
}

}  // namespace grow
