#pragma once

// Calendar and email are reached only through these narrow interfaces. Live
// adapters are deployment plug-ins; the in-memory ones back tests and demos.

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "grow/scheduler.hpp"

namespace grow {

class CalendarProvider {
 public:
  virtual ~CalendarProvider() = default;
  // Completes the provider handshake for |user_id|. Throws InvalidArgument on
  // a rejected authorization code.
  virtual void connect(const std::string& user_id, const std::string& authorization_code) = 0;
  // Availability only. Implementations must not return titles or attendees.
  virtual std::vector<BusyInterval> free_busy(const std::string& user_id, Timestamp from, Timestamp to) = 0;
  // Returns the provider's id for the new event.
  virtual std::string create_event(const std::string& user_id, const CheckinEvent& event) = 0;
  virtual void delete_event(const std::string& user_id, const std::string& event_id) = 0;
};

class EmailProvider {
 public:
  virtual ~EmailProvider() = default;
  virtual void send(const std::string& user_id, const std::string& subject, const std::string& body) = 0;
};

class InMemoryCalendar : public CalendarProvider {
 public:
  void connect(const std::string& user_id, const std::string& authorization_code) override;
  std::vector<BusyInterval> free_busy(const std::string& user_id, Timestamp from, Timestamp to) override;
  std::string create_event(const std::string& user_id, const CheckinEvent& event) override;
  void delete_event(const std::string& user_id, const std::string& event_id) override;

  void add_busy(const std::string& user_id, BusyInterval interval);
  bool is_connected(const std::string& user_id) const;
  std::map<std::string, CheckinEvent> events(const std::string& user_id) const;

 private:
  struct Account {
    bool connected = false;
    std::vector<BusyInterval> busy;
    std::map<std::string, CheckinEvent> events;
  };
  mutable std::mutex mutex_;
  std::map<std::string, Account> accounts_;
  std::size_t next_id_ = 1;
};

struct SentEmail {
  std::string user_id;
  std::string subject;
  std::string body;
};

// Keeps every message; also logs the subject line.
class RecordingEmail : public EmailProvider {
 public:
  void send(const std::string& user_id, const std::string& subject, const std::string& body) override;
  std::vector<SentEmail> sent() const;

 private:
  mutable std::mutex mutex_;
  std::vector<SentEmail> sent_;
};

}  // namespace grow
