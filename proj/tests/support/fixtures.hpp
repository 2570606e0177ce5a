#pragma once

#include <atomic>
#include <chrono>
#include <mutex>
#include <vector>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "mylibrary/error.hpp"
#include "mylibrary/mail.hpp"
#include "mylibrary/store.hpp"

namespace testing {

/// Directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("mylibrary-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline mylib::Resource MakeResource(mylib::ResourceKind kind, std::string title,
                                    std::set<mylib::DisciplineId> disciplines = {}) {
    mylib::Resource r;
    r.kind = kind;
    r.title = std::move(title);
    r.url = "https://example.test/" + std::to_string(std::hash<std::string>{}(r.title));
    r.discipline_ids = std::move(disciplines);
    if (kind == mylib::ResourceKind::quick_search_engine)
        r.url_template = r.url + "?q={query}";
    return r;
}

inline mylib::Librarian MakeLibrarian(std::string name, std::string phone, std::string email,
                                      mylib::LibrarianRole role, std::set<mylib::DisciplineId> disciplines) {
    mylib::Librarian l;
    l.name = std::move(name);
    l.phone = std::move(phone);
    l.email = std::move(email);
    l.role = role;
    l.discipline_ids = std::move(disciplines);
    return l;
}

inline mylib::Timestamp At(const char *iso) { return mylib::parse_timestamp(iso); }

/// Settable clock shared with the code under test.
class ManualClock {
public:
    explicit ManualClock(mylib::Timestamp start) : now_(start.time_since_epoch().count()) {}

    mylib::Clock clock() {
        return [this] { return mylib::Timestamp(std::chrono::seconds(now_.load())); };
    }
    mylib::Timestamp now() const { return mylib::Timestamp(std::chrono::seconds(now_.load())); }
    void set(mylib::Timestamp t) { now_ = t.time_since_epoch().count(); }
    void advance(std::chrono::seconds d) { now_ += d.count(); }

private:
    std::atomic<long long> now_;
};

/// Keeps every message; fails the next `fail_next` sends.
class RecordingTransport : public mylib::MailTransport {
public:
    void send(const mylib::MailMessage &m) override {
        std::lock_guard lock(mu_);
        if (fail_next > 0) {
            --fail_next;
            throw mylib::Error(mylib::Errc::io_error, "transport down");
        }
        sent_.push_back(m);
    }

    std::vector<mylib::MailMessage> sent() const {
        std::lock_guard lock(mu_);
        return sent_;
    }

    std::atomic<int> fail_next{0};

private:
    mutable std::mutex mu_;
    std::vector<mylib::MailMessage> sent_;
};

} // namespace testing
