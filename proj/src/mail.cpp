#include "mylibrary/mail.hpp"

#include <cstring>
#include <fstream>
#include <ostream>
#include <vector>

#include <curl/curl.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "mylibrary/error.hpp"

namespace mylib {

namespace {

std::string Crlf(std::string_view text) {
    std::string out;
    out.reserve(text.size() + text.size() / 16);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r')
            continue;
        if (text[i] == '\n')
            out += "\r\n";
        else
            out += text[i];
    }
    return out;
}

std::string EncodeHeader(std::string_view value) {
    bool ascii = true;
    for (unsigned char c : value)
        if (c >= 0x80 || c < 0x20)
            ascii = false;
    if (ascii)
        return std::string(value);
    std::vector<unsigned char> out(4 * ((value.size() + 2) / 3) + 1);
    const int n = EVP_EncodeBlock(out.data(), reinterpret_cast<const unsigned char *>(value.data()),
                                  static_cast<int>(value.size()));
    return "=?UTF-8?B?" + std::string(reinterpret_cast<char *>(out.data()), static_cast<std::size_t>(n)) + "?=";
}

// Bare address from "Name <addr>" or "addr".
std::string Address(const std::string &mailbox) {
    const auto lt = mailbox.rfind('<');
    const auto gt = mailbox.rfind('>');
    if (lt != std::string::npos && gt != std::string::npos && gt > lt)
        return mailbox.substr(lt + 1, gt - lt - 1);
    return mailbox;
}

std::string Domain(const std::string &mailbox) {
    const auto addr = Address(mailbox);
    const auto at = addr.find('@');
    return at == std::string::npos ? "localhost" : addr.substr(at + 1);
}

class StreamTransport final : public MailTransport {
public:
    explicit StreamTransport(std::ostream &out) : out_(out) {}

    void send(const MailMessage &message) override {
        std::lock_guard lock(mu_);
        out_ << render_rfc5322(message) << "\r\n" << std::flush;
        if (!out_)
            throw Error(Errc::io_error, "mail output stream failed");
    }

private:
    std::ostream &out_;
    std::mutex mu_;
};

class SpoolTransport final : public MailTransport {
public:
    explicit SpoolTransport(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void send(const MailMessage &message) override {
        if (message.key.empty() || message.key.find('/') != std::string::npos)
            throw Error(Errc::invalid_argument, "spool messages need a plain file key");
        const auto final_path = dir_ / (message.key + ".eml");
        const auto tmp = dir_ / (message.key + ".eml.tmp");
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << render_rfc5322(message);
            if (!out.flush())
                throw Error(Errc::io_error, "cannot write " + tmp.string());
        }
        std::error_code ec;
        std::filesystem::rename(tmp, final_path, ec);
        if (ec)
            throw Error(Errc::io_error, "cannot publish " + final_path.string() + ": " + ec.message());
    }

private:
    std::filesystem::path dir_;
};

struct Upload {
    std::string data;
    std::size_t offset = 0;
};

std::size_t ReadUpload(char *buffer, std::size_t size, std::size_t nitems, void *userdata) {
    auto *up = static_cast<Upload *>(userdata);
    const std::size_t n = std::min(size * nitems, up->data.size() - up->offset);
    std::memcpy(buffer, up->data.data() + up->offset, n);
    up->offset += n;
    return n;
}

class SmtpTransport final : public MailTransport {
public:
    explicit SmtpTransport(SmtpOptions options) : options_(std::move(options)) {
        static const bool initialized = [] { return curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK; }();
        if (!initialized)
            throw Error(Errc::io_error, "libcurl initialization failed");
    }

    void send(const MailMessage &message) override {
        std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), curl_easy_cleanup);
        if (!curl)
            throw Error(Errc::io_error, "curl_easy_init failed");
        Upload upload{render_rfc5322(message)};
        const std::string from = "<" + Address(message.from) + ">";
        curl_slist *rcpt = curl_slist_append(nullptr, ("<" + Address(message.to) + ">").c_str());
        std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> rcpt_guard(rcpt, curl_slist_free_all);

        CURL *c = curl.get();
        curl_easy_setopt(c, CURLOPT_URL, options_.url.c_str());
        curl_easy_setopt(c, CURLOPT_MAIL_FROM, from.c_str());
        curl_easy_setopt(c, CURLOPT_MAIL_RCPT, rcpt);
        curl_easy_setopt(c, CURLOPT_READFUNCTION, ReadUpload);
        curl_easy_setopt(c, CURLOPT_READDATA, &upload);
        curl_easy_setopt(c, CURLOPT_UPLOAD, 1L);
        curl_easy_setopt(c, CURLOPT_TIMEOUT, options_.timeout_seconds);
        curl_easy_setopt(c, CURLOPT_NOSIGNAL, 1L);
        if (options_.require_tls)
            curl_easy_setopt(c, CURLOPT_USE_SSL, static_cast<long>(CURLUSESSL_ALL));
        if (!options_.username.empty()) {
            curl_easy_setopt(c, CURLOPT_USERNAME, options_.username.c_str());
            curl_easy_setopt(c, CURLOPT_PASSWORD, options_.password.c_str());
        }
        const CURLcode rc = curl_easy_perform(c);
        if (rc != CURLE_OK)
            throw Error(Errc::io_error, std::string("SMTP delivery failed: ") + curl_easy_strerror(rc));
    }

private:
    SmtpOptions options_;
};

} // namespace

std::string render_rfc5322(const MailMessage &m) {
    std::string out;
    out += "Date: " + rfc5322_date(m.date) + "\r\n";
    out += "From: " + m.from + "\r\n";
    out += "To: " + m.to + "\r\n";
    out += "Subject: " + EncodeHeader(m.subject) + "\r\n";
    if (!m.key.empty())
        out += "Message-ID: <" + m.key + "@" + Domain(m.from) + ">\r\n";
    out += "MIME-Version: 1.0\r\n";
    out += "Content-Type: text/plain; charset=utf-8\r\n";
    out += "Content-Transfer-Encoding: 8bit\r\n";
    out += "\r\n";
    out += Crlf(m.body);
    if (out.size() < 2 || out.compare(out.size() - 2, 2, "\r\n") != 0)
        out += "\r\n";
    return out;
}

std::unique_ptr<MailTransport> make_stream_transport(std::ostream &out) { return std::make_unique<StreamTransport>(out); }

std::unique_ptr<MailTransport> make_spool_transport(std::filesystem::path directory) {
    return std::make_unique<SpoolTransport>(std::move(directory));
}

std::unique_ptr<MailTransport> make_smtp_transport(SmtpOptions options) {
    return std::make_unique<SmtpTransport>(std::move(options));
}

MailDispatcher::MailDispatcher(std::shared_ptr<MailTransport> transport, std::size_t max_attempts)
    : transport_(std::move(transport)), max_attempts_(max_attempts) {}

bool MailDispatcher::deliver(const MailMessage &message) {
    try {
        transport_->send(message);
        return true;
    } catch (const std::exception &e) {
        spdlog::warn("mail to {} failed, queued for retry: {}", message.to, e.what());
        std::lock_guard lock(mu_);
        queue_.push_back({message, 1});
        return false;
    }
}

std::size_t MailDispatcher::retry_pending() {
    std::deque<Pending> batch;
    {
        std::lock_guard lock(mu_);
        batch.swap(queue_);
    }
    std::size_t sent = 0;
    std::deque<Pending> still;
    for (auto &p : batch) {
        try {
            transport_->send(p.message);
            ++sent;
        } catch (const std::exception &e) {
            if (++p.attempts >= max_attempts_) {
                spdlog::error("giving up on mail to {} after {} attempts: {}", p.message.to, p.attempts, e.what());
                continue;
            }
            still.push_back(std::move(p));
        }
    }
    std::lock_guard lock(mu_);
    for (auto &p : still)
        queue_.push_back(std::move(p));
    return sent;
}

std::size_t MailDispatcher::pending() const {
    std::lock_guard lock(mu_);
    return queue_.size();
}

} // namespace mylib
