#include "doctest.h"

#include <fstream>
#include <sstream>

#include "mylibrary/error.hpp"
#include "mylibrary/mail.hpp"
#include "support/fake_smtp.hpp"
#include "support/fixtures.hpp"

using namespace mylib;

namespace {

MailMessage Sample() {
    MailMessage m;
    m.from = "MyLibrary <mylibrary@lib.example.edu>";
    m.to = "Alice <alice@example.edu>";
    m.subject = "New titles";
    m.body = "line one\nline two\n";
    m.date = testing::At("2026-10-12T06:00:00Z");
    m.key = "7_2026-W41";
    return m;
}

std::string Slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("rfc5322 rendering") {
    const auto text = render_rfc5322(Sample());
    CHECK(text == "Date: Mon, 12 Oct 2026 06:00:00 +0000\r\n"
                  "From: MyLibrary <mylibrary@lib.example.edu>\r\n"
                  "To: Alice <alice@example.edu>\r\n"
                  "Subject: New titles\r\n"
                  "Message-ID: <7_2026-W41@lib.example.edu>\r\n"
                  "MIME-Version: 1.0\r\n"
                  "Content-Type: text/plain; charset=utf-8\r\n"
                  "Content-Transfer-Encoding: 8bit\r\n"
                  "\r\n"
                  "line one\r\n"
                  "line two\r\n");

    auto m = Sample();
    m.subject = "Caf\xc3\xa9";
    m.body = "no newline";
    const auto encoded = render_rfc5322(m);
    CHECK(encoded.find("Subject: =?UTF-8?B?Q2Fmw6k=?=\r\n") != std::string::npos);
    CHECK(encoded.ends_with("no newline\r\n"));
    // Every LF is part of a CRLF.
    for (std::size_t i = 0; i < encoded.size(); ++i)
        if (encoded[i] == '\n')
            CHECK(encoded[i - 1] == '\r');
}

TEST_CASE("spool transport writes one file per key") {
    testing::TempDir dir;
    auto spool = make_spool_transport(dir.path() / "out");
    spool->send(Sample());
    const auto path = dir.path() / "out" / "7_2026-W41.eml";
    REQUIRE(std::filesystem::exists(path));
    CHECK(Slurp(path) == render_rfc5322(Sample()));
    CHECK_FALSE(std::filesystem::exists(dir.path() / "out" / "7_2026-W41.eml.tmp"));

    auto bad = Sample();
    bad.key = "../escape";
    CHECK_THROWS_AS(spool->send(bad), Error);
}

TEST_CASE("stream transport") {
    std::ostringstream out;
    make_stream_transport(out)->send(Sample());
    CHECK(out.str().starts_with("Date: Mon, 12 Oct 2026"));
}

TEST_CASE("dispatcher queues failures and retries") {
    auto transport = std::make_shared<testing::RecordingTransport>();
    MailDispatcher dispatcher(transport, 3);
    transport->fail_next = 1;
    CHECK_FALSE(dispatcher.deliver(Sample()));
    CHECK(dispatcher.pending() == 1);
    CHECK(transport->sent().empty());
    CHECK(dispatcher.retry_pending() == 1);
    CHECK(dispatcher.pending() == 0);
    CHECK(transport->sent().size() == 1);

    SUBCASE("gives up after max attempts") {
        transport->fail_next = 100;
        dispatcher.deliver(Sample());
        CHECK(dispatcher.retry_pending() == 0);
        CHECK(dispatcher.pending() == 1);
        CHECK(dispatcher.retry_pending() == 0);
        CHECK(dispatcher.pending() == 0);
    }
}

TEST_CASE("smtp transport talks to a server") {
    testing::FakeSmtpServer server;
    auto smtp = make_smtp_transport({server.url(), "", "", false, 10});
    auto m = Sample();
    m.body = ".leading dot\nnormal\n";
    smtp->send(m);
    const auto got = server.messages();
    REQUIRE(got.size() == 1);
    CHECK(got[0].mail_from == "<mylibrary@lib.example.edu>");
    CHECK(got[0].rcpt_to == std::vector<std::string>{"<alice@example.edu>"});
    CHECK(got[0].data == render_rfc5322(m));

    server.reject_recipients = true;
    CHECK_THROWS_AS(smtp->send(Sample()), Error);
}

TEST_CASE("smtp transport reports an unreachable server") {
    int port = 0;
    {
        testing::FakeSmtpServer probe;
        port = probe.port();
    }
    auto smtp = make_smtp_transport({"smtp://127.0.0.1:" + std::to_string(port), "", "", false, 5});
    CHECK_THROWS_AS(smtp->send(Sample()), Error);
}
