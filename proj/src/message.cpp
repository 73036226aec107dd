#include "cl9/message.hpp"

#include <vector>

namespace cl9 {

Message Message::query(std::string session, std::string from, std::string to, std::string formula) {
  Message m;
  m.kind = Kind::Query;
  m.session = std::move(session);
  m.from = std::move(from);
  m.to = std::move(to);
  m.body = std::move(formula);
  return m;
}

Message Message::move_msg(std::string session, std::string from, std::string to, cl9::Move move) {
  Message m;
  m.kind = Kind::Move;
  m.session = std::move(session);
  m.from = std::move(from);
  m.to = std::move(to);
  m.move = std::move(move);
  return m;
}

Message Message::ok(std::string session, std::string from, std::string to) {
  Message m;
  m.kind = Kind::Ok;
  m.session = std::move(session);
  m.from = std::move(from);
  m.to = std::move(to);
  return m;
}

Message Message::fail(std::string session, std::string from, std::string to, std::string reason) {
  Message m = ok(std::move(session), std::move(from), std::move(to));
  m.kind = Kind::Fail;
  m.body = std::move(reason);
  return m;
}

Message Message::done(std::string session, std::string from, std::string to) {
  Message m = ok(std::move(session), std::move(from), std::move(to));
  m.kind = Kind::Done;
  return m;
}

std::string_view to_string(Message::Kind kind) {
  switch (kind) {
    case Message::Kind::Query: return "QUERY";
    case Message::Kind::Move: return "MOVE";
    case Message::Kind::Ok: return "OK";
    case Message::Kind::Fail: return "FAIL";
    case Message::Kind::Done: return "DONE";
  }
  return "OK";
}

std::string make_session_id(const std::string& origin, std::uint64_t counter) {
  return origin + ":" + std::to_string(counter);
}

std::string encode_message(const Message& msg) {
  std::string out(to_string(msg.kind));
  out += " " + msg.session;
  switch (msg.kind) {
    case Message::Kind::Query: out += " " + msg.from + " " + msg.to + " " + msg.body; break;
    case Message::Kind::Move: out += " " + msg.from + " " + msg.to + " " + render_move(msg.move); break;
    case Message::Kind::Fail: out += " " + msg.body; break;
    case Message::Kind::Ok:
    case Message::Kind::Done: break;
  }
  return out;
}

namespace {

struct Field {
  std::string_view text;
  std::size_t offset;
};

// Splits off `count` space-separated fields; the remainder (if any) is
// returned as one more field.
std::vector<Field> split(std::string_view line, std::size_t count, bool rest) {
  std::vector<Field> out;
  std::size_t pos = 0;
  while (out.size() < count && pos <= line.size()) {
    std::size_t sp = line.find(' ', pos);
    if (sp == std::string_view::npos) sp = line.size();
    out.push_back({line.substr(pos, sp - pos), pos});
    pos = sp + 1;
  }
  if (rest && pos <= line.size()) out.push_back({line.substr(pos), pos});
  return out;
}

[[noreturn]] void bad(const std::string& what, std::size_t offset) {
  throw ParseError(what, 1, static_cast<int>(offset) + 1);
}

void check_token(const Field& f, const char* what) {
  if (f.text.empty()) bad(std::string("empty ") + what, f.offset);
  for (char c : f.text)
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') bad(std::string("whitespace in ") + what, f.offset);
}

}  // namespace

Message decode_message(std::string_view line) {
  if (line.find('\n') != std::string_view::npos) bad("frame contains a newline", line.find('\n'));
  auto head = split(line, 1, false);
  std::string_view kind = head.empty() ? std::string_view() : head[0].text;
  Message m;
  if (kind == "QUERY") {
    auto f = split(line, 4, true);
    if (f.size() != 5 || f[4].text.empty()) bad("QUERY needs <session> <from> <to> <formula>", line.size());
    for (int i = 1; i < 4; ++i) check_token(f[i], "field");
    m = Message::query(std::string(f[1].text), std::string(f[2].text), std::string(f[3].text), std::string(f[4].text));
  } else if (kind == "MOVE") {
    auto f = split(line, 7, false);
    if (f.size() != 7 || f.back().offset + f.back().text.size() != line.size())
      bad("MOVE needs <session> <from> <to> <player> <path> <payload>", line.size());
    for (int i = 1; i < 7; ++i) check_token(f[i], "field");
    Move mv;
    try {
      std::string text = std::string(f[4].text) + " " + std::string(f[5].text) + " " + std::string(f[6].text);
      mv = parse_move(text);
    } catch (const Error& e) {
      bad(e.what(), f[4].offset);
    }
    m = Message::move_msg(std::string(f[1].text), std::string(f[2].text), std::string(f[3].text), std::move(mv));
  } else if (kind == "OK" || kind == "DONE") {
    auto f = split(line, 2, false);
    if (f.size() != 2 || f[1].offset + f[1].text.size() != line.size()) bad("expected '<KIND> <session>'", line.size());
    check_token(f[1], "session");
    m = kind == "OK" ? Message::ok(std::string(f[1].text), {}, {}) : Message::done(std::string(f[1].text), {}, {});
  } else if (kind == "FAIL") {
    auto f = split(line, 3, false);
    if (f.size() != 3 || f[2].offset + f[2].text.size() != line.size()) bad("expected 'FAIL <session> <reason>'", line.size());
    check_token(f[1], "session");
    check_token(f[2], "reason");
    m = Message::fail(std::string(f[1].text), {}, {}, std::string(f[2].text));
  } else {
    bad("unknown message kind '" + std::string(kind) + "'", 0);
  }
  if (m.session.find(':') == std::string::npos) bad("session id must be <origin>:<counter>", 0);
  return m;
}

}  // namespace cl9
