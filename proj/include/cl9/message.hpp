#ifndef CL9_MESSAGE_HPP
#define CL9_MESSAGE_HPP

#include <string>
#include <string_view>

#include "cl9/runtime.hpp"

namespace cl9 {

/// One protocol frame. Line formats:
///   QUERY <session> <from> <to> <formula-text>
///   MOVE <session> <from> <to> <player> <path> choose:<i>|switch|atom:<text>
///   OK <session> / FAIL <session> <reason> / DONE <session>
/// OK, FAIL and DONE frames do not carry the endpoints; the transport
/// delivering them supplies `from`/`to` from its channel.
struct Message {
  enum class Kind { Query, Move, Ok, Fail, Done };

  Kind kind = Kind::Ok;
  std::string session;
  std::string from;
  std::string to;
  std::string body;  // QUERY: formula text; FAIL: reason token
  cl9::Move move;    // MOVE

  bool operator==(const Message&) const = default;

  static Message query(std::string session, std::string from, std::string to, std::string formula);
  static Message move_msg(std::string session, std::string from, std::string to, cl9::Move move);
  static Message ok(std::string session, std::string from, std::string to);
  static Message fail(std::string session, std::string from, std::string to, std::string reason);
  static Message done(std::string session, std::string from, std::string to);
};

std::string_view to_string(Message::Kind kind);

std::string encode_message(const Message& msg);
/// Throws ParseError (column = byte offset + 1) on malformed lines.
Message decode_message(std::string_view line);

/// `<origin>:<counter>`
std::string make_session_id(const std::string& origin, std::uint64_t counter);

}  // namespace cl9

#endif  // CL9_MESSAGE_HPP
