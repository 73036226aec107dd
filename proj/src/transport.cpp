#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "cl9/agentd.hpp"

namespace cl9 {

void InProcessBus::send(const Message& msg) {
  if (msg.to.empty()) throw Error("message without receiver: " + encode_message(msg));
  inbox_[msg.to].push_back({msg.from, encode_message(msg)});
}

std::vector<Message> InProcessBus::drain(const std::string& agent) {
  std::vector<Message> out;
  auto it = inbox_.find(agent);
  if (it == inbox_.end()) return out;
  for (const auto& f : it->second) {
    Message m = decode_message(f.line);
    m.from = f.from;
    m.to = agent;
    out.push_back(std::move(m));
  }
  it->second.clear();
  return out;
}

bool InProcessBus::idle() const {
  for (const auto& [name, q] : inbox_)
    if (!q.empty()) return false;
  return true;
}

namespace {

[[noreturn]] void sys_fail(const std::string& what) { throw Error(what + ": " + std::strerror(errno)); }

void write_all(int fd, const std::string& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail("socket write");
    }
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

struct SocketTransport::Channel {
  int client = -1;
  int server = -1;
  std::string buffer;

  ~Channel() {
    if (client >= 0) ::close(client);
    if (server >= 0) ::close(server);
  }

  std::string read_line() {
    for (;;) {
      auto nl = buffer.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        return line;
      }
      char chunk[4096];
      ssize_t n = ::read(server, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) sys_fail("socket read");
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }
};

SocketTransport::SocketTransport() {
  listener_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener_ < 0) sys_fail("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(listener_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) sys_fail("bind");
  if (::listen(listener_, 16) < 0) sys_fail("listen");
  socklen_t len = sizeof addr;
  if (::getsockname(listener_, reinterpret_cast<sockaddr*>(&addr), &len) < 0) sys_fail("getsockname");
  port_ = ntohs(addr.sin_port);
}

SocketTransport::~SocketTransport() {
  channels_.clear();
  if (listener_ >= 0) ::close(listener_);
}

SocketTransport::Channel& SocketTransport::channel(const std::string& from, const std::string& to) {
  auto key = std::make_pair(from, to);
  auto it = channels_.find(key);
  if (it != channels_.end()) return *it->second;
  auto ch = std::make_unique<Channel>();
  ch->client = ::socket(AF_INET, SOCK_STREAM, 0);
  if (ch->client < 0) sys_fail("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port_));
  if (::connect(ch->client, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) sys_fail("connect");
  int one = 1;
  ::setsockopt(ch->client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  ch->server = ::accept(listener_, nullptr, nullptr);
  if (ch->server < 0) sys_fail("accept");
  return *channels_.emplace(key, std::move(ch)).first->second;
}

void SocketTransport::send(const Message& msg) {
  if (msg.to.empty()) throw Error("message without receiver: " + encode_message(msg));
  Channel& ch = channel(msg.from, msg.to);
  write_all(ch.client, encode_message(msg) + "\n");
  // Collect the frame on the receiving end right away so delivery order
  // matches send order across channels.
  Message m = decode_message(ch.read_line());
  m.from = msg.from;
  m.to = msg.to;
  inbox_[msg.to].push_back(std::move(m));
}

std::vector<Message> SocketTransport::drain(const std::string& agent) {
  std::vector<Message> out;
  auto it = inbox_.find(agent);
  if (it == inbox_.end()) return out;
  out.assign(it->second.begin(), it->second.end());
  it->second.clear();
  return out;
}

bool SocketTransport::idle() const {
  for (const auto& [name, q] : inbox_)
    if (!q.empty()) return false;
  return true;
}

}  // namespace cl9
