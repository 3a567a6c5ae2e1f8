#include "sticky/remote_tokenizer.h"

#include <algorithm>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sticky/base64.h"
#include "sticky/error.h"

namespace sticky {

using json = nlohmann::json;

RemoteTokenizer::RemoteTokenizer(std::string url, std::size_t page_size, RetryPolicy retry)
    : url_(std::move(url)), endpoint_(parse_endpoint(url_)), page_size_(std::max<std::size_t>(1, page_size)),
      retry_(retry) {
  json head;
  try {
    head = json::parse(get("/vocab?offset=0&limit=0"));
    total_ = head.at("total").get<std::size_t>();
    specials_ = head.at("specials").get<std::vector<TokenId>>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed /vocab response: ") + e.what());
  }
}

std::string RemoteTokenizer::get(const std::string& path) const {
  std::string body;
  with_retry(retry_, [&] {
    httplib::Client cli(endpoint_.origin);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(120);
    auto res = cli.Get(endpoint_.base + path);
    if (!res) throw TransportError("GET " + url_ + path + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw TransportError("GET " + url_ + path + " returned HTTP " + std::to_string(res->status));
    }
    body = res->body;
  });
  return body;
}

std::string RemoteTokenizer::post(const std::string& path, const std::string& payload) const {
  std::string body;
  with_retry(retry_, [&] {
    httplib::Client cli(endpoint_.origin);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(120);
    auto res = cli.Post(endpoint_.base + path, payload, "application/json");
    if (!res) throw TransportError("POST " + url_ + path + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw TransportError("POST " + url_ + path + " returned HTTP " + std::to_string(res->status));
    }
    body = res->body;
  });
  return body;
}

const RemoteTokenizer::Page& RemoteTokenizer::page_for(std::size_t page_index) const {
  if (auto it = pages_.find(page_index); it != pages_.end()) return it->second;
  const std::size_t offset = page_index * page_size_;
  const std::string body =
      get("/vocab?offset=" + std::to_string(offset) + "&limit=" + std::to_string(page_size_));
  Page page;
  page.bytes.resize(std::min(page_size_, total_ - offset));
  try {
    const json j = json::parse(body);
    for (const auto& entry : j.at("entries")) {
      const auto id = entry.at("id").get<std::size_t>();
      if (id < offset || id >= offset + page.bytes.size()) continue;
      const auto& b64 = entry.at("bytes_b64");
      if (!b64.is_null()) page.bytes[id - offset] = base64::decode(b64.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed /vocab page: ") + e.what());
  } catch (const DataError& e) {
    throw TransportError(std::string("malformed /vocab page: ") + e.what());
  }
  if (pages_.size() >= kMaxPages) {
    pages_.erase(page_order_.front());
    page_order_.erase(page_order_.begin());
  }
  page_order_.push_back(page_index);
  return pages_.emplace(page_index, std::move(page)).first->second;
}

std::optional<std::string> RemoteTokenizer::decode_bytes(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= total_) return std::nullopt;
  std::lock_guard lock(mu_);
  const auto idx = static_cast<std::size_t>(id);
  return page_for(idx / page_size_).bytes[idx % page_size_];
}

std::vector<TokenId> RemoteTokenizer::encode(std::string_view text) const {
  std::lock_guard lock(mu_);
  const std::string body = post("/encode", json{{"text", std::string(text)}}.dump());
  try {
    return json::parse(body).at("ids").get<std::vector<TokenId>>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed /encode response: ") + e.what());
  }
}

std::optional<std::string> RemoteTokenizer::decode_text(const std::vector<TokenId>& ids) const {
  std::lock_guard lock(mu_);
  const std::string body = post("/decode", json{{"ids", ids}}.dump());
  try {
    const json j = json::parse(body);
    if (j.contains("error")) return std::nullopt;
    return j.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed /decode response: ") + e.what());
  }
}

}  // namespace sticky
