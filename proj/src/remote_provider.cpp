#include <httplib.h>

#include "sticky/embedding.h"
#include "sticky/error.h"

namespace sticky {

using json = nlohmann::json;

RemoteProvider::RemoteProvider(std::string url, RetryPolicy retry)
    : url_(std::move(url)), endpoint_(parse_endpoint(url_)) {
  with_retry(retry, [&] {
    httplib::Client cli(endpoint_.origin);
    cli.set_connection_timeout(10);
    auto res = cli.Get(endpoint_.base + "/info");
    if (!res) throw TransportError("GET " + url_ + "/info failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw TransportError("GET /info returned HTTP " + std::to_string(res->status));
    try {
      const json j = json::parse(res->body);
      info_.name = j.at("name").get<std::string>();
      info_.dim = j.at("dim").get<std::size_t>();
      info_.normalizes = j.value("normalizes", false);
      info_.deterministic = j.value("deterministic", true);
      info_.single_flight = true;
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed /info response: ") + e.what());
    }
  });
}

std::vector<std::vector<double>> RemoteProvider::embed(const std::vector<std::string>& texts) const {
  httplib::Client cli(endpoint_.origin);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(600);
  auto res = cli.Post(endpoint_.base + "/embed", json{{"texts", texts}}.dump(), "application/json");
  if (!res) throw TransportError("POST " + url_ + "/embed failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw TransportError("POST /embed returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    const json j = json::parse(res->body);
    const auto dim = j.at("dim").get<std::size_t>();
    if (dim != info_.dim) throw TransportError("/embed dim " + std::to_string(dim) + " differs from /info");
    return j.at("embeddings").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed /embed response: ") + e.what());
  }
}

}  // namespace sticky
