#include "roomgroup/bedmap.hpp"

#include <atomic>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

using namespace roomgroup;
using nlohmann::json;

namespace {

std::vector<BedGroup> groups(std::size_t n) {
  std::vector<BedGroup> out;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::string id = "bedroom-" + std::to_string(i);
    out.push_back({id, {id + "-a"}, {"uri://" + id}});
  }
  return out;
}

// Always answers `favorite` when offered, otherwise the last option.
class Greedy final : public PredictorBackend {
 public:
  explicit Greedy(std::string favorite) : favorite_(std::move(favorite)) {}
  std::string predict(const PredictionRequest& r) override {
    ++calls;
    for (const auto& o : r.options)
      if (o == favorite_) return o;
    return r.options.back();
  }
  int calls = 0;

 private:
  std::string favorite_;
};

class Fixed final : public PredictorBackend {
 public:
  explicit Fixed(std::string answer) : answer_(std::move(answer)) {}
  std::string predict(const PredictionRequest&) override { return answer_; }

 private:
  std::string answer_;
};

class RandomPick final : public PredictorBackend {
 public:
  explicit RandomPick(std::uint64_t seed) : rng_(seed) {}
  std::string predict(const PredictionRequest& r) override { return r.options[rng_.below(r.options.size())]; }

 private:
  Rng rng_;
};

// Local HTTP stand-in for the remote predictor.
class StubServer {
 public:
  using Handler = std::function<void(const json& request, httplib::Response& res)>;
  explicit StubServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      last_auth = req.get_header_value("Authorization");
      const json body = json::parse(req.body);
      prompts.push_back(body.at("prompt_context").get<std::string>());
      last_request = body;
      handler_(body, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/predict"; }

  std::atomic<int> hits{0};
  std::string last_auth;
  std::vector<std::string> prompts;
  json last_request;

 private:
  httplib::Server server_;
  Handler handler_;
  int port_ = 0;
  std::thread thread_;
};

PredictionRequest request(std::vector<std::string> options) {
  return {"bedroom-1", {"a"}, {"uri://a"}, std::move(options)};
}

}  // namespace

TEST_CASE("frequency dictionary") {
  const auto d = build_frequency_dict({"1 King Bed", "2 Twin Beds"});
  CHECK(d.count("1 King Bed") == 1);
  CHECK(d.count("2 Twin Beds") == 1);
  CHECK(d.total() == 2);
  const auto q = build_frequency_dict({"1 Queen Bed", "1 Queen Bed"});
  CHECK(q.count("1 Queen Bed") == 2);
  CHECK(q.options() == std::vector<std::string>{"1 Queen Bed"});
  CHECK_ERROR_KIND(build_frequency_dict({}), ErrorKind::EmptyInventory);
  CHECK(build_frequency_dict({" 1  King Bed"}).count("1 King Bed") == 1);
}

TEST_CASE("oracle assignment of two groups empties the inventory") {
  OracleFromTruth oracle({{"bedroom-1", "2 Twin Beds"}, {"bedroom-2", "1 King Bed"}});
  const auto a = map_spaces(groups(2), build_frequency_dict({"1 King Bed", "2 Twin Beds"}), oracle);
  CHECK(a.as_map() == std::map<std::string, std::string>{{"bedroom-1", "2 Twin Beds"}, {"bedroom-2", "1 King Bed"}});
  CHECK(a.leftover.empty());
  REQUIRE(a.trace.size() == 2);
  CHECK(a.trace[0].options == std::vector<std::string>{"1 King Bed", "2 Twin Beds"});
  CHECK_FALSE(a.trace[0].forced);
  CHECK(a.trace[1].options == std::vector<std::string>{"1 King Bed"});
  CHECK(a.trace[1].forced);
}

TEST_CASE("single option is forced without asking") {
  Fixed wrong("1 Crib");
  const auto a = map_spaces(groups(1), build_frequency_dict({"1 Queen Bed"}), wrong);
  CHECK(a.assignments[0].second == "1 Queen Bed");
  CHECK(a.trace[0].forced);
}

TEST_CASE("greedy predictor takes queens until they run out") {
  Greedy greedy("1 Queen Bed");
  const auto a = map_spaces(groups(3), build_frequency_dict({"1 Queen Bed", "1 Queen Bed", "1 King Bed"}), greedy);
  const auto m = a.as_map();
  CHECK(m.at("bedroom-1") == "1 Queen Bed");
  CHECK(m.at("bedroom-2") == "1 Queen Bed");
  CHECK(m.at("bedroom-3") == "1 King Bed");
  CHECK(a.trace[2].options == std::vector<std::string>{"1 King Bed"});
}

TEST_CASE("more groups than beds exhausts the inventory") {
  FirstOption first;
  CHECK_ERROR_KIND(map_spaces(groups(3), build_frequency_dict({"1 King Bed", "1 Queen Bed"}), first),
                   ErrorKind::InventoryExhausted);
  const std::string msg = testing::error_message_of(
      [&] { map_spaces(groups(3), build_frequency_dict({"1 King Bed", "1 Queen Bed"}), first); });
  CHECK(msg.find("bedroom-3") != std::string::npos);
}

TEST_CASE("leftover inventory is reported") {
  FirstOption first;
  const auto a = map_spaces(groups(1), build_frequency_dict({"1 King Bed", "1 Queen Bed", "1 Queen Bed"}), first);
  CHECK(a.assignments[0].second == "1 King Bed");
  CHECK(a.leftover == std::vector<std::pair<std::string, int>>{{"1 Queen Bed", 2}});
}

TEST_CASE("off-menu answers are rejected") {
  Fixed wrong("1 Crib");
  CHECK_ERROR_KIND(map_spaces(groups(1), build_frequency_dict({"1 King Bed", "1 Queen Bed"}), wrong),
                   ErrorKind::PredictorViolation);
  std::vector<BedGroup> empty_group{{"bedroom-1", {}, {}}};
  CHECK_ERROR_KIND(map_spaces(empty_group, build_frequency_dict({"1 King Bed"}), wrong), ErrorKind::SchemaViolation);
}

TEST_CASE("assignments never exceed inventory multiplicities") {
  Rng rng(30);
  const std::vector<std::string> vocab{"1 King Bed", "1 Queen Bed", "2 Twin Beds", "1 Double Bed", "1 Sofa Bed"};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> beds;
    const std::size_t nbeds = 1 + rng.below(8);
    for (std::size_t i = 0; i < nbeds; ++i) beds.push_back(vocab[rng.below(vocab.size())]);
    const std::size_t ngroups = 1 + rng.below(nbeds);
    RandomPick pick(rng.next_u64());
    const auto a = map_spaces(groups(ngroups), build_frequency_dict(beds), pick);
    std::map<std::string, int> initial, used, left;
    for (const auto& b : beds) ++initial[b];
    for (const auto& [g, b] : a.assignments) ++used[b];
    for (const auto& [b, n] : a.leftover) left[b] = n;
    CHECK(a.assignments.size() == ngroups);
    for (const auto& [b, n] : initial) {
      CHECK(used[b] <= n);
      CHECK(used[b] + left[b] == n);
    }
  }
}

TEST_CASE("error injection leaves the oracle answer with probability 1-p") {
  OracleFromTruth oracle(std::map<std::string, std::string>{{"bedroom-1", "1 King Bed"}});
  int right = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    ErrorInjectingPredictor noisy(oracle, 0.2, seed);
    right += noisy.predict(request({"1 King Bed", "1 Queen Bed"})) == "1 King Bed";
  }
  CHECK(right > 1500);
  CHECK(right < 1700);
  ErrorInjectingPredictor never(oracle, 0.0, 1);
  CHECK(never.predict(request({"1 King Bed", "1 Queen Bed"})) == "1 King Bed");
  ErrorInjectingPredictor always(oracle, 1.0, 1);
  CHECK(always.predict(request({"1 King Bed", "1 Queen Bed"})) == "1 Queen Bed");
}

TEST_CASE("remote predictor: happy path sends the request document and token") {
  StubServer stub([](const json& req, httplib::Response& res) {
    res.set_content(json{{"bed_type", req.at("options")[0]}}.dump(), "application/json");
  });
  RemoteService remote({stub.endpoint(), "secret", 2, std::chrono::milliseconds(2000)});
  CHECK(remote.predict(request({"1 King Bed", "2 Twin Beds"})) == "1 King Bed");
  CHECK(stub.hits == 1);
  CHECK(stub.last_auth == "Bearer secret");
  CHECK(stub.prompts[0] == kDefaultPromptContext);
  CHECK(stub.last_request.at("group_id") == "bedroom-1");
  CHECK(stub.last_request.at("image_uris") == json::array({"uri://a"}));
  CHECK(stub.last_request.at("options") == json::array({"1 King Bed", "2 Twin Beds"}));
}

TEST_CASE("remote predictor: off-menu answer gets one reminder, then fails") {
  StubServer stub([](const json&, httplib::Response& res) {
    res.set_content(R"({"bed_type": "1 Crib"})", "application/json");
  });
  CHECK_ERROR_KIND(remote_predict(request({"1 King Bed", "1 Queen Bed"}), {stub.endpoint(), "", 2, std::chrono::milliseconds(2000)}),
                   ErrorKind::PredictorViolation);
  CHECK(stub.hits == 2);
  CHECK(stub.prompts[1].find("must be one of") != std::string::npos);
}

TEST_CASE("remote predictor: reminder can rescue an answer") {
  StubServer stub([](const json& req, httplib::Response& res) {
    const bool reminded = req.at("prompt_context").get<std::string>() != kDefaultPromptContext;
    res.set_content(json{{"bed_type", reminded ? "1 Queen Bed" : "a queen, probably"}}.dump(), "application/json");
  });
  CHECK(remote_predict(request({"1 King Bed", "1 Queen Bed"}), {stub.endpoint(), "", 0, std::chrono::milliseconds(2000)}) ==
        "1 Queen Bed");
}

TEST_CASE("remote predictor: server errors are retried, then reported") {
  StubServer stub([](const json&, httplib::Response& res) { res.status = 503; });
  CHECK_ERROR_KIND(remote_predict(request({"1 King Bed"}), {stub.endpoint(), "", 2, std::chrono::milliseconds(2000)}),
                   ErrorKind::RemoteFailure);
  CHECK(stub.hits == 3);
}

TEST_CASE("remote predictor: transient failure recovers") {
  std::atomic<int> seen{0};
  StubServer stub([&](const json& req, httplib::Response& res) {
    if (seen++ == 0) {
      res.status = 500;
      return;
    }
    res.set_content(json{{"bed_type", req.at("options")[0]}}.dump(), "application/json");
  });
  CHECK(remote_predict(request({"1 King Bed"}), {stub.endpoint(), "", 1, std::chrono::milliseconds(2000)}) == "1 King Bed");
}

TEST_CASE("remote predictor: unreachable endpoint and bad config") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/predict";
  CHECK_ERROR_KIND(remote_predict(request({"1 King Bed"}), {url, "", 1, std::chrono::milliseconds(500)}),
                   ErrorKind::RemoteFailure);
  CHECK_ERROR_KIND(RemoteService({"https://example.invalid/x", "", 0, std::chrono::milliseconds(10)}),
                   ErrorKind::ConfigError);
}

TEST_CASE("remote predictor in the mapping loop") {
  StubServer stub([](const json& req, httplib::Response& res) {
    res.set_content(json{{"bed_type", req.at("options").back()}}.dump(), "application/json");
  });
  RemoteService remote({stub.endpoint(), "", 0, std::chrono::milliseconds(2000)});
  const auto a = map_spaces(groups(3), build_frequency_dict({"1 King Bed", "2 Twin Beds", "1 Queen Bed"}), remote);
  CHECK(a.as_map().at("bedroom-1") == "1 Queen Bed");
  CHECK(a.as_map().at("bedroom-2") == "2 Twin Beds");
  CHECK(a.as_map().at("bedroom-3") == "1 King Bed");
  CHECK(remote.requests_sent() == 2);  // last step is forced
}
