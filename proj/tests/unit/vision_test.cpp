#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "guided/codec.hpp"
#include "guided/error.hpp"
#include "guided/text.hpp"
#include "guided/vision/gateway.hpp"
#include "guided/vision/mock.hpp"
#include "guided/vision/reply.hpp"

using namespace guided;
using namespace guided::vision;
using namespace std::chrono_literals;

namespace {

const char* kValidPlan =
    R"({"instructions":[{"instruction":"press start button on the rice cooker","visual_type":1,"key_components":["The orange Start button"]}]})";

// Replies from a fixed script, one per call, and remembers every request.
class ScriptedBackend : public VisionBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies, std::set<Capability> caps = {
      std::begin(kAllCapabilities), std::end(kAllCapabilities)})
      : replies_(std::move(replies)), caps_(std::move(caps)) {}
  std::string name() const override { return "scripted"; }
  std::set<Capability> capabilities() const override { return caps_; }
  ProviderReply call(const ProviderRequest& r, std::stop_token) override {
    std::lock_guard lock(mu_);
    requests.push_back(r);
    const std::string& text = replies_.at(std::min(requests.size() - 1, replies_.size() - 1));
    if (text == "!timeout") throw Error(ErrorCode::kProviderTimeout, "upstream timed out");
    return {text, mask};
  }
  std::vector<ProviderRequest> requests;
  std::optional<Image> mask;

 private:
  std::mutex mu_;
  std::vector<std::string> replies_;
  std::set<Capability> caps_;
};

GatewayConfig fast_config() {
  GatewayConfig c;
  c.timeout = 2000ms;
  c.retry.backoff_base_s = 0;
  return c;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  void write(const std::string& rel, const std::string& contents) const {
    std::filesystem::create_directories((path / rel).parent_path());
    text::write_file((path / rel).string(), contents);
  }
};

const Image& frame_image() {
  static const Image img(960, 720, 3, 128);
  return img;
}

FrameRef frame(const std::string& scene = "s1") { return {scene, &frame_image()}; }

}  // namespace

TEST(Prompts, BoxTemplateCarriesComponentAndFormatClause) {
  const auto& lib = PromptLibrary::shipped();
  const std::string p = lib.render(PromptId::kBoundingBox, {{"key_component", "The orange Start button"}});
  EXPECT_NE(p.find("The orange Start button"), std::string::npos);
  EXPECT_NE(p.find("{name: key_component_name, pos: [y_min, x_min, y_max, x_max]}"), std::string::npos);
  EXPECT_EQ(p.find("${"), std::string::npos);
}

TEST(Prompts, RotationWithoutInstructionIsMissingSlot) {
  try {
    PromptLibrary::shipped().render(PromptId::kRotation, {{"key_component", "oven door"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingSlot);
    EXPECT_NE(std::string(e.what()).find("instruction"), std::string::npos);
  }
}

TEST(Prompts, PlanTemplateHasNoSlotsAndRendersIdentically) {
  const auto& lib = PromptLibrary::shipped();
  EXPECT_TRUE(lib.slots(PromptId::kPlan).empty());
  EXPECT_EQ(lib.render(PromptId::kPlan), lib.raw(PromptId::kPlan));
  EXPECT_EQ(lib.slots(PromptId::kTranslation), (std::vector<std::string>{"key_component", "instruction"}));
}

TEST(Prompts, SlotValuesAppearVerbatimAndNoMarkerSurvives) {
  const auto& lib = PromptLibrary::shipped();
  std::mt19937 rng(17);
  const std::string alphabet = "abcXYZ 019{}[]\"':,.$\n\t-_";
  for (int trial = 0; trial < 300; ++trial) {
    auto random_text = [&] {
      std::string s;
      for (std::size_t n = rng() % 40; n > 0; --n) s.push_back(alphabet[rng() % alphabet.size()]);
      return s;
    };
    const SlotMap slots{{"key_component", random_text()}, {"instruction", random_text()}};
    for (PromptId id : {PromptId::kBoundingBox, PromptId::kTranslation, PromptId::kRotation}) {
      const std::string out = lib.render(id, slots);
      for (const auto& name : lib.slots(id)) EXPECT_NE(out.find(slots.at(name)), std::string::npos);
      // Markers only come from the template; values are never rescanned.
      std::string stripped = out;
      for (const auto& [k, v] : slots) {
        for (std::size_t at; !v.empty() && (at = stripped.find(v)) != std::string::npos;) stripped.erase(at, v.size());
      }
      EXPECT_EQ(stripped.find("${"), std::string::npos);
      EXPECT_EQ(out, lib.render(id, slots));
    }
  }
}

TEST(ReplyParser, RelaxedObjectForms) {
  auto a = parse_reply_object("Sure! ```json\n{name: The orange Start button, pos: [412, 655, 450, 710]}\n```");
  EXPECT_EQ(a.at("name"), "The orange Start button");
  EXPECT_EQ(a.at("pos").at(3), 710);
  auto b = parse_reply_object("{{rotation: [x, CCW]}}");
  EXPECT_EQ(b.at("rotation").at(1), "CCW");
  auto c = parse_reply_object("{'name': 'bed', \"pos\": [1, 2, 3, 4,], }");
  EXPECT_EQ(c.at("name"), "bed");
  EXPECT_THROW(parse_reply_object("no object here"), Error);
  EXPECT_THROW(parse_reply_object("{name: [1, 2}"), Error);
}

TEST(ReplyParser, BoxExamples) {
  auto r = parse_box_reply("{name: The orange Start button, pos: [412, 655, 450, 710]}", 960, 720);
  EXPECT_EQ(r.box, (geometry::BoundingBox2D{412, 655, 450, 710}));
  EXPECT_TRUE(r.warnings.empty());
  try {
    parse_box_reply("{name: a, pos: [450, 655, 412, 710]}", 960, 720);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
  try {
    parse_box_reply("{name: a, pos: [100, 100, 100, 200]}", 960, 720);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroAreaBox);
  }
  EXPECT_THROW(parse_box_reply("{name: a, pos: [1, 2, 3]}", 960, 720), Error);
  EXPECT_THROW(parse_box_reply("{name: a, pos: [1, 2, three, 4]}", 960, 720), Error);
}

TEST(ReplyParser, NormalizedUnitsRescaledOnLargeImages) {
  auto r = parse_box_reply("{name: a, pos: [250, 500, 500, 750]}", 1920, 1440);
  EXPECT_EQ(r.box, (geometry::BoundingBox2D{360, 960, 720, 1440}));
  EXPECT_EQ(r.warnings.size(), 1u);
  // Same numbers on a small image are pixels.
  EXPECT_EQ(parse_box_reply("{name: a, pos: [250, 500, 500, 750]}", 960, 720).box,
            (geometry::BoundingBox2D{250, 500, 500, 750}));
}

TEST(ReplyParser, TranslationTargets) {
  auto r = parse_translation_reply("{name: printer bed, pos: [400, 300, 520, 700], target_pos: [480, 300]}", 960, 720);
  EXPECT_EQ(r.target, geometry::Point2(480, 300));
  try {
    parse_translation_reply("{name: printer bed, pos: [400, 300, 520, 700]}", 960, 720);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
  auto clamped = parse_translation_reply("{name: b, pos: [400, 300, 520, 700], target_pos: [1200, -5]}", 960, 720);
  EXPECT_EQ(clamped.target, geometry::Point2(959, 0));
  EXPECT_EQ(clamped.warnings.size(), 1u);
}

TEST(ReplyParser, RotationNormalization) {
  EXPECT_EQ(parse_rotation_reply("{rotation: [x, CCW]}"),
            (RotationResult{RotationAxis::kX, RotationDirection::kCounterclockwise}));
  EXPECT_EQ(parse_rotation_reply("{\"rotation\": [\"Y\", \"clockwise\"]}").direction, RotationDirection::kClockwise);
  EXPECT_EQ(parse_rotation_reply("{rotation: [z, counterclockwise]}").direction,
            RotationDirection::kCounterclockwise);
  EXPECT_EQ(parse_rotation_reply("{rotation: [z, counter-clockwise]}").direction,
            RotationDirection::kCounterclockwise);
  for (const char* bad : {"{rotation: [w, CW]}", "{rotation: [x, sideways]}", "{rotation: [x]}", "{axis: x}"}) {
    try {
      parse_rotation_reply(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParseError) << bad;
    }
  }
}

// Whatever numbers come back, a parsed box is ordered, inside the image and
// has positive area, or the parser throws.
TEST(ReplyParser, NoInvalidBoxEscapes) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> coord(-600, 2600);
  for (int i = 0; i < 5000; ++i) {
    const int w = 200 + static_cast<int>(rng() % 2000);
    const int h = 200 + static_cast<int>(rng() % 2000);
    const std::string reply = fmt::format("{{name: x, pos: [{}, {}, {}, {}]}}", coord(rng), coord(rng), coord(rng),
                                          coord(rng));
    try {
      const auto r = parse_box_reply(reply, w, h);
      EXPECT_TRUE(r.box.ordered()) << reply;
      EXPECT_GE(r.box.x_min, 0);
      EXPECT_GE(r.box.y_min, 0);
      EXPECT_LE(r.box.x_max, w);
      EXPECT_LE(r.box.y_max, h);
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::kParseError || e.code() == ErrorCode::kZeroAreaBox);
    }
  }
}

TEST(Gateway, PlanRetriesOnceAfterMalformedReply) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"{\"instructions\": [", kValidPlan});
  VisionGateway gw(backend, fast_config());
  auto r = gw.request_task_plan("how to cook rice", frame());
  EXPECT_EQ(r.retries, 1);
  EXPECT_EQ(r.plan.steps.size(), 1u);
  ASSERT_EQ(backend->requests.size(), 2u);
  EXPECT_EQ(backend->requests[1].attempt, 1);
  // Corrective feedback rides on the retry only.
  EXPECT_EQ(backend->requests[0].prompt.find("could not be used"), std::string::npos);
  EXPECT_NE(backend->requests[1].prompt.find("could not be used"), std::string::npos);
  EXPECT_EQ(gw.latency().size(), 2u);
}

TEST(Gateway, PlanSchemaViolationSurfacesAfterFinalRetry) {
  const std::string bad = R"({"instructions":[{"instruction":"wait","visual_type":5,"key_components":["oven","30"]}]})";
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{bad});
  VisionGateway gw(backend, fast_config());
  try {
    gw.request_task_plan("how to bake", frame());
    FAIL();
  } catch (const plan::PlanValidationError& e) {
    EXPECT_EQ(e.violations().at(0).reason, "not mm:ss");
  }
  EXPECT_EQ(backend->requests.size(), 3u);
  EXPECT_NE(backend->requests[2].prompt.find("key_components[1]"), std::string::npos);
}

TEST(Gateway, EvalModeIsOneShot) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"not json", kValidPlan});
  auto cfg = fast_config();
  cfg.eval_mode = true;
  VisionGateway gw(backend, cfg);
  EXPECT_THROW(gw.request_task_plan("q", frame()), Error);
  EXPECT_EQ(backend->requests.size(), 1u);
}

TEST(Gateway, BrandHintAndQueryTravelWithPlanPrompt) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{kValidPlan});
  VisionGateway gw(backend, fast_config());
  gw.request_task_plan("how to clean the 3D printer from this stage", frame());
  const auto& prompt = backend->requests.at(0).prompt;
  EXPECT_EQ(prompt.rfind(PromptLibrary::shipped().raw(PromptId::kPlan), 0), 0u);
  EXPECT_NE(prompt.find("device_brand"), std::string::npos);
  EXPECT_NE(prompt.find("how to clean the 3D printer from this stage"), std::string::npos);
  EXPECT_THROW(gw.request_task_plan("   ", frame()), Error);
}

TEST(Gateway, MissingCapabilityFailsBeforeAnyCall) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{kValidPlan},
                                                   std::set<Capability>{Capability::kBoundingBox});
  VisionGateway gw(backend, fast_config());
  try {
    gw.request_task_plan("q", frame());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingCapability);
  }
  EXPECT_TRUE(backend->requests.empty());
  EXPECT_EQ(gw.latency().size(), 0u);
}

TEST(Gateway, GroundingRetriesParseErrorsOnlyOnce) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"{pos: oops}", "{pos: broken}"});
  VisionGateway gw(backend, fast_config());
  EXPECT_THROW(gw.request_bounding_box(frame(), "knob"), Error);
  EXPECT_EQ(backend->requests.size(), 2u);

  auto recovering = std::make_shared<ScriptedBackend>(
      std::vector<std::string>{"{pos: oops}", "{name: knob, pos: [10, 10, 40, 60]}"});
  VisionGateway gw2(recovering, fast_config());
  EXPECT_EQ(gw2.request_bounding_box(frame(), "knob").box, (geometry::BoundingBox2D{10, 10, 40, 60}));
}

TEST(Gateway, UpstreamTimeoutIsNotRetried) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"!timeout"});
  VisionGateway gw(backend, fast_config());
  try {
    gw.request_bounding_box(frame(), "knob");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderTimeout);
  }
  EXPECT_EQ(backend->requests.size(), 1u);
  EXPECT_EQ(gw.latency().samples().at(0).outcome, CallOutcome::kTimeout);
}

TEST(Gateway, BackoffDoublesFromBase) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"x", "y", kValidPlan});
  auto cfg = fast_config();
  cfg.retry.backoff_base_s = 0.02;
  VisionGateway gw(backend, cfg);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(gw.request_task_plan("q", frame()).retries, 2);
  EXPECT_GE(std::chrono::steady_clock::now() - start, 60ms);  // 20 ms + 40 ms
}

TEST(Gateway, SegmentationMaskChecks) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{""});
  VisionGateway gw(backend, fast_config());
  const geometry::BoundingBox2D box{10, 20, 14.5, 26};  // 6 x 5 px crop
  SegmentationMask m;
  m.width = 6;
  m.height = 5;
  m.bits.assign(30, 0);
  backend->mask = m.to_image();
  try {
    gw.request_segmentation(frame(), box);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyMask);
  }
  m.bits[7] = 1;
  backend->mask = m.to_image();
  EXPECT_EQ(gw.request_segmentation(frame(), box).count(), 1u);
  backend->mask = Image(5, 5, 1, 255);
  try {
    gw.request_segmentation(frame(), box);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Gateway, LatencySamplesCarryVisualType) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"{name: k, pos: [1, 1, 9, 9]}"});
  VisionGateway gw(backend, fast_config());
  gw.request_bounding_box(frame(), "k", {plan::VisualType::kTool, "b/3", {}});
  gw.request_bounding_box(frame(), "k", {plan::VisualType::kWidget, "b/4", {}});
  ASSERT_EQ(gw.latency().samples_for(plan::VisualType::kTool).size(), 1u);
  const auto s = gw.latency().samples_for(plan::VisualType::kTool)[0];
  EXPECT_EQ(s.capability, Capability::kBoundingBox);
  EXPECT_EQ(s.tag, "b/3");
  EXPECT_GE(s.seconds, 0.0);
}

TEST(Gateway, ConfigValidation) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{""});
  GatewayConfig cfg;
  cfg.timeout = 0ms;
  EXPECT_THROW(VisionGateway(backend, cfg), Error);
  cfg.timeout = 10ms;
  cfg.max_in_flight = 0;
  EXPECT_THROW(VisionGateway(backend, cfg), Error);
}

class MockFixture : public ::testing::Test {
 protected:
  MockFixture() : dir_("guided_mock_fixture") {
    dir_.write("replies/box_generic.txt", "{name: knob, pos: [1, 1, 5, 5]}");
    dir_.write("replies/box_s1.txt", "```\n{name: The orange Start button, pos: [412, 655, 450, 710]}\n```");
    SegmentationMask m;
    m.width = 4;
    m.height = 4;
    m.bits.assign(16, 1);
    const auto png = encode_png(m.to_image());
    std::filesystem::create_directories(dir_.path / "masks");
    std::ofstream(dir_.path / "masks/m.png", std::ios::binary).write(reinterpret_cast<const char*>(png.data()),
                                                                      static_cast<std::streamsize>(png.size()));
    dir_.write("index.json", R"({"entries": [
      {"capability": "bbox", "component": "the orange start button", "reply": "replies/box_generic.txt"},
      {"capability": "bbox", "scene": "s1", "component": "The orange Start button", "reply": "replies/box_s1.txt"},
      {"capability": "bbox", "component": "stuck lever", "hang": true},
      {"capability": "bbox", "component": "slow lever", "delay_ms": 30, "text": "{name: l, pos: [1, 1, 5, 5]}"},
      {"capability": "rotation", "component": "forbidden", "refusal": true, "text": "cannot help"},
      {"capability": "rotation", "text": "{rotation: [x, CCW]}"},
      {"capability": "segmentation", "scene": "s1", "box": [10, 10, 14, 14], "mask": "masks/m.png"}
    ]})");
  }
  TempDir dir_;
};

TEST_F(MockFixture, SceneSpecificEntryWinsAndRepliesAreStable) {
  auto mock = MockBackend::load(dir_.path);
  VisionGateway gw(mock, fast_config());
  const auto a = gw.request_bounding_box(frame("s1"), "The  orange start Button");
  EXPECT_EQ(a.box, (geometry::BoundingBox2D{412, 655, 450, 710}));
  EXPECT_EQ(gw.request_bounding_box(frame("s9"), "The orange Start button").box,
            (geometry::BoundingBox2D{1, 1, 5, 5}));
  ProviderRequest req;
  req.capability = Capability::kBoundingBox;
  req.key_component = "The orange Start button";
  req.frames = {frame("s1")};
  EXPECT_EQ(mock->call(req, {}).text, mock->call(req, {}).text);
  EXPECT_EQ(gw.request_rotation_info(frame("s0"), frame("s1"), "toaster oven door", "open the door"),
            (RotationResult{RotationAxis::kX, RotationDirection::kCounterclockwise}));
  EXPECT_EQ(gw.request_segmentation(frame("s1"), {10, 10, 14, 14}).coverage(), 1.0);
}

TEST_F(MockFixture, UnknownRequestIsProviderError) {
  VisionGateway gw(MockBackend::load(dir_.path), fast_config());
  try {
    gw.request_bounding_box(frame(), "unlisted part");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderError);
  }
}

TEST_F(MockFixture, HangingProviderTimesOutWithLatencyRecorded) {
  auto cfg = fast_config();
  cfg.timeout = 80ms;
  VisionGateway gw(MockBackend::load(dir_.path), cfg);
  const auto start = std::chrono::steady_clock::now();
  try {
    gw.request_bounding_box(frame(), "stuck lever", {plan::VisualType::kMovement, "t", {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderTimeout);
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, 80ms);
  EXPECT_LT(elapsed, 2s);
  const auto samples = gw.latency().samples();
  ASSERT_EQ(samples.size(), 1u);  // not retried
  EXPECT_EQ(samples[0].outcome, CallOutcome::kTimeout);
  EXPECT_GE(samples[0].seconds, 0.08);
}

TEST_F(MockFixture, RefusalSurfaces) {
  VisionGateway gw(MockBackend::load(dir_.path), fast_config());
  try {
    gw.request_rotation_info(frame(), frame(), "forbidden", "do it");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderRefusal);
  }
  EXPECT_EQ(gw.latency().samples().at(0).outcome, CallOutcome::kRefused);
}

TEST_F(MockFixture, CancellationReleasesSlot) {
  auto cfg = fast_config();
  cfg.max_in_flight = 1;
  cfg.timeout = 10s;
  VisionGateway gw(MockBackend::load(dir_.path), cfg);
  std::stop_source cancel;
  std::thread canceller([&] {
    std::this_thread::sleep_for(50ms);
    cancel.request_stop();
  });
  try {
    gw.request_bounding_box(frame(), "stuck lever", {std::nullopt, "c", cancel.get_token()});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCancelled);
  }
  canceller.join();
  EXPECT_EQ(gw.latency().samples().at(0).outcome, CallOutcome::kCancelled);
  // The only slot is free again.
  EXPECT_NO_THROW(gw.request_bounding_box(frame(), "slow lever"));
}

TEST_F(MockFixture, InFlightLimitHolds) {
  class Counting : public VisionBackend {
   public:
    std::string name() const override { return "counting"; }
    std::set<Capability> capabilities() const override { return {Capability::kBoundingBox}; }
    ProviderReply call(const ProviderRequest&, std::stop_token) override {
      const int now = ++active;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(15ms);
      --active;
      return {"{name: k, pos: [1, 1, 9, 9]}", std::nullopt};
    }
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
  };
  auto backend = std::make_shared<Counting>();
  auto cfg = fast_config();
  cfg.max_in_flight = 2;
  VisionGateway gw(backend, cfg);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { gw.request_bounding_box(frame(), "k"); });
  for (auto& t : threads) t.join();
  EXPECT_LE(backend->peak.load(), 2);
  EXPECT_EQ(backend->peak.load(), 2);
  EXPECT_EQ(gw.latency().size(), 8u);
}

TEST(Codec, Base64AndDigest) {
  const std::string hello = "hello world!?";
  const std::vector<std::uint8_t> bytes(hello.begin(), hello.end());
  for (std::size_t n = 0; n <= bytes.size(); ++n) {
    const std::span<const std::uint8_t> part(bytes.data(), n);
    const auto back = codec::base64_decode(codec::base64_encode(part));
    EXPECT_EQ(std::vector<std::uint8_t>(part.begin(), part.end()), back);
  }
  EXPECT_EQ(codec::base64_encode(bytes), "aGVsbG8gd29ybGQhPw==");
  const std::string abc = "abc";
  EXPECT_EQ(codec::sha256_hex({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()}),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(codec::base64_decode("abc"), Error);
}
