#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "softgrip/geometry.hpp"
#include "softgrip/image.hpp"
#include "softgrip/policy.hpp"

namespace softgrip::agent {

// Workflow stages. Adapt is only reachable from a Record with an abnormal
// outcome; every episode ends in Done.
enum class Stage { enhance, identify, grasp_area, execute, record, adapt, done };

std::string to_string(Stage stage);
bool valid_transition(Stage from, Stage to);
bool valid_stage_sequence(std::span<const Stage> stages);

struct Detection {
    std::string label;
    std::optional<policy::MaterialClass> material;
    Rect box;
    double confidence = 0.0;

    bool is_gripper() const; // gripper-labeled detections are never targets
};

struct VisionRequest {
    std::string prompt;
    std::string image_b64; // base64 of the serialized PNM image
    std::vector<std::string> tools;
};

struct VisionResponse {
    std::vector<Detection> detections;
    std::optional<Rect> grasp_box;
    std::optional<policy::StiffnessLevel> level;
};

std::string base64_encode(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Raised on connection/timeout style failures (retried with bounded backoff).
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Raised when a response does not satisfy the wire schema.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Raised on missing fixtures or endpoint misconfiguration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class VisionClient {
public:
    virtual ~VisionClient() = default;
    // Returns the raw JSON response body.
    virtual std::string query_raw(const VisionRequest& request) = 0;
};

// Serves canned responses from a directory of <content-hash>.json files keyed
// by the hash of the image embedded in the request.
class MockVisionClient : public VisionClient {
public:
    explicit MockVisionClient(std::filesystem::path fixtures_dir);
    std::string query_raw(const VisionRequest& request) override;

private:
    std::filesystem::path fixtures_dir_;
};

// POST {prompt, image_b64, tools} as JSON; expects the detection schema back.
class HttpVisionClient : public VisionClient {
public:
    HttpVisionClient(std::string host, int port, std::string path = "/v1/grasp",
                     int timeout_s = 10);
    std::string query_raw(const VisionRequest& request) override;

private:
    std::string host_;
    int port_;
    std::string path_;
    int timeout_s_;
};

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 100; // doubles per attempt
};

std::string to_json_string(const VisionRequest& request);
VisionResponse parse_vision_response(const std::string& body, int image_w, int image_h);

// Queries the client, validates the response schema against the image bounds
// and retries transport failures before giving up.
VisionResponse query_vision_model(const VisionRequest& request, int image_w, int image_h,
                                  VisionClient& client, const RetryPolicy& retry = {});

std::vector<Detection> target_detections(const VisionResponse& response);

struct GraspSelection {
    Detection target;
    Rect box;
};

// Highest-confidence target (ties: larger box, then leftmost). The grasp box
// is the model suggestion when present, else the central third of the
// detection box clamped to the image.
std::optional<GraspSelection> select_grasp_area(const VisionResponse& response, int image_w,
                                                int image_h);

// Deterministic prompt: role, task, tools, guidelines, then a digest of the
// most recent `memory_window` outcome notes.
std::string build_prompt(const std::string& task, std::span<const std::string> tools,
                         std::span<const std::string> memory, std::size_t memory_window = 5);

struct ExecutionResult {
    policy::Outcome outcome = policy::Outcome::correct;
    policy::FailureMode failure = policy::FailureMode::none;
    bool hard_surface_cue = false;
};

class GripExecutor {
public:
    virtual ~GripExecutor() = default;
    virtual ExecutionResult execute(const policy::GripPlan& plan, const Detection& target) = 0;
};

// Plays back a fixed outcome script (fixture episodes); repeats the last entry.
class ScriptedExecutor : public GripExecutor {
public:
    explicit ScriptedExecutor(std::vector<ExecutionResult> script);
    ExecutionResult execute(const policy::GripPlan& plan, const Detection& target) override;

private:
    std::vector<ExecutionResult> script_;
    std::size_t next_ = 0;
};

// Seeded simulated gripper: success probability falls with the mismatch
// between the planned level and the object's true level; too-soft failures
// slip, too-hard failures crush.
class StochasticExecutor : public GripExecutor {
public:
    StochasticExecutor(std::uint64_t seed, policy::StiffnessLevel true_level);
    ExecutionResult execute(const policy::GripPlan& plan, const Detection& target) override;

private:
    std::uint64_t state_;
    policy::StiffnessLevel true_level_;
};

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::string now() = 0;
};

class SystemClock : public Clock {
public:
    std::string now() override; // UTC, ISO 8601
};

// Monotonic counter timestamps for byte-stable fixtures.
class LogicalClock : public Clock {
public:
    std::string now() override;

private:
    std::uint64_t ticks_ = 0;
};

struct EnhancementRecord {
    bool applied = false;
    image::EnhanceMode mode = image::EnhanceMode::none;
    double gamma = 1.0;
    bool equalize = false;
    bool fallback = false; // external hook failed, built-in used instead
};

struct StageEvent {
    Stage stage = Stage::enhance;
    std::string timestamp;
};

struct Episode {
    std::string id;
    std::string image_ref;
    EnhancementRecord enhancement;
    std::vector<StageEvent> stages;
    std::optional<policy::GripPlan> plan; // final plan after any adaptation
    std::vector<policy::OutcomeRecord> outcomes;
    int retry_count = 0;
    std::string final_status; // correct | no-target | abnormal | aborted
    std::string abort_reason;

    std::string to_json_line() const;
    static Episode from_json_line(const std::string& line);
};

// JSON-lines episode store with a schema-versioned header line.
class EpisodeLedger {
public:
    static constexpr int kSchemaVersion = 1;

    explicit EpisodeLedger(std::filesystem::path file);
    void append(const Episode& episode);
    std::vector<Episode> read_all() const;
    const std::filesystem::path& path() const { return file_; }

private:
    std::filesystem::path file_;
};

// JSON-lines store of bare outcome records, one per line after a
// schema-versioned header. Appends are serialized by the caller.
class OutcomeLedger {
public:
    static constexpr int kSchemaVersion = 1;

    explicit OutcomeLedger(std::filesystem::path file);
    void append(const policy::OutcomeRecord& record);
    std::vector<policy::OutcomeRecord> read_all() const;
    const std::filesystem::path& path() const { return file_; }

private:
    std::filesystem::path file_;
};

// One-line outcome note used for the prompt memory digest.
std::string summarize(const Episode& episode);

struct AgentConfig {
    image::GateThresholds gates;
    double gamma_brighten = 0.5;
    double gamma_darken = 2.0;
    bool equalize = true;
    std::string external_enhancer; // subprocess command; empty = built-in only
    int max_retries = 2;
    std::size_t memory_window = 5;
    std::string task = "Identify the object to grasp and plan the grip.";
    std::vector<std::string> tools = {"brightness_enhancer", "grip_executor"};
    policy::PretensionTable pretension;
    RetryPolicy transport_retry;
};

struct AgentContext {
    AgentContext(VisionClient& vision_client, GripExecutor& grip_executor, Clock& episode_clock)
        : vision(vision_client), executor(grip_executor), clock(episode_clock) {}

    VisionClient& vision;
    GripExecutor& executor;
    Clock& clock;
    std::vector<std::string> memory; // recent outcome notes, oldest first
    std::string episode_id = "ep-0001";
    std::string image_ref = "image";
    EpisodeLedger* ledger = nullptr; // appended exactly once when set
    const policy::Lexicon* lexicon = nullptr; // defaults to the built-in table
};

// Runs Enhance -> Identify -> GraspArea -> Execute -> Record, adapting and
// retrying on abnormal outcomes up to max_retries. Fully deterministic under
// the mock client, scripted executor and logical clock.
Episode run_episode(const image::Image& img, const AgentConfig& config, AgentContext& ctx);

} // namespace softgrip::agent
