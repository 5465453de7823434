#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ectsim {

enum class ResKind { Chan, Mutex, Wg, Cond };

const char* res_kind_name(ResKind k);
std::optional<ResKind> res_kind_from_name(const std::string& s);

// Goroutine and process categories are the reduced lifecycle rows; the rest
// is the concurrency-usage vocabulary with pre/post pairs around blocking ops.
enum class EventKind {
    RunBegin,
    RunEnd,
    GoCreate,
    GoStart,
    GoEnd,
    GoBlock,
    GoUnblock,
    SchedSwitch,
    ChMake,
    ChSendPre,
    ChSendPost,
    ChRecvPre,
    ChRecvPost,
    ChClose,
    MuLockPre,
    MuLockPost,
    MuUnlock,
    WgAdd,
    WgWaitPre,
    WgWaitPost,
    CvWaitPre,
    CvWaitPost,
    CvSignal,
    CvBroadcast,
    SelectPre,
    SelectPost,
};

const char* event_kind_name(EventKind k);
std::optional<EventKind> event_kind_from_name(const std::string& s);

bool is_pre_event(EventKind k);
bool is_post_event(EventKind k);
// The matching post kind for a pre kind.
EventKind post_of(EventKind pre);
// Channel/mutex/wg/cond/select usage events (the ECT extension vocabulary).
bool is_concurrency_event(EventKind k);

enum class BlockReason { Send, Recv, Lock, WgWait, CvWait, Select };

const char* block_reason_name(BlockReason r);

struct StackFrame {
    std::string func;
    std::string file;
    int line = 1;
    auto operator<=>(const StackFrame&) const = default;
};

// Deduplicated call-stack table: identical frame lists share one id.
class StackTable {
  public:
    int intern(const std::vector<StackFrame>& frames);
    const std::vector<StackFrame>& get(int id) const { return stacks_.at(static_cast<size_t>(id)); }
    size_t size() const { return stacks_.size(); }
    // For deserialization: appends with a fixed id (must be the next id).
    void push_raw(std::vector<StackFrame> frames);

    bool operator==(const StackTable& other) const { return stacks_ == other.stacks_; }

  private:
    std::vector<std::vector<StackFrame>> stacks_;
    std::map<std::vector<StackFrame>, int> index_;
};

struct Event {
    int id = 0;          // dense 0..n-1
    std::int64_t ts = 0; // logical timestamp, strictly increasing with id
    int g = 0;           // goroutine id; 0 is the runtime bootstrap
    EventKind kind = EventKind::RunBegin;
    std::optional<std::pair<ResKind, int>> resource;
    std::optional<std::int64_t> value;
    std::optional<std::int64_t> aux;  // select case index, block reason, unblock trigger
    int stack_id = 0;
    // Auxiliary key/value rows (Arguments table), e.g. select case lists.
    std::vector<std::pair<std::string, std::string>> args;

    bool operator==(const Event&) const = default;
};

}  // namespace ectsim
