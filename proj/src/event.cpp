#include "ectsim/event.hpp"

namespace ectsim {

const char* res_kind_name(ResKind k) {
    switch (k) {
        case ResKind::Chan: return "CHAN";
        case ResKind::Mutex: return "MUTEX";
        case ResKind::Wg: return "WG";
        case ResKind::Cond: return "COND";
    }
    return "?";
}

std::optional<ResKind> res_kind_from_name(const std::string& s) {
    if (s == "CHAN") return ResKind::Chan;
    if (s == "MUTEX") return ResKind::Mutex;
    if (s == "WG") return ResKind::Wg;
    if (s == "COND") return ResKind::Cond;
    return std::nullopt;
}

namespace {
struct KindName {
    EventKind kind;
    const char* name;
};
constexpr KindName kKindNames[] = {
    {EventKind::RunBegin, "RUN_BEGIN"},
    {EventKind::RunEnd, "RUN_END"},
    {EventKind::GoCreate, "GO_CREATE"},
    {EventKind::GoStart, "GO_START"},
    {EventKind::GoEnd, "GO_END"},
    {EventKind::GoBlock, "GO_BLOCK"},
    {EventKind::GoUnblock, "GO_UNBLOCK"},
    {EventKind::SchedSwitch, "SCHED_SWITCH"},
    {EventKind::ChMake, "CH_MAKE"},
    {EventKind::ChSendPre, "CH_SEND_PRE"},
    {EventKind::ChSendPost, "CH_SEND_POST"},
    {EventKind::ChRecvPre, "CH_RECV_PRE"},
    {EventKind::ChRecvPost, "CH_RECV_POST"},
    {EventKind::ChClose, "CH_CLOSE"},
    {EventKind::MuLockPre, "MU_LOCK_PRE"},
    {EventKind::MuLockPost, "MU_LOCK_POST"},
    {EventKind::MuUnlock, "MU_UNLOCK"},
    {EventKind::WgAdd, "WG_ADD"},
    {EventKind::WgWaitPre, "WG_WAIT_PRE"},
    {EventKind::WgWaitPost, "WG_WAIT_POST"},
    {EventKind::CvWaitPre, "CV_WAIT_PRE"},
    {EventKind::CvWaitPost, "CV_WAIT_POST"},
    {EventKind::CvSignal, "CV_SIGNAL"},
    {EventKind::CvBroadcast, "CV_BROADCAST"},
    {EventKind::SelectPre, "SELECT_PRE"},
    {EventKind::SelectPost, "SELECT_POST"},
};
}  // namespace

const char* event_kind_name(EventKind k) {
    for (const auto& kn : kKindNames)
        if (kn.kind == k) return kn.name;
    return "?";
}

std::optional<EventKind> event_kind_from_name(const std::string& s) {
    for (const auto& kn : kKindNames)
        if (s == kn.name) return kn.kind;
    return std::nullopt;
}

bool is_pre_event(EventKind k) {
    switch (k) {
        case EventKind::ChSendPre:
        case EventKind::ChRecvPre:
        case EventKind::MuLockPre:
        case EventKind::WgWaitPre:
        case EventKind::CvWaitPre:
        case EventKind::SelectPre:
            return true;
        default:
            return false;
    }
}

bool is_post_event(EventKind k) {
    switch (k) {
        case EventKind::ChSendPost:
        case EventKind::ChRecvPost:
        case EventKind::MuLockPost:
        case EventKind::WgWaitPost:
        case EventKind::CvWaitPost:
        case EventKind::SelectPost:
            return true;
        default:
            return false;
    }
}

EventKind post_of(EventKind pre) {
    switch (pre) {
        case EventKind::ChSendPre: return EventKind::ChSendPost;
        case EventKind::ChRecvPre: return EventKind::ChRecvPost;
        case EventKind::MuLockPre: return EventKind::MuLockPost;
        case EventKind::WgWaitPre: return EventKind::WgWaitPost;
        case EventKind::CvWaitPre: return EventKind::CvWaitPost;
        case EventKind::SelectPre: return EventKind::SelectPost;
        default: return pre;
    }
}

bool is_concurrency_event(EventKind k) {
    switch (k) {
        case EventKind::ChMake:
        case EventKind::ChSendPre:
        case EventKind::ChSendPost:
        case EventKind::ChRecvPre:
        case EventKind::ChRecvPost:
        case EventKind::ChClose:
        case EventKind::MuLockPre:
        case EventKind::MuLockPost:
        case EventKind::MuUnlock:
        case EventKind::WgAdd:
        case EventKind::WgWaitPre:
        case EventKind::WgWaitPost:
        case EventKind::CvWaitPre:
        case EventKind::CvWaitPost:
        case EventKind::CvSignal:
        case EventKind::CvBroadcast:
        case EventKind::SelectPre:
        case EventKind::SelectPost:
            return true;
        default:
            return false;
    }
}

const char* block_reason_name(BlockReason r) {
    switch (r) {
        case BlockReason::Send: return "SEND";
        case BlockReason::Recv: return "RECV";
        case BlockReason::Lock: return "LOCK";
        case BlockReason::WgWait: return "WGWAIT";
        case BlockReason::CvWait: return "CVWAIT";
        case BlockReason::Select: return "SELECT";
    }
    return "?";
}

int StackTable::intern(const std::vector<StackFrame>& frames) {
    auto it = index_.find(frames);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(stacks_.size());
    stacks_.push_back(frames);
    index_[frames] = id;
    return id;
}

void StackTable::push_raw(std::vector<StackFrame> frames) {
    int id = static_cast<int>(stacks_.size());
    index_[frames] = id;
    stacks_.push_back(std::move(frames));
}

}  // namespace ectsim
