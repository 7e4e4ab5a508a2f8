#ifndef CELLSCOPE_SERVICE_JOBS_HPP
#define CELLSCOPE_SERVICE_JOBS_HPP

#include "../error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace cellscope::service {

enum class JobState { Queued, Running, Done, Failed };

inline std::string_view to_string(JobState s) {
    switch (s) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
    }
    return "failed";
}

struct JobStatus {
    std::string job_id;
    std::string kind;
    std::string dataset_id;
    JobState state = JobState::Queued;
    double progress = 0;
    std::string reason;
    nlohmann::json result;

    nlohmann::json to_json() const {
        nlohmann::json j{{"job_id", job_id}, {"kind", kind}, {"dataset_id", dataset_id}, {"state", to_string(state)}, {"progress", progress}};
        if (state == JobState::Failed) {
            j["reason"] = reason;
        }
        if (state == JobState::Done && !result.is_null()) {
            j["result"] = result;
        }
        return j;
    }
};

/**
 * Background jobs, each on its own thread. Only one unfinished job may exist
 * per dataset.
 */
class JobRegistry {
public:
    using Work = std::function<nlohmann::json(const std::function<void(double)>&)>;

    JobRegistry() = default;
    JobRegistry(const JobRegistry&) = delete;
    JobRegistry& operator=(const JobRegistry&) = delete;

    ~JobRegistry() {
        std::vector<std::thread> threads;
        {
            std::lock_guard lock(mutex_);
            threads.swap(threads_);
        }
        for (auto& t : threads) {
            t.join();
        }
    }

    /// Start `work` for `dataset_id`; Conflict if that dataset already has an unfinished job.
    JobStatus submit(const std::string& kind, const std::string& dataset_id, Work work) {
        std::lock_guard lock(mutex_);
        if (busy_.count(dataset_id)) {
            throw Error(ErrorKind::Conflict, "dataset '" + dataset_id + "' already has a job in progress");
        }
        JobStatus status;
        status.job_id = "job-" + std::to_string(++counter_);
        status.kind = kind;
        status.dataset_id = dataset_id;
        jobs_[status.job_id] = status;
        busy_.insert(dataset_id);
        threads_.emplace_back([this, id = status.job_id, dataset_id, work = std::move(work)] { run(id, dataset_id, work); });
        return status;
    }

    std::optional<JobStatus> status(const std::string& job_id) const {
        std::lock_guard lock(mutex_);
        auto it = jobs_.find(job_id);
        if (it == jobs_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// Block until the job finishes or `timeout` passes.
    std::optional<JobStatus> wait(const std::string& job_id, std::chrono::milliseconds timeout) const {
        std::unique_lock lock(mutex_);
        finished_.wait_for(lock, timeout, [&] {
            auto it = jobs_.find(job_id);
            return it == jobs_.end() || it->second.state == JobState::Done || it->second.state == JobState::Failed;
        });
        auto it = jobs_.find(job_id);
        if (it == jobs_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

private:
    void run(const std::string& id, const std::string& dataset_id, const Work& work) {
        update(id, [](JobStatus& s) { s.state = JobState::Running; });
        try {
            auto result = work([&](double f) { update(id, [f](JobStatus& s) { s.progress = std::clamp(f, 0.0, 1.0); }); });
            update(id, [&](JobStatus& s) {
                s.state = JobState::Done;
                s.progress = 1;
                s.result = std::move(result);
            });
        } catch (const std::exception& e) {
            const std::string reason = e.what();
            update(id, [&](JobStatus& s) {
                s.state = JobState::Failed;
                s.reason = reason;
            });
        }
        {
            std::lock_guard lock(mutex_);
            busy_.erase(dataset_id);
        }
        finished_.notify_all();
    }

    template<class Fn>
    void update(const std::string& id, Fn fn) {
        std::lock_guard lock(mutex_);
        fn(jobs_[id]);
    }

    mutable std::mutex mutex_;
    mutable std::condition_variable finished_;
    std::map<std::string, JobStatus> jobs_;
    std::set<std::string> busy_;
    std::vector<std::thread> threads_;
    std::uint64_t counter_ = 0;
};

}

#endif
