#ifndef CELLSCOPE_SERVICE_SESSIONS_HPP
#define CELLSCOPE_SERVICE_SESSIONS_HPP

#include "../error.hpp"
#include "../presentation/view_state.hpp"
#include "../stats/types.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>

namespace cellscope::service {

/**
 * Authoritative selection and view state for one viewer. Callers hold
 * `mutex` while reading or changing the state.
 */
struct Session {
    std::string session_id;
    std::string dataset_id;
    stats::SelectionMask selection;
    presentation::ViewState view;
    std::mutex mutex;
};

class SessionRegistry {
public:
    std::shared_ptr<Session> create(const std::string& dataset_id, std::size_t n_cells, std::size_t annotation_count) {
        auto s = std::make_shared<Session>();
        s->dataset_id = dataset_id;
        s->selection = stats::SelectionMask({}, n_cells);
        s->view.annotation_count = annotation_count;
        std::lock_guard lock(mutex_);
        do {
            s->session_id = random_id();
        } while (sessions_.count(s->session_id));
        sessions_[s->session_id] = s;
        return s;
    }

    std::shared_ptr<Session> find(const std::string& id) const {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) {
            throw Error(ErrorKind::NotFound, "unknown session '" + id + "'");
        }
        return it->second;
    }

private:
    std::string random_id() {
        static constexpr char hex[] = "0123456789abcdef";
        std::string id;
        for (int i = 0; i < 4; ++i) {
            auto word = rng_();
            for (int k = 0; k < 8; ++k, word >>= 4) {
                id.push_back(hex[word & 0xf]);
            }
        }
        return id;
    }

    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::mt19937 rng_{std::random_device{}()};
};

}

#endif
