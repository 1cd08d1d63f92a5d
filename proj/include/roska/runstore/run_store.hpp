#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "roska/common/errors.hpp"

#include "nlohmann/json.hpp"

namespace roska::runstore {

using Event = nlohmann::ordered_json;
/// Consumers of the run event stream; may be empty.
using EventSink = std::function<void(const Event&)>;

/// One writer per run directory. Layout:
///   <dir>/config.json, events.jsonl, prompts/, checkpoints/, report.json,
///   report.csv, plots/
class RunStore {
public:
    explicit RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        std::filesystem::create_directories(dir_ / "prompts");
        std::filesystem::create_directories(dir_ / "checkpoints");
        std::filesystem::create_directories(dir_ / "plots");
        events_.open(dir_ / "events.jsonl");
        if (!events_) throw Error("cannot open event log in " + dir_.string());
    }

    const std::filesystem::path& dir() const { return dir_; }

    void append_event(const Event& e) {
        events_ << e.dump() << "\n";
        events_.flush();
    }

    EventSink event_sink() {
        return [this](const Event& e) { append_event(e); };
    }

    void write_json(const std::string& relative, const nlohmann::ordered_json& j) {
        std::ofstream out(dir_ / relative);
        if (!out) throw Error("cannot write " + relative);
        out << j.dump(2) << "\n";
    }

    void write_text(const std::string& relative, const std::string& text) {
        std::ofstream out(dir_ / relative);
        if (!out) throw Error("cannot write " + relative);
        out << text;
    }

private:
    std::filesystem::path dir_;
    std::ofstream events_;
};

/// Reads back a run's event stream; accepts a run directory or a .jsonl path.
inline std::vector<Event> load_events(const std::filesystem::path& path) {
    std::filesystem::path file = path;
    if (std::filesystem::is_directory(file)) file /= "events.jsonl";
    std::ifstream in(file);
    if (!in) throw IncompleteRun("missing event log: " + file.string());
    std::vector<Event> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        events.push_back(nlohmann::ordered_json::parse(line));
    }
    return events;
}

}  // namespace roska::runstore
