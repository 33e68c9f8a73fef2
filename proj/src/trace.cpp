#include "reader/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reader/errors.hpp"

namespace reader {

namespace {

const char* level_name(TraceEvent::Level lvl) {
    switch (lvl) {
        case TraceEvent::Level::Word: return "word";
        case TraceEvent::Level::Sentence: return "sentence";
        default: return "text";
    }
}

TraceEvent::Level parse_level(const std::string& s) {
    if (s == "word") return TraceEvent::Level::Word;
    if (s == "sentence") return TraceEvent::Level::Sentence;
    if (s == "text") return TraceEvent::Level::Text;
    throw SchemaError("unknown trace level: " + s);
}

}  // namespace

std::string ScanpathTrace::to_jsonl() const {
    nlohmann::json j;
    j["stimulus"] = stimulus_id;
    j["seed"] = seed;
    nlohmann::json evs = nlohmann::json::array();
    for (const auto& e : events) {
        nlohmann::json je;
        je["lvl"] = level_name(e.level);
        je["act"] = e.action;
        je["s"] = e.sentence;
        je["w"] = e.word;
        je["l"] = e.letter;
        je["dur"] = e.duration_ms;
        je["score"] = e.score;
        je["u"] = e.running;
        je["t"] = e.cum_ms;
        evs.push_back(std::move(je));
    }
    j["events"] = std::move(evs);
    j["outcomes"] = {
        {"comprehension", comprehension}, {"recall", recall},
        {"mcq_accuracy", mcq_accuracy},   {"mcq_correct", mcq_correct},
        {"mcq_total", mcq_total},         {"total_ms", total_ms},
        {"fixations", fixation_count},    {"partial", partial},
        {"all_read", all_read},
    };
    return j.dump();
}

ScanpathTrace ScanpathTrace::from_jsonl(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    ScanpathTrace t;
    t.stimulus_id = j.at("stimulus").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& je : j.at("events")) {
        TraceEvent e;
        e.level = parse_level(je.at("lvl").get<std::string>());
        e.action = je.at("act").get<std::string>();
        e.sentence = je.at("s").get<int>();
        e.word = je.at("w").get<int>();
        e.letter = je.at("l").get<int>();
        e.duration_ms = je.at("dur").get<double>();
        e.score = je.at("score").get<double>();
        e.running = je.at("u").get<double>();
        e.cum_ms = je.at("t").get<double>();
        t.events.push_back(std::move(e));
    }
    const auto& o = j.at("outcomes");
    t.comprehension = o.at("comprehension").get<double>();
    t.recall = o.at("recall").get<double>();
    t.mcq_accuracy = o.at("mcq_accuracy").get<double>();
    t.mcq_correct = o.at("mcq_correct").get<int>();
    t.mcq_total = o.at("mcq_total").get<int>();
    t.total_ms = o.at("total_ms").get<double>();
    t.fixation_count = o.at("fixations").get<int>();
    t.partial = o.at("partial").get<bool>();
    t.all_read = o.at("all_read").get<bool>();
    return t;
}

std::string validate_trace(const ScanpathTrace& trace) {
    double last_t = 0.0;
    int open_sentence = -1;  // sentence index of the enclosing text action
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        const TraceEvent& e = trace.events[i];
        if (e.cum_ms + 1e-9 < last_t)
            return "timestamp decreases at event " + std::to_string(i);
        last_t = e.cum_ms;
        if (e.level == TraceEvent::Level::Text) {
            if (e.action == "read" || e.action == "regress") {
                if (open_sentence >= 0)
                    return "nested text action at event " + std::to_string(i);
                open_sentence = e.sentence;
            } else if (e.action == "appraise") {
                if (open_sentence != e.sentence)
                    return "appraise without matching read at event " + std::to_string(i);
                open_sentence = -1;
            }
        } else {
            if (open_sentence < 0)
                return "lower-level event outside a text action at event " + std::to_string(i);
            if (e.sentence != open_sentence)
                return "event sentence does not match enclosing text action at event " +
                       std::to_string(i);
        }
    }
    if (open_sentence >= 0) return "unterminated text action";
    return std::string();
}

void write_traces(const std::string& path, const std::vector<ScanpathTrace>& traces) {
    std::ofstream out(path);
    if (!out) throw ReaderError("cannot write trace file: " + path);
    for (const auto& t : traces) out << t.to_jsonl() << '\n';
}

std::vector<ScanpathTrace> read_traces(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ReaderError("cannot open trace file: " + path);
    std::vector<ScanpathTrace> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(ScanpathTrace::from_jsonl(line));
    }
    return out;
}

// ---- SVG rendering ----

namespace {

struct WordBox {
    double x = 0, y = 0, w = 0;
    int sentence = 0, word = 0;
};

constexpr double kCharW = 9.0;
constexpr double kLineH = 46.0;
constexpr double kMargin = 30.0;
constexpr double kMaxLineW = 900.0;

}  // namespace

std::string render_scanpath_svg(const ScanpathTrace& trace,
                                const std::vector<std::vector<std::string>>& sentences) {
    // Lay the text out with wrapping.
    std::vector<std::vector<WordBox>> boxes(sentences.size());
    double x = kMargin, y = kMargin + 20.0;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        boxes[s].resize(sentences[s].size());
        for (std::size_t w = 0; w < sentences[s].size(); ++w) {
            const double width = kCharW * static_cast<double>(sentences[s][w].size());
            if (x + width > kMaxLineW) {
                x = kMargin;
                y += kLineH;
            }
            boxes[s][w] = WordBox{x, y, width, static_cast<int>(s), static_cast<int>(w)};
            x += width + kCharW;
        }
    }
    const double text_height = y + kLineH;

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kMaxLineW + kMargin
        << "' height='" << text_height + kMargin << "' font-family='monospace' font-size='14'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    for (std::size_t s = 0; s < sentences.size(); ++s)
        for (std::size_t w = 0; w < sentences[s].size(); ++w) {
            const WordBox& b = boxes[s][w];
            svg << "<text x='" << b.x << "' y='" << b.y << "' fill='#333'>" << sentences[s][w]
                << "</text>\n";
        }

    // Fixation dots and saccade lines. A fixation counts as a regression when
    // the gaze had already moved past its word.
    double prev_x = -1, prev_y = -1;
    long best_pos = -1;  // furthest (sentence, word) reached, flattened
    auto flat = [&](int s, int w) {
        long pos = 0;
        for (int i = 0; i < s; ++i) pos += static_cast<long>(sentences[static_cast<std::size_t>(i)].size());
        return pos + w;
    };
    for (const auto& e : trace.events) {
        if (e.level == TraceEvent::Level::Word && e.action == "fixate") {
            if (e.sentence < 0 || e.sentence >= static_cast<int>(boxes.size())) continue;
            const auto& row = boxes[static_cast<std::size_t>(e.sentence)];
            if (e.word < 0 || e.word >= static_cast<int>(row.size())) continue;
            const WordBox& b = row[static_cast<std::size_t>(e.word)];
            const double fx = b.x + kCharW * (static_cast<double>(e.letter) + 0.5);
            const double fy = b.y + 10.0;
            const long pos = flat(e.sentence, e.word);
            const bool regression = pos < best_pos;
            best_pos = std::max(best_pos, pos);
            const char* color = regression ? "#2a9d2a" : "#d03030";
            const double r = 2.0 + e.duration_ms / 40.0;
            if (prev_x >= 0)
                svg << "<line x1='" << prev_x << "' y1='" << prev_y << "' x2='" << fx << "' y2='"
                    << fy << "' stroke='" << color << "' stroke-width='1' opacity='0.6'/>\n";
            svg << "<circle cx='" << fx << "' cy='" << fy << "' r='" << r << "' fill='" << color
                << "' fill-opacity='0.55'/>\n";
            prev_x = fx;
            prev_y = fy;
        } else if (e.level == TraceEvent::Level::Sentence && e.action == "skip") {
            if (e.sentence < 0 || e.sentence >= static_cast<int>(boxes.size())) continue;
            const auto& row = boxes[static_cast<std::size_t>(e.sentence)];
            if (e.word < 0 || e.word >= static_cast<int>(row.size())) continue;
            const WordBox& b = row[static_cast<std::size_t>(e.word)];
            svg << "<rect x='" << b.x - 2 << "' y='" << b.y - 14 << "' width='" << b.w + 4
                << "' height='18' fill='none' stroke='#3060d0' stroke-dasharray='3,2'/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace reader
