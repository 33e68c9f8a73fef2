#include "reader/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "reader/errors.hpp"

namespace reader {

namespace {

bool is_word_char(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '\'';
}

double parse_count(const std::string& s, std::size_t line) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("non-numeric count '" + s + "'", line);
    }
    if (pos != s.size() || !std::isfinite(v) || v < 0.0)
        throw ParseError("non-numeric count '" + s + "'", line);
    return v;
}

}  // namespace

std::string normalize_word(const std::string& raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && !is_word_char(raw[b])) ++b;
    while (e > b && !is_word_char(raw[e - 1])) --e;
    std::string out;
    out.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) {
        char c = raw[i];
        if (std::isalpha(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else if (c == '\'' && !out.empty() && i + 1 < e)
            out.push_back(c);  // keep contractions whole
    }
    bool has_alpha = false;
    for (char c : out)
        if (std::isalpha(static_cast<unsigned char>(c))) has_alpha = true;
    return has_alpha ? out : std::string();
}

std::vector<std::string> tokenize_sentence(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        std::string norm = normalize_word(tok);
        if (!norm.empty()) out.push_back(norm);
    }
    return out;
}

// ---- Lexicon ----

Lexicon Lexicon::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ReaderError("cannot open lexicon file: " + path);
    std::vector<std::pair<std::string, double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t tab = line.find_first_of("\t ");
        if (tab == std::string::npos) throw ParseError("expected word<TAB>count", lineno);
        std::string word = normalize_word(line.substr(0, tab));
        std::string count = line.substr(tab + 1);
        while (!count.empty() && (count.front() == ' ' || count.front() == '\t')) count.erase(count.begin());
        if (word.empty()) throw ParseError("empty word", lineno);
        rows.emplace_back(std::move(word), parse_count(count, lineno));
    }
    if (rows.empty()) throw LexiconEmpty();
    return from_counts(rows);
}

Lexicon Lexicon::from_counts(const std::vector<std::pair<std::string, double>>& counts) {
    if (counts.empty()) throw LexiconEmpty();
    std::map<std::string, double> merged;
    for (const auto& [w, c] : counts) {
        std::string norm = normalize_word(w);
        if (norm.empty()) continue;
        merged[norm] += c;
    }
    if (merged.empty()) throw LexiconEmpty();
    Lexicon lex;
    for (const auto& [w, c] : merged) {
        Entry e;
        e.count_per_million = c;
        e.length = static_cast<int>(w.size());
        lex.index_[w] = lex.words_.size();
        lex.words_.push_back(w);
        lex.entries_.push_back(e);
    }
    lex.finalize();
    return lex;
}

void Lexicon::finalize() {
    double total = 0.0;
    for (const auto& e : entries_) total += e.count_per_million;
    if (total <= 0.0) throw LexiconEmpty();
    for (auto& e : entries_) {
        e.prior = e.count_per_million / total;
        e.log10_freq = std::log10(std::max(e.count_per_million, 1e-12));
    }
}

void Lexicon::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ReaderError("cannot write lexicon file: " + path);
    out.precision(17);
    for (std::size_t i = 0; i < words_.size(); ++i)
        out << words_[i] << '\t' << entries_[i].count_per_million << '\n';
}

const Lexicon::Entry& Lexicon::entry(const std::string& w) const {
    auto it = index_.find(w);
    if (it == index_.end()) throw UnknownWord(w);
    return entries_[it->second];
}

std::optional<std::size_t> Lexicon::find(const std::string& w) const {
    auto it = index_.find(w);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

// ---- ContextPredictor ----

namespace {
std::string join_tokens(const std::vector<std::string>& toks, std::size_t begin, std::size_t end) {
    std::string key;
    for (std::size_t i = begin; i < end; ++i) {
        if (!key.empty()) key.push_back(' ');
        key += toks[i];
    }
    return key;
}
}  // namespace

ContextPredictor::ContextPredictor(const Lexicon* lexicon, int order, double add_k)
    : lexicon_(lexicon), order_(order), add_k_(add_k) {
    if (order < 1) throw ConfigError("n-gram order must be >= 1");
    if (add_k <= 0.0) throw ConfigError("add-k constant must be > 0");
    counts_.resize(static_cast<std::size_t>(order));   // level L = context length L
    totals_.resize(static_cast<std::size_t>(order));
}

void ContextPredictor::observe_sentence(const std::vector<std::string>& tokens) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto idx = lexicon_->find(tokens[i]);
        if (!idx) continue;  // out-of-vocabulary targets carry no trainable mass
        const std::size_t max_ctx = std::min<std::size_t>(static_cast<std::size_t>(order_ - 1), i);
        for (std::size_t L = 1; L <= max_ctx; ++L) {
            const std::string key = join_tokens(tokens, i - L, i);
            counts_[L][key][*idx] += 1.0;
            totals_[L][key] += 1.0;
        }
    }
}

ContextPredictor ContextPredictor::train(const Lexicon* lexicon,
                                         const std::vector<std::vector<std::string>>& corpus,
                                         int order, double add_k) {
    ContextPredictor p(lexicon, order, add_k);
    for (const auto& sent : corpus) p.observe_sentence(sent);
    return p;
}

std::vector<double> ContextPredictor::predict(const std::vector<std::string>& context) const {
    const std::size_t vocab = lexicon_->size();
    std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(order_ - 1), context.size());
    // Back off to the longest suffix with observed continuations.
    while (use > 0) {
        const std::string key = join_tokens(context, context.size() - use, context.size());
        auto tot = totals_[use].find(key);
        if (tot != totals_[use].end() && tot->second > 0.0) {
            std::vector<double> dist(vocab, 0.0);
            const double denom = tot->second + add_k_ * static_cast<double>(vocab);
            for (std::size_t i = 0; i < vocab; ++i) dist[i] = add_k_ / denom;
            for (const auto& [idx, c] : counts_[use].at(key)) dist[idx] += c / denom;
            return dist;
        }
        --use;
    }
    // Empty context: the lexicon prior exactly.
    std::vector<double> dist(vocab, 0.0);
    for (std::size_t i = 0; i < vocab; ++i) dist[i] = lexicon_->entry_at(i).prior;
    return dist;
}

double ContextPredictor::predictability(const std::vector<std::string>& context,
                                        const std::string& word) const {
    auto idx = lexicon_->find(word);
    if (!idx) throw UnknownWord(word);
    return predict(context)[*idx];
}

// ---- Stimulus ----

std::size_t Stimulus::word_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
}

std::optional<double> Stimulus::predictability_override(int sentence, int word) const {
    auto it = predictability_table.find({sentence, word});
    if (it == predictability_table.end()) return std::nullopt;
    return it->second;
}

Stimulus Stimulus::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ReaderError("cannot open stimulus file: " + path);
    std::stringstream body;
    body << in.rdbuf();
    Stimulus s = from_text(path, body.str());
    if (s.id.empty()) s.id = path;
    return s;
}

Stimulus Stimulus::from_text(const std::string& id, const std::string& body) {
    Stimulus s;
    s.id = id;
    std::istringstream in(body);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) trimmed.erase(trimmed.begin());
        while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.pop_back();
        if (trimmed.empty() || trimmed[0] == '#') continue;
        if (trimmed.front() == '[') {
            if (trimmed.back() != ']') throw ParseError("malformed section header '" + trimmed + "'", lineno);
            section = trimmed.substr(1, trimmed.size() - 2);
            if (section != "meta" && section != "text" && section != "propositions" &&
                section != "predictability")
                throw ParseError("unknown section '" + section + "'", lineno);
            continue;
        }
        if (section == "meta") {
            const std::size_t eq = trimmed.find('=');
            if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
            std::string key = trimmed.substr(0, eq);
            std::string val = trimmed.substr(eq + 1);
            while (!key.empty() && key.back() == ' ') key.pop_back();
            while (!val.empty() && val.front() == ' ') val.erase(val.begin());
            if (key == "id") s.id = val;
            else if (key == "title") s.title = val;
            else if (key == "knowledge") s.knowledge = val;
        } else if (section == "text") {
            std::vector<std::string> words = tokenize_sentence(trimmed);
            if (!words.empty()) {
                s.sentences.push_back(words);
                std::vector<std::string> surface;
                std::istringstream ws(trimmed);
                std::string tok;
                while (ws >> tok)
                    if (!normalize_word(tok).empty()) surface.push_back(tok);
                s.surface_sentences.push_back(surface);
            }
        } else if (section == "propositions") {
            std::array<std::string, 3> trip;
            std::size_t a = trimmed.find('|');
            std::size_t b = (a == std::string::npos) ? std::string::npos : trimmed.find('|', a + 1);
            if (a == std::string::npos || b == std::string::npos)
                throw ParseError("expected concept|relation|concept", lineno);
            trip[0] = normalize_word(trimmed.substr(0, a));
            trip[1] = normalize_word(trimmed.substr(a + 1, b - a - 1));
            trip[2] = normalize_word(trimmed.substr(b + 1));
            if (trip[0].empty() || trip[2].empty())
                throw ParseError("empty concept in proposition", lineno);
            s.gold_propositions.push_back(trip);
        } else if (section == "predictability") {
            std::istringstream row(trimmed);
            int si = 0, wi = 0;
            double p = 0.0;
            if (!(row >> si >> wi >> p)) throw ParseError("expected `sentence word p`", lineno);
            s.predictability_table[{si, wi}] = p;
        } else {
            throw ParseError("content before any section header", lineno);
        }
    }
    if (s.sentences.empty()) throw StimulusEmpty();
    return s;
}

void Stimulus::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ReaderError("cannot write stimulus file: " + path);
    out << "[meta]\n";
    out << "id = " << id << "\n";
    if (!title.empty()) out << "title = " << title << "\n";
    if (!knowledge.empty()) out << "knowledge = " << knowledge << "\n";
    out << "[text]\n";
    const auto& src = surface_sentences.empty() ? sentences : surface_sentences;
    for (const auto& sent : src) {
        for (std::size_t i = 0; i < sent.size(); ++i) out << (i ? " " : "") << sent[i];
        out << "\n";
    }
    if (!gold_propositions.empty()) {
        out << "[propositions]\n";
        for (const auto& p : gold_propositions) out << p[0] << '|' << p[1] << '|' << p[2] << "\n";
    }
    if (!predictability_table.empty()) {
        out << "[predictability]\n";
        out.precision(17);
        for (const auto& [k, v] : predictability_table)
            out << k.first << ' ' << k.second << ' ' << v << "\n";
    }
}

}  // namespace reader
