#include "ambigen/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "ambigen/errors.hpp"
#include "ambigen/image_ops.hpp"
#include "ambigen/layout.hpp"
#include "ambigen/sha256.hpp"

namespace ambigen {

int edit_distance(const std::string& s, const std::string& t) {
    size_t n = s.size(), m = t.size();
    std::vector<int> row(m + 1);
    for (size_t j = 0; j <= m; ++j) row[j] = int(j);
    for (size_t i = 1; i <= n; ++i) {
        int diag = row[0];
        row[0] = int(i);
        for (size_t j = 1; j <= m; ++j) {
            int sub = diag + (s[i - 1] != t[j - 1]);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
        }
    }
    return row[m];
}

std::string StubOcr::recognize(const Raster& img) {
    if (img.size() == 0) throw OcrFailure("stub ocr got an empty image");
    std::string hash = sha256_hex(img.ink.data(), img.ink.size() * sizeof(double));
    int cells = img.height > 0 ? std::max(1, img.width / img.height) : 1;
    std::string word;
    for (int i = 0; i < cells; ++i) {
        unsigned byte = unsigned(std::stoi(hash.substr(size_t(i) * 2 % 60, 2), nullptr, 16));
        word.push_back(char('a' + byte % 26));
    }
    return word;
}

std::string ClassifierGridOcr::recognize(const Raster& img) {
    if (img.size() == 0 || img.height == 0) throw OcrFailure("grid ocr got an empty image");
    int cells = std::max(1, img.width / img.height);
    int cw = img.width / cells;
    std::string word;
    for (int c = 0; c < cells; ++c) {
        Raster cell(img.height, cw);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < cw; ++x) cell.at(y, x) = img.at(y, c * cw + x);
        if (cell.height != LetterClassifier::kResolution ||
            cell.width != LetterClassifier::kResolution)
            cell = resample(cell, LetterClassifier::kResolution, LetterClassifier::kResolution);
        word.push_back(LetterClassifier::class_letter(classifier_.predict(cell)).rendered());
    }
    return word;
}

namespace {

std::string lowered(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

std::string try_recognize(OcrAdapter& ocr, const Raster& img) {
    try {
        return ocr.recognize(img);
    } catch (const OcrFailure&) {
        return "";
    }
}

} // namespace

WordRecord evaluate_word(const std::string& word, const Raster& upright, OcrAdapter& ocr) {
    if (word.empty()) throw ConfigError("cannot evaluate an empty word");
    WordRecord rec;
    rec.word = word;
    rec.prediction_upright = try_recognize(ocr, upright);
    rec.prediction_rotated = try_recognize(ocr, rotate180(upright));
    std::string w = lowered(word);
    rec.edit_distance_sum = edit_distance(w, lowered(rec.prediction_upright)) +
                            edit_distance(w, lowered(rec.prediction_rotated));
    rec.correct = lowered(rec.prediction_upright) == w && lowered(rec.prediction_rotated) == w;
    return rec;
}

EvalReport run_benchmark(const std::vector<std::string>& words, const AmbigramFontMap& font_map,
                         OcrAdapter& ocr, int resolution, const std::string& font_id) {
    if (words.empty()) throw ConfigError("benchmark word list is empty");
    EvalReport report;
    report.ocr_id = ocr.id();
    report.font_id = font_id;
    report.resolution = resolution;

    RasterizeOptions opt;
    opt.resolution = resolution;
    for (const std::string& word : words) {
        size_t N = word.size();
        std::vector<Glyph> glyphs;
        for (size_t i = 0; i < N; ++i) {
            char a = char(std::toupper((unsigned char)word[i]));
            char b = char(std::toupper((unsigned char)word[N - 1 - i]));
            if (!font_map.has(a, b))
                throw MissingDesign(std::string("no design for pair (") + a + "," + b +
                                    ") needed by \"" + word + "\"");
            glyphs.push_back(font_map.get(a, b));
        }
        GlyphSequence seq = layout_word(glyphs);
        Raster img = rasterize(seq, opt).image;
        report.records.push_back(evaluate_word(word, img, ocr));
    }

    size_t correct = 0;
    double dist = 0;
    for (const WordRecord& r : report.records) {
        correct += r.correct;
        dist += r.edit_distance_sum;
    }
    report.accuracy = double(correct) / double(report.records.size());
    report.mean_edit_distance = dist / double(report.records.size());
    return report;
}

std::vector<std::string> load_word_list(const std::string& path,
                                        const std::string& expected_sha256) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open word list at " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!expected_sha256.empty()) {
        std::string got = sha256_hex(bytes);
        if (got != expected_sha256)
            throw ConfigError("word list at " + path + " hashes to " + got + ", expected " +
                              expected_sha256);
    }
    std::vector<std::string> words;
    std::string line;
    size_t at = 0;
    while (at <= bytes.size()) {
        size_t end = bytes.find('\n', at);
        if (end == std::string::npos) end = bytes.size();
        line = bytes.substr(at, end - at);
        at = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.size() <= 2) continue;
        for (char& c : line) c = char(std::tolower((unsigned char)c));
        words.push_back(line);
        if (end == bytes.size()) break;
    }
    return words;
}

void write_report(const EvalReport& report, const std::string& jsonl_path,
                  const std::string& summary_path) {
    std::ofstream jsonl(jsonl_path, std::ios::binary);
    if (!jsonl) throw ConfigError("cannot write " + jsonl_path);
    for (const WordRecord& r : report.records) {
        nlohmann::json j{{"word", r.word},
                         {"prediction_upright", r.prediction_upright},
                         {"prediction_rotated", r.prediction_rotated},
                         {"edit_distance_sum", r.edit_distance_sum},
                         {"correct", r.correct}};
        jsonl << j.dump() << "\n";
    }
    jsonl.close();

    nlohmann::json summary{{"accuracy", report.accuracy},
                           {"mean_edit_distance", report.mean_edit_distance},
                           {"words", report.records.size()},
                           {"ocr_id", report.ocr_id},
                           {"font_id", report.font_id},
                           {"resolution", report.resolution}};
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + summary_path);
    out << summary.dump(2) << "\n";
}

} // namespace ambigen
