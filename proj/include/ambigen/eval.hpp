#pragma once

#include <string>
#include <vector>

#include "ambigen/classifier.hpp"
#include "ambigen/pipeline.hpp"
#include "ambigen/raster.hpp"

namespace ambigen {

// Levenshtein distance: insertions, deletions, substitutions all cost 1.
int edit_distance(const std::string& s, const std::string& t);

class OcrAdapter {
  public:
    virtual ~OcrAdapter() = default;
    virtual std::string id() const = 0;
    // Predicted text for a rendered word; may throw OcrFailure.
    virtual std::string recognize(const Raster& img) = 0;
};

// Deterministic placeholder: derives a pseudo-word from a hash of the image
// bytes, one letter per unit cell. Exists so the benchmark harness can be
// exercised without any real recognizer.
class StubOcr : public OcrAdapter {
  public:
    std::string id() const override { return "stub"; }
    std::string recognize(const Raster& img) override;
};

// Splits the word image into width/height square cells and classifies each
// with the letter classifier.
class ClassifierGridOcr : public OcrAdapter {
  public:
    explicit ClassifierGridOcr(LetterClassifier classifier)
        : classifier_(std::move(classifier)) {}
    std::string id() const override { return "classifier-grid"; }
    std::string recognize(const Raster& img) override;

  private:
    LetterClassifier classifier_;
};

struct WordRecord {
    std::string word;
    std::string prediction_upright;
    std::string prediction_rotated;
    int edit_distance_sum = 0;
    bool correct = false;
};

struct EvalReport {
    std::vector<WordRecord> records;
    double accuracy = 0;
    double mean_edit_distance = 0;
    std::string ocr_id;
    std::string font_id;
    int resolution = 0;
};

// Runs the OCR on the upright image and its 180 degree rotation. A failed
// recognition counts as an empty prediction. Correct means both orientations
// match the word ignoring case; the distance sums both orientations.
WordRecord evaluate_word(const std::string& word, const Raster& upright, OcrAdapter& ocr);

// Renders each word from the font map (glyph i serves the ordered pair
// (word[i], word[N-1-i])) and evaluates it.
EvalReport run_benchmark(const std::vector<std::string>& words, const AmbigramFontMap& font_map,
                         OcrAdapter& ocr, int resolution = 64, const std::string& font_id = "");

// One lowercase word per line; words of length <= 2 are dropped. When
// expected_sha256 is nonempty the raw file bytes must hash to it.
std::vector<std::string> load_word_list(const std::string& path,
                                        const std::string& expected_sha256 = "");

// One JSON object per record, then a summary document. Deterministic: no
// timestamps, keys sorted.
void write_report(const EvalReport& report, const std::string& jsonl_path,
                  const std::string& summary_path);

} // namespace ambigen
