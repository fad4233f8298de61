#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ambigen/font.hpp"
#include "ambigen/letters.hpp"
#include "ambigen/raster.hpp"
#include "ambigen/rng.hpp"

namespace ambigen {

// Multinomial logistic regression over raw 64x64 pixels, 52 classes
// (A-Z upper then a-z lower). Deliberately small: it exists to rank designs
// and to drive desk-scale optimization, not to be a serious recognizer.
class LetterClassifier {
  public:
    static constexpr int kClasses = 52;
    static constexpr int kResolution = 64;
    static constexpr int kFeatures = kResolution * kResolution;

    LetterClassifier();

    static int class_index(const CasedLetter& cl);
    static CasedLetter class_letter(int index);

    // img must be kResolution square.
    std::vector<double> logits(const Raster& img) const;
    std::vector<double> probabilities(const Raster& img) const;
    int predict(const Raster& img) const;

    // Softmax cross entropy of the target class; when grad is non-null it
    // receives d(ce)/d(pixel).
    double cross_entropy(const Raster& img, int target, Raster* grad = nullptr) const;

    // d(log p(target | img))/d(pixel); equals minus the cross-entropy gradient.
    Raster log_prob_gradient(const Raster& img, int target) const;

    void train(const std::vector<std::pair<Raster, int>>& data, int epochs, double lr,
               uint64_t seed);

    void save(const std::string& path) const;
    static LetterClassifier load(const std::string& path);

    bool trained() const { return trained_; }

  private:
    // row-major kClasses x (kFeatures + 1), last column is the bias
    std::vector<double> w_;
    bool trained_ = false;
};

// Renders all 52 letters of the font with random perspective and shift
// augmentations and fits the classifier to them.
LetterClassifier train_classifier_from_font(const FontFile& font, uint64_t seed,
                                            int augment_per_letter = 24, int epochs = 200,
                                            double lr = 0.1);

// Cached train-or-load: trains once per (font, seed) and stores the weights at
// cache_path for later runs.
LetterClassifier load_or_train_classifier(const FontFile& font, const std::string& cache_path,
                                          uint64_t seed);

} // namespace ambigen
