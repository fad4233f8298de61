#include "ambigen/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "ambigen/adam.hpp"
#include "ambigen/errors.hpp"
#include "ambigen/image_ops.hpp"

namespace ambigen {

namespace {

constexpr int kF = LetterClassifier::kFeatures;
constexpr int kC = LetterClassifier::kClasses;
constexpr char kMagic[8] = {'A', 'M', 'C', 'L', '0', '1', '\n', 0};

void check_shape(const Raster& img) {
    if (img.height != LetterClassifier::kResolution || img.width != LetterClassifier::kResolution)
        throw DimensionMismatch("classifier expects " +
                                std::to_string(LetterClassifier::kResolution) + " square input, got " +
                                std::to_string(img.height) + "x" + std::to_string(img.width));
}

std::vector<double> softmax(std::vector<double> z) {
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

} // namespace

LetterClassifier::LetterClassifier() : w_(size_t(kC) * (kF + 1), 0) {}

int LetterClassifier::class_index(const CasedLetter& cl) {
    int base = cl.letter_case == Case::Upper ? 0 : 26;
    return base + (cl.letter - 'A');
}

CasedLetter LetterClassifier::class_letter(int index) {
    if (index < 0 || index >= kClasses)
        throw ConfigError("class index out of range: " + std::to_string(index));
    return CasedLetter(char('A' + index % 26), index < 26 ? Case::Upper : Case::Lower);
}

std::vector<double> LetterClassifier::logits(const Raster& img) const {
    check_shape(img);
    std::vector<double> z(kC);
    for (int c = 0; c < kC; ++c) {
        const double* wc = &w_[size_t(c) * (kF + 1)];
        double acc = wc[kF];
        for (int i = 0; i < kF; ++i) {
            double x = img.ink[i];
            if (x != 0) acc += wc[i] * x;
        }
        z[c] = acc;
    }
    return z;
}

std::vector<double> LetterClassifier::probabilities(const Raster& img) const {
    return softmax(logits(img));
}

int LetterClassifier::predict(const Raster& img) const {
    std::vector<double> z = logits(img);
    return int(std::max_element(z.begin(), z.end()) - z.begin());
}

double LetterClassifier::cross_entropy(const Raster& img, int target, Raster* grad) const {
    if (target < 0 || target >= kC)
        throw ConfigError("target class out of range: " + std::to_string(target));
    std::vector<double> z = logits(img);
    double mx = *std::max_element(z.begin(), z.end());
    double lse = 0;
    for (double v : z) lse += std::exp(v - mx);
    lse = mx + std::log(lse);
    double ce = lse - z[target];
    if (grad) {
        *grad = Raster(kResolution, kResolution);
        for (int c = 0; c < kC; ++c) {
            double p = std::exp(z[c] - lse);
            double coef = p - (c == target ? 1.0 : 0.0);
            if (coef == 0) continue;
            const double* wc = &w_[size_t(c) * (kF + 1)];
            for (int i = 0; i < kF; ++i) grad->ink[i] += coef * wc[i];
        }
    }
    return ce;
}

Raster LetterClassifier::log_prob_gradient(const Raster& img, int target) const {
    Raster g;
    cross_entropy(img, target, &g);
    for (double& v : g.ink) v = -v;
    return g;
}

void LetterClassifier::train(const std::vector<std::pair<Raster, int>>& data, int epochs,
                             double lr, uint64_t seed) {
    if (data.empty()) throw ConfigError("classifier training set is empty");
    for (const auto& [img, label] : data) {
        check_shape(img);
        if (label < 0 || label >= kC)
            throw ConfigError("training label out of range: " + std::to_string(label));
    }

    // sparse pixel cache: letter rasters are mostly blank
    struct Sample {
        std::vector<std::pair<int, double>> px;
        int label;
    };
    std::vector<Sample> samples(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        samples[i].label = data[i].second;
        for (int j = 0; j < kF; ++j)
            if (data[i].first.ink[j] != 0) samples[i].px.push_back({j, data[i].first.ink[j]});
    }

    Adam opt;
    opt.init(w_.size());
    std::vector<double> grad(w_.size());
    std::vector<size_t> order(samples.size());
    std::iota(order.begin(), order.end(), size_t(0));
    Rng rng(derive_seed(seed, {0x7261696eULL}));
    const size_t batch = 64;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        // Fisher-Yates on the sample order
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
        for (size_t at = 0; at < order.size(); at += batch) {
            size_t end = std::min(at + batch, order.size());
            std::fill(grad.begin(), grad.end(), 0.0);
            for (size_t s = at; s < end; ++s) {
                const Sample& smp = samples[order[s]];
                std::vector<double> z(kC);
                for (int c = 0; c < kC; ++c) {
                    const double* wc = &w_[size_t(c) * (kF + 1)];
                    double acc = wc[kF];
                    for (auto [j, x] : smp.px) acc += wc[j] * x;
                    z[c] = acc;
                }
                z = softmax(std::move(z));
                double inv = 1.0 / double(end - at);
                for (int c = 0; c < kC; ++c) {
                    double coef = (z[c] - (c == smp.label ? 1.0 : 0.0)) * inv;
                    if (coef == 0) continue;
                    double* gc = &grad[size_t(c) * (kF + 1)];
                    for (auto [j, x] : smp.px) gc[j] += coef * x;
                    gc[kF] += coef;
                }
            }
            opt.step(w_, grad, lr);
        }
    }
    trained_ = true;
}

void LetterClassifier::save(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fwrite(kMagic, 1, 8, f);
    int32_t dims[2] = {kC, kF + 1};
    std::fwrite(dims, sizeof(int32_t), 2, f);
    std::fwrite(w_.data(), sizeof(double), w_.size(), f);
    std::fclose(f);
}

LetterClassifier LetterClassifier::load(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw Error("cannot open classifier file " + path);
    char magic[8];
    int32_t dims[2];
    LetterClassifier cl;
    bool ok = std::fread(magic, 1, 8, f) == 8 && std::memcmp(magic, kMagic, 8) == 0 &&
              std::fread(dims, sizeof(int32_t), 2, f) == 2 && dims[0] == kC && dims[1] == kF + 1 &&
              std::fread(cl.w_.data(), sizeof(double), cl.w_.size(), f) == cl.w_.size();
    std::fclose(f);
    if (!ok) throw Error("malformed classifier file " + path);
    cl.trained_ = true;
    return cl;
}

LetterClassifier train_classifier_from_font(const FontFile& font, uint64_t seed,
                                            int augment_per_letter, int epochs, double lr) {
    std::vector<std::pair<Raster, int>> data;
    data.reserve(size_t(LetterClassifier::kClasses) * augment_per_letter);
    for (int cls = 0; cls < LetterClassifier::kClasses; ++cls) {
        CasedLetter cl = LetterClassifier::class_letter(cls);
        Glyph g = load_font_glyph(font, cl);
        Raster clean = rasterize(g, {.resolution = LetterClassifier::kResolution}).image;
        for (int k = 0; k < augment_per_letter; ++k) {
            if (k == 0) {
                data.push_back({clean, cls});
                continue;
            }
            Rng rng(derive_seed(seed, {0x617567ULL, uint64_t(cls), uint64_t(k)}));
            PerspectiveWarp w =
                random_perspective(clean.height, clean.width, 0.25, rng);
            Raster img = warp(clean, w);
            int dx = int(rng.below(7)) - 3, dy = int(rng.below(7)) - 3;
            Raster shifted(img.height, img.width);
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x) {
                    int sy = y - dy, sx = x - dx;
                    if (sy < 0 || sy >= img.height || sx < 0 || sx >= img.width) continue;
                    shifted.at(y, x) = img.at(sy, sx);
                }
            data.push_back({std::move(shifted), cls});
        }
    }
    LetterClassifier cl;
    cl.train(data, epochs, lr, seed);
    return cl;
}

LetterClassifier load_or_train_classifier(const FontFile& font, const std::string& cache_path,
                                          uint64_t seed) {
    if (std::FILE* f = std::fopen(cache_path.c_str(), "rb")) {
        std::fclose(f);
        return LetterClassifier::load(cache_path);
    }
    LetterClassifier cl = train_classifier_from_font(font, seed);
    cl.save(cache_path);
    return cl;
}

} // namespace ambigen
