#include "ambigen/guidance.hpp"

#include <cmath>
#include <cstdio>

#include "ambigen/errors.hpp"
#include "ambigen/image_ops.hpp"

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>
#include <json.hpp>

namespace ambigen {

using json = nlohmann::json;

void GuidanceBackend::check_embedding(const ConditioningEmbedding& c) const {
    if (c.backend_id != id() || c.handle < 0)
        throw BackendFailure("embedding from backend '" + c.backend_id +
                             "' is not consumable by '" + id() + "'");
}

Raster GuidanceBackend::score_sample(const Raster& x, double sigma,
                                     const ConditioningEmbedding& c, Rng& rng) {
    Raster noisy = x;
    for (double& v : noisy.ink) v += sigma * rng.gaussian();
    Raster den = denoise(noisy, sigma, c);
    if (den.height != x.height || den.width != x.width)
        throw BackendFailure("backend '" + id() + "' changed the image shape in denoise");
    Raster score(x.height, x.width);
    double inv = 1.0 / (sigma * sigma);
    for (size_t i = 0; i < score.size(); ++i) score.ink[i] = (den.ink[i] - x.ink[i]) * inv;
    return score;
}

Raster paas(const Raster& x, double sigma, const ConditioningEmbedding& c,
            GuidanceBackend& backend, int n_samples, uint64_t seed) {
    if (sigma <= 0) throw ConfigError("noise level must be positive");
    if (n_samples < 1) throw ConfigError("paas needs at least one sample");
    if (x.height <= 0 || x.width <= 0) throw EmptyImage("paas input is empty");

    int native = backend.native_resolution();
    bool resampled = x.height != native;
    Raster in = x;
    if (resampled) {
        int w = int(std::lround(double(x.width) * native / x.height));
        in = resample(x, native, w);
    }

    Rng rng(derive_seed(seed, {0x70616173ULL}));
    Raster acc(in.height, in.width);
    for (int s = 0; s < n_samples; ++s) {
        Raster one = backend.score_sample(in, sigma, c, rng);
        for (size_t i = 0; i < acc.size(); ++i) acc.ink[i] += one.ink[i];
    }
    for (double& v : acc.ink) v /= n_samples;
    for (double v : acc.ink)
        if (!std::isfinite(v)) throw BackendFailure("backend '" + backend.id() +
                                                    "' produced a non-finite score");
    if (resampled) acc = resample_backward(acc, x.height, x.width);
    return acc;
}

std::string letter_prompt(const CasedLetter& letter) {
    std::string out = "An image of the letter ";
    out += letter.rendered();
    out += letter.letter_case == Case::Upper ? " in upper case." : " in lower case.";
    return out;
}

std::string pair_prompt(const CasedLetter& first, const CasedLetter& second) {
    std::string out = "A blank paper with the text \"";
    out += first.rendered();
    out += second.rendered();
    out += "\" written on it.";
    return out;
}

ConditioningEmbedding embed_letter_prompt(const CasedLetter& letter, GuidanceBackend& backend) {
    return backend.embed(letter_prompt(letter));
}

ConditioningEmbedding embed_pair_prompt(const CasedLetter& first, const CasedLetter& second,
                                        GuidanceBackend& backend) {
    return backend.embed(pair_prompt(first, second));
}

// ---------------------------------------------------------------------------
// AnalyticGaussianBackend

AnalyticGaussianBackend::AnalyticGaussianBackend(Raster mean, double data_std)
    : data_std_(data_std) {
    if (mean.height <= 0 || mean.width <= 0) throw EmptyImage("analytic backend mean is empty");
    if (data_std <= 0) throw ConfigError("data_std must be positive");
    means_.push_back(std::move(mean));
    prompts_.push_back("");  // slot 0: default mean for any prompt
}

void AnalyticGaussianBackend::set_prompt_mean(const std::string& prompt, Raster mean) {
    if (mean.height != means_[0].height || mean.width != means_[0].width)
        throw DimensionMismatch("prompt mean shape differs from the default mean");
    means_.push_back(std::move(mean));
    prompts_.push_back(prompt);
}

ConditioningEmbedding AnalyticGaussianBackend::embed(const std::string& prompt) {
    int handle = 0;
    for (size_t i = 1; i < prompts_.size(); ++i)
        if (prompts_[i] == prompt) handle = int(i);
    return {id(), prompt, handle};
}

Raster AnalyticGaussianBackend::denoise(const Raster& x, double sigma,
                                        const ConditioningEmbedding& c) {
    check_embedding(c);
    const Raster& mu = means_[size_t(c.handle)];
    if (x.height != mu.height || x.width != mu.width)
        throw DimensionMismatch("analytic backend expects " + std::to_string(mu.height) + "x" +
                                std::to_string(mu.width) + " input");
    double s2 = data_std_ * data_std_, n2 = sigma * sigma;
    Raster out(x.height, x.width);
    for (size_t i = 0; i < x.size(); ++i)
        out.ink[i] = (s2 * x.ink[i] + n2 * mu.ink[i]) / (s2 + n2);
    return out;
}

// ---------------------------------------------------------------------------
// ClassifierBackend

ClassifierBackend::ClassifierBackend(LetterClassifier classifier)
    : classifier_(std::move(classifier)) {}

ConditioningEmbedding ClassifierBackend::embed(const std::string& prompt) {
    for (size_t i = 0; i < prompts_.size(); ++i)
        if (prompts_[i] == prompt) return {id(), prompt, int(i)};

    // Parse the letter template back: the class is the target
    static const std::string kLetterPre = "An image of the letter ";
    static const std::string kPairPre = "A blank paper with the text \"";
    std::vector<Target> targets;
    if (prompt.rfind(kLetterPre, 0) == 0 && prompt.size() > kLetterPre.size() + 1) {
        char ch = prompt[kLetterPre.size()];
        std::string rest = prompt.substr(kLetterPre.size() + 1);
        CasedLetter cl = CasedLetter::from_char(ch);
        bool upper_word = rest == " in upper case.";
        bool lower_word = rest == " in lower case.";
        if (!upper_word && !lower_word)
            throw BackendFailure("classifier backend cannot parse prompt: " + prompt);
        if ((cl.letter_case == Case::Upper) != upper_word)
            throw BackendFailure("prompt case word contradicts the letter: " + prompt);
        targets.push_back({LetterClassifier::class_index(cl), 0.0, 1.0});
    } else if (prompt.rfind(kPairPre, 0) == 0 && prompt.size() > kPairPre.size() + 2) {
        char c1 = prompt[kPairPre.size()], c2 = prompt[kPairPre.size() + 1];
        std::string rest = prompt.substr(kPairPre.size() + 2);
        if (rest != "\" written on it.")
            throw BackendFailure("classifier backend cannot parse prompt: " + prompt);
        targets.push_back({LetterClassifier::class_index(CasedLetter::from_char(c1)), 0.0, 0.5});
        targets.push_back({LetterClassifier::class_index(CasedLetter::from_char(c2)), 0.5, 1.0});
    } else {
        throw BackendFailure("classifier backend cannot parse prompt: " + prompt);
    }
    prompts_.push_back(prompt);
    targets_.push_back(std::move(targets));
    return {id(), prompt, int(prompts_.size()) - 1};
}

Raster ClassifierBackend::score(const Raster& x, const ConditioningEmbedding& c) const {
    check_embedding(c);
    if (size_t(c.handle) >= targets_.size())
        throw BackendFailure("unknown embedding handle " + std::to_string(c.handle));
    const int R = LetterClassifier::kResolution;
    Raster out(x.height, x.width);
    for (const Target& t : targets_[size_t(c.handle)]) {
        int cx0 = int(std::lround(t.x0 * x.width));
        int cx1 = int(std::lround(t.x1 * x.width));
        Raster crop(x.height, cx1 - cx0);
        for (int y = 0; y < x.height; ++y)
            for (int xx = cx0; xx < cx1; ++xx) crop.at(y, xx - cx0) = x.at(y, xx);
        bool fit = crop.height == R && crop.width == R;
        Raster in = fit ? crop : resample(crop, R, R);
        Raster g = classifier_.log_prob_gradient(in, t.cls);
        if (!fit) g = resample_backward(g, crop.height, crop.width);
        for (int y = 0; y < x.height; ++y)
            for (int xx = cx0; xx < cx1; ++xx) out.at(y, xx) += g.at(y, xx - cx0);
    }
    return out;
}

Raster ClassifierBackend::score_sample(const Raster& x, double, const ConditioningEmbedding& c,
                                       Rng&) {
    return score(x, c);
}

Raster ClassifierBackend::denoise(const Raster& x, double sigma, const ConditioningEmbedding& c) {
    // Tweedie form keeps the denoiser contract consistent with the score.
    Raster s = score(x, c);
    Raster out = x;
    double n2 = sigma * sigma;
    for (size_t i = 0; i < out.size(); ++i) out.ink[i] += n2 * s.ink[i];
    return out;
}

// ---------------------------------------------------------------------------
// DiffusionHttpBackend

struct DiffusionHttpBackend::Http {
    httplib::Client client;
    explicit Http(const std::string& url) : client(url) {
        client.set_read_timeout(120, 0);
        client.set_connection_timeout(10, 0);
    }
};

DiffusionHttpBackend::DiffusionHttpBackend(std::string base_url, int native_resolution,
                                           double guidance_scale)
    : base_url_(std::move(base_url)),
      native_res_(native_resolution),
      guidance_scale_(guidance_scale),
      http_(std::make_unique<Http>(base_url_)) {
    if (native_res_ < 8) throw ConfigError("diffusion backend resolution must be at least 8");
}

DiffusionHttpBackend::~DiffusionHttpBackend() = default;

int DiffusionHttpBackend::remote_embed(const std::string& prompt) {
    json req{{"prompt", prompt}};
    auto res = http_->client.Post("/embed", req.dump(), "application/json");
    if (!res || res->status != 200)
        throw BackendFailure("diffusion backend /embed failed for prompt: " + prompt +
                             (res ? " (status " + std::to_string(res->status) + ")"
                                  : " (no response from " + base_url_ + ")"));
    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("handle"))
        throw BackendFailure("diffusion backend /embed returned malformed JSON");
    return body["handle"].get<int>();
}

ConditioningEmbedding DiffusionHttpBackend::embed(const std::string& prompt) {
    for (size_t i = 0; i < prompts_.size(); ++i)
        if (prompts_[i] == prompt) return {id(), prompt, int(i)};
    int remote = remote_embed(prompt);
    prompts_.push_back(prompt);
    remote_handles_.push_back(remote);
    return {id(), prompt, int(prompts_.size()) - 1};
}

Raster DiffusionHttpBackend::remote_denoise(const Raster& x, double sigma, int handle) {
    json req{{"image", x.ink},
             {"height", x.height},
             {"width", x.width},
             {"sigma", sigma},
             {"handle", handle}};
    auto res = http_->client.Post("/denoise", req.dump(), "application/json");
    if (!res || res->status != 200)
        throw BackendFailure("diffusion backend /denoise failed" +
                             (res ? " (status " + std::to_string(res->status) + ")"
                                  : " (no response from " + base_url_ + ")"));
    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("image"))
        throw BackendFailure("diffusion backend /denoise returned malformed JSON");
    std::vector<double> img = body["image"].get<std::vector<double>>();
    if (img.size() != x.size())
        throw BackendFailure("diffusion backend returned " + std::to_string(img.size()) +
                             " pixels, expected " + std::to_string(x.size()));
    Raster out(x.height, x.width);
    out.ink = std::move(img);
    return out;
}

Raster DiffusionHttpBackend::denoise(const Raster& x, double sigma,
                                     const ConditioningEmbedding& c) {
    check_embedding(c);
    if (size_t(c.handle) >= remote_handles_.size())
        throw BackendFailure("unknown embedding handle " + std::to_string(c.handle));
    Raster cond = remote_denoise(x, sigma, remote_handles_[size_t(c.handle)]);
    if (guidance_scale_ == 1.0) return cond;
    if (uncond_handle_ < 0) uncond_handle_ = remote_embed("");
    Raster uncond = remote_denoise(x, sigma, uncond_handle_);
    Raster out(x.height, x.width);
    for (size_t i = 0; i < out.size(); ++i)
        out.ink[i] = uncond.ink[i] + guidance_scale_ * (cond.ink[i] - uncond.ink[i]);
    return out;
}

} // namespace ambigen
