#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ambigen/classifier.hpp"
#include "ambigen/letters.hpp"
#include "ambigen/raster.hpp"
#include "ambigen/rng.hpp"

namespace ambigen {

// Opaque prompt handle. Only the backend that produced it may consume it.
struct ConditioningEmbedding {
    std::string backend_id;
    std::string prompt;  // verbatim, logged to run manifests
    int handle = -1;
};

// Denoiser contract: D(x; sigma, c) estimates the posterior mean of the clean
// image given the noisy observation x at noise level sigma.
class GuidanceBackend {
  public:
    virtual ~GuidanceBackend() = default;
    virtual std::string id() const = 0;
    virtual int native_resolution() const = 0;
    virtual ConditioningEmbedding embed(const std::string& prompt) = 0;
    virtual Raster denoise(const Raster& x, double sigma, const ConditioningEmbedding& c) = 0;

    // One stochastic score draw (D(x + sigma*n; sigma, c) - x) / sigma^2.
    // Backends with an exact score may override and ignore the noise.
    virtual Raster score_sample(const Raster& x, double sigma, const ConditioningEmbedding& c,
                                Rng& rng);

  protected:
    void check_embedding(const ConditioningEmbedding& c) const;
};

// Mean over n_samples score draws; an ascent direction on data log-likelihood.
// Deterministic given seed. Inputs whose height differs from the backend's
// native resolution are resampled in (and the estimate resampled back) with
// the aspect ratio preserved.
Raster paas(const Raster& x, double sigma, const ConditioningEmbedding& c,
            GuidanceBackend& backend, int n_samples, uint64_t seed);

std::string letter_prompt(const CasedLetter& letter);
std::string pair_prompt(const CasedLetter& first, const CasedLetter& second);

ConditioningEmbedding embed_letter_prompt(const CasedLetter& letter, GuidanceBackend& backend);
ConditioningEmbedding embed_pair_prompt(const CasedLetter& first, const CasedLetter& second,
                                        GuidanceBackend& backend);

// Exact posterior-mean denoiser for a Gaussian data distribution
// N(mean, data_std^2 I): D(x; sigma) = (s^2 x + sigma^2 mu) / (s^2 + sigma^2).
// Exists to validate the paas estimator against closed forms.
class AnalyticGaussianBackend : public GuidanceBackend {
  public:
    AnalyticGaussianBackend(Raster mean, double data_std);

    // Prompts registered here get their own mean; others use the default.
    void set_prompt_mean(const std::string& prompt, Raster mean);

    std::string id() const override { return "analytic-gaussian"; }
    int native_resolution() const override { return means_[0].height; }
    ConditioningEmbedding embed(const std::string& prompt) override;
    Raster denoise(const Raster& x, double sigma, const ConditioningEmbedding& c) override;

  private:
    std::vector<Raster> means_;
    std::vector<std::string> prompts_;
    double data_std_;
};

// Letter-classifier score provider: the score is d(log p(class|x))/dx taken
// directly, bypassing the perturb-and-average estimator. Prompts are parsed
// back into class targets; pair prompts score the left and right halves of
// the image independently.
class ClassifierBackend : public GuidanceBackend {
  public:
    explicit ClassifierBackend(LetterClassifier classifier);

    std::string id() const override { return "classifier"; }
    int native_resolution() const override { return LetterClassifier::kResolution; }
    ConditioningEmbedding embed(const std::string& prompt) override;
    Raster denoise(const Raster& x, double sigma, const ConditioningEmbedding& c) override;
    Raster score_sample(const Raster& x, double sigma, const ConditioningEmbedding& c,
                        Rng& rng) override;

    const LetterClassifier& classifier() const { return classifier_; }

    // Direct exact score for an embedded prompt (what score_sample returns).
    Raster score(const Raster& x, const ConditioningEmbedding& c) const;

  private:
    LetterClassifier classifier_;
    // per handle: list of (class, left fraction, right fraction) horizontal spans
    struct Target {
        int cls;
        double x0, x1;
    };
    std::vector<std::vector<Target>> targets_;
    std::vector<std::string> prompts_;
};

// Adapter to an external pixel-space denoiser over HTTP. POST /embed with
// {"prompt"} returns {"handle"}; POST /denoise with {"image", "height",
// "width", "sigma", "handle"} returns {"image"}. guidance_scale != 1 blends
// the unconditional prediction client-side:
// D = D_uncond + scale * (D_cond - D_uncond).
class DiffusionHttpBackend : public GuidanceBackend {
  public:
    DiffusionHttpBackend(std::string base_url, int native_resolution,
                         double guidance_scale = 1.0);
    ~DiffusionHttpBackend() override;

    std::string id() const override { return "diffusion-http"; }
    int native_resolution() const override { return native_res_; }
    ConditioningEmbedding embed(const std::string& prompt) override;
    Raster denoise(const Raster& x, double sigma, const ConditioningEmbedding& c) override;

  private:
    int remote_embed(const std::string& prompt);
    Raster remote_denoise(const Raster& x, double sigma, int handle);

    std::string base_url_;
    int native_res_;
    double guidance_scale_;
    std::vector<std::string> prompts_;
    std::vector<int> remote_handles_;
    int uncond_handle_ = -1;
    struct Http;
    std::unique_ptr<Http> http_;
};

} // namespace ambigen
