#include "pvlog/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pvlog/errors.hpp"

namespace pvlog::metrics {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

double clamp01(double v) {
    return std::clamp(v, 0.0, 1.0);
}
} // namespace

std::vector<std::string> MetricConfig::validate() const {
    std::vector<std::string> v;
    if (alpha < 0.0 || alpha > 1.0) v.push_back("alpha out of [0,1]");
    if (embedding_dim < 1) v.push_back("embedding_dim must be >= 1");
    if (keypoint_count < 1) v.push_back("keypoint_count must be >= 1");
    if (dynamic_degree_flow_threshold <= 0.0) v.push_back("dynamic_degree_flow_threshold must be > 0");
    return v;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw ValidationError("cosine: dimension mismatch");
    if (u.empty()) throw ValidationError("cosine: empty vectors");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw ValidationError("cosine: zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double text_image_alignment(const std::vector<std::vector<double>>& image_embeddings,
                            const std::vector<std::vector<double>>& board_embeddings) {
    if (image_embeddings.size() != board_embeddings.size()) {
        throw ValidationError("text_image_alignment: arity mismatch");
    }
    if (image_embeddings.empty()) throw ValidationError("text_image_alignment: no pairs");
    double sum = 0.0;
    for (std::size_t i = 0; i < image_embeddings.size(); ++i) {
        sum += cosine(image_embeddings[i], board_embeddings[i]);
    }
    return sum / static_cast<double>(image_embeddings.size());
}

std::optional<double> pose_diversity(const std::vector<std::vector<Keypoint>>& keypoint_sets) {
    if (keypoint_sets.size() < 2) return std::nullopt;
    std::size_t points = keypoint_sets.front().size();
    for (const auto& s : keypoint_sets) {
        if (s.size() != points) throw ValidationError("pose_diversity: keypoint count mismatch");
    }
    if (points == 0) throw ValidationError("pose_diversity: empty keypoint sets");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < keypoint_sets.size(); ++a) {
        for (std::size_t b = a + 1; b < keypoint_sets.size(); ++b) {
            double mean_dist = 0.0;
            for (std::size_t p = 0; p < points; ++p) {
                double dx = keypoint_sets[a][p].x - keypoint_sets[b][p].x;
                double dy = keypoint_sets[a][p].y - keypoint_sets[b][p].y;
                mean_dist += std::sqrt(dx * dx + dy * dy) / kSqrt2;
            }
            sum += mean_dist / static_cast<double>(points);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

CharacterConsistency character_consistency(const std::vector<std::vector<double>>& image_embeddings,
                                           const std::vector<double>& reference_embedding,
                                           std::optional<double> pose_term, double alpha) {
    if (image_embeddings.empty()) throw ValidationError("character_consistency: no images");
    double clip = 0.0;
    for (const auto& e : image_embeddings) clip += cosine(e, reference_embedding);
    clip /= static_cast<double>(image_embeddings.size());
    CharacterConsistency out;
    out.clip_term = clip;
    out.pose_term = pose_term;
    if (pose_term) {
        out.value = alpha * clip + (1.0 - alpha) * *pose_term;
    } else {
        out.value = clip;
        out.incomplete = true;
    }
    return out;
}

double consecutive_frame_consistency(const std::vector<std::vector<double>>& frame_embeddings) {
    if (frame_embeddings.size() < 2) throw ValidationError("frame consistency needs >= 2 frames");
    double sum = 0.0;
    for (std::size_t t = 0; t + 1 < frame_embeddings.size(); ++t) {
        sum += std::max(0.0, cosine(frame_embeddings[t], frame_embeddings[t + 1]));
    }
    return clamp01(sum / static_cast<double>(frame_embeddings.size() - 1));
}

double motion_smoothness_from_flow(const std::vector<double>& flows) {
    if (flows.size() < 2) throw ValidationError("motion smoothness needs >= 3 frames");
    double peak = 0.0;
    for (double f : flows) peak = std::max(peak, std::abs(f));
    if (peak == 0.0) return 1.0;
    if (flows.size() == 2) return 1.0; // no second difference available
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 1; t + 1 < flows.size(); ++t) {
        sum += std::abs(flows[t + 1] - 2.0 * flows[t] + flows[t - 1]);
        ++n;
    }
    return clamp01(1.0 - (sum / static_cast<double>(n)) / (2.0 * peak));
}

double dynamic_degree(const std::vector<double>& flows, double threshold) {
    if (flows.empty()) throw ValidationError("dynamic_degree needs >= 2 frames");
    std::size_t moving = 0;
    for (double f : flows) {
        if (f > threshold) ++moving;
    }
    return static_cast<double>(moving) / static_cast<double>(flows.size());
}

double mean_frame_score(const std::vector<double>& scores) {
    if (scores.empty()) throw ValidationError("mean_frame_score: no frames");
    double sum = 0.0;
    for (double s : scores) sum += clamp01(s);
    return sum / static_cast<double>(scores.size());
}

double subject_consistency(VideoAnalyzer& analyzer, const AssetRef& video) {
    return consecutive_frame_consistency(analyzer.embed_frames(video, FrameSpace::subject));
}

double background_consistency(VideoAnalyzer& analyzer, const AssetRef& video) {
    return consecutive_frame_consistency(analyzer.embed_frames(video, FrameSpace::background));
}

double motion_smoothness(VideoAnalyzer& analyzer, const AssetRef& video) {
    if (auto provider_score = analyzer.motion_smoothness_score(video)) {
        return clamp01(*provider_score);
    }
    return motion_smoothness_from_flow(analyzer.estimate_flow(video));
}

double dynamic_degree(VideoAnalyzer& analyzer, const MetricConfig& config, const AssetRef& video) {
    return dynamic_degree(analyzer.estimate_flow(video), config.dynamic_degree_flow_threshold);
}

double aesthetic_quality(VideoAnalyzer& analyzer, const AssetRef& video) {
    return mean_frame_score(analyzer.score_frames(video, FrameCriterion::aesthetic));
}

double imaging_quality(VideoAnalyzer& analyzer, const AssetRef& video) {
    return mean_frame_score(analyzer.score_frames(video, FrameCriterion::imaging));
}

VideoScoreVector score_video(VideoAnalyzer& analyzer, const MetricConfig& config, const AssetRef& video) {
    VideoScoreVector v;
    v.subject_consistency = subject_consistency(analyzer, video);
    v.background_consistency = background_consistency(analyzer, video);
    v.motion_smoothness = motion_smoothness(analyzer, video);
    v.dynamic_degree = dynamic_degree(analyzer, config, video);
    v.aesthetic_quality = aesthetic_quality(analyzer, video);
    v.imaging_quality = imaging_quality(analyzer, video);
    return v;
}

} // namespace pvlog::metrics
