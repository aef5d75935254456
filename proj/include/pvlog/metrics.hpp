#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pvlog/domain.hpp"
#include "pvlog/providers.hpp"

namespace pvlog::metrics {

struct MetricConfig {
    double alpha = 0.5; // character-consistency weighting
    int embedding_dim = 64;
    int keypoint_count = 17;
    double dynamic_degree_flow_threshold = 0.05; // normalized flow units

    std::vector<std::string> validate() const;
};

/// Plain cosine similarity. Throws ValidationError on dimension mismatch or a
/// zero vector.
double cosine(std::span<const double> u, std::span<const double> v);

/// Mean over aligned pairs of cosine(image_i, board_i).
double text_image_alignment(const std::vector<std::vector<double>>& image_embeddings,
                            const std::vector<std::vector<double>>& board_embeddings);

/// Mean pairwise per-keypoint Euclidean distance, normalized by the unit
/// square diagonal so the result lands in [0,1]. Sets with no detected pose
/// must be filtered out by the caller; fewer than 2 usable sets means the
/// metric is unavailable (absent, not zero).
std::optional<double> pose_diversity(const std::vector<std::vector<Keypoint>>& keypoint_sets);

struct CharacterConsistency {
    double value = 0.0;
    double clip_term = 0.0; // mean cosine to the reference
    std::optional<double> pose_term;
    bool incomplete = false; // pose unavailable, clip term only
};

/// value = alpha * clip_term + (1 - alpha) * pose_term.
CharacterConsistency character_consistency(const std::vector<std::vector<double>>& image_embeddings,
                                           const std::vector<double>& reference_embedding,
                                           std::optional<double> pose_term, double alpha);

/// Mean over consecutive frame pairs of max(0, cosine). Needs >= 2 frames.
double consecutive_frame_consistency(const std::vector<std::vector<double>>& frame_embeddings);

/// Fallback smoothness from per-pair flow magnitudes: 1 minus the mean
/// absolute second difference normalized by twice the peak flow, clamped to
/// [0,1]. A uniform flow sequence scores 1.
double motion_smoothness_from_flow(const std::vector<double>& flows);

/// Fraction of frame pairs whose mean flow magnitude exceeds the threshold.
double dynamic_degree(const std::vector<double>& flows, double threshold);

/// Mean per-frame score, clamped into [0,1].
double mean_frame_score(const std::vector<double>& scores);

// Asset-level wrappers over the provider interfaces.

double subject_consistency(VideoAnalyzer& analyzer, const AssetRef& video);
double background_consistency(VideoAnalyzer& analyzer, const AssetRef& video);
double motion_smoothness(VideoAnalyzer& analyzer, const AssetRef& video);
double dynamic_degree(VideoAnalyzer& analyzer, const MetricConfig& config, const AssetRef& video);
double aesthetic_quality(VideoAnalyzer& analyzer, const AssetRef& video);
double imaging_quality(VideoAnalyzer& analyzer, const AssetRef& video);

/// All six components via the wrappers above.
VideoScoreVector score_video(VideoAnalyzer& analyzer, const MetricConfig& config, const AssetRef& video);

} // namespace pvlog::metrics
