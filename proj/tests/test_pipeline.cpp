#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ghom/pipeline.hpp"

using namespace ghom;

namespace {

SequenceConfig small_sequence() {
    SequenceConfig cfg;
    cfg.n_frames = 8;
    return cfg;
}

std::string frame_line(const std::string &attitude) {
    return "{\"id\": 7, \"attitude\": " + attitude + ", \"keypoints\": [[1, 10.0, 20.0]]}";
}

} // namespace

TEST(Ingest, EmptyInput) {
    std::istringstream in("");
    EXPECT_TRUE(ingest(in).empty());
    std::istringstream blank("\n  \n");
    EXPECT_TRUE(ingest(blank).empty());
}

TEST(Ingest, RoundTripIsBitExact) {
    const auto seq = generate_sequence(3, small_sequence());
    std::stringstream ss;
    emit(ss, seq.frames);
    const std::string text = ss.str();
    const auto back = ingest(ss);
    ASSERT_EQ(back.size(), seq.frames.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        const auto &a = seq.frames[i], &b = back[i];
        EXPECT_EQ(a.id, b.id);
        EXPECT_EQ(a.attitude, b.attitude);
        ASSERT_EQ(a.keypoints.size(), b.keypoints.size());
        for (std::size_t k = 0; k < a.keypoints.size(); ++k) {
            EXPECT_EQ(a.keypoints[k].id, b.keypoints[k].id);
            EXPECT_EQ(a.keypoints[k].x, b.keypoints[k].x);
        }
        EXPECT_EQ(a.gt_pose->R, b.gt_pose->R);
        EXPECT_EQ(a.gt_pose->c, b.gt_pose->c);
        EXPECT_EQ(a.gt_focal, b.gt_focal);
    }
    std::stringstream again;
    emit(again, back);
    EXPECT_EQ(again.str(), text);
}

TEST(Ingest, BadRotationNamesFrame) {
    std::istringstream in(frame_line("[1, 0, 0, 0, 2, 0, 0, 0, 1]"));
    try {
        ingest(in);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::Data);
        EXPECT_NE(std::string(e.what()).find("frame 7"), std::string::npos);
    }
}

TEST(Ingest, SlightlyOffRotationIsRepaired) {
    std::istringstream in(frame_line("[1, 0.0001, 0, 0, 1, 0, 0, 0, 1]"));
    const auto frames = ingest(in);
    ASSERT_EQ(frames.size(), 1u);
    EXPECT_TRUE(is_rotation(frames[0].attitude.matrix(), 1e-12));
}

TEST(Ingest, MalformedLineNumber) {
    std::istringstream in(frame_line("[1, 0, 0, 0, 1, 0, 0, 0, 1]") + "\n\n{\"id\": 8, \"attitude\": [1, 0]");
    try {
        ingest(in);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Ingest, DuplicateKeypointIds) {
    std::istringstream in(
        "{\"id\": 1, \"attitude\": [1, 0, 0, 0, 1, 0, 0, 0, 1], \"keypoints\": [[4, 1, 2], [4, 3, 4]]}");
    EXPECT_THROW(ingest(in), Error);
}

TEST(Ingest, MissingFile) { EXPECT_THROW(ingest_file("/nonexistent/frames.jsonl"), Error); }

TEST(Sequence, Deterministic) {
    std::stringstream a, b;
    emit(a, generate_sequence(5, small_sequence()).frames);
    emit(b, generate_sequence(5, small_sequence()).frames);
    EXPECT_EQ(a.str(), b.str());
}

TEST(Sequence, IdenticalFramesGiveIdentity) {
    const auto seq = generate_sequence(1, small_sequence());
    const auto rel = estimate_sequence({seq.frames[0], seq.frames[0]}, SolverKind::FHF);
    ASSERT_EQ(rel.size(), 1u);
    ASSERT_TRUE(rel[0].ok);
    EXPECT_LT((rel[0].pose.R - Mat3::Identity()).norm(), 1e-12);
    EXPECT_EQ(rel[0].pose.t, Vec3::Zero());
}

TEST(Sequence, TooFewMatchesIsGap) {
    auto seq = generate_sequence(2, small_sequence());
    seq.frames[2].keypoints.resize(2);
    const auto rel = estimate_sequence(seq.frames, SolverKind::FHF);
    ASSERT_EQ(rel.size(), seq.frames.size() - 1);
    EXPECT_FALSE(rel[1].ok);
    EXPECT_FALSE(rel[2].ok);
    EXPECT_TRUE(rel[3].ok);
    const Trajectory tr = chain_trajectory(rel, seq.frames);
    EXPECT_TRUE(tr.frames[2].gap);
    EXPECT_EQ(tr.frames[2].pose.c, tr.frames[1].pose.c);
    EXPECT_THROW(estimate_sequence({seq.frames[0]}, SolverKind::FHF), Error);
}

TEST(Sequence, ChainingExactWithGroundTruthRelatives) {
    const auto seq = generate_sequence(4, small_sequence());
    std::vector<PairEstimate> rel;
    for (std::size_t k = 1; k < seq.frames.size(); ++k) {
        PairEstimate pe;
        pe.ok = true;
        pe.pose = relative_from_world(*seq.frames[k - 1].gt_pose, *seq.frames[k].gt_pose);
        rel.push_back(pe);
    }
    const Trajectory tr = chain_trajectory(rel, seq.frames);
    ASSERT_EQ(tr.frames.size(), seq.frames.size());
    EXPECT_EQ(tr.frames[0].pose.R, seq.frames[0].gt_pose->R);
    EXPECT_EQ(tr.frames[0].pose.c, seq.frames[0].gt_pose->c);
    for (std::size_t k = 0; k < tr.frames.size(); ++k) {
        EXPECT_LT((tr.frames[k].pose.R - seq.frames[k].gt_pose->R).norm(), 1e-12);
        EXPECT_LT((tr.frames[k].pose.c - seq.frames[k].gt_pose->c).norm(), 1e-12);
    }
    for (const auto &row : trajectory_errors(tr, rel, seq.frames)) {
        EXPECT_LT(row.e_R, 1e-6);
        EXPECT_LT(row.position_error, 1e-12);
    }
}

TEST(Sequence, ScalingNeedsGroundTruth) {
    auto seq = generate_sequence(4, small_sequence());
    for (auto &f : seq.frames) f.gt_pose.reset();
    std::vector<PairEstimate> rel(seq.frames.size() - 1);
    for (auto &pe : rel) pe.ok = true;
    try {
        chain_trajectory(rel, seq.frames, true);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    }
    EXPECT_NO_THROW(chain_trajectory(rel, seq.frames, false));
}

TEST(Sequence, ClusterEndsUpInOutliers) {
    SequenceConfig cfg = small_sequence();
    cfg.n_frames = 12;
    const auto seq = generate_sequence(6, cfg);
    ASSERT_FALSE(seq.cluster_ids.empty());
    const std::set<int> cluster(seq.cluster_ids.begin(), seq.cluster_ids.end());
    EstimateOptions opt;
    opt.ransac.seed = 6;
    const auto rel = estimate_sequence(seq.frames, SolverKind::FHF, opt);
    for (const auto &pe : rel) {
        ASSERT_TRUE(pe.ok);
        for (int id : pe.inlier_ids) EXPECT_FALSE(cluster.count(id)) << "frame " << pe.frame2 << " id " << id;
    }
    const Trajectory tr = chain_trajectory(rel, seq.frames);
    double sum = 0.0;
    const auto rows = trajectory_errors(tr, rel, seq.frames);
    for (const auto &r : rows) sum += r.e_R;
    EXPECT_LT(sum / rows.size(), 1.0 * std::numbers::pi / 180.0);
}

TEST(Sequence, StrideAndOutputs) {
    const auto seq = generate_sequence(7, small_sequence());
    EstimateOptions opt;
    opt.stride = 2;
    const auto rel = estimate_sequence(seq.frames, SolverKind::HF, opt);
    EXPECT_EQ(rel.size(), 3u);
    const Trajectory tr = chain_trajectory(rel, seq.frames, true, 2);
    EXPECT_EQ(tr.frames.size(), 4u);
    const auto j = trajectory_to_json(tr, SolverKind::HF, 7);
    EXPECT_EQ(j["frames"].size(), 4u);
    const auto rows = trajectory_errors(tr, rel, seq.frames, 2);
    EXPECT_EQ(trajectory_errors_csv(rows, SolverKind::HF, 7).rows.size(), 4u);
}
