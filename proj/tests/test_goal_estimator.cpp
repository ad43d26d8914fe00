#include "pedpred/goal_estimator.hpp"
#include "pedpred/rng.hpp"
#include "pedpred/transforms.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace pedpred;

namespace {

Trajectory line_traj(const Position2& start, const Vec2& step, int len, std::int64_t ped = 1) {
    Trajectory t;
    t.pedestrian_id = ped;
    t.positions.resize(len, 2);
    for (int i = 0; i < len; ++i) t.positions.row(i) = (start + i * step).transpose();
    return t;
}

Trajectory random_traj(Rng& rng, int len) {
    Trajectory t;
    t.positions.resize(len, 2);
    Position2 p(rng.uniform(-3, 3), rng.uniform(-3, 3));
    for (int i = 0; i < len; ++i) {
        t.positions.row(i) = p.transpose();
        p += Vec2(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
    }
    return t;
}

}  // namespace

TEST_CASE("build_repository ranks an exact prefix copy first") {
    Rng rng(3);
    const Trajectory query = line_traj({1, 1}, {0.2, 0.1}, 8);
    std::vector<Trajectory> pool;
    for (int i = 0; i < 10; ++i) pool.push_back(random_traj(rng, 20));
    // pool[4] starts with the query's displacement pattern (translated)
    Trajectory twin = line_traj({5, -2}, {0.2, 0.1}, 20, 99);
    pool[4] = twin;

    const auto repo = build_repository(query, pool, 3, {1.0, false});
    REQUIRE(repo.entries.size() == 3);
    CHECK(repo.entries[0].pool_index == 4);
    // stored entries are start-normalized and sorted by distance
    for (const auto& e : repo.entries) CHECK(e.normalized.first() == Position2(0, 0));
    for (std::size_t i = 1; i < repo.entries.size(); ++i) {
        CHECK(repo.entries[i - 1].distance <= repo.entries[i].distance);
    }
}

TEST_CASE("build_repository with N larger than the pool returns everything sorted") {
    Rng rng(5);
    const Trajectory query = random_traj(rng, 8);
    std::vector<Trajectory> pool;
    for (int i = 0; i < 4; ++i) pool.push_back(random_traj(rng, 20));
    const auto repo = build_repository(query, pool, 100, {1.0, false});
    CHECK(repo.entries.size() == 4);
    for (std::size_t i = 1; i < repo.entries.size(); ++i) {
        CHECK(repo.entries[i - 1].distance <= repo.entries[i].distance);
    }
}

TEST_CASE("build_repository ranking matches the exhaustive DTW oracle at gamma 0") {
    Rng rng(9);
    const Trajectory query = random_traj(rng, 5);
    std::vector<Trajectory> pool;
    for (int i = 0; i < 3; ++i) pool.push_back(random_traj(rng, 20));

    const auto repo = build_repository(query, pool, 3, {0.0, false});
    const PointSeq qv = velocity_profile(query);
    std::vector<std::pair<Scalar, int>> oracle;
    for (int i = 0; i < 3; ++i) {
        const PointSeq cv = velocity_profile(pool[i]).topRows(qv.rows());
        oracle.push_back({oracles::exact_dtw(qv, cv), i});
    }
    std::sort(oracle.begin(), oracle.end());
    for (int i = 0; i < 3; ++i) {
        CHECK(repo.entries[i].pool_index == oracle[i].second);
        CHECK(repo.entries[i].distance == doctest::Approx(oracle[i].first).epsilon(1e-12));
    }
}

TEST_CASE("build_repository errors") {
    const Trajectory query = line_traj({0, 0}, {1, 0}, 8);
    const std::vector<Trajectory> empty;
    CHECK_THROWS_AS(build_repository(query, empty, 5, {1.0, false}), EmptyRepositoryError);
}

TEST_CASE("cached pool gives the same repository as the plain overload") {
    Rng rng(61);
    const Trajectory query = random_traj(rng, 8);
    std::vector<Trajectory> pool;
    for (int i = 0; i < 9; ++i) pool.push_back(random_traj(rng, 20));
    const auto direct = build_repository(query, pool, 4, {1.0, false});
    const auto cached = build_repository(query, ExpertPool::from(pool), 4, {1.0, false});
    REQUIRE(direct.entries.size() == cached.entries.size());
    for (std::size_t i = 0; i < direct.entries.size(); ++i) {
        CHECK(direct.entries[i].pool_index == cached.entries[i].pool_index);
        CHECK(direct.entries[i].distance == cached.entries[i].distance);
    }
}

TEST_CASE("kmeans single cluster is the mean") {
    std::vector<Position2> pts = {{0, 0}, {2, 0}, {0, 2}, {2, 2}};
    const auto centers = kmeans(pts, 1, 42);
    REQUIRE(centers.size() == 1);
    CHECK(centers[0] == Position2(1, 1));
}

TEST_CASE("kmeans with K equal to distinct count returns the points") {
    std::vector<Position2> pts = {{0, 0}, {5, 0}, {0, 5}};
    auto centers = kmeans(pts, 3, 1);
    REQUIRE(centers.size() == 3);
    for (const auto& p : pts) {
        bool found = false;
        for (const auto& c : centers) {
            if ((c - p).norm() == 0.0) found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("kmeans pads duplicate centers when K exceeds distinct points") {
    std::vector<Position2> pts = {{1, 1}, {1, 1}, {2, 2}};
    const auto centers = kmeans(pts, 5, 7);
    REQUIRE(centers.size() == 5);
    for (const auto& c : centers) {
        CHECK(((c - Position2(1, 1)).norm() == 0.0 || (c - Position2(2, 2)).norm() == 0.0));
    }
}

TEST_CASE("kmeans on the unit square matches the exhaustive partition oracle") {
    std::vector<Position2> pts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    const auto centers = kmeans(pts, 2, 1234);
    const Scalar got = oracles::wcss_of(pts, centers);
    const Scalar best = oracles::best_partition_wcss(pts, 2);
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("kmeans WCSS is non-increasing across Lloyd iterations") {
    Rng rng(77);
    std::vector<Position2> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
    std::vector<Scalar> history;
    KMeansOptions opts;
    opts.restarts = 1;
    kmeans(pts, 4, 99, opts, &history);
    REQUIRE(history.size() >= 1);
    for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1] + 1e-12);
}

TEST_CASE("kmeans is deterministic given the seed") {
    Rng rng(17);
    std::vector<Position2> pts;
    for (int i = 0; i < 25; ++i) pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
    const auto a = kmeans(pts, 5, 31415);
    const auto b = kmeans(pts, 5, 31415);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() == 0.0);
}

TEST_CASE("estimate_goals with identical pool lines collapses to one point") {
    const Trajectory query = line_traj({10, 10}, {0.1, 0}, 8);
    std::vector<Trajectory> pool;
    for (int i = 0; i < 6; ++i) {
        pool.push_back(line_traj({static_cast<Scalar>(i), 0}, {0.3, 0.1}, 20, i + 1));
    }
    const auto goals = estimate_goals(query, pool, 6, 4, 2, {1.0, false});
    const Position2 expected = Position2(10, 10) + 19 * Vec2(0.3, 0.1);
    for (const auto& g : goals.centers) CHECK((g - expected).norm() < 1e-12);
}

TEST_CASE("estimate_goals with K=1 is the mean normalized endpoint plus query start") {
    Rng rng(21);
    const Trajectory query = random_traj(rng, 8);
    std::vector<Trajectory> pool;
    for (int i = 0; i < 5; ++i) pool.push_back(random_traj(rng, 20));

    const auto goals = estimate_goals(query, pool, 5, 1, 3, {1.0, false});
    Position2 mean = Position2::Zero();
    for (const auto& t : pool) mean += (t.last() - t.first());
    mean /= static_cast<Scalar>(pool.size());
    REQUIRE(goals.centers.size() == 1);
    CHECK((goals.centers[0] - (query.first() + mean)).norm() < 1e-12);
}

TEST_CASE("estimate_goals matches manual composition on a small pool") {
    Rng rng(33);
    const Trajectory query = random_traj(rng, 8);
    std::vector<Trajectory> pool;
    for (int i = 0; i < 7; ++i) pool.push_back(random_traj(rng, 20));

    const SoftDtwParams params{1.0, false};
    const auto goals = estimate_goals(query, pool, 4, 2, 5, params);

    const auto repo = build_repository(query, pool, 4, params);
    std::vector<Position2> endpoints;
    for (const auto& e : repo.entries) endpoints.push_back(e.normalized.last());
    const auto centers = kmeans(endpoints, 2, 5);
    REQUIRE(goals.centers.size() == centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        CHECK((goals.centers[i] - (centers[i] + query.first())).norm() < 1e-12);
    }
}

TEST_CASE("estimate_goals is translation equivariant") {
    Rng rng(41);
    Trajectory query = random_traj(rng, 8);
    std::vector<Trajectory> pool;
    for (int i = 0; i < 8; ++i) pool.push_back(random_traj(rng, 20));

    const auto base = estimate_goals(query, pool, 5, 3, 9, {1.0, false});

    const Vec2 offset(12.5, -3.25);
    Trajectory query_t = query;
    query_t.positions.rowwise() += offset.transpose();
    std::vector<Trajectory> pool_t = pool;
    for (auto& t : pool_t) t.positions.rowwise() += offset.transpose();

    const auto moved = estimate_goals(query_t, pool_t, 5, 3, 9, {1.0, false});
    REQUIRE(base.centers.size() == moved.centers.size());
    for (std::size_t i = 0; i < base.centers.size(); ++i) {
        CHECK((moved.centers[i] - base.centers[i] - offset).norm() < 1e-9);
    }
}

TEST_CASE("select_oracle_goal") {
    GoalCandidates cands;
    cands.centers = {{0, 0}, {10, 10}};
    CHECK(select_oracle_goal(cands, {1, 1}) == Position2(0, 0));
    CHECK(select_oracle_goal(cands, {10, 10}) == Position2(10, 10));

    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        GoalCandidates random_cands;
        for (int i = 0; i < 8; ++i) random_cands.centers.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
        const Position2 gt(rng.uniform(-5, 5), rng.uniform(-5, 5));
        const Position2 got = select_oracle_goal(random_cands, gt);
        // linear scan oracle + membership
        Scalar best = std::numeric_limits<Scalar>::infinity();
        Position2 want = random_cands.centers[0];
        bool member = false;
        for (const auto& c : random_cands.centers) {
            if ((c - gt).norm() < best) {
                best = (c - gt).norm();
                want = c;
            }
            if ((c - got).norm() == 0.0) member = true;
        }
        CHECK((got - want).norm() == 0.0);
        CHECK(member);
    }
}
