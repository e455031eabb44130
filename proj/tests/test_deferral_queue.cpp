#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "halcyon/deferral_queue.hpp"

using namespace halcyon;

namespace {

Envelope env_for(MsgId id) {
  Envelope env;
  env.msg_id = id;
  env.payload = "p";
  env.sender = PrincipalId{"s"};
  env.authority = AuthorityList({PrincipalId{"r"}});
  return env;
}

std::vector<MsgId> ids_of(const std::vector<DeferredItem>& items) {
  std::vector<MsgId> out;
  for (const DeferredItem& i : items) out.push_back(i.env.msg_id);
  return out;
}

}  // namespace

TEST_CASE("enqueue assigns increasing sequence numbers from one") {
  DeferralQueue q(PrincipalId{"r"});
  CHECK(q.enqueue(env_for(10), 0, DeferReason::Busy) == QueueStatus::Ok);
  CHECK(q.find(10)->enqueue_seq == 1);
  CHECK(q.enqueue(env_for(11), 0, DeferReason::Busy) == QueueStatus::Ok);
  CHECK(q.find(11)->enqueue_seq == 2);
}

TEST_CASE("enqueueing the same message twice is a duplicate") {
  DeferralQueue q(PrincipalId{"r"});
  CHECK(q.enqueue(env_for(10), 0, DeferReason::Busy) == QueueStatus::Ok);
  CHECK(q.enqueue(env_for(10), 1, DeferReason::Busy) == QueueStatus::Duplicate);
  CHECK(q.size() == 1);
}

TEST_CASE("interleaved enqueues for two owners keep independent sequences") {
  std::mt19937 rng(3);
  for (int round = 0; round < 20; ++round) {
    DeferralQueue qa(PrincipalId{"a"});
    DeferralQueue qb(PrincipalId{"b"});
    std::uint64_t next_a = 1, next_b = 1;  // oracle: one counter per owner
    MsgId next_id = 1;
    for (int i = 0; i < 12; ++i) {
      if (rng() % 2 == 0) {
        qa.enqueue(env_for(next_id), 0, DeferReason::Busy);
        CHECK(qa.find(next_id)->enqueue_seq == next_a++);
      } else {
        qb.enqueue(env_for(next_id), 0, DeferReason::Busy);
        CHECK(qb.find(next_id)->enqueue_seq == next_b++);
      }
      ++next_id;
    }
  }
}

TEST_CASE("due filters by last_checked + delay") {
  DeferralQueue q(PrincipalId{"r"});
  q.enqueue(env_for(1), 10, DeferReason::Busy);

  SUBCASE("boundary: one tick early") { CHECK(q.due(69, 60).empty()); }
  SUBCASE("boundary: exactly due") {
    auto due = q.due(70, 60);
    REQUIRE(due.size() == 1);
    CHECK(due[0].env.msg_id == 1);
    CHECK(due[0].last_checked == 70);
    CHECK(due[0].recheck_count == 1);
  }
  SUBCASE("empty queue") {
    DeferralQueue empty(PrincipalId{"r"});
    CHECK(empty.due(1000, 1).empty());
  }
}

TEST_CASE("due returns all due items in enqueue order") {
  DeferralQueue q(PrincipalId{"r"});
  q.enqueue(env_for(1), 10, DeferReason::Busy);
  q.enqueue(env_for(2), 20, DeferReason::Busy);
  q.enqueue(env_for(3), 30, DeferReason::Busy);
  CHECK(ids_of(q.due(100, 60)) == std::vector<MsgId>{1, 2, 3});
}

TEST_CASE("due order equals enqueue order for every permutation of three items") {
  std::vector<MsgId> ids = {1, 2, 3};
  std::sort(ids.begin(), ids.end());
  do {
    DeferralQueue q(PrincipalId{"r"});
    for (MsgId id : ids) q.enqueue(env_for(id), 0, DeferReason::Busy);
    CHECK(ids_of(q.due(100, 10)) == ids);
  } while (std::next_permutation(ids.begin(), ids.end()));
}

TEST_CASE("one item due, one not: filter semantics") {
  DeferralQueue q(PrincipalId{"r"});
  q.enqueue(env_for(1), 0, DeferReason::Busy);
  q.enqueue(env_for(2), 50, DeferReason::Busy);
  CHECK(ids_of(q.due(60, 60)) == std::vector<MsgId>{1});
}

TEST_CASE("recheck_count advances once per due interval") {
  DeferralQueue q(PrincipalId{"r"});
  q.enqueue(env_for(1), 0, DeferReason::Busy);
  for (Tick t = 0; t <= 100; ++t) q.due(t, 10);
  CHECK(q.find(1)->recheck_count == 10);  // elapsed / delay
}

TEST_CASE("remove keeps the order of the remaining items") {
  DeferralQueue q(PrincipalId{"r"});
  q.enqueue(env_for(1), 0, DeferReason::Busy);
  q.enqueue(env_for(2), 0, DeferReason::Busy);
  q.enqueue(env_for(3), 0, DeferReason::Busy);

  CHECK(q.remove(2, 5) == QueueStatus::Ok);
  CHECK(ids_of(q.due(100, 1)) == std::vector<MsgId>{1, 3});
  CHECK(q.remove(99, 5) == QueueStatus::NotFound);

  CHECK(q.remove(1, 6) == QueueStatus::Ok);
  CHECK(q.remove(3, 6) == QueueStatus::Ok);
  CHECK(q.empty());
}

TEST_CASE("requeue retains the FIFO position") {
  DeferralQueue q(PrincipalId{"r"});
  q.enqueue(env_for(1), 0, DeferReason::Busy);
  q.enqueue(env_for(2), 0, DeferReason::Busy);

  auto first_round = q.due(10, 10);
  REQUIRE(first_round.size() == 2);
  CHECK(q.requeue(1, 10) == QueueStatus::Ok);
  CHECK(q.requeue(2, 10) == QueueStatus::Ok);

  // Oldest item is still returned first (move-to-back would flip this).
  CHECK(ids_of(q.due(20, 10)) == std::vector<MsgId>{1, 2});
}

TEST_CASE("requeue twice within a tick is a single bookkeeping update") {
  DeferralQueue q(PrincipalId{"r"});
  q.enqueue(env_for(1), 0, DeferReason::Busy);
  q.due(10, 10);
  CHECK(q.requeue(1, 10) == QueueStatus::Ok);
  Tick checked = q.find(1)->last_checked;
  std::uint32_t count = q.find(1)->recheck_count;
  CHECK(q.requeue(1, 10) == QueueStatus::Ok);
  CHECK(q.find(1)->last_checked == checked);
  CHECK(q.find(1)->recheck_count == count);
}

TEST_CASE("requeue after remove is NotFound") {
  DeferralQueue q(PrincipalId{"r"});
  q.enqueue(env_for(1), 0, DeferReason::Busy);
  q.remove(1, 1);
  CHECK(q.requeue(1, 2) == QueueStatus::NotFound);
}

TEST_CASE("relative order of two surviving items never changes") {
  std::mt19937 rng(17);
  for (int round = 0; round < 50; ++round) {
    DeferralQueue q(PrincipalId{"r"});
    std::vector<MsgId> alive;  // oracle: enqueue order of surviving items
    MsgId next_id = 1;
    Tick now = 0;
    for (int op = 0; op < 40; ++op) {
      now += rng() % 5;
      switch (rng() % 4) {
        case 0:
          if (alive.size() < 10) {
            q.enqueue(env_for(next_id), now, DeferReason::Busy);
            alive.push_back(next_id);
            ++next_id;
          }
          break;
        case 1: {
          std::vector<MsgId> due = ids_of(q.due(now, 3));
          std::vector<MsgId> expect;
          for (MsgId id : alive)
            if (std::find(due.begin(), due.end(), id) != due.end()) expect.push_back(id);
          CHECK(due == expect);  // due order respects enqueue order
          break;
        }
        case 2:
          if (!alive.empty()) {
            MsgId victim = alive[rng() % alive.size()];
            q.remove(victim, now);
            alive.erase(std::find(alive.begin(), alive.end(), victim));
          }
          break;
        default:
          if (!alive.empty()) q.requeue(alive[rng() % alive.size()], now);
      }
      // Full drain view at a far-future probe tick = enqueue order.
      Tick probe = now + (static_cast<Tick>(op) + 2) * 1000000;
      CHECK(ids_of(q.due(probe, 1)) == alive);
    }
  }
}

TEST_CASE("capacity guard reports overflow") {
  DeferralQueue q(PrincipalId{"r"}, nullptr, 2);
  CHECK(q.enqueue(env_for(1), 0, DeferReason::Busy) == QueueStatus::Ok);
  CHECK(q.enqueue(env_for(2), 0, DeferReason::Busy) == QueueStatus::Ok);
  CHECK(q.at_capacity());
  CHECK(q.enqueue(env_for(3), 0, DeferReason::Busy) == QueueStatus::Overflow);
  CHECK(q.size() == 2);
}

TEST_CASE("queue trace lines carry tick, owner, event and seq") {
  TraceLog trace;
  DeferralQueue q(PrincipalId{"personX"}, &trace);
  q.enqueue(env_for(5), 11, DeferReason::Busy);
  q.due(71, 60);
  q.requeue(5, 71);
  q.remove(5, 80);
  REQUIRE(trace.size() == 4);
  CHECK(trace.lines()[0] == "tick=11 Q principal=personX msg=5 event=enqueue seq=1");
  CHECK(trace.lines()[1] == "tick=71 Q principal=personX msg=5 event=due seq=1");
  CHECK(trace.lines()[2] == "tick=71 Q principal=personX msg=5 event=requeue seq=1");
  CHECK(trace.lines()[3] == "tick=80 Q principal=personX msg=5 event=remove seq=1");
}
