#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "halcyon/sim.hpp"

using namespace halcyon;

namespace {

const std::string kScenarioDir = HALCYON_SCENARIO_DIR;

Scenario load_or_die(const std::string& name) {
  ScenarioLoad load = load_scenario_file(kScenarioDir + "/" + name);
  REQUIRE_MESSAGE(load.ok(), name);
  return *load.scenario;
}

std::vector<std::string> lines_mentioning(const RunResult& r, const std::string& needle) {
  std::vector<std::string> out;
  for (const std::string& line : r.trace_lines)
    if (line.find(needle) != std::string::npos) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("fire walkthrough: the owner's decision sequence is frozen") {
  RunResult r = run(load_or_die("house_fire.scn"));

  // Hand-simulated golden: send at 10 -> polled at 11 -> defer + delegate,
  // recheck due at 71 (meeting over) -> delivered through the phone.
  const std::vector<std::string> expected = {
      "tick=11 L1 principal=personX msg=1 decision=Admitted",
      "tick=11 L2 principal=personX msg=1 decision=Defer:Busy",
      "tick=11 Q principal=personX msg=1 event=enqueue seq=1",
      "tick=11 L3 principal=personX msg=1 decision=Forward:[fire-department]",
      "tick=11 L3 principal=personX msg=1 decision=Reply:home",
      "tick=71 Q principal=personX msg=1 event=due seq=1",
      "tick=71 L5 principal=personX msg=1 decision=DeliverNow:Visual",
      "tick=71 L6 principal=personX msg=1 decision=Deliver:phone",
      "tick=71 L7 principal=personX msg=1 decision=Deliver:phone",
      "tick=71 Q principal=personX msg=1 event=remove seq=1",
  };
  CHECK(lines_mentioning(r, "principal=personX msg=1") == expected);

  // The fire department receives the forwarded envelope via the grid and
  // delivers it through its own pipeline, fast path.
  bool fd_delivery = false;
  for (const DeliveryRecord& d : r.deliveries) {
    if (d.recipient.id == "fire-department") {
      fd_delivery = true;
      CHECK(d.presentation.payload == "fwd[home]: Fire at home");
      CHECK(d.path == std::vector<PathTag>{PathTag::L1, PathTag::L2, PathTag::L6, PathTag::L7});
      CHECK(d.delivered_at == 12);
    }
  }
  CHECK(fd_delivery);

  // personX's record carries the queue-path tags including L3.
  for (const DeliveryRecord& d : r.deliveries) {
    if (d.recipient.id == "personX")
      CHECK(d.path == std::vector<PathTag>{PathTag::L1, PathTag::L2, PathTag::Q, PathTag::L3,
                                           PathTag::L4, PathTag::L5, PathTag::L6, PathTag::L7});
  }

  CHECK(r.summary.deliveries == 3);  // personX + fire-department + home (the reply)
  CHECK(r.summary.forwards == 1);
  CHECK(r.summary.replies == 1);
  CHECK(r.quiescent);  // ends long before tick-limit 200
  CHECK(r.end_tick == 71);
}

TEST_CASE("collision walkthrough: same-tick interrupt through the speaker") {
  RunResult r = run(load_or_die("collision.scn"));
  REQUIRE(r.deliveries.size() == 1);
  const DeliveryRecord& d = r.deliveries[0];
  CHECK(d.recipient.id == "driver");
  CHECK(d.presentation.modality == Modality::Audio);
  CHECK(d.presentation.device.device_id == "speaker");
  CHECK(d.delivered_at == 6);  // published at 5, one tick of propagation
  CHECK(d.path == std::vector<PathTag>{PathTag::L1, PathTag::L2, PathTag::L6, PathTag::L7});
}

TEST_CASE("two runs of the same scenario are byte-identical") {
  for (const char* name : {"house_fire.scn", "collision.scn", "deferred_memo.scn"}) {
    Scenario s = load_or_die(name);
    CHECK(run(s).trace_text() == run(s).trace_text());
  }
}

TEST_CASE("run equals iterated step") {
  for (const char* name : {"house_fire.scn", "collision.scn", "deferred_memo.scn"}) {
    Scenario s = load_or_die(name);
    RunResult via_run = run(s);

    SimState state(s);
    while (state.step().processed) {
    }
    CHECK(via_run.trace_text() == state.result().trace_text());
  }
}

TEST_CASE("stepping a quiescent state is a no-op with the flag set") {
  ScenarioLoad load = load_scenario("scenario empty\n");
  REQUIRE(load.ok());
  SimState state(*load.scenario);

  StepEvents first = state.step();
  CHECK(first.processed);
  CHECK(first.quiescent_after);
  CHECK(state.finished());

  StepEvents again = state.step();
  CHECK_FALSE(again.processed);
  CHECK(again.pipeline_events.empty());
  CHECK(again.new_trace_lines.empty());
  CHECK(again.quiescent_after);

  RunResult r = state.result();
  CHECK(r.trace_lines.empty());  // summary only
  CHECK(r.summary.published == 0);
}

TEST_CASE("step surfaces grid publishes as new trace lines") {
  ScenarioLoad load = load_scenario(
      "scenario one\n"
      "tick-limit 5\n"
      "principal a\nprincipal b\n"
      "device b bell modality=Audio priority=1\n"
      "at 0 send from=a to=[b] urgency=critical valid=0..inf payload=\"ping\"\n");
  REQUIRE(load.ok());
  SimState state(*load.scenario);
  StepEvents first = state.step();
  REQUIRE(first.new_trace_lines.size() == 1);
  CHECK(first.new_trace_lines[0] == "tick=0 grid publish msg=1 ch=TX");
}

TEST_CASE("conservation holds on the bundled scenarios") {
  for (const char* name : {"house_fire.scn", "collision.scn", "deferred_memo.scn"}) {
    RunResult r = run(load_or_die(name));
    CHECK(r.summary.published ==
          r.summary.delivered + r.summary.dropped + r.summary.still_queued);
    CHECK(r.summary.published == r.envelopes.size());
  }
}

TEST_CASE("a never-free owner rechecks once per delay interval") {
  ScenarioLoad load = load_scenario(
      "scenario stuck\n"
      "tick-limit 100\n"
      "recheck-delay 10\n"
      "principal src\nprincipal sink\n"
      "device sink lamp modality=Visual priority=1\n"
      "availability sink 0.. busy(lab)\n"
      "at 0 send from=src to=[sink] urgency=normal valid=0..inf payload=\"note\"\n");
  REQUIRE(load.ok());
  RunResult r = run(*load.scenario);

  CHECK(r.summary.still_queued == 1);
  REQUIRE(r.leftover_queues.count("sink") == 1);
  const DeferredItem& item = r.leftover_queues.at("sink")[0];
  // Enqueued at tick 1; checked at 11, 21, ..., 91: elapsed/delay rechecks.
  Tick elapsed = r.end_tick - item.enqueued_at;
  CHECK(item.recheck_count >= elapsed / 10 - 1);
  CHECK(item.recheck_count <= elapsed / 10 + 1);
  CHECK_FALSE(r.quiescent);  // the queue never drains
  CHECK(r.end_tick == 100);
}

TEST_CASE("unimportant messages wait out the recheck delay even when free") {
  ScenarioLoad load = load_scenario(
      "scenario memo\n"
      "tick-limit 60\n"
      "recheck-delay 15\n"
      "principal src\nprincipal dst\n"
      "device dst screen modality=Visual priority=1\n"
      "availability dst 0.. free\n"
      "at 0 send from=src to=[dst] urgency=normal valid=0..inf payload=\"memo\"\n");
  REQUIRE(load.ok());
  RunResult r = run(*load.scenario);

  auto deferred = lines_mentioning(r, "decision=Defer:NotImportantNow");
  REQUIRE(deferred.size() == 1);
  CHECK(deferred[0] == "tick=1 L2 principal=dst msg=1 decision=Defer:NotImportantNow");
  REQUIRE(r.deliveries.size() == 1);
  CHECK(r.deliveries[0].delivered_at == 16);  // enqueued at 1, due at 1+15
  CHECK(r.deliveries[0].path ==
        std::vector<PathTag>{PathTag::L1, PathTag::L2, PathTag::Q, PathTag::L4, PathTag::L5,
                             PathTag::L6, PathTag::L7});  // no L3: the no-hurry branch
}

TEST_CASE("expired-at-source sends are rejected and accounted") {
  ScenarioLoad load = load_scenario(
      "scenario stale\n"
      "tick-limit 20\n"
      "principal a\nprincipal b\n"
      "at 10 send from=a to=[b] urgency=high valid=0..5 payload=\"old news\"\n");
  REQUIRE(load.ok());
  RunResult r = run(*load.scenario);
  CHECK(r.summary.rejected_sends == 1);
  CHECK(r.summary.published == 0);
  CHECK(r.envelopes.empty());
  CHECK(lines_mentioning(r, "publish").empty());
  CHECK(r.quiescent);
}

TEST_CASE("messages expiring in the queue drop at recheck") {
  ScenarioLoad load = load_scenario(
      "scenario fading\n"
      "tick-limit 60\n"
      "recheck-delay 10\n"
      "principal src\nprincipal dst\n"
      "device dst screen modality=Visual priority=1\n"
      "availability dst 0.. busy(calls)\n"
      "at 0 send from=src to=[dst] urgency=high valid=0..5 payload=\"brief\"\n");
  REQUIRE(load.ok());
  RunResult r = run(*load.scenario);
  CHECK(r.deliveries.empty());
  REQUIRE_FALSE(r.drops.empty());
  bool found = false;
  for (const DropRecord& d : r.drops) {
    if (d.principal.id == "dst" && d.reason == DropReason::Expired && d.level == PathTag::L5) {
      found = true;
      CHECK(d.at == 11);  // first recheck after expiry
    }
  }
  CHECK(found);
  CHECK(r.summary.dropped == 1);
  CHECK(r.quiescent);  // queue drained by the drop
}

TEST_CASE("a multi-recipient envelope is classified once") {
  ScenarioLoad load = load_scenario(
      "scenario fanout\n"
      "tick-limit 30\n"
      "principal src\nprincipal a\nprincipal b\n"
      "device a lamp modality=Visual priority=1\n"
      "device b bell modality=Audio priority=1\n"
      "availability a 0.. free\navailability b 0.. free\n"
      "at 0 send from=src to=[a,b] urgency=high valid=0..inf payload=\"both of you\"\n");
  REQUIRE(load.ok());
  RunResult r = run(*load.scenario);
  CHECK(r.summary.deliveries == 2);  // one event per recipient
  CHECK(r.summary.published == 1);
  CHECK(r.summary.delivered == 1);  // but the message is one
  CHECK(r.summary.published ==
        r.summary.delivered + r.summary.dropped + r.summary.still_queued);
}

TEST_CASE("devices that vanish before delivery degrade the decision") {
  // The only device disappears at tick 9; the perishable warning arriving at
  // tick 10 has nowhere to go.
  ScenarioLoad load = load_scenario(
      "scenario vanish\n"
      "tick-limit 30\n"
      "principal src\nprincipal dst\n"
      "device dst screen modality=Visual priority=1 present=0..9\n"
      "availability dst 0.. free\n"
      "at 9 send from=src to=[dst] urgency=critical valid=0..inf perishable payload=\"flash\"\n");
  REQUIRE(load.ok());
  RunResult r = run(*load.scenario);
  CHECK(r.deliveries.empty());
  REQUIRE(r.drops.size() >= 1);
  bool undeliverable = false;
  for (const DropRecord& d : r.drops)
    if (d.principal.id == "dst" && d.reason == DropReason::Undeliverable) undeliverable = true;
  CHECK(undeliverable);
}

TEST_CASE("the summary block format is stable") {
  RunResult r = run(load_or_die("collision.scn"));
  CHECK(r.summary.to_text() ==
        "-- summary --\n"
        "published=1 delivered=1 dropped=0 still_queued=0\n"
        "drop_events: unauthorized=1 expired=0 undeliverable=0\n"
        "deliveries=1 forwards=0 replies=0 rejected_sends=0\n"
        "max_queue_depth=0\n"
        "mean_delivery_latency=1.00\n");
}
