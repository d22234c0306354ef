import { beforeEach, describe, expect, it } from "vitest";

import type { LogRecord, PlanDoc } from "../src/protocol.js";
import { TrialMachine } from "../src/trial.js";

const LOG_FIELDS = [
  "timestamp_s",
  "step",
  "scene",
  "fov_deg",
  "phosphenes",
  "event_type",
  "object_class",
  "count",
];

function makePlan(length = 15, breakAfter = 7): PlanDoc {
  return {
    seed: 1,
    break_after: breakAfter,
    steps: Array.from({ length }, (_, i) => ({
      step: i + 1,
      scene: `scene_${String(i).padStart(3, "0")}`,
      fov_deg: i % 2 === 0 ? 20 : 60,
      phosphenes: i % 3 === 0 ? 500 : 200,
    })),
  };
}

let t = 0;
const clock = () => t;

function machineAt(plan = makePlan()): TrialMachine {
  t = 0;
  const m = new TrialMachine(plan, { now: clock });
  m.start();
  return m;
}

function advance(m: TrialMachine, dt: number): void {
  t += dt;
  m.tick();
}

beforeEach(() => {
  t = 0;
});

describe("TrialMachine", () => {
  it("opens each step with a fixation phase and logs its end at stimulus onset", () => {
    const m = machineAt();
    expect(m.phase).toBe("fixation");
    expect(m.records).toHaveLength(0);
    advance(m, 1.5);
    expect(m.phase).toBe("fixation");
    advance(m, 0.5);
    expect(m.phase).toBe("scanning");
    expect(m.records).toHaveLength(1);
    const rec = m.records[0]!;
    expect(rec.event_type).toBe("fixation");
    expect(rec.timestamp_s).toBe(2);
    expect(rec.step).toBe(1);
    expect(rec.scene).toBe("scene_000");
    expect(rec.object_class).toBeNull();
    expect(rec.count).toBeNull();
  });

  it("ignores responses and done presses outside the scanning phase", () => {
    const m = machineAt();
    expect(m.submitResponse("chair")).toBe(false);
    expect(m.pressDone()).toBe(false);
    expect(m.records).toHaveLength(0);
  });

  it("counts responses cumulatively per class within a step", () => {
    const m = machineAt();
    advance(m, 2);
    t += 3;
    m.submitResponse("chair");
    t += 1;
    m.submitResponse("bed");
    t += 1;
    m.submitResponse("chair");
    const responses = m.records.filter((r) => r.event_type === "response");
    expect(responses.map((r) => [r.object_class, r.count, r.timestamp_s])).toEqual([
      ["chair", 1, 5],
      ["bed", 1, 6],
      ["chair", 2, 7],
    ]);
  });

  it("resets the tally between steps", () => {
    const m = machineAt();
    advance(m, 2);
    m.submitResponse("chair");
    m.pressDone();
    advance(m, 2); // second fixation ends
    m.submitResponse("chair");
    const counts = m.records.filter((r) => r.event_type === "response").map((r) => r.count);
    expect(counts).toEqual([1, 1]);
  });

  it("times a step out exactly at the cap", () => {
    const m = machineAt();
    advance(m, 2); // scanning from t=2
    advance(m, 59.9);
    expect(m.phase).toBe("scanning");
    advance(m, 0.25); // clock overshoots the deadline
    expect(m.phase).toBe("fixation"); // next step
    const out = m.records.at(-1)!;
    expect(out.event_type).toBe("timeout");
    expect(out.timestamp_s).toBe(62); // onset + cap, not the noisy frame clock
    expect(out.step).toBe(1);
  });

  it("inserts a break after the configured step and resumes afterwards", () => {
    const m = machineAt(makePlan(10, 3));
    for (let step = 1; step <= 3; step++) {
      advance(m, 2);
      expect(m.phase).toBe("scanning");
      m.pressDone();
    }
    expect(m.phase).toBe("break");
    expect(m.currentStep()!.step).toBe(3);
    advance(m, 59);
    expect(m.phase).toBe("break");
    advance(m, 1);
    expect(m.phase).toBe("fixation");
    advance(m, 2);
    expect(m.currentStep()!.step).toBe(4);
  });

  it("skips the break when it would fall after the final step", () => {
    const m = machineAt(makePlan(3, 3));
    for (let step = 1; step <= 3; step++) {
      advance(m, 2);
      m.pressDone();
    }
    expect(m.phase).toBe("finished");
  });

  it("finishes after the last step and refuses a second start", () => {
    const m = machineAt(makePlan(2, 7));
    advance(m, 2);
    m.pressDone();
    advance(m, 2);
    m.pressDone();
    expect(m.phase).toBe("finished");
    expect(m.currentStep()).toBeNull();
    expect(() => m.start()).toThrow(/already started/);
  });

  it("runs a full session and logs one terminal event per step", () => {
    const plan = makePlan();
    const m = machineAt(plan);
    let guard = 0;
    while (m.phase !== "finished" && guard++ < 1000) {
      m.tick();
      if (m.phase === "fixation") t += 2;
      else if (m.phase === "break") t += 60;
      else if (m.phase === "scanning") {
        const step = m.currentStep()!;
        if (step.step % 4 === 0) t += 60; // let these steps time out
        else {
          t += 5;
          m.submitResponse("table");
          m.pressDone();
        }
      }
    }
    expect(m.phase).toBe("finished");
    const byType = (name: string) => m.records.filter((r) => r.event_type === name).length;
    expect(byType("fixation")).toBe(15);
    expect(byType("timeout")).toBe(3);
    expect(byType("done")).toBe(12);
    expect(byType("response")).toBe(12);
  });

  it("serializes records as JSONL in the analyzer's field order", () => {
    const m = machineAt();
    advance(m, 2);
    m.submitResponse("plant");
    m.pressDone();
    const lines = m.logJsonl().split("\n");
    expect(lines.at(-1)).toBe(""); // trailing newline
    const parsed = lines.slice(0, -1).map((line) => JSON.parse(line) as LogRecord);
    expect(parsed).toHaveLength(3);
    for (const rec of parsed) {
      expect(Object.keys(rec)).toEqual(LOG_FIELDS);
    }
    expect(parsed[1]).toMatchObject({ event_type: "response", object_class: "plant", count: 1 });
  });
});
