/**
 * Interactive trial state machine.
 *
 * Walks a trial plan: a fixation dot phase, then a scanning phase capped
 * at 60 s during which object-class clicks are recorded with cumulative
 * counts, a Done press ends the step early, and a 60 s break follows the
 * configured step. The page clock is authoritative: the machine is fed a
 * monotonic `now()` in seconds (injectable for tests) and stamps records
 * with session-relative times. The fixation record is stamped at stimulus
 * onset, the moment the dot phase ends, matching the headless runner.
 */

import type { LogRecord, PlanDoc, PlanStep } from "./protocol.js";
import { makeRecord, toJsonl } from "./protocol.js";

export type Phase = "idle" | "fixation" | "scanning" | "break" | "finished";

export interface TrialOptions {
  now: () => number; // seconds, monotonic
  fixationS?: number;
  timeoutS?: number;
  breakS?: number;
}

export class TrialMachine {
  readonly records: LogRecord[] = [];
  phase: Phase = "idle";

  private readonly now: () => number;
  private readonly fixationS: number;
  private readonly timeoutS: number;
  private readonly breakS: number;

  private stepIndex = -1; // index into plan.steps
  private sessionStart = 0;
  private phaseStart = 0; // session-relative start of the current phase
  private onsetS = 0; // stimulus onset of the current step
  private tally = new Map<string, number>();

  constructor(readonly plan: PlanDoc, options: TrialOptions) {
    this.now = options.now;
    this.fixationS = options.fixationS ?? 2;
    this.timeoutS = options.timeoutS ?? 60;
    this.breakS = options.breakS ?? 60;
  }

  start(): void {
    if (this.phase !== "idle") throw new Error("trial already started");
    this.sessionStart = this.now();
    this.enterStep(0);
  }

  /** Session-relative clock. */
  elapsedSession(): number {
    return this.now() - this.sessionStart;
  }

  /** Seconds remaining in the current phase (scanning/fixation/break). */
  countdown(): number {
    const elapsed = this.elapsedSession() - this.phaseStart;
    const budget =
      this.phase === "scanning" ? this.timeoutS : this.phase === "break" ? this.breakS : this.fixationS;
    return Math.max(0, budget - elapsed);
  }

  currentStep(): PlanStep | null {
    return this.plan.steps[this.stepIndex] ?? null;
  }

  /** Advance phases according to the clock. Call once per animation frame. */
  tick(): void {
    if (this.phase === "idle" || this.phase === "finished") return;
    const t = this.elapsedSession();
    if (this.phase === "fixation" && t - this.phaseStart >= this.fixationS) {
      this.beginScanning();
    } else if (this.phase === "scanning" && t - this.phaseStart >= this.timeoutS) {
      const step = this.mustStep();
      this.records.push(makeRecord(this.onsetS + this.timeoutS, step, "timeout"));
      this.advance();
    } else if (this.phase === "break" && t - this.phaseStart >= this.breakS) {
      this.enterStep(this.stepIndex + 1);
    }
  }

  /** Record one recognized object; ignored outside the scanning phase. */
  submitResponse(objectClass: string): boolean {
    if (this.phase !== "scanning") return false;
    const step = this.mustStep();
    const count = (this.tally.get(objectClass) ?? 0) + 1;
    this.tally.set(objectClass, count);
    this.records.push(makeRecord(this.elapsedSession(), step, "response", objectClass, count));
    return true;
  }

  /** "I cannot see more objects": ends the step early. */
  pressDone(): boolean {
    if (this.phase !== "scanning") return false;
    this.records.push(makeRecord(this.elapsedSession(), this.mustStep(), "done"));
    this.advance();
    return true;
  }

  logJsonl(): string {
    return toJsonl(this.records);
  }

  private mustStep(): PlanStep {
    const step = this.plan.steps[this.stepIndex];
    if (!step) throw new Error(`no plan step at index ${this.stepIndex}`);
    return step;
  }

  private enterStep(index: number): void {
    if (index >= this.plan.steps.length) {
      this.stepIndex = this.plan.steps.length; // currentStep() is null once finished
      this.phase = "finished";
      return;
    }
    this.stepIndex = index;
    this.phase = "fixation";
    this.phaseStart = this.elapsedSession();
    this.tally = new Map();
  }

  private beginScanning(): void {
    this.phase = "scanning";
    this.onsetS = this.elapsedSession();
    this.phaseStart = this.onsetS;
    this.records.push(makeRecord(this.onsetS, this.mustStep(), "fixation"));
  }

  private advance(): void {
    const finishedStep = this.mustStep();
    if (finishedStep.step === this.plan.break_after && this.stepIndex + 1 < this.plan.steps.length) {
      this.phase = "break";
      this.phaseStart = this.elapsedSession();
    } else {
      this.enterStep(this.stepIndex + 1);
    }
  }
}
