/**
 * Message and log schemas shared with the frame service.
 *
 * The WebSocket speaks one text JSON envelope per request followed by one
 * binary message of width*height single-channel bytes; session logs are
 * JSONL records identical to the ones the headless runner writes, so the
 * analyze command consumes viewer logs unchanged.
 */

export type Quaternion = [number, number, number, number]; // scalar first

export interface Condition {
  fov_deg: number;
  phosphenes: number;
}

export interface FrameRequest {
  quat: Quaternion;
  fov_deg: number;
  phosphenes: number;
  scene: string;
}

export interface FrameEnvelope {
  ok: boolean;
  error?: string;
  scene?: string;
  fov_deg?: number;
  phosphenes?: number;
  width?: number;
  height?: number;
  render_ms?: number;
}

export interface Manifest {
  scenes: string[];
  panorama_dims: [number, number] | null;
  conditions: Condition[];
  camera: { width: number; height: number; fx: number; fy: number; cx: number; cy: number };
  object_classes: string[];
}

export interface PlanStep {
  step: number;
  scene: string;
  fov_deg: number;
  phosphenes: number;
}

export interface PlanDoc {
  seed: number;
  break_after: number;
  steps: PlanStep[];
}

export type EventType = "fixation" | "response" | "done" | "timeout";

export interface LogRecord {
  timestamp_s: number;
  step: number;
  scene: string;
  fov_deg: number;
  phosphenes: number;
  event_type: EventType;
  object_class: string | null;
  count: number | null;
}

export function makeRecord(
  timestampS: number,
  step: PlanStep,
  eventType: EventType,
  objectClass: string | null = null,
  count: number | null = null,
): LogRecord {
  return {
    timestamp_s: timestampS,
    step: step.step,
    scene: step.scene,
    fov_deg: step.fov_deg,
    phosphenes: step.phosphenes,
    event_type: eventType,
    object_class: objectClass,
    count,
  };
}

/** Serialize records as JSONL, one object per line, trailing newline. */
export function toJsonl(records: LogRecord[]): string {
  return records.map((r) => JSON.stringify(r) + "\n").join("");
}
