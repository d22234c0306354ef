/**
 * Mouse-drag head orientation: yaw/pitch accumulate from drag deltas and
 * compose into a scalar-first quaternion matching the renderer's
 * convention (yaw about the vertical axis, then pitch; roll fixed 0).
 */

import type { Quaternion } from "./protocol.js";

const DEG = Math.PI / 180;

export const PITCH_LIMIT_DEG = 85;

export function quatMultiply(p: Quaternion, q: Quaternion): Quaternion {
  const [pw, px, py, pz] = p;
  const [qw, qx, qy, qz] = q;
  return [
    pw * qw - px * qx - py * qy - pz * qz,
    pw * qx + px * qw + py * qz - pz * qy,
    pw * qy - px * qz + py * qw + pz * qx,
    pw * qz + px * qy - py * qx + pz * qw,
  ];
}

export function yawPitchToQuaternion(yawDeg: number, pitchDeg: number): Quaternion {
  const hy = (yawDeg * DEG) / 2;
  const hp = (pitchDeg * DEG) / 2;
  const qYaw: Quaternion = [Math.cos(hy), 0, 0, Math.sin(hy)];
  const qPitch: Quaternion = [Math.cos(hp), 0, Math.sin(hp), 0];
  return quatMultiply(qYaw, qPitch);
}

export class Orientation {
  yawDeg = 0;
  pitchDeg = 0;

  /** Degrees of yaw per pixel; the default calibration maps one full
   *  canvas width of drag to a complete 360 degree turn. */
  constructor(private readonly canvasWidth: number, private readonly degPerPx = 360 / canvasWidth) {}

  applyDrag(dxPx: number, dyPx: number): void {
    this.yawDeg += dxPx * this.degPerPx;
    // dragging down looks down: positive dy lowers pitch
    this.pitchDeg -= dyPx * this.degPerPx;
    if (this.pitchDeg > PITCH_LIMIT_DEG) this.pitchDeg = PITCH_LIMIT_DEG;
    if (this.pitchDeg < -PITCH_LIMIT_DEG) this.pitchDeg = -PITCH_LIMIT_DEG;
  }

  reset(): void {
    this.yawDeg = 0;
    this.pitchDeg = 0;
  }

  quaternion(): Quaternion {
    return yawPitchToQuaternion(this.yawDeg, this.pitchDeg);
  }
}
