import { describe, expect, it } from "vitest";

import { frameToRgba } from "../src/render.js";

describe("frameToRgba", () => {
  it("maps gray bytes onto the green channel", () => {
    const rgba = frameToRgba(new Uint8Array([0, 128, 255]), 3, 1);
    expect(Array.from(rgba)).toEqual([
      0, 0, 0, 255,
      0, 128, 0, 255,
      0, 255, 0, 255,
    ]);
  });

  it("produces one RGBA quad per pixel", () => {
    const rgba = frameToRgba(new Uint8Array(960 * 1080), 960, 1080);
    expect(rgba).toHaveLength(960 * 1080 * 4);
    expect(rgba).toBeInstanceOf(Uint8ClampedArray);
  });

  it("rejects a frame whose size disagrees with its dimensions", () => {
    expect(() => frameToRgba(new Uint8Array(5), 2, 2)).toThrow(/expected 2x2/);
  });
});
