/**
 * Grayscale frame to RGBA conversion. Phosphenes render green on black,
 * the usual look of simulated prosthetic vision displays. Kept DOM-free:
 * the caller wraps the returned bytes in an ImageData.
 */

export function frameToRgba(pixels: Uint8Array, width: number, height: number): Uint8ClampedArray<ArrayBuffer> {
  if (pixels.length !== width * height) {
    throw new Error(`frame is ${pixels.length} bytes, expected ${width}x${height}`);
  }
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < pixels.length; i++) {
    const v = pixels[i] ?? 0;
    rgba[i * 4] = 0;
    rgba[i * 4 + 1] = v;
    rgba[i * 4 + 2] = 0;
    rgba[i * 4 + 3] = 255;
  }
  return rgba;
}
