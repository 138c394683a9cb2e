/** Input preprocessing, identical convention to the simulator.
 *
 * A 2x2 pixel block is removed from each corner of the 28x28 image
 * (784 -> 768 inputs), remaining pixels are flattened row-major, and a
 * pixel spikes when its normalized value exceeds 0.5 (raw byte >= 128).
 * The kept-pixel index map is pinned by a shared golden file; the
 * simulator must produce the same 768 indices.
 */

export const IMAGE_SIDE = 28;
export const INPUT_BITS = 768;

const BORDER = new Set([0, 1, IMAGE_SIDE - 2, IMAGE_SIDE - 1]);

/** Row-major flat indices (into the 784-pixel image) of kept pixels. */
export function keptPixelIndices(): number[] {
  const kept: number[] = [];
  for (let r = 0; r < IMAGE_SIDE; r++) {
    for (let c = 0; c < IMAGE_SIDE; c++) {
      if (!(BORDER.has(r) && BORDER.has(c))) kept.push(r * IMAGE_SIDE + c);
    }
  }
  return kept;
}

const KEPT = keptPixelIndices();

/** One raw 784-byte image -> 768 spike bits. */
export function preprocessImage(pixels: Uint8Array, offset = 0): Uint8Array {
  const out = new Uint8Array(INPUT_BITS);
  for (let i = 0; i < INPUT_BITS; i++) {
    // byte p spikes iff p/255 > 0.5, i.e. p >= 128
    out[i] = pixels[offset + KEPT[i]] >= 128 ? 1 : 0;
  }
  return out;
}

/** All images of an IDX set -> (count x 768) bit matrix. */
export function preprocessAll(pixels: Uint8Array, count: number): Uint8Array {
  const out = new Uint8Array(count * INPUT_BITS);
  for (let s = 0; s < count; s++) {
    const bits = preprocessImage(pixels, s * IMAGE_SIDE * IMAGE_SIDE);
    out.set(bits, s * INPUT_BITS);
  }
  return out;
}
