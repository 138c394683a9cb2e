/** MNIST IDX file parsing, with transparent .gz decompression. */

import * as fs from "fs";
import * as zlib from "zlib";

export interface IdxImages {
  count: number;
  rows: number;
  cols: number;
  /** count * rows * cols raw pixel bytes */
  pixels: Uint8Array;
}

const IMAGES_MAGIC = 0x00000803;
const LABELS_MAGIC = 0x00000801;

function readMaybeGz(path: string): Buffer {
  const raw = fs.readFileSync(path);
  return path.endsWith(".gz") ? zlib.gunzipSync(raw) : raw;
}

export function readIdxImages(path: string): IdxImages {
  const buf = readMaybeGz(path);
  if (buf.length < 16) throw new Error(`${path}: truncated IDX header`);
  const magic = buf.readUInt32BE(0);
  if (magic !== IMAGES_MAGIC) {
    throw new Error(`${path}: bad IDX image magic 0x${magic.toString(16)}`);
  }
  const count = buf.readUInt32BE(4);
  const rows = buf.readUInt32BE(8);
  const cols = buf.readUInt32BE(12);
  const expected = 16 + count * rows * cols;
  if (buf.length !== expected) {
    throw new Error(`${path}: expected ${expected} bytes, got ${buf.length}`);
  }
  return { count, rows, cols, pixels: new Uint8Array(buf.buffer, buf.byteOffset + 16, count * rows * cols) };
}

export function readIdxLabels(path: string): Uint8Array {
  const buf = readMaybeGz(path);
  if (buf.length < 8) throw new Error(`${path}: truncated IDX header`);
  const magic = buf.readUInt32BE(0);
  if (magic !== LABELS_MAGIC) {
    throw new Error(`${path}: bad IDX label magic 0x${magic.toString(16)}`);
  }
  const count = buf.readUInt32BE(4);
  if (buf.length !== 8 + count) {
    throw new Error(`${path}: expected ${8 + count} bytes, got ${buf.length}`);
  }
  return new Uint8Array(buf.buffer, buf.byteOffset + 8, count);
}
