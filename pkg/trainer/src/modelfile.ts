/** Writers for the simulator's interchange formats.
 *
 * Model: one JSON document, kind "bnn", weights as row-major 0/1
 * bit-strings (bit b encodes the +-1 weight 2b-1), per-neuron float
 * biases.  Dataset: flat binary, "ESD1" magic + u32 count + u32 width
 * (little-endian), then per sample ceil(width/8) packed-bit bytes
 * (MSB-first) + 1 label byte.
 */

import * as fs from "fs";

import { FoldedLayer } from "./bnn";

export interface ModelMetadata {
  [key: string]: string | number;
}

export function bnnDocument(layers: FoldedLayer[], metadata: ModelMetadata): object {
  const topology = [layers[0].rows, ...layers.map((l) => l.cols)];
  return {
    format_version: 1,
    kind: "bnn",
    topology,
    metadata,
    layers: layers.map((layer) => {
      const rows: string[] = [];
      for (let k = 0; k < layer.rows; k++) {
        const chars = new Array<string>(layer.cols);
        for (let j = 0; j < layer.cols; j++) {
          chars[j] = layer.weights[k * layer.cols + j] > 0 ? "1" : "0";
        }
        rows.push(chars.join(""));
      }
      return {
        rows: layer.rows,
        cols: layer.cols,
        weights: rows,
        biases: Array.from(layer.biases),
      };
    }),
  };
}

export function writeBnnModel(path: string, layers: FoldedLayer[],
                              metadata: ModelMetadata): void {
  fs.writeFileSync(path, JSON.stringify(bnnDocument(layers, metadata), null, 1) + "\n");
}

export function encodeDataset(bits: Uint8Array, labels: Uint8Array,
                              count: number, width: number): Buffer {
  const packedWidth = Math.ceil(width / 8);
  const buf = Buffer.alloc(12 + count * (packedWidth + 1));
  buf.write("ESD1", 0, "ascii");
  buf.writeUInt32LE(count, 4);
  buf.writeUInt32LE(width, 8);
  let off = 12;
  for (let s = 0; s < count; s++) {
    const base = s * width;
    for (let byte = 0; byte < packedWidth; byte++) {
      let acc = 0;
      const upto = Math.min(8, width - byte * 8);
      for (let b = 0; b < upto; b++) {
        acc |= bits[base + byte * 8 + b] << (7 - b);
      }
      buf[off + byte] = acc;
    }
    buf[off + packedWidth] = labels[s];
    off += packedWidth + 1;
  }
  return buf;
}

export function writeDataset(path: string, bits: Uint8Array, labels: Uint8Array,
                             count: number, width: number): void {
  fs.writeFileSync(path, encodeDataset(bits, labels, count, width));
}
