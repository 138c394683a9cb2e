import { describe, expect, it } from "vitest";

import { FoldedLayer } from "../src/bnn";
import { bnnDocument, encodeDataset } from "../src/modelfile";

describe("model document", () => {
  it("encodes weights as 0/1 bit-strings with the (w+1)/2 map", () => {
    const layers: FoldedLayer[] = [
      {
        rows: 2, cols: 3,
        weights: new Float64Array([1, -1, 1, -1, 1, -1]),
        biases: new Float64Array([0.5, -1.25, 0]),
      },
    ];
    const doc = bnnDocument(layers, { trainer_seed: 3 }) as any;
    expect(doc.format_version).toBe(1);
    expect(doc.kind).toBe("bnn");
    expect(doc.topology).toEqual([2, 3]);
    expect(doc.layers[0].weights).toEqual(["101", "010"]);
    expect(doc.layers[0].biases).toEqual([0.5, -1.25, 0]);
  });
});

describe("dataset encoding", () => {
  it("writes the documented byte layout", () => {
    const bits = Uint8Array.from([1, 0, 1, 0, 0, 0, 0, 0, 0, 1]);
    const buf = encodeDataset(bits, Uint8Array.from([7]), 1, 10);
    expect(buf.length).toBe(12 + 2 + 1);
    expect(buf.toString("ascii", 0, 4)).toBe("ESD1");
    expect(buf.readUInt32LE(4)).toBe(1);
    expect(buf.readUInt32LE(8)).toBe(10);
    expect(buf[12]).toBe(0b10100000); // bits 0..7, MSB-first
    expect(buf[13]).toBe(0b01000000); // bits 8..9 padded
    expect(buf[14]).toBe(7);
  });
});
