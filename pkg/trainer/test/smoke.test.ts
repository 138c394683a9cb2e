import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { describe, expect, it } from "vitest";

import { writeBnnModel } from "../src/modelfile";
import { train } from "../src/train";

const DATA_DIR = path.join(__dirname, "..", "..", "data", "mnist");

describe("training smoke runs on real MNIST", () => {
  it("a fixed seed reproduces the exported file byte for byte", () => {
    const opts = { seed: 5, epochs: 1, batchSize: 100, dataDir: DATA_DIR,
                   limitTrain: 1000, quiet: true };
    const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "det-"));
    const paths = [path.join(tmp, "a.json"), path.join(tmp, "b.json")];
    const accs: number[] = [];
    for (const p of paths) {
      const res = train(opts);
      accs.push(res.accuracy);
      writeBnnModel(p, res.folded, { trainer_seed: 5, recorded_accuracy: res.accuracy });
    }
    expect(accs[0]).toBe(accs[1]);
    expect(fs.readFileSync(paths[0])).toEqual(fs.readFileSync(paths[1]));

    const other = train({ ...opts, seed: 6 });
    expect(other.accuracy).not.toBe(accs[0]);
  });

  it("one full epoch exceeds 80% test accuracy", () => {
    const res = train({ seed: 0, epochs: 1, batchSize: 100, dataDir: DATA_DIR,
                        quiet: true });
    expect(res.accuracy).toBeGreaterThan(0.8);
  });
});
